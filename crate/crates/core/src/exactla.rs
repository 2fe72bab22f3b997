//! Dense Gauss–Jordan elimination.
//!
//! Over exact fields the pivot is the first nonzero entry scanning down the
//! current column, so every result (rank, kernel basis, particular solution)
//! is reproducible. For [`ApproxComplex`](crate::scalars::ApproxComplex) the
//! largest entry is used and entries below a relative threshold count as
//! zero.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalars::Scalar;

/// Relative threshold under which approximate pivots are treated as zero.
const APPROX_PIVOT_EPS: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    entries: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<F>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Matrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let n = rows.len();
        Self::from_entries(n, cols, rows.into_iter().flatten().collect())
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| F::from_i64(v)).collect())
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors. `len` fixes the row
    /// count when the list is empty.
    pub fn from_columns(columns: &[Vec<F>], len: usize) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.len() != len) {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} where {len} was expected",
                bad.len()
            )));
        }
        let mut m = Self::zeros(len, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[F] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &F {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: F) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[F] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<F> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[F]) -> Result<Vec<F>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// `[self | column]`.
    pub fn augment(&self, column: &[F]) -> Result<Self> {
        if column.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot append a column of length {} to {} rows",
                column.len(),
                self.rows
            )));
        }
        let mut m = Self::zeros(self.rows, self.cols + 1);
        for (r, tail) in column.iter().enumerate() {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
            m.set(r, self.cols, tail.clone());
        }
        Ok(m)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }
}

impl<F: Scalar> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

fn negligible<F: Scalar>(v: &F, scale: f64) -> bool {
    if F::is_exact() {
        v.is_zero()
    } else {
        v.magnitude() <= APPROX_PIVOT_EPS * scale
    }
}

/// Reduced row echelon form and the strictly increasing pivot columns.
pub fn rref<F: Scalar>(m: &Matrix<F>) -> (Matrix<F>, Vec<usize>) {
    let mut rows: Vec<Vec<F>> = (0..m.rows).map(|r| m.row(r).to_vec()).collect();
    let scale = m.entries.iter().map(Scalar::magnitude).fold(0.0, f64::max);
    let mut pivots = Vec::new();
    let mut next_row = 0;

    for col in 0..m.cols {
        if next_row == m.rows {
            break;
        }
        let candidate = if F::is_exact() {
            (next_row..m.rows).find(|&r| !rows[r][col].is_zero())
        } else {
            (next_row..m.rows)
                .filter(|&r| !negligible(&rows[r][col], scale))
                .max_by(|&a, &b| {
                    rows[a][col]
                        .magnitude()
                        .total_cmp(&rows[b][col].magnitude())
                })
        };
        let Some(p) = candidate else {
            if !F::is_exact() {
                for row in rows.iter_mut().skip(next_row) {
                    row[col] = F::zero();
                }
            }
            continue;
        };
        rows.swap(next_row, p);

        let inv = F::one() / rows[next_row][col].clone();
        for v in rows[next_row][col..].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
            }
        }
        let pivot_row = rows[next_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == next_row || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (c, pv) in pivot_row.iter().enumerate().skip(col) {
                if !pv.is_zero() {
                    row[c] = row[c].clone() - factor.clone() * pv.clone();
                }
            }
            row[col] = F::zero();
        }
        pivots.push(col);
        next_row += 1;
    }

    let entries = rows.into_iter().flatten().collect();
    (
        Matrix {
            rows: m.rows,
            cols: m.cols,
            entries,
        },
        pivots,
    )
}

pub fn rank<F: Scalar>(m: &Matrix<F>) -> usize {
    rref(m).1.len()
}

/// Basis of the right kernel, one vector per free column of the rref: the
/// free variable set to 1, the other free variables 0.
pub fn kernel<F: Scalar>(m: &Matrix<F>) -> Vec<Vec<F>> {
    let (r, pivots) = rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..m.cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![F::zero(); m.cols];
            v[free] = F::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(row, free).clone();
            }
            v
        })
        .collect()
}

/// One solution of `A x = b` with free variables set to zero, or `None` if
/// the system is inconsistent.
pub fn solve<F: Scalar>(a: &Matrix<F>, b: &[F]) -> Result<Option<Vec<F>>> {
    let aug = a.augment(b)?;
    let (r, pivots) = rref(&aug);
    if pivots.last() == Some(&a.cols) {
        return Ok(None);
    }
    let mut x = vec![F::zero(); a.cols];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = r.get(row, a.cols).clone();
    }
    Ok(Some(x))
}

/// Whether `target` lies in the span of `vectors`.
pub fn in_span<F: Scalar>(vectors: &[Vec<F>], target: &[F]) -> Result<bool> {
    let m = Matrix::from_columns(vectors, target.len())?;
    Ok(solve(&m, target)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{ApproxComplex, GaussianRational, Rational};
    use proptest::prelude::*;

    type Q = Rational;

    fn qv(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| Q::from(x)).collect()
    }

    #[test]
    fn rref_examples() {
        let id = Matrix::<Q>::identity(3);
        let (r, p) = rref(&id);
        assert_eq!(r, id);
        assert_eq!(p, vec![0, 1, 2]);

        let z = Matrix::<Q>::zeros(2, 3);
        let (r, p) = rref(&z);
        assert_eq!(r, z);
        assert!(p.is_empty());

        let m = Matrix::<Q>::from_i64_rows(&[&[1, 2], &[2, 4]]).unwrap();
        let (r, p) = rref(&m);
        assert_eq!(r, Matrix::from_i64_rows(&[&[1, 2], &[0, 0]]).unwrap());
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Matrix::<Q>::identity(5)), 5);
        let u = qv(&[1, -2, 3]);
        let v = qv(&[4, 0, 5, 7]);
        let outer: Vec<Vec<Q>> = u
            .iter()
            .map(|a| v.iter().map(|b| a.clone() * b.clone()).collect())
            .collect();
        assert_eq!(rank(&Matrix::from_rows(outer).unwrap()), 1);
    }

    #[test]
    fn solve_examples() {
        let b = qv(&[3, -1, 7]);
        assert_eq!(solve(&Matrix::identity(3), &b).unwrap(), Some(b));

        let a = Matrix::<Q>::from_i64_rows(&[&[1, 1]]).unwrap();
        assert_eq!(solve(&a, &qv(&[2])).unwrap(), Some(qv(&[2, 0])));

        let a = Matrix::<Q>::from_i64_rows(&[&[1, 1], &[1, 1]]).unwrap();
        assert_eq!(solve(&a, &qv(&[1, 2])).unwrap(), None);

        assert!(solve(&a, &qv(&[1])).is_err());
    }

    #[test]
    fn in_span_examples() {
        let v = vec![qv(&[1, 2, 3]), qv(&[0, 1, 0])];
        assert!(in_span(&v, &qv(&[1, 2, 3])).unwrap());
        assert!(in_span(&v, &qv(&[2, 5, 6])).unwrap());
        assert!(!in_span(&v, &qv(&[0, 0, 1])).unwrap());
        assert!(!in_span::<Q>(&[], &qv(&[1, 0])).unwrap());
        assert!(in_span::<Q>(&[], &qv(&[0, 0])).unwrap());
        assert!(in_span(&v, &qv(&[1, 2])).is_err());
    }

    #[test]
    fn gaussian_elimination() {
        let i = GaussianRational::i();
        let one = GaussianRational::from(Q::from(1));
        // [[1, i], [i, -1]] has rank 1.
        let m = Matrix::from_rows(vec![
            vec![one.clone(), i.clone()],
            vec![i.clone(), -one.clone()],
        ])
        .unwrap();
        assert_eq!(rank(&m), 1);
        let k = kernel(&m);
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).unwrap().iter().all(Scalar::is_zero));
    }

    #[test]
    fn approximate_rank_ignores_noise() {
        let c = |x: f64| ApproxComplex::new(x, 0.0);
        let m =
            Matrix::from_rows(vec![vec![c(1.0), c(2.0)], vec![c(2.0), c(4.0 + 1e-14)]]).unwrap();
        assert_eq!(rank(&m), 1);
        let m = Matrix::from_rows(vec![vec![c(1.0), c(2.0)], vec![c(2.0), c(5.0)]]).unwrap();
        let x = solve(&m, &[c(1.0), c(0.0)]).unwrap().unwrap();
        assert!(x[0].approx_eq(&c(5.0), 1e-12));
        assert!(x[1].approx_eq(&c(-2.0), 1e-12));
    }

    fn small_matrix() -> impl Strategy<Value = Matrix<Q>> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..4, r * c).prop_map(move |v| {
                Matrix::from_entries(r, c, v.into_iter().map(Q::from).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn rank_of_transpose(m in small_matrix()) {
            prop_assert_eq!(rank(&m), rank(&m.transpose()));
        }

        #[test]
        fn kernel_vectors_are_annihilated(m in small_matrix()) {
            let k = kernel(&m);
            prop_assert_eq!(k.len(), m.cols() - rank(&m));
            for v in &k {
                prop_assert!(m.mul_vec(v).unwrap().iter().all(Scalar::is_zero));
            }
        }

        #[test]
        fn solutions_satisfy_system(m in small_matrix(), seed in proptest::collection::vec(-3i64..4, 6)) {
            let b: Vec<Q> = seed.iter().take(m.rows()).map(|&v| Q::from(v)).collect();
            if b.len() == m.rows() {
                if let Some(x) = solve(&m, &b).unwrap() {
                    prop_assert_eq!(m.mul_vec(&x).unwrap(), b);
                }
            }
        }

        #[test]
        fn pivots_strictly_increase(m in small_matrix()) {
            let (_, p) = rref(&m);
            prop_assert!(p.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
