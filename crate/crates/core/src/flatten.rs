//! Multi-factor flattenings, polarization and the merge map.
//!
//! A flattening contracts each factor `S^{d_i}` against differential
//! operators of order `e_i`, using the same factorial convention as
//! [`crate::apolarity::catalecticant`]. Its rank bounds the cactus and
//! border rank, hence the partially symmetric rank, from below.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apolarity::{contraction_weight, sylvester_rank};
use crate::error::{Error, Result};
use crate::exactla::{rank, Matrix};
use crate::forms::{
    binomial, multi_indices, strides, tensor_product, tensor_size, BinaryForm, PSTensor,
};
use crate::scalars::{Rational, Scalar};

/// Exponents `(e_1, …, e_k)` of a flattening of a tensor of multidegree
/// `(d_1, …, d_k)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlatteningSpec {
    pub multidegree: Vec<usize>,
    pub exponents: Vec<usize>,
}

impl FlatteningSpec {
    pub fn new(multidegree: Vec<usize>, exponents: Vec<usize>) -> Result<Self> {
        if multidegree.len() != exponents.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} exponents for multidegree {multidegree:?}",
                exponents.len()
            )));
        }
        if let Some(i) = (0..exponents.len()).find(|&i| exponents[i] > multidegree[i]) {
            return Err(Error::InvalidArgument(format!(
                "exponent {} exceeds degree {} in factor {i}",
                exponents[i], multidegree[i]
            )));
        }
        Ok(FlatteningSpec {
            multidegree,
            exponents,
        })
    }

    /// Shape of the matrix: `(Π (d_i - e_i + 1), Π (e_i + 1))`.
    pub fn shape(&self) -> (usize, usize) {
        let rows = self
            .multidegree
            .iter()
            .zip(&self.exponents)
            .map(|(d, e)| d - e + 1)
            .product();
        (rows, tensor_size(&self.exponents))
    }

    /// The spec whose matrix is the transpose of this one.
    pub fn complement(&self) -> Self {
        FlatteningSpec {
            multidegree: self.multidegree.clone(),
            exponents: self
                .multidegree
                .iter()
                .zip(&self.exponents)
                .map(|(d, e)| d - e)
                .collect(),
        }
    }

    /// Concatenation, for flattenings of a tensor product.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.multidegree.extend_from_slice(&other.multidegree);
        out.exponents.extend_from_slice(&other.exponents);
        out
    }
}

/// How a lower bound was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerBoundMethod {
    /// Exact rank of a flattening matrix; it bounds the cactus and border
    /// rank and hence the rank.
    Flattening {
        spec: FlatteningSpec,
        rows: usize,
        cols: usize,
    },
    /// Iterated merge maps collapse the tensor to a nonzero multiple of a
    /// polarized W-state of degree `merged_degree`.
    MergeChain {
        positions: Vec<usize>,
        merged_parts: Vec<usize>,
        merged_degree: usize,
        scalar: Rational,
    },
    /// Cited rank fact, not recomputed.
    Known { citation: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub value: usize,
    pub method: LowerBoundMethod,
}

impl LowerBoundCertificate {
    pub fn method_name(&self) -> &'static str {
        match self.method {
            LowerBoundMethod::Flattening { .. } => "flattening",
            LowerBoundMethod::MergeChain { .. } => "merge_chain",
            LowerBoundMethod::Known { .. } => "known",
        }
    }
}

/// Matrix of the contraction `⊗S^{e_i}(C²)* → ⊗S^{d_i-e_i}C²`. Rows and
/// columns are indexed row-major by the `y`-exponents of each factor.
pub fn flattening_matrix<F: Scalar>(t: &PSTensor<F>, spec: &FlatteningSpec) -> Result<Matrix<F>> {
    if t.multidegree() != spec.multidegree.as_slice() {
        return Err(Error::MultidegreeMismatch {
            expected: t.multidegree().to_vec(),
            found: spec.multidegree.clone(),
        });
    }
    let ds = &spec.multidegree;
    let es = &spec.exponents;
    let row_bounds: Vec<usize> = ds.iter().zip(es).map(|(d, e)| d - e).collect();
    let (rows, cols) = spec.shape();
    let mut m = Matrix::zeros(rows, cols);
    let mut index = vec![0usize; ds.len()];
    for (r, u) in multi_indices(&row_bounds).enumerate() {
        for (c, i) in multi_indices(es).enumerate() {
            for f in 0..ds.len() {
                index[f] = u[f] + i[f];
            }
            let coeff = t.get(&index);
            if coeff.is_zero() {
                continue;
            }
            let weight: i64 = (0..ds.len())
                .map(|f| contraction_weight(ds[f], es[f], u[f], i[f]))
                .product();
            m.set(r, c, coeff.clone() * F::from_i64(weight));
        }
    }
    Ok(m)
}

/// Best flattening lower bound over every exponent tuple.
pub fn cactus_lower_bound<F: Scalar>(t: &PSTensor<F>) -> Result<LowerBoundCertificate> {
    cactus_lower_bound_capped(t, None)
}

/// As [`cactus_lower_bound`], but only the `max_specs` specs with the
/// largest matrices are examined when a cap is given.
///
/// A spec and its complement give transposed matrices, so only the
/// lexicographically smaller of each pair is evaluated. Specs are visited in
/// decreasing order of `min(rows, cols)` and the scan stops once that size
/// drops below the best rank found. The result is the maximal rank with the
/// lexicographically least spec attaining it.
pub fn cactus_lower_bound_capped<F: Scalar>(
    t: &PSTensor<F>,
    max_specs: Option<usize>,
) -> Result<LowerBoundCertificate> {
    if t.is_zero() {
        return Err(Error::ZeroInput("tensor"));
    }
    let ds = t.multidegree().to_vec();
    let mut specs: Vec<(usize, FlatteningSpec)> = multi_indices(&ds)
        .map(|e| FlatteningSpec {
            multidegree: ds.clone(),
            exponents: e,
        })
        .filter(|s| s.exponents <= s.complement().exponents)
        .map(|s| {
            let (r, c) = s.shape();
            (r.min(c), s)
        })
        .collect();
    specs.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    if let Some(cap) = max_specs {
        specs.truncate(cap.max(1));
    }

    let mut best: Option<(usize, FlatteningSpec)> = None;
    let mut start = 0;
    while start < specs.len() {
        let size = specs[start].0;
        if best.as_ref().is_some_and(|(v, _)| *v > size) {
            break;
        }
        let end = specs[start..]
            .iter()
            .position(|(s, _)| *s != size)
            .map_or(specs.len(), |p| start + p);
        let ranks: Vec<Result<usize>> = specs[start..end]
            .par_iter()
            .map(|(_, spec)| flattening_matrix(t, spec).map(|m| rank(&m)))
            .collect();
        for ((_, spec), r) in specs[start..end].iter().zip(ranks) {
            let r = r?;
            let better = match &best {
                None => true,
                Some((v, s)) => r > *v || (r == *v && spec < s),
            };
            if better {
                best = Some((r, spec.clone()));
            }
        }
        start = end;
    }
    let (value, spec) = best.expect("at least one spec");
    let (rows, cols) = spec.shape();
    Ok(LowerBoundCertificate {
        value,
        method: LowerBoundMethod::Flattening { spec, rows, cols },
    })
}

/// Image of `f` under `S^D ↪ S^{a_1} ⊗ … ⊗ S^{a_m}`. The coefficient at
/// `(j_1, …, j_m)` is `c_{Σj} · Π C(a_i, j_i) / C(D, Σj)`.
pub fn polarize<F: Scalar>(f: &BinaryForm<F>, parts: &[usize]) -> Result<PSTensor<F>> {
    let total: usize = parts.iter().sum();
    if total != f.degree() {
        return Err(Error::InvalidArgument(format!(
            "parts {parts:?} sum to {total}, form has degree {}",
            f.degree()
        )));
    }
    let mut out = PSTensor::<F>::zeros(parts)?;
    let d = f.degree();
    let coeffs: Vec<F> = multi_indices(parts)
        .map(|j| {
            let s: usize = j.iter().sum();
            let c = f.coeff(s);
            if c.is_zero() {
                return F::zero();
            }
            let num: i64 = j
                .iter()
                .zip(parts)
                .map(|(&ji, &a)| binomial(a, ji))
                .product();
            c.clone() * F::from_rational(&Rational::new(num, binomial(d, s)))
        })
        .collect();
    for (slot, c) in out.coeffs_mut().iter_mut().zip(coeffs) {
        *slot = c;
    }
    Ok(out)
}

/// The merge map on factors `i` and `i + 1` (0-based).
///
/// Factor `i` is polarized as `(d_i - 1, 1)`, factor `i + 1` as
/// `(1, d_{i+1} - 1)`, and the two middle linear slots are glued by
/// `φ(ℓ₁ ⊗ ℓ₂) = (∂_x ℓ₁ ∂_y ℓ₂ + ∂_y ℓ₁ ∂_x ℓ₂) x + ∂_y ℓ₁ ∂_y ℓ₂ y`.
/// The result has multidegree `(…, d_i - 1, 1, d_{i+1} - 1, …)` with
/// degree-zero slots removed. Rank-one tensors go to rank-one tensors or
/// zero.
pub fn merge_map<F: Scalar>(t: &PSTensor<F>, i: usize) -> Result<PSTensor<F>> {
    let ds = t.multidegree();
    if i + 1 >= ds.len() {
        return Err(Error::InvalidArgument(format!(
            "merge position {i} needs factors {i} and {} in a tensor of order {}",
            i + 1,
            ds.len()
        )));
    }
    let (d1, d2) = (ds[i], ds[i + 1]);
    let mut full: Vec<usize> = ds[..i].to_vec();
    full.extend([d1 - 1, 1, d2 - 1]);
    full.extend_from_slice(&ds[i + 2..]);
    let kept: Vec<usize> = (0..full.len()).filter(|&s| full[s] > 0).collect();
    let out_degree: Vec<usize> = kept.iter().map(|&s| full[s]).collect();
    let mut out = PSTensor::<F>::zeros(&out_degree)?;
    let out_strides = strides(&out_degree);

    let mut target = vec![0usize; full.len()];
    for (flat, j) in multi_indices(ds).enumerate() {
        let c = &t.coeffs()[flat];
        if c.is_zero() {
            continue;
        }
        let (j1, j2) = (j[i], j[i + 1]);
        target[..i].copy_from_slice(&j[..i]);
        target[i + 3..].copy_from_slice(&j[i + 2..]);
        for s in 0..=1usize.min(j1) {
            let p = j1 - s;
            if p > d1 - 1 {
                continue;
            }
            for s2 in 0..=1usize.min(j2) {
                let q = j2 - s2;
                if q > d2 - 1 {
                    continue;
                }
                let m = match (s, s2) {
                    (0, 0) => continue,
                    (1, 1) => 1,
                    _ => 0,
                };
                // Polarization weights C(d-1, p)/C(d, j) for each split slot.
                let w = Rational::new(
                    binomial(d1 - 1, p) * binomial(d2 - 1, q),
                    binomial(d1, j1) * binomial(d2, j2),
                );
                target[i] = p;
                target[i + 1] = m;
                target[i + 2] = q;
                let pos: usize = kept
                    .iter()
                    .zip(&out_strides)
                    .map(|(&slot, st)| target[slot] * st)
                    .sum();
                let entry = &mut out.coeffs_mut()[pos];
                *entry = entry.clone() + c.clone() * F::from_rational(&w);
            }
        }
    }
    Ok(out)
}

/// `Σ d_i - k + 1` for `⊗ W_{d_i}`, certified by performing the merges.
///
/// After each merge the tensor must be a nonzero multiple of the
/// polarization of `x^{D-1}y` along the current parts; the final degree `D`
/// is then the Waring rank of `x^{D-1}y`, which equals its tensor rank.
pub fn merge_lower_bound(multidegree: &[usize]) -> Result<LowerBoundCertificate> {
    let t = crate::constructions::w_product::<Rational>(multidegree)?;
    let mut current = t;
    let mut parts = vec![multidegree[0]];
    let mut positions = Vec::new();
    let mut scalar = Rational::from(1);
    for (step, &next) in multidegree[1..].iter().enumerate() {
        let pos = parts.len() - 1;
        current = merge_map(&current, pos)?;
        positions.push(pos);
        let last = parts.pop().expect("nonempty");
        parts.extend([last - 1, 1, next - 1]);
        parts.retain(|&a| a > 0);
        let degree: usize = parts.iter().sum();
        let mut reference = polarize(&crate::constructions::w_state::<Rational>(degree)?, &parts)?;
        let rest = &multidegree[step + 2..];
        if !rest.is_empty() {
            reference = tensor_product(&reference, &crate::constructions::w_product(rest)?);
        }
        scalar = proportionality(&current, &reference).ok_or_else(|| {
            Error::IdentityCheck(format!(
                "merge chain at {positions:?} is not a multiple of the polarized W-state of degree {degree}"
            ))
        })?;
    }
    let degree: usize = parts.iter().sum();
    let value = sylvester_rank(&crate::constructions::w_state::<Rational>(degree)?)?;
    Ok(LowerBoundCertificate {
        value,
        method: LowerBoundMethod::MergeChain {
            positions,
            merged_parts: parts,
            merged_degree: degree,
            scalar,
        },
    })
}

/// The nonzero `s` with `a = s·b`, if there is one.
pub fn proportionality<F: Scalar>(a: &PSTensor<F>, b: &PSTensor<F>) -> Option<F> {
    if a.multidegree() != b.multidegree() || b.is_zero() {
        return None;
    }
    let pivot = b.coeffs().iter().position(|c| !c.is_zero())?;
    let s = a.coeffs()[pivot].clone() / b.coeffs()[pivot].clone();
    if s.is_zero() {
        return None;
    }
    (a == &b.scale(&s)).then_some(s)
}
