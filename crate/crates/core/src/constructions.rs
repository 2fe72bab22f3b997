//! Explicit upper-bound constructions for products of W-states and the
//! closed-form bounds that accompany them.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apolarity::sylvester_decompose;
use crate::error::{Error, Result};
use crate::exactla::{in_span, solve, Matrix};
use crate::forms::{
    expand, expand_rank_one, AnyDecomposition, BinaryForm, Decomposition, FactorDecomposition,
    FactorTerm, LinearForm, PSTensor, RankOneTerm,
};
use crate::scalars::{FieldTag, Rational, Scalar};

/// `W_d = x^{d-1} y`.
pub fn w_state<F: Scalar>(d: usize) -> Result<BinaryForm<F>> {
    if d == 0 {
        return Err(Error::InvalidArgument(
            "W-state degree must be at least 1".into(),
        ));
    }
    Ok(BinaryForm::monomial(d, 1))
}

/// `W_{d_1} ⊗ … ⊗ W_{d_k}`: a single 1 at `(1, …, 1)`.
pub fn w_product<F: Scalar>(multidegree: &[usize]) -> Result<PSTensor<F>> {
    if multidegree.is_empty() {
        return Err(Error::InvalidArgument("empty multidegree".into()));
    }
    let factors = multidegree
        .iter()
        .map(|&d| w_state(d))
        .collect::<Result<Vec<_>>>()?;
    PSTensor::from_factors(&factors)
}

/// An exact `d`-term Waring decomposition of `W_d` over ℚ.
///
/// A power sum of `(x + t_i y)^d` contains no `x^d` term only through the
/// weights, and it reaches `x^{d-1}y` alone exactly when `Σ 1/t_i = 0`. The
/// nodes are `t_i = i` for `i < d` and `t_d = -1/Σ_{i<d} 1/i`.
pub fn w_state_decomposition(d: usize) -> Result<Decomposition<Rational>> {
    let target = w_state::<Rational>(d)?;
    if d == 1 {
        return Decomposition::new(
            vec![1],
            vec![RankOneTerm::new(Rational::from(1), vec![LinearForm::y()])],
        );
    }
    let mut nodes: Vec<Rational> = (1..d as i64).map(Rational::from).collect();
    let harmonic = nodes
        .iter()
        .fold(Rational::from(0), |acc, t| acc + t.recip());
    nodes.push(-harmonic.recip());
    let lines: Vec<LinearForm<Rational>> = nodes
        .into_iter()
        .map(|t| LinearForm::new(Rational::from(1), t))
        .collect();
    let columns: Vec<Vec<Rational>> = lines.iter().map(|l| l.power(d).into_coeffs()).collect();
    let weights = solve(&Matrix::from_columns(&columns, d + 1)?, target.coeffs())?
        .ok_or_else(|| Error::Inconsistent(format!("W_{d} is not in the span of its nodes")))?;
    Decomposition::new(
        vec![d],
        weights
            .into_iter()
            .zip(lines)
            .map(|(w, l)| RankOneTerm::new(w, vec![l]))
            .collect(),
    )
}

/// Product of the per-factor decompositions; `Π d_i` terms.
pub fn w_product_combined(multidegree: &[usize]) -> Result<Decomposition<Rational>> {
    let mut parts = multidegree.iter().map(|&d| w_state_decomposition(d));
    let first = parts
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty multidegree".into()))??;
    parts.try_fold(first, |acc, next| Ok(crate::forms::combine(&acc, &next?)))
}

// ---------------------------------------------------------------------------
// The G - Σ H_i decomposition of W₃^{⊗k}
// ---------------------------------------------------------------------------

/// Distinct constants `ξ_i ∉ {0, 1}` defining `a_ij = ξ_i / (ξ_i - ξ_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiScheme {
    xi: Vec<Rational>,
}

impl XiScheme {
    pub fn new(xi: Vec<Rational>) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::InvalidArgument("need at least one ξ".into()));
        }
        for (i, x) in xi.iter().enumerate() {
            if x.is_zero() || x.is_one() {
                return Err(Error::InvalidArgument(format!(
                    "ξ_{} = {x} is not allowed",
                    i + 1
                )));
            }
            if xi[..i].contains(x) {
                return Err(Error::InvalidArgument(format!("ξ value {x} repeated")));
            }
        }
        Ok(XiScheme { xi })
    }

    /// `ξ_i = i + 1`, that is `2, 3, …, k + 1`.
    pub fn default_for(k: usize) -> Result<Self> {
        Self::new((2..k as i64 + 2).map(Rational::from).collect())
    }

    /// Distinct random `p/q` with `|p| ≤ 30`, `1 ≤ q ≤ 9`.
    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Self> {
        let mut xi: Vec<Rational> = Vec::with_capacity(k);
        while xi.len() < k {
            let v = Rational::new(rng.random_range(-30i64..=30), rng.random_range(1i64..=9));
            if !v.is_zero() && !v.is_one() && !xi.contains(&v) {
                xi.push(v);
            }
        }
        Self::new(xi)
    }

    pub fn k(&self) -> usize {
        self.xi.len()
    }

    pub fn xi(&self) -> &[Rational] {
        &self.xi
    }

    pub fn a(&self, i: usize, j: usize) -> Rational {
        self.xi[i].clone() / (self.xi[i].clone() - self.xi[j].clone())
    }

    /// The `k × k` matrix of `a_ij`, with zeros on the diagonal.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let k = self.k();
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if i == j {
                            Rational::from(0)
                        } else {
                            self.a(i, j)
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Outcome of checking the polynomial conditions on the `a_ij`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition33Report {
    pub holds: bool,
    /// First failing subset (0-based), ordered by size then lexicographically.
    pub failing_subset: Option<Vec<usize>>,
    pub subsets_checked: usize,
}

/// Subsets of `0..k` of size at least 2, by size then lexicographically.
fn subsets_by_size(k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 2..=k {
        rec(0, k, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Evaluates `Σ_{p∈S} Π_{q∈S, q≠p} a_pq - 1` over every subset `S` with
/// `|S| ≥ 2`; the decomposition `G - Σ H_i` is exact iff all vanish.
pub fn check_condition_33(a: &[Vec<Rational>]) -> Result<Condition33Report> {
    let k = a.len();
    if k < 2 {
        return Err(Error::InvalidArgument("the conditions need k ≥ 2".into()));
    }
    if a.iter().any(|row| row.len() != k) {
        return Err(Error::DimensionMismatch(
            "coefficient matrix must be square".into(),
        ));
    }
    let subsets = subsets_by_size(k);
    let failing = subsets
        .par_iter()
        .find_first(|s| {
            let total = s.iter().fold(Rational::from(0), |acc, &p| {
                let prod = s
                    .iter()
                    .filter(|&&q| q != p)
                    .fold(Rational::from(1), |m, &q| m * a[p][q].clone());
                acc + prod
            });
            !(total - Rational::from(1)).is_zero()
        })
        .cloned();
    Ok(Condition33Report {
        holds: failing.is_none(),
        failing_subset: failing,
        subsets_checked: subsets.len(),
    })
}

/// `W_3 + c·y³`.
fn w3_plus(c: Rational) -> BinaryForm<Rational> {
    BinaryForm::new(vec![
        Rational::from(0),
        Rational::from(1),
        Rational::from(0),
        c,
    ])
    .expect("nonempty")
}

/// `W₃^{⊗k} = G - Σ_i H_i` in factor form over ℚ, with
/// `G = ⊗_j (W_3 + y³)` and `H_i` having `y³` in slot `i` and
/// `W_3 + a_ij y³` elsewhere.
pub fn thm33_decomposition(xi: &XiScheme) -> Result<FactorDecomposition<Rational>> {
    let k = xi.k();
    let one = Rational::from(1);
    let mut terms = vec![FactorTerm {
        weight: one.clone(),
        factors: vec![w3_plus(one.clone()); k],
        ranks: vec![2; k],
    }];
    for i in 0..k {
        let factors = (0..k)
            .map(|j| {
                if i == j {
                    BinaryForm::monomial(3, 3)
                } else {
                    w3_plus(xi.a(i, j))
                }
            })
            .collect();
        let ranks = (0..k).map(|j| if i == j { 1 } else { 2 }).collect();
        terms.push(FactorTerm {
            weight: -one.clone(),
            factors,
            ranks,
        });
    }
    FactorDecomposition::new(vec![3; k], terms)
}

/// Rank-one tier of a factor-form decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankOneSplit {
    pub decomposition: AnyDecomposition,
    /// Field of the Waring decomposition used for each factor of each term.
    pub factor_fields: Vec<Vec<FieldTag>>,
    pub residual: f64,
}

/// Splits every factor into a minimal Waring decomposition (exact over
/// `field` when the apolar roots lie there, numeric otherwise) and
/// multiplies out. The term count equals the split count whenever the rank
/// annotations are the Waring ranks.
pub fn split_rank_one(fd: &FactorDecomposition<Rational>, field: FieldTag) -> Result<RankOneSplit> {
    let mut cache: BTreeMap<Vec<Rational>, AnyDecomposition> = BTreeMap::new();
    let mut total: Option<AnyDecomposition> = None;
    let mut factor_fields = Vec::with_capacity(fd.terms.len());
    for term in &fd.terms {
        let mut product: Option<AnyDecomposition> = None;
        let mut fields = Vec::with_capacity(term.factors.len());
        for (f, &annotated) in term.factors.iter().zip(&term.ranks) {
            let key = f.coeffs().to_vec();
            let dec = match cache.get(&key) {
                Some(d) => d.clone(),
                None => {
                    let out = sylvester_decompose(f, field)?;
                    if out.rank > annotated {
                        return Err(Error::Inconsistent(format!(
                            "factor annotated with rank {annotated} has Waring rank {}",
                            out.rank
                        )));
                    }
                    cache.insert(key, out.decomposition.clone());
                    out.decomposition
                }
            };
            fields.push(dec.field());
            product = Some(match product {
                None => dec,
                Some(p) => p.combine(&dec),
            });
        }
        let product = product
            .ok_or_else(|| Error::InvalidArgument("term without factors".into()))?
            .scale(&term.weight);
        factor_fields.push(fields);
        total = Some(match total {
            None => product,
            Some(t) => t.concat(&product)?,
        });
    }
    let decomposition = match total {
        Some(d) => d,
        None => AnyDecomposition::Rational(Decomposition::empty(fd.multidegree.clone())?),
    };
    let report = decomposition.verify_against(&fd.expand()?, None)?;
    if !report.ok {
        return Err(Error::Numeric(format!(
            "rank-one split residual {:e} exceeds tolerance",
            report.residual
        )));
    }
    Ok(RankOneSplit {
        decomposition,
        factor_fields,
        residual: report.residual,
    })
}

// ---------------------------------------------------------------------------
// Curve unions
// ---------------------------------------------------------------------------

/// Parameters of points on the curves `B_Λ`: for each nonempty
/// `Λ ⊆ {1, …, k}` (indexed by bitmask, bit `i` for factor `i`), a list of
/// `d_Λ + 1` distinct rationals starting with 0. The point with parameter
/// `t` has `x + t·y` in the factors of `Λ` and `x` elsewhere, so `t = 0` is
/// the shared point `o`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePointSet {
    pub multidegree: Vec<usize>,
    pub params: Vec<Vec<Rational>>,
}

impl CurvePointSet {
    pub fn new(multidegree: Vec<usize>, params: Vec<Vec<Rational>>) -> Result<Self> {
        let k = multidegree.len();
        if k == 0 || k > 16 {
            return Err(Error::InvalidArgument(format!(
                "unsupported number of factors {k}"
            )));
        }
        if params.len() != (1 << k) - 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} parameter lists for {} curves",
                params.len(),
                (1 << k) - 1
            )));
        }
        for (idx, ts) in params.iter().enumerate() {
            let mask = idx + 1;
            let d: usize = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| multidegree[i])
                .sum();
            if ts.len() != d + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "curve {mask:#b} needs {} parameters, got {}",
                    d + 1,
                    ts.len()
                )));
            }
            if !ts[0].is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "curve {mask:#b} must start at the shared point t = 0"
                )));
            }
            for (i, t) in ts.iter().enumerate() {
                if ts[..i].contains(t) {
                    return Err(Error::InvalidArgument(format!(
                        "curve {mask:#b} repeats parameter {t}"
                    )));
                }
            }
        }
        Ok(CurvePointSet {
            multidegree,
            params,
        })
    }

    /// `t_j = j` for `j = 0, …, d_Λ`.
    pub fn default_for(multidegree: &[usize]) -> Result<Self> {
        let k = multidegree.len();
        let params = (1..1usize << k)
            .map(|mask| {
                let d: usize = (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| multidegree[i])
                    .sum();
                (0..=d as i64).map(Rational::from).collect()
            })
            .collect();
        Self::new(multidegree.to_vec(), params)
    }

    /// Points on the three curves of `(d_1, d_2)` lying on one hyperplane
    /// through `W_{d_1} ⊗ W_{d_2}`.
    ///
    /// Writing the parameters as `t = 1/u`, the `d_1` points on `B_{1}`,
    /// `d_2` on `B_{2}` and `d_1 + d_2` on `B_{12}` are the zeros of
    /// `Π(1 - u t)`, `Π(1 - v t)` and `Π(1 - w t)`. They are cut out by a
    /// hyperplane containing the tensor when `e_1(w) = e_1(u) + e_1(v)` and
    /// `e_2(w) = e_2(u) + e_2(v)`. Such `2d_1 + 2d_2` points span only a
    /// hyperplane of the curves' span, so one of them is redundant.
    pub fn hyperplane_section(d1: usize, d2: usize) -> Result<Self> {
        if d1 < 1 || d2 < 1 {
            return Err(Error::InvalidArgument("degrees must be positive".into()));
        }
        let target = w_product::<Rational>(&[d1, d2])?;
        let q = Rational::from;
        let w: Vec<Rational> = (1..=(d1 + d2) as i64).map(q).collect();
        for shift in 1..=64i64 {
            let u_head: Vec<Rational> = (0..d1 as i64 - 1).map(|i| q(-i - shift)).collect();
            let v_head: Vec<Rational> =
                (0..d2 as i64 - 1).map(|i| q(-i - 3 * shift - 10)).collect();
            let Some((u, v)) = complete_section(&w, u_head, v_head) else {
                continue;
            };
            let inv = |xs: &[Rational]| -> Vec<Rational> {
                std::iter::once(q(0))
                    .chain(xs.iter().map(Rational::recip))
                    .collect()
            };
            let Ok(set) = Self::new(vec![d1, d2], vec![inv(&u), inv(&v), inv(&w)]) else {
                continue;
            };
            let columns: Vec<Vec<Rational>> = set
                .points()
                .iter()
                .skip(1)
                .map(|p| expand_rank_one(p, &set.multidegree).map(PSTensor::into_coeffs))
                .collect::<Result<_>>()?;
            if in_span(&columns, target.coeffs())? {
                return Ok(set);
            }
        }
        Err(Error::Inconsistent(
            "no hyperplane section found among the candidate parameters".into(),
        ))
    }

    pub fn k(&self) -> usize {
        self.multidegree.len()
    }

    /// Points as unit-weight terms: `o` first, then each curve by increasing
    /// mask with its nonzero parameters in order.
    pub fn points(&self) -> Vec<RankOneTerm<Rational>> {
        let k = self.k();
        let one = Rational::from(1);
        let mut out = vec![RankOneTerm::new(one.clone(), vec![LinearForm::x(); k])];
        for (idx, ts) in self.params.iter().enumerate() {
            let mask = idx + 1;
            for t in &ts[1..] {
                let vectors = (0..k)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            LinearForm::new(one.clone(), t.clone())
                        } else {
                            LinearForm::x()
                        }
                    })
                    .collect();
                out.push(RankOneTerm::new(one.clone(), vectors));
            }
        }
        out
    }
}

fn e1(xs: &[Rational]) -> Rational {
    xs.iter().fold(Rational::from(0), |a, x| a + x.clone())
}

fn e2(xs: &[Rational]) -> Rational {
    let mut acc = Rational::from(0);
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            acc = acc + xs[i].clone() * xs[j].clone();
        }
    }
    acc
}

/// Solves for the last entries of `u` and `v` so that the elementary
/// symmetric conditions hold; `None` if degenerate.
fn complete_section(
    w: &[Rational],
    mut u: Vec<Rational>,
    mut v: Vec<Rational>,
) -> Option<(Vec<Rational>, Vec<Rational>)> {
    // u_l + v_l = σ, and the e_2 condition is linear in u_l.
    let sigma = e1(w) - e1(&u) - e1(&v);
    let denom = e1(&u) - e1(&v);
    if denom.is_zero() {
        return None;
    }
    let ul = (e2(w) - e2(&u) - e2(&v) - sigma.clone() * e1(&v)) / denom;
    let vl = sigma - ul.clone();
    u.push(ul);
    v.push(vl);
    let valid = |xs: &[Rational]| {
        xs.iter()
            .enumerate()
            .all(|(i, x)| !x.is_zero() && !xs[..i].contains(x))
    };
    (valid(&u) && valid(&v)).then_some((u, v))
}

/// Exact decomposition of `⊗ W_{d_i}` supported on the curve-union points;
/// at most `1 + 2^{k-1} Σ d_i` terms. Requires every `d_i ≥ 3`.
pub fn curve_union_decomposition(
    multidegree: &[usize],
    params: Option<&CurvePointSet>,
) -> Result<Decomposition<Rational>> {
    if let Some(&d) = multidegree.iter().find(|&&d| d < 3) {
        return Err(Error::InvalidArgument(format!(
            "curve-union construction needs every degree ≥ 3, got {d}"
        )));
    }
    let default;
    let set = match params {
        Some(p) => {
            if p.multidegree != multidegree {
                return Err(Error::MultidegreeMismatch {
                    expected: multidegree.to_vec(),
                    found: p.multidegree.clone(),
                });
            }
            p
        }
        None => {
            default = CurvePointSet::default_for(multidegree)?;
            &default
        }
    };
    let target = w_product::<Rational>(multidegree)?;
    solve_on_points(multidegree, &set.points(), &target)
}

/// Exact weights on `points` (free weights set to zero), zero terms dropped.
fn solve_on_points(
    multidegree: &[usize],
    points: &[RankOneTerm<Rational>],
    target: &PSTensor<Rational>,
) -> Result<Decomposition<Rational>> {
    let columns = unit_columns(multidegree, points)?;
    let a = Matrix::from_columns(&columns, target.len())?;
    let weights = solve(&a, target.coeffs())?
        .ok_or_else(|| Error::Inconsistent("target is not in the span of the points".into()))?;
    let terms = weights
        .into_iter()
        .zip(points)
        .map(|(w, p)| RankOneTerm::new(w, p.vectors.clone()))
        .collect();
    Ok(Decomposition::new(multidegree.to_vec(), terms)?.without_zero_terms())
}

fn unit_columns<F: Scalar>(
    multidegree: &[usize],
    points: &[RankOneTerm<F>],
) -> Result<Vec<Vec<F>>> {
    points
        .iter()
        .map(|p| {
            let unit = RankOneTerm::new(F::one(), p.vectors.clone());
            expand_rank_one(&unit, multidegree).map(PSTensor::into_coeffs)
        })
        .collect()
}

/// Greedy support reduction: points are tried for removal from the last
/// one backwards, and dropped whenever the target stays in the span of the
/// rest. The survivors are linearly independent; their weights are solved
/// exactly. Point weights in the input are ignored.
pub fn prune_support(
    multidegree: &[usize],
    points: &[RankOneTerm<Rational>],
    target: &PSTensor<Rational>,
) -> Result<Decomposition<Rational>> {
    if target.multidegree() != multidegree {
        return Err(Error::MultidegreeMismatch {
            expected: multidegree.to_vec(),
            found: target.multidegree().to_vec(),
        });
    }
    let columns = unit_columns(multidegree, points)?;
    if !in_span(&columns, target.coeffs())? {
        return Err(Error::InvalidArgument(
            "target is not in the span of the points".into(),
        ));
    }
    let mut keep: Vec<bool> = vec![true; points.len()];
    for i in (0..points.len()).rev() {
        keep[i] = false;
        let rest: Vec<Vec<Rational>> = columns
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(c, _)| c.clone())
            .collect();
        if !in_span(&rest, target.coeffs())? {
            keep[i] = true;
        }
    }
    let survivors: Vec<RankOneTerm<Rational>> = points
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| p.clone())
        .collect();
    solve_on_points(multidegree, &survivors, target)
}

/// The `2^k` tensors `⊗ f_i` with `f_i ∈ {x^{d_i}, W_{d_i}}`, in row-major
/// order of the choices (`x` before `W`).
pub fn z_scheme_basis(multidegree: &[usize]) -> Result<Vec<PSTensor<Rational>>> {
    if multidegree.is_empty() || multidegree.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "invalid multidegree {multidegree:?}"
        )));
    }
    let k = multidegree.len();
    (0..1usize << k)
        .map(|choice| {
            let factors: Vec<BinaryForm<Rational>> = (0..k)
                .map(|i| {
                    let j = choice >> (k - 1 - i) & 1;
                    BinaryForm::monomial(multidegree[i], j)
                })
                .collect();
            PSTensor::from_factors(&factors)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Closed-form bounds
// ---------------------------------------------------------------------------

/// `2⌈N/(k+1)⌉` with `N = Π(d_i + 1)`, absent for the multidegrees where
/// the generic rank is not `⌈N/(k+1)⌉`.
pub fn generic_rank_bound(multidegree: &[usize]) -> Result<Option<usize>> {
    let k = multidegree.len();
    if k < 2 {
        return Err(Error::InvalidArgument(
            "the generic bound needs k ≥ 2".into(),
        ));
    }
    let mut d = multidegree.to_vec();
    d.sort_unstable();
    let exception = match k {
        2 => d[0] == 2 && d[1].is_multiple_of(2),
        3 => d[0] == 1 && d[1] == 1 && (d[2].is_multiple_of(2) || d[2] == 1),
        4 => d.iter().all(|&x| x == 1),
        _ => false,
    };
    if exception {
        return Ok(None);
    }
    let n: usize = d.iter().map(|x| x + 1).product();
    Ok(Some(2 * n.div_ceil(k + 1)))
}

/// `d_1 b_2 + d_2 b_1 + b_1 b_2 - 1` for `x^{d_1-b_1} y^{b_1} ⊗ x^{d_2-b_2} y^{b_2}`-type
/// monomial products, valid for `2 ≤ b_i ≤ d_i / 2`.
pub fn monomial_curve_bound(d1: usize, d2: usize, b1: usize, b2: usize) -> Result<usize> {
    if b1 < 2 || b2 < 2 || 2 * b1 > d1 || 2 * b2 > d2 {
        return Err(Error::InvalidArgument(format!(
            "need 2 ≤ b_i ≤ d_i/2, got d = ({d1}, {d2}), b = ({b1}, {b2})"
        )));
    }
    Ok(d1 * b2 + d2 * b1 + b1 * b2 - 1)
}

/// Checks that every `η_i η_j (η_i - η_j)` lies in `(η_1², …, η_k²)` by
/// testing each of its monomials for a squared variable.
pub fn ideal_membership_check(k: usize) -> Result<bool> {
    if k < 2 {
        return Err(Error::InvalidArgument("need k ≥ 2".into()));
    }
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            // η_i² η_j - η_i η_j²
            let mut terms: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
            let mut m1 = vec![0u32; k];
            m1[i] += 2;
            m1[j] += 1;
            let mut m2 = vec![0u32; k];
            m2[i] += 1;
            m2[j] += 2;
            *terms.entry(m1).or_default() += 1;
            *terms.entry(m2).or_default() -= 1;
            let ok = terms
                .iter()
                .filter(|(_, &c)| c != 0)
                .all(|(m, _)| m.iter().any(|&e| e >= 2));
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnownKind {
    Exact,
    Upper,
    Lower,
}

/// A cited rank fact about a product of W-states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownFact {
    pub kind: KnownKind,
    pub value: usize,
    pub citation: String,
}

/// One row of the table of cited facts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KnownEntry {
    pub pattern: &'static str,
    pub kind: KnownKind,
    pub formula: &'static str,
    pub citation: &'static str,
}

const KNOWN: &[KnownEntry] = &[
    KnownEntry {
        pattern: "(3, 3)",
        kind: KnownKind::Exact,
        formula: "8",
        citation: "R_{3,3}(W_3 ⊗ W_3) = 8",
    },
    KnownEntry {
        pattern: "(2, d), d ≥ 2",
        kind: KnownKind::Exact,
        formula: "2d",
        citation: "R_{2,d}(W_2 ⊗ W_d) = 2d",
    },
    KnownEntry {
        pattern: "(3, …, 3), k factors",
        kind: KnownKind::Upper,
        formula: "(2 + k) 2^{k-1}",
        citation: "R_{3,…,3}(W_3^{⊗k}) ≤ (2 + k) 2^{k-1}",
    },
    KnownEntry {
        pattern: "(d_1, d_2), d_i ≥ 3",
        kind: KnownKind::Upper,
        formula: "2 d_1 + 2 d_2 - 1",
        citation: "R_{d1,d2}(W_{d1} ⊗ W_{d2}) ≤ 2d_1 + 2d_2 - 1",
    },
    KnownEntry {
        pattern: "(d_1, …, d_k), k ≥ 2, d_i ≥ 3",
        kind: KnownKind::Upper,
        formula: "2^{k-1} (d_1 + … + d_k)",
        citation: "R(W_{d1} ⊗ … ⊗ W_{dk}) ≤ 2^{k-1}(d_1 + … + d_k) over C",
    },
    KnownEntry {
        pattern: "(d_1, …, d_k), d_i ≥ 3",
        kind: KnownKind::Upper,
        formula: "1 + 2^{k-1} (d_1 + … + d_k)",
        citation: "R(W_{d1} ⊗ … ⊗ W_{dk}) ≤ 1 + 2^{k-1}(d_1 + … + d_k) over any large field",
    },
    KnownEntry {
        pattern: "(d_1, …, d_k)",
        kind: KnownKind::Lower,
        formula: "d_1 + … + d_k - k + 1",
        citation: "tensor rank of W_{d1} ⊗ … ⊗ W_{dk} is at least d_1 + … + d_k - k + 1",
    },
];

/// The static table of cited facts.
pub fn known_values() -> &'static [KnownEntry] {
    KNOWN
}

/// Cited facts that apply to `⊗ W_{d_i}`.
pub fn known_facts(multidegree: &[usize]) -> Vec<KnownFact> {
    let k = multidegree.len();
    let sum: usize = multidegree.iter().sum();
    let mut sorted = multidegree.to_vec();
    sorted.sort_unstable();
    let all_at_least_3 = multidegree.iter().all(|&d| d >= 3);
    let fact = |entry: &KnownEntry, value: usize| KnownFact {
        kind: entry.kind,
        value,
        citation: entry.citation.to_string(),
    };
    let mut out = Vec::new();
    if sorted == [3, 3] {
        out.push(fact(&KNOWN[0], 8));
    }
    if k == 2 && sorted[0] == 2 {
        out.push(fact(&KNOWN[1], 2 * sorted[1]));
    }
    if k >= 1 && multidegree.iter().all(|&d| d == 3) {
        out.push(fact(&KNOWN[2], (2 + k) << (k - 1)));
    }
    if k == 2 && all_at_least_3 {
        out.push(fact(&KNOWN[3], 2 * sum - 1));
    }
    if k >= 2 && all_at_least_3 {
        out.push(fact(&KNOWN[4], sum << (k - 1)));
    }
    if k >= 1 && all_at_least_3 {
        out.push(fact(&KNOWN[5], 1 + (sum << (k - 1))));
    }
    if k >= 1 && multidegree.iter().all(|&d| d >= 1) {
        out.push(fact(&KNOWN[6], sum + 1 - k));
    }
    out
}

/// Checks that a decomposition expands to `⊗ W_{d_i}` exactly or within the
/// default tolerance.
pub fn verifies_as_w_product(dec: &AnyDecomposition) -> Result<bool> {
    let target = w_product::<Rational>(dec.multidegree())?;
    Ok(dec.verify_against(&target, None)?.ok)
}

/// Exact expansion check for rational decompositions.
pub fn expands_to(dec: &Decomposition<Rational>, target: &PSTensor<Rational>) -> Result<bool> {
    Ok(&expand(dec)? == target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::rank;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Q = Rational;

    fn q(n: i64) -> Q {
        Q::from(n)
    }

    #[test]
    fn w_states() {
        assert_eq!(w_state::<Q>(1).unwrap().coeffs(), &[q(0), q(1)]);
        assert_eq!(w_state::<Q>(3).unwrap().coeffs(), &[q(0), q(1), q(0), q(0)]);
        assert_eq!(w_state::<Q>(2).unwrap(), BinaryForm::monomial(2, 1));
        assert!(w_state::<Q>(0).is_err());

        let t = w_product::<Q>(&[3, 4, 5]).unwrap();
        let nonzero: Vec<usize> = (0..t.len()).filter(|&i| !t.coeffs()[i].is_zero()).collect();
        assert_eq!(nonzero, vec![t.flat_index(&[1, 1, 1])]);
        assert_eq!(t.get(&[1, 1, 1]), &q(1));
        assert_eq!(
            w_product::<Q>(&[2]).unwrap(),
            PSTensor::from_form(&w_state(2).unwrap()).unwrap()
        );
        assert!(w_product::<Q>(&[]).is_err());
    }

    #[test]
    fn exact_w_state_decompositions() {
        for d in 1..=12 {
            let dec = w_state_decomposition(d).unwrap();
            assert_eq!(dec.len(), d);
            assert!(
                expands_to(&dec, &w_product(&[d]).unwrap()).unwrap(),
                "W_{d}"
            );
        }
        let dec = w_product_combined(&[3, 4]).unwrap();
        assert_eq!(dec.len(), 12);
        assert!(expands_to(&dec, &w_product(&[3, 4]).unwrap()).unwrap());
    }

    #[test]
    fn condition_examples() {
        let xi = XiScheme::default_for(2).unwrap();
        assert_eq!(xi.a(0, 1), q(-2));
        assert_eq!(xi.a(1, 0), q(3));
        let report = check_condition_33(&xi.matrix()).unwrap();
        assert!(report.holds);
        assert_eq!(report.subsets_checked, 1);

        let ones = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        let report = check_condition_33(&ones).unwrap();
        assert!(!report.holds);
        assert_eq!(report.failing_subset, Some(vec![0, 1]));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xi = XiScheme::random(6, &mut rng).unwrap();
        let report = check_condition_33(&xi.matrix()).unwrap();
        assert!(report.holds);
        assert_eq!(report.subsets_checked, 64 - 7);
    }

    #[test]
    fn condition_reports_first_failure_in_order() {
        // Break only the triple condition by perturbing a_{1,2} after
        // fixing the pair conditions for {0,1} and {0,2}.
        let mut a = XiScheme::default_for(3).unwrap().matrix();
        a[1][2] = a[1][2].clone() + q(1);
        a[2][1] = a[2][1].clone() - q(1);
        let report = check_condition_33(&a).unwrap();
        assert!(!report.holds);
        assert_eq!(report.failing_subset, Some(vec![0, 1, 2]));
        assert!(check_condition_33(&[vec![q(0)]]).is_err());
    }

    #[test]
    fn xi_validation() {
        assert!(XiScheme::new(vec![q(2), q(2)]).is_err());
        assert!(XiScheme::new(vec![q(0), q(2)]).is_err());
        assert!(XiScheme::new(vec![q(1)]).is_err());
        assert!(XiScheme::new(vec![]).is_err());
    }

    #[test]
    fn thm33_expands_to_w3_powers() {
        for (k, count) in [(1, 3), (2, 8), (3, 20), (4, 48)] {
            let fd = thm33_decomposition(&XiScheme::default_for(k).unwrap()).unwrap();
            assert_eq!(fd.terms.len(), k + 1);
            assert_eq!(fd.split_count(), count);
            assert_eq!(
                fd.expand().unwrap(),
                w_product(&vec![3; k]).unwrap(),
                "k = {k}"
            );
        }
    }

    #[test]
    fn thm33_rank_one_tier() {
        let fd = thm33_decomposition(&XiScheme::default_for(2).unwrap()).unwrap();
        let split = split_rank_one(&fd, FieldTag::Gaussian).unwrap();
        assert_eq!(split.decomposition.len(), 8);
        assert!(split.residual <= 1e-9);
        assert!(verifies_as_w_product(&split.decomposition).unwrap());
        // W_3 + y³ needs √3; W_3 + 3y³ splits over Q; y³ is a cube.
        assert_eq!(split.factor_fields[0], vec![FieldTag::Approx; 2]);
        assert_eq!(
            split.factor_fields[1],
            vec![FieldTag::Rational, FieldTag::Approx]
        );
    }

    #[test]
    fn curve_union_examples() {
        for (ds, bound) in [(vec![3, 3], 13), (vec![3, 4, 5], 49), (vec![3], 4)] {
            let dec = curve_union_decomposition(&ds, None).unwrap();
            assert!(dec.len() <= bound, "{ds:?}: {}", dec.len());
            assert!(expands_to(&dec, &w_product(&ds).unwrap()).unwrap());
        }
        assert!(curve_union_decomposition(&[2, 3], None).is_err());
    }

    #[test]
    fn curve_point_set_validation() {
        let set = CurvePointSet::default_for(&[3, 3]).unwrap();
        assert_eq!(set.points().len(), 13);
        let mut bad = set.params.clone();
        bad[0][2] = q(1);
        assert!(CurvePointSet::new(vec![3, 3], bad).is_err());
        let mut bad = set.params.clone();
        bad[2].pop();
        assert!(CurvePointSet::new(vec![3, 3], bad).is_err());
        let mut bad = set.params;
        bad[1][0] = q(5);
        assert!(CurvePointSet::new(vec![3, 3], bad).is_err());
    }

    #[test]
    fn pruning_examples() {
        // Default parameters leave one redundant point for (3,3).
        let ds = [3, 3];
        let target = w_product(&ds).unwrap();
        let pruned = prune_support(
            &ds,
            &CurvePointSet::default_for(&ds).unwrap().points(),
            &target,
        )
        .unwrap();
        assert!(pruned.len() <= 12);
        assert!(expands_to(&pruned, &target).unwrap());

        // Hyperplane-section parameters reach 2d1 + 2d2 - 1.
        for (d1, d2) in [(3, 3), (4, 4), (3, 5)] {
            let ds = [d1, d2];
            let target = w_product(&ds).unwrap();
            let set = CurvePointSet::hyperplane_section(d1, d2).unwrap();
            assert_eq!(set.points().len(), 1 + 2 * (d1 + d2));
            let pruned = prune_support(&ds, &set.points(), &target).unwrap();
            assert!(
                pruned.len() <= 2 * (d1 + d2) - 1,
                "{ds:?}: {}",
                pruned.len()
            );
            assert!(expands_to(&pruned, &target).unwrap());
        }
    }

    #[test]
    fn pruning_trivial_cases() {
        let ds = [2, 2];
        let one = q(1);
        let t = RankOneTerm::new(
            one.clone(),
            vec![LinearForm::new(one.clone(), q(2)), LinearForm::x()],
        );
        let target = expand_rank_one(&t, &ds).unwrap().scale(&q(5));
        let other = RankOneTerm::new(one.clone(), vec![LinearForm::y(), LinearForm::y()]);
        let pruned =
            prune_support(&ds, &[other.clone(), t.clone(), other.clone()], &target).unwrap();
        assert_eq!(pruned.len(), 1);
        assert_eq!(pruned.terms[0].weight, q(5));

        let a = RankOneTerm::new(one.clone(), vec![LinearForm::x(), LinearForm::x()]);
        let target = expand_rank_one(&a, &ds)
            .unwrap()
            .add(&expand_rank_one(&other, &ds).unwrap())
            .unwrap();
        let pruned = prune_support(&ds, &[a, other.clone()], &target).unwrap();
        assert_eq!(pruned.len(), 2);

        assert!(prune_support(&ds, &[other], &w_product(&ds).unwrap()).is_err());
    }

    #[test]
    fn z_scheme_examples() {
        let basis = z_scheme_basis(&[3]).unwrap();
        assert_eq!(
            basis[0],
            PSTensor::from_form(&BinaryForm::monomial(3, 0)).unwrap()
        );
        assert_eq!(basis[1], w_product(&[3]).unwrap());

        for ds in [vec![3, 3], vec![2, 2, 2], vec![1, 4]] {
            let basis = z_scheme_basis(&ds).unwrap();
            assert_eq!(basis.len(), 1 << ds.len());
            let cols: Vec<Vec<Q>> = basis.iter().map(|t| t.coeffs().to_vec()).collect();
            let m = Matrix::from_columns(&cols, basis[0].len()).unwrap();
            assert_eq!(rank(&m), basis.len());
            assert!(in_span(&cols, w_product(&ds).unwrap().coeffs()).unwrap());
        }
    }

    #[test]
    fn closed_form_bounds() {
        assert_eq!(generic_rank_bound(&[3, 3]).unwrap(), Some(12));
        assert_eq!(generic_rank_bound(&[2, 4]).unwrap(), None);
        assert_eq!(generic_rank_bound(&[4, 2]).unwrap(), None);
        assert_eq!(generic_rank_bound(&[1, 1, 1]).unwrap(), None);
        assert_eq!(generic_rank_bound(&[1, 4, 1]).unwrap(), None);
        assert_eq!(generic_rank_bound(&[1, 1, 1, 1]).unwrap(), None);
        assert_eq!(generic_rank_bound(&[2, 3]).unwrap(), Some(8));
        assert_eq!(generic_rank_bound(&[1, 1, 3]).unwrap(), Some(8));
        assert!(generic_rank_bound(&[3]).is_err());

        assert_eq!(monomial_curve_bound(6, 6, 2, 3).unwrap(), 35);
        assert_eq!(monomial_curve_bound(4, 4, 2, 2).unwrap(), 19);
        assert!(monomial_curve_bound(4, 4, 3, 2).is_err());
        assert!(monomial_curve_bound(4, 4, 1, 2).is_err());

        for k in [2, 5, 10] {
            assert!(ideal_membership_check(k).unwrap());
        }
        assert!(ideal_membership_check(1).is_err());
    }

    #[test]
    fn known_fact_lookup() {
        let facts = known_facts(&[3, 3]);
        assert!(facts.contains(&KnownFact {
            kind: KnownKind::Exact,
            value: 8,
            citation: KNOWN[0].citation.into()
        }));
        let facts = known_facts(&[5, 2]);
        assert!(facts
            .iter()
            .any(|f| f.kind == KnownKind::Exact && f.value == 10));
        let facts = known_facts(&[5, 7]);
        assert!(facts
            .iter()
            .any(|f| f.kind == KnownKind::Upper && f.value == 24));
        assert!(facts
            .iter()
            .any(|f| f.kind == KnownKind::Lower && f.value == 11));
        assert_eq!(known_values().len(), KNOWN.len());
    }
}
