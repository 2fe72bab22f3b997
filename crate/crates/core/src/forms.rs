//! Binary forms, partially symmetric tensors and their decompositions.
//!
//! Everything is stored in the plain monomial basis: a binary form of degree
//! `d` is `Σ c_j x^{d-j} y^j` with no binomial weights, and a tensor of
//! multidegree `(d_1, …, d_k)` stores the coefficient of
//! `x^{d_1-j_1}y^{j_1} ⊗ … ⊗ x^{d_k-j_k}y^{j_k}` at the row-major position of
//! `(j_1, …, j_k)`. Binomial coefficients only appear when a power of a
//! linear form is expanded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalars::{
    ApproxComplex, FieldTag, GaussianRational, Rational, Scalar, DEFAULT_TOLERANCE,
};

/// `C(n, k)` as an `i64`. Degrees handled here are small.
pub fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// `n (n-1) ⋯ (n-m+1)`; zero when `m > n`.
pub fn falling_factorial(n: usize, m: usize) -> i64 {
    if m > n {
        return 0;
    }
    ((n - m + 1)..=n).map(|v| v as i64).product()
}

/// Homogeneous polynomial `Σ c_j x^{d-j} y^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct BinaryForm<F> {
    coeffs: Vec<F>,
}

impl<F: Scalar> BinaryForm<F> {
    /// Form of degree `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<F>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "a binary form needs at least one coefficient".into(),
            ));
        }
        Ok(BinaryForm { coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        BinaryForm {
            coeffs: vec![F::zero(); degree + 1],
        }
    }

    /// `x^{d-j} y^j`.
    pub fn monomial(degree: usize, j: usize) -> Self {
        let mut f = Self::zero(degree);
        f.coeffs[j] = F::one();
        f
    }

    pub fn from_i64s(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| F::from_i64(c)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &F {
        &self.coeffs[j]
    }

    pub fn into_coeffs(self) -> Vec<F> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    pub fn scale(&self, s: &F) -> Self {
        BinaryForm {
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree() != other.degree() {
            return Err(Error::DimensionMismatch(format!(
                "cannot add forms of degree {} and {}",
                self.degree(),
                other.degree()
            )));
        }
        Ok(BinaryForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![F::zero(); self.degree() + other.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        BinaryForm { coeffs: out }
    }

    /// Substitute `x ← m00·x + m01·y`, `y ← m10·x + m11·y`.
    pub fn substitute(&self, m: [[F; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        let lx = LinearForm::new(a, b);
        let ly = LinearForm::new(c, d);
        let deg = self.degree();
        let mut out = Self::zero(deg);
        for (j, cj) in self.coeffs.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let term = lx.power(deg - j).mul(&ly.power(j)).scale(cj);
            out = out.add(&term).expect("same degree");
        }
        out
    }

    pub fn map_field<G: Scalar>(&self, f: impl Fn(&F) -> G) -> BinaryForm<G> {
        BinaryForm {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

/// `a·x + b·y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm<F> {
    pub a: F,
    pub b: F,
}

impl<F: Scalar> LinearForm<F> {
    pub fn new(a: F, b: F) -> Self {
        LinearForm { a, b }
    }

    pub fn x() -> Self {
        LinearForm::new(F::one(), F::zero())
    }

    pub fn y() -> Self {
        LinearForm::new(F::zero(), F::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Coefficients of `(a x + b y)^d`: `C(d,j) a^{d-j} b^j`.
    pub fn power(&self, d: usize) -> BinaryForm<F> {
        let coeffs = (0..=d)
            .map(|j| {
                F::from_i64(binomial(d, j)) * self.a.pow((d - j) as u32) * self.b.pow(j as u32)
            })
            .collect();
        BinaryForm { coeffs }
    }

    pub fn map_field<G: Scalar>(&self, f: impl Fn(&F) -> G) -> LinearForm<G> {
        LinearForm::new(f(&self.a), f(&self.b))
    }
}

impl<F: Scalar + Serialize> Serialize for LinearForm<F> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (&self.a, &self.b).serialize(s)
    }
}

impl<'de, F: Scalar + Deserialize<'de>> Deserialize<'de> for LinearForm<F> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (a, b) = <(F, F)>::deserialize(d)?;
        Ok(LinearForm::new(a, b))
    }
}

/// Dense coefficient array of an element of `S^{d1} ⊗ … ⊗ S^{dk}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct PSTensor<F> {
    multidegree: Vec<usize>,
    coeffs: Vec<F>,
}

/// Number of entries of a tensor with this multidegree.
pub fn tensor_size(multidegree: &[usize]) -> usize {
    multidegree.iter().map(|d| d + 1).product()
}

/// Row-major strides for a multidegree.
pub fn strides(multidegree: &[usize]) -> Vec<usize> {
    let mut out = vec![1; multidegree.len()];
    for i in (0..multidegree.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * (multidegree[i + 1] + 1);
    }
    out
}

/// Iterates over every multi-index `(j_1, …, j_k)` with `0 ≤ j_i ≤ bounds_i`
/// in row-major order.
pub fn multi_indices(bounds: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total = tensor_size(bounds);
    let mut current = vec![0usize; bounds.len()];
    let mut emitted = 0usize;
    std::iter::from_fn(move || {
        if emitted == total {
            return None;
        }
        let out = current.clone();
        emitted += 1;
        for i in (0..bounds.len()).rev() {
            if current[i] < bounds[i] {
                current[i] += 1;
                break;
            }
            current[i] = 0;
        }
        Some(out)
    })
}

fn check_multidegree(multidegree: &[usize]) -> Result<()> {
    if multidegree.is_empty() {
        return Err(Error::InvalidArgument(
            "multidegree must be nonempty".into(),
        ));
    }
    if multidegree.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "multidegree entries must be positive, got {multidegree:?}"
        )));
    }
    Ok(())
}

impl<F: Scalar> PSTensor<F> {
    pub fn zeros(multidegree: &[usize]) -> Result<Self> {
        check_multidegree(multidegree)?;
        Ok(PSTensor {
            multidegree: multidegree.to_vec(),
            coeffs: vec![F::zero(); tensor_size(multidegree)],
        })
    }

    pub fn from_coeffs(multidegree: &[usize], coeffs: Vec<F>) -> Result<Self> {
        check_multidegree(multidegree)?;
        let expected = tensor_size(multidegree);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "multidegree {multidegree:?} needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(PSTensor {
            multidegree: multidegree.to_vec(),
            coeffs,
        })
    }

    /// A single binary form viewed as an order-1 tensor.
    pub fn from_form(f: &BinaryForm<F>) -> Result<Self> {
        Self::from_coeffs(&[f.degree()], f.coeffs().to_vec())
    }

    /// `f_1 ⊗ … ⊗ f_k`.
    pub fn from_factors(factors: &[BinaryForm<F>]) -> Result<Self> {
        let degrees: Vec<usize> = factors.iter().map(BinaryForm::degree).collect();
        check_multidegree(&degrees)?;
        let vectors: Vec<&[F]> = factors.iter().map(|f| f.coeffs()).collect();
        Ok(PSTensor {
            multidegree: degrees,
            coeffs: outer_product(&vectors),
        })
    }

    pub fn multidegree(&self) -> &[usize] {
        &self.multidegree
    }

    pub fn order(&self) -> usize {
        self.multidegree.len()
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<F> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.multidegree.len());
        strides(&self.multidegree)
            .iter()
            .zip(index)
            .map(|(s, j)| s * j)
            .sum()
    }

    pub fn get(&self, index: &[usize]) -> &F {
        &self.coeffs[self.flat_index(index)]
    }

    pub fn set(&mut self, index: &[usize], value: F) {
        let at = self.flat_index(index);
        self.coeffs[at] = value;
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [F] {
        &mut self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// The binary form, when the tensor has order 1.
    pub fn as_form(&self) -> Option<BinaryForm<F>> {
        (self.order() == 1).then(|| BinaryForm {
            coeffs: self.coeffs.clone(),
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.multidegree != other.multidegree {
            return Err(Error::MultidegreeMismatch {
                expected: self.multidegree.clone(),
                found: other.multidegree.clone(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(PSTensor {
            multidegree: self.multidegree.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-F::one()))
    }

    pub fn scale(&self, s: &F) -> Self {
        PSTensor {
            multidegree: self.multidegree.clone(),
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max))
    }

    pub fn map_field<G: Scalar>(&self, f: impl Fn(&F) -> G) -> PSTensor<G> {
        PSTensor {
            multidegree: self.multidegree.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

/// Row-major outer product of coefficient vectors.
pub(crate) fn outer_product<F: Scalar>(vectors: &[&[F]]) -> Vec<F> {
    let mut acc = vec![F::one()];
    for v in vectors {
        let mut next = Vec::with_capacity(acc.len() * v.len());
        for a in &acc {
            for b in v.iter() {
                next.push(a.clone() * b.clone());
            }
        }
        acc = next;
    }
    acc
}

/// `s ⊗ t`: multidegrees concatenate and coefficients multiply.
pub fn tensor_product<F: Scalar>(s: &PSTensor<F>, t: &PSTensor<F>) -> PSTensor<F> {
    let mut multidegree = s.multidegree.clone();
    multidegree.extend_from_slice(&t.multidegree);
    PSTensor {
        multidegree,
        coeffs: outer_product(&[&s.coeffs, &t.coeffs]),
    }
}

/// `λ · v_1^{d_1} ⊗ … ⊗ v_k^{d_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct RankOneTerm<F> {
    pub weight: F,
    pub vectors: Vec<LinearForm<F>>,
}

impl<F: Scalar> RankOneTerm<F> {
    pub fn new(weight: F, vectors: Vec<LinearForm<F>>) -> Self {
        RankOneTerm { weight, vectors }
    }

    pub fn map_field<G: Scalar>(&self, f: impl Fn(&F) -> G + Copy) -> RankOneTerm<G> {
        RankOneTerm {
            weight: f(&self.weight),
            vectors: self.vectors.iter().map(|v| v.map_field(f)).collect(),
        }
    }
}

/// Expands one term in the plain monomial basis. The coefficient at
/// `(j_1, …, j_k)` is `λ · Π C(d_i, j_i) a_i^{d_i - j_i} b_i^{j_i}`.
pub fn expand_rank_one<F: Scalar>(
    term: &RankOneTerm<F>,
    multidegree: &[usize],
) -> Result<PSTensor<F>> {
    check_multidegree(multidegree)?;
    if term.vectors.len() != multidegree.len() {
        return Err(Error::DimensionMismatch(format!(
            "term has {} vectors but multidegree {multidegree:?} has {} factors",
            term.vectors.len(),
            multidegree.len()
        )));
    }
    let powers: Vec<BinaryForm<F>> = term
        .vectors
        .iter()
        .zip(multidegree)
        .map(|(v, &d)| v.power(d))
        .collect();
    let mut slices: Vec<&[F]> = powers.iter().map(|p| p.coeffs()).collect();
    let weight = [term.weight.clone()];
    slices.insert(0, &weight);
    Ok(PSTensor {
        multidegree: multidegree.to_vec(),
        coeffs: outer_product(&slices),
    })
}

/// Weighted sum of rank-one terms; its length witnesses an upper bound on
/// the partially symmetric rank of its expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct Decomposition<F> {
    pub multidegree: Vec<usize>,
    pub terms: Vec<RankOneTerm<F>>,
}

impl<F: Scalar> Decomposition<F> {
    pub fn new(multidegree: Vec<usize>, terms: Vec<RankOneTerm<F>>) -> Result<Self> {
        check_multidegree(&multidegree)?;
        if let Some(bad) = terms.iter().find(|t| t.vectors.len() != multidegree.len()) {
            return Err(Error::DimensionMismatch(format!(
                "term with {} vectors in a decomposition of multidegree {multidegree:?}",
                bad.vectors.len()
            )));
        }
        Ok(Decomposition { multidegree, terms })
    }

    pub fn empty(multidegree: Vec<usize>) -> Result<Self> {
        Self::new(multidegree, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Drops terms whose weight is exactly zero.
    pub fn without_zero_terms(mut self) -> Self {
        self.terms.retain(|t| !t.weight.is_zero());
        self
    }

    pub fn map_field<G: Scalar>(&self, f: impl Fn(&F) -> G + Copy) -> Decomposition<G> {
        Decomposition {
            multidegree: self.multidegree.clone(),
            terms: self.terms.iter().map(|t| t.map_field(f)).collect(),
        }
    }
}

/// Exact sum of the expanded terms.
pub fn expand<F: Scalar>(dec: &Decomposition<F>) -> Result<PSTensor<F>> {
    let mut acc = PSTensor::<F>::zeros(&dec.multidegree)?;
    for term in &dec.terms {
        let t = expand_rank_one(term, &dec.multidegree)?;
        for (a, b) in acc.coeffs.iter_mut().zip(t.coeffs) {
            *a = a.clone() + b;
        }
    }
    Ok(acc)
}

/// All pairwise products of terms; expands to the tensor product of the
/// two expansions.
pub fn combine<F: Scalar>(d1: &Decomposition<F>, d2: &Decomposition<F>) -> Decomposition<F> {
    let mut multidegree = d1.multidegree.clone();
    multidegree.extend_from_slice(&d2.multidegree);
    let mut terms = Vec::with_capacity(d1.len() * d2.len());
    for s in &d1.terms {
        for t in &d2.terms {
            let mut vectors = s.vectors.clone();
            vectors.extend(t.vectors.iter().cloned());
            terms.push(RankOneTerm::new(
                s.weight.clone() * t.weight.clone(),
                vectors,
            ));
        }
    }
    Decomposition { multidegree, terms }
}

/// One summand `λ · f_1 ⊗ … ⊗ f_k` of a factor-form decomposition, with an
/// upper bound on the Waring rank of each factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct FactorTerm<F> {
    pub weight: F,
    pub factors: Vec<BinaryForm<F>>,
    pub ranks: Vec<usize>,
}

/// Sum of products of binary forms. Splitting every factor into `ranks[i]`
/// powers yields a rank-one decomposition with [`Self::split_count`] terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct FactorDecomposition<F> {
    pub multidegree: Vec<usize>,
    pub terms: Vec<FactorTerm<F>>,
}

impl<F: Scalar> FactorDecomposition<F> {
    pub fn new(multidegree: Vec<usize>, terms: Vec<FactorTerm<F>>) -> Result<Self> {
        check_multidegree(&multidegree)?;
        for term in &terms {
            let degrees: Vec<usize> = term.factors.iter().map(BinaryForm::degree).collect();
            if degrees != multidegree {
                return Err(Error::MultidegreeMismatch {
                    expected: multidegree.clone(),
                    found: degrees,
                });
            }
            if term.ranks.len() != term.factors.len() {
                return Err(Error::DimensionMismatch(
                    "one rank annotation per factor is required".into(),
                ));
            }
        }
        Ok(FactorDecomposition { multidegree, terms })
    }

    /// `Σ_terms Π_factors rank`.
    pub fn split_count(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.ranks.iter().product::<usize>())
            .sum()
    }

    pub fn expand(&self) -> Result<PSTensor<F>> {
        let mut acc = PSTensor::zeros(&self.multidegree)?;
        for term in &self.terms {
            let t = PSTensor::from_factors(&term.factors)?.scale(&term.weight);
            acc = acc.add(&t)?;
        }
        Ok(acc)
    }
}

/// Something that expands to a tensor and has a term count.
pub trait Certificate<F: Scalar> {
    fn multidegree(&self) -> &[usize];
    fn expand_to_tensor(&self) -> Result<PSTensor<F>>;
    fn term_count(&self) -> usize;
}

impl<F: Scalar> Certificate<F> for Decomposition<F> {
    fn multidegree(&self) -> &[usize] {
        &self.multidegree
    }
    fn expand_to_tensor(&self) -> Result<PSTensor<F>> {
        expand(self)
    }
    fn term_count(&self) -> usize {
        self.len()
    }
}

impl<F: Scalar> Certificate<F> for FactorDecomposition<F> {
    fn multidegree(&self) -> &[usize] {
        &self.multidegree
    }
    fn expand_to_tensor(&self) -> Result<PSTensor<F>> {
        self.expand()
    }
    fn term_count(&self) -> usize {
        self.split_count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub residual: f64,
    pub term_count: usize,
    pub field: FieldTag,
}

/// Checks that a certificate expands to `target`: exact equality over exact
/// fields, max-norm residual at most `tol` (default `1e-9`) otherwise.
pub fn verify<F: Scalar, C: Certificate<F>>(
    dec: &C,
    target: &PSTensor<F>,
    tol: Option<f64>,
) -> Result<VerifyReport> {
    if dec.multidegree() != target.multidegree() {
        return Err(Error::MultidegreeMismatch {
            expected: target.multidegree().to_vec(),
            found: dec.multidegree().to_vec(),
        });
    }
    let expanded = dec.expand_to_tensor()?;
    let residual = expanded.max_abs_diff(target)?;
    let ok = if F::is_exact() {
        expanded == *target
    } else {
        residual <= tol.unwrap_or(DEFAULT_TOLERANCE)
    };
    Ok(VerifyReport {
        ok,
        residual,
        term_count: dec.term_count(),
        field: F::FIELD,
    })
}

/// A decomposition whose field is only known at run time.
///
/// Serializes exactly like the inner [`Decomposition`]; the scalar encoding
/// (`"n/d"`, `{"re","im"}` or `[re, im]`) identifies the field.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AnyDecomposition {
    Rational(Decomposition<Rational>),
    Gaussian(Decomposition<GaussianRational>),
    Approx(Decomposition<ApproxComplex>),
}

impl AnyDecomposition {
    pub fn field(&self) -> FieldTag {
        match self {
            AnyDecomposition::Rational(_) => FieldTag::Rational,
            AnyDecomposition::Gaussian(_) => FieldTag::Gaussian,
            AnyDecomposition::Approx(_) => FieldTag::Approx,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyDecomposition::Rational(d) => d.len(),
            AnyDecomposition::Gaussian(d) => d.len(),
            AnyDecomposition::Approx(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multidegree(&self) -> &[usize] {
        match self {
            AnyDecomposition::Rational(d) => &d.multidegree,
            AnyDecomposition::Gaussian(d) => &d.multidegree,
            AnyDecomposition::Approx(d) => &d.multidegree,
        }
    }

    pub fn to_gaussian(&self) -> Option<Decomposition<GaussianRational>> {
        match self {
            AnyDecomposition::Rational(d) => {
                Some(d.map_field(|q| GaussianRational::from(q.clone())))
            }
            AnyDecomposition::Gaussian(d) => Some(d.clone()),
            AnyDecomposition::Approx(_) => None,
        }
    }

    pub fn to_approx(&self) -> Decomposition<ApproxComplex> {
        match self {
            AnyDecomposition::Rational(d) => d.map_field(Scalar::to_approx),
            AnyDecomposition::Gaussian(d) => d.map_field(Scalar::to_approx),
            AnyDecomposition::Approx(d) => d.clone(),
        }
    }

    /// Lifts both operands to the smaller common field ℚ ⊂ ℚ(i) ⊂ approx
    /// and takes all pairwise products of terms.
    pub fn combine(&self, other: &AnyDecomposition) -> AnyDecomposition {
        use AnyDecomposition as A;
        match (self, other) {
            (A::Rational(a), A::Rational(b)) => A::Rational(combine(a, b)),
            (A::Approx(_), _) | (_, A::Approx(_)) => {
                A::Approx(combine(&self.to_approx(), &other.to_approx()))
            }
            _ => A::Gaussian(combine(
                &self.to_gaussian().expect("exact"),
                &other.to_gaussian().expect("exact"),
            )),
        }
    }

    /// Multiplies every weight by a rational factor.
    pub fn scale(&self, s: &Rational) -> AnyDecomposition {
        fn go<F: Scalar>(d: &Decomposition<F>, s: &Rational) -> Decomposition<F> {
            let s = F::from_rational(s);
            let mut d = d.clone();
            for t in &mut d.terms {
                t.weight = t.weight.clone() * s.clone();
            }
            d
        }
        match self {
            AnyDecomposition::Rational(d) => AnyDecomposition::Rational(go(d, s)),
            AnyDecomposition::Gaussian(d) => AnyDecomposition::Gaussian(go(d, s)),
            AnyDecomposition::Approx(d) => AnyDecomposition::Approx(go(d, s)),
        }
    }

    /// Concatenates term lists, lifting to a common field.
    pub fn concat(&self, other: &AnyDecomposition) -> Result<AnyDecomposition> {
        use AnyDecomposition as A;
        if self.multidegree() != other.multidegree() {
            return Err(Error::MultidegreeMismatch {
                expected: self.multidegree().to_vec(),
                found: other.multidegree().to_vec(),
            });
        }
        fn cat<F: Scalar>(a: Decomposition<F>, b: Decomposition<F>) -> Decomposition<F> {
            let mut a = a;
            a.terms.extend(b.terms);
            a
        }
        Ok(match (self, other) {
            (A::Rational(a), A::Rational(b)) => A::Rational(cat(a.clone(), b.clone())),
            (A::Approx(_), _) | (_, A::Approx(_)) => {
                A::Approx(cat(self.to_approx(), other.to_approx()))
            }
            _ => A::Gaussian(cat(
                self.to_gaussian().expect("exact"),
                other.to_gaussian().expect("exact"),
            )),
        })
    }

    /// Verifies against a rational target, embedded into this field.
    pub fn verify_against(
        &self,
        target: &PSTensor<Rational>,
        tol: Option<f64>,
    ) -> Result<VerifyReport> {
        match self {
            AnyDecomposition::Rational(d) => verify(d, target, tol),
            AnyDecomposition::Gaussian(d) => verify(
                d,
                &target.map_field(|q| GaussianRational::from(q.clone())),
                tol,
            ),
            AnyDecomposition::Approx(d) => verify(d, &target.map_field(Scalar::to_approx), tol),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Rational;

    fn q(n: i64) -> Q {
        Q::from(n)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(falling_factorial(5, 2), 20);
        assert_eq!(falling_factorial(2, 3), 0);
        assert_eq!(falling_factorial(4, 0), 1);
    }

    #[test]
    fn expand_rank_one_examples() {
        let x3 = RankOneTerm::new(q(1), vec![LinearForm::<Q>::x()]);
        let t = expand_rank_one(&x3, &[3]).unwrap();
        assert_eq!(t.coeffs(), &[q(1), q(0), q(0), q(0)]);

        let xy = RankOneTerm::new(q(1), vec![LinearForm::new(q(1), q(1))]);
        let t = expand_rank_one(&xy, &[2]).unwrap();
        assert_eq!(t.coeffs(), &[q(1), q(2), q(1)]);

        let term = RankOneTerm::new(q(2), vec![LinearForm::x(), LinearForm::y()]);
        let t = expand_rank_one(&term, &[1, 1]).unwrap();
        assert_eq!(t.coeffs(), &[q(0), q(2), q(0), q(0)]);
        assert_eq!(t.get(&[0, 1]), &q(2));

        assert!(matches!(
            expand_rank_one(&term, &[1]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn expand_empty_is_zero() {
        let dec = Decomposition::<Q>::empty(vec![3]).unwrap();
        assert!(expand(&dec).unwrap().is_zero());
    }

    #[test]
    fn expand_explicit_pair() {
        // (x+y)³/6 - (x-y)³/6 = x²y + y³/3
        let sixth = Q::new(1, 6);
        let dec = Decomposition::new(
            vec![3],
            vec![
                RankOneTerm::new(sixth.clone(), vec![LinearForm::new(q(1), q(1))]),
                RankOneTerm::new(-sixth, vec![LinearForm::new(q(1), q(-1))]),
            ],
        )
        .unwrap();
        let t = expand(&dec).unwrap();
        assert_eq!(t.coeffs(), &[q(0), q(1), q(0), Q::new(1, 3)]);
    }

    #[test]
    fn tensor_product_examples() {
        let w2 = PSTensor::from_form(&BinaryForm::<Q>::monomial(2, 1)).unwrap();
        let p = tensor_product(&w2, &w2);
        assert_eq!(p.multidegree(), &[2, 2]);
        for idx in multi_indices(&[2, 2]) {
            let expected = if idx == [1, 1] { q(1) } else { q(0) };
            assert_eq!(p.get(&idx), &expected);
        }
        let zero = PSTensor::<Q>::zeros(&[3]).unwrap();
        assert!(tensor_product(&w2, &zero).is_zero());

        // W3 ⊗ W3 against a direct coefficient-product oracle.
        let w3 = BinaryForm::<Q>::monomial(3, 1);
        let p = tensor_product(
            &PSTensor::from_form(&w3).unwrap(),
            &PSTensor::from_form(&w3).unwrap(),
        );
        for idx in multi_indices(&[3, 3]) {
            let oracle = w3.coeff(idx[0]).clone() * w3.coeff(idx[1]).clone();
            assert_eq!(p.get(&idx), &oracle);
        }
    }

    #[test]
    fn combine_w3_decompositions() {
        // x²y = ((x+y)³ - (x-y)³)/6 - y³/3: three terms.
        let sixth = Q::new(1, 6);
        let w3 = Decomposition::new(
            vec![3],
            vec![
                RankOneTerm::new(sixth.clone(), vec![LinearForm::new(q(1), q(1))]),
                RankOneTerm::new(-sixth, vec![LinearForm::new(q(1), q(-1))]),
                RankOneTerm::new(Q::new(-1, 3), vec![LinearForm::y()]),
            ],
        )
        .unwrap();
        let w3_tensor = PSTensor::from_form(&BinaryForm::monomial(3, 1)).unwrap();
        assert!(verify(&w3, &w3_tensor, None).unwrap().ok);

        let both = combine(&w3, &w3);
        assert_eq!(both.len(), 9);
        let target = tensor_product(&w3_tensor, &w3_tensor);
        let report = verify(&both, &target, None).unwrap();
        assert!(report.ok);
        assert_eq!(report.term_count, 9);

        let empty = Decomposition::<Q>::empty(vec![3]).unwrap();
        assert!(combine(&w3, &empty).is_empty());
    }

    #[test]
    fn combine_ghz_cubic() {
        let ghz = Decomposition::new(
            vec![3],
            vec![
                RankOneTerm::new(q(1), vec![LinearForm::<Q>::x()]),
                RankOneTerm::new(q(1), vec![LinearForm::y()]),
            ],
        )
        .unwrap();
        let c = combine(&ghz, &ghz);
        assert_eq!(c.len(), 4);
        let f = PSTensor::from_form(&BinaryForm::from_i64s(&[1, 0, 0, 1]).unwrap()).unwrap();
        assert_eq!(expand(&c).unwrap(), tensor_product(&f, &f));
    }

    #[test]
    fn verify_detects_perturbation() {
        let dec = Decomposition::new(
            vec![2],
            vec![RankOneTerm::new(
                q(1),
                vec![LinearForm::<Q>::new(q(1), q(1))],
            )],
        )
        .unwrap();
        let target = expand(&dec).unwrap();
        assert!(verify(&dec, &target, None).unwrap().ok);
        let mut bad = dec.clone();
        bad.terms[0].weight = q(2);
        let report = verify(&bad, &target, None).unwrap();
        assert!(!report.ok);
        assert!(report.residual > 0.5);

        let wrong_shape = PSTensor::<Q>::zeros(&[3]).unwrap();
        assert!(matches!(
            verify(&dec, &wrong_shape, None),
            Err(Error::MultidegreeMismatch { .. })
        ));
    }

    #[test]
    fn verify_numeric_tolerance() {
        let one = ApproxComplex::new(1.0, 0.0);
        let dec = Decomposition::new(vec![1], vec![RankOneTerm::new(one, vec![LinearForm::x()])])
            .unwrap();
        let target = PSTensor::from_coeffs(
            &[1],
            vec![
                ApproxComplex::new(1.0 + 1e-12, 0.0),
                ApproxComplex::default(),
            ],
        )
        .unwrap();
        let report = verify(&dec, &target, Some(1e-9)).unwrap();
        assert!(report.ok);
        assert!(report.residual > 0.0 && report.residual < 1e-11);
        assert!(!verify(&dec, &target, Some(1e-13)).unwrap().ok);
    }

    #[test]
    fn factor_decomposition_counts_and_expands() {
        // x²y = (x²y + y³) - y³
        let g = BinaryForm::<Q>::from_i64s(&[0, 1, 0, 1]).unwrap();
        let h = BinaryForm::<Q>::monomial(3, 3);
        let fd = FactorDecomposition::new(
            vec![3],
            vec![
                FactorTerm {
                    weight: q(1),
                    factors: vec![g],
                    ranks: vec![2],
                },
                FactorTerm {
                    weight: q(-1),
                    factors: vec![h],
                    ranks: vec![1],
                },
            ],
        )
        .unwrap();
        let target = PSTensor::from_form(&BinaryForm::monomial(3, 1)).unwrap();
        let report = verify(&fd, &target, None).unwrap();
        assert!(report.ok);
        assert_eq!(report.term_count, 3);
    }

    #[test]
    fn substitute_identity_and_swap() {
        let f = BinaryForm::<Q>::from_i64s(&[1, 2, 3]).unwrap();
        let id = [[q(1), q(0)], [q(0), q(1)]];
        assert_eq!(f.substitute(id), f);
        let swap = [[q(0), q(1)], [q(1), q(0)]];
        assert_eq!(f.substitute(swap).coeffs(), &[q(3), q(2), q(1)]);
    }

    #[test]
    fn multi_index_order_is_row_major() {
        let all: Vec<Vec<usize>> = multi_indices(&[1, 2]).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        assert_eq!(strides(&[1, 2, 3]), vec![12, 4, 1]);
    }
}
