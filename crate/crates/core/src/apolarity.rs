//! Catalecticants and Sylvester's algorithm for binary forms.
//!
//! Contraction convention: the operator `∂_x^{e-i} ∂_y^i` sends
//! `x^{d-j} y^j` to `(d-j)!/(d-j-e+i)! · j!/(j-i)! · x^{d-j-e+i} y^{j-i}`
//! (zero when an exponent would go negative). With this convention a power
//! `(αx+βy)^d` is killed by the dual form `g` exactly when `g(α, β) = 0`, so
//! the roots of a squarefree apolar form are the nodes of a Waring
//! decomposition.
//!
//! Let `r` be the rank of the middle catalecticant. If the degree-`r` part
//! of the apolar ideal contains a squarefree form the Waring rank is `r`,
//! otherwise it is `d + 2 - r`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactla::{kernel, rank, solve, Matrix};
use crate::forms::{
    falling_factorial, AnyDecomposition, BinaryForm, Decomposition, LinearForm, PSTensor,
    RankOneTerm,
};
use crate::scalars::{
    quadratic_roots, ApproxComplex, FieldTag, GaussianRational, Rational, Scalar, DEFAULT_TOLERANCE,
};

/// Number of kernel combinations tried before giving up on finding a
/// squarefree apolar form.
pub const SQUAREFREE_ATTEMPTS: usize = 8;

/// Factor picked up by the coefficient of `x^{d-j}y^j`, `j = u + i`, under
/// `∂_x^{e-i} ∂_y^i`, landing on the monomial with `y`-exponent `u`.
pub fn contraction_weight(d: usize, e: usize, u: usize, i: usize) -> i64 {
    let j = u + i;
    if j > d || e - i > d - j {
        return 0;
    }
    falling_factorial(d - j, e - i) * falling_factorial(j, i)
}

/// The `(d-e+1) × (e+1)` matrix of `S^e(C²)* → S^{d-e}C²`, columns indexed by
/// `i` (operator `∂_x^{e-i}∂_y^i`), rows by the `y`-exponent of the image.
pub fn catalecticant<F: Scalar>(f: &BinaryForm<F>, e: usize) -> Result<Matrix<F>> {
    let d = f.degree();
    if e > d {
        return Err(Error::InvalidArgument(format!(
            "catalecticant order {e} exceeds degree {d}"
        )));
    }
    let mut m = Matrix::zeros(d - e + 1, e + 1);
    for u in 0..=d - e {
        for i in 0..=e {
            let c = f.coeff(u + i);
            if !c.is_zero() {
                m.set(
                    u,
                    i,
                    c.clone() * F::from_i64(contraction_weight(d, e, u, i)),
                );
            }
        }
    }
    Ok(m)
}

fn nonzero<F: Scalar>(f: &BinaryForm<F>, what: &'static str) -> Result<()> {
    if f.is_zero() {
        Err(Error::ZeroInput(what))
    } else {
        Ok(())
    }
}

/// Rank of the middle catalecticant; equals border and cactus rank.
pub fn border_rank<F: Scalar>(f: &BinaryForm<F>) -> Result<usize> {
    nonzero(f, "form")?;
    Ok(rank(&catalecticant(f, f.degree() / 2)?))
}

/// The first kernel basis vector of `catalecticant(f, r)`, read as a dual
/// form `Σ k_i X^{r-i} Y^i`.
pub fn apolar_form<F: Scalar>(f: &BinaryForm<F>, r: usize) -> Result<Option<BinaryForm<F>>> {
    if r == 0 || r > f.degree() {
        return Err(Error::InvalidArgument(format!(
            "apolar degree {r} must lie in 1..={}",
            f.degree()
        )));
    }
    let basis = kernel(&catalecticant(f, r)?);
    Ok(basis
        .into_iter()
        .next()
        .map(|v| BinaryForm::new(v).expect("nonempty")))
}

/// Ascending-power univariate helpers used on dehomogenized forms.
mod poly {
    use crate::scalars::Scalar;

    pub fn trim<F: Scalar>(mut p: Vec<F>) -> Vec<F> {
        while p.last().is_some_and(Scalar::is_zero) {
            p.pop();
        }
        p
    }

    pub fn degree<F: Scalar>(p: &[F]) -> Option<usize> {
        p.iter().rposition(|c| !c.is_zero())
    }

    pub fn derivative<F: Scalar>(p: &[F]) -> Vec<F> {
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * F::from_i64(i as i64))
            .collect()
    }

    pub fn rem<F: Scalar>(a: &[F], b: &[F]) -> Vec<F> {
        let b = trim(b.to_vec());
        let db = b.len() - 1;
        let lead = b[db].clone();
        let mut r = trim(a.to_vec());
        while r.len() > db && !r.is_empty() {
            let shift = r.len() - 1 - db;
            let factor = r[r.len() - 1].clone() / lead.clone();
            for (i, bc) in b.iter().enumerate() {
                r[shift + i] = r[shift + i].clone() - factor.clone() * bc.clone();
            }
            r.pop();
            r = trim(r);
        }
        r
    }

    pub fn gcd<F: Scalar>(a: &[F], b: &[F]) -> Vec<F> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b);
            a = b;
            b = r;
        }
        a
    }

    pub fn eval<F: Scalar>(p: &[F], t: &F) -> F {
        p.iter()
            .rev()
            .fold(F::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    /// Divides out `(t - root)`; the remainder must vanish.
    pub fn deflate<F: Scalar>(p: &[F], root: &F) -> Vec<F> {
        let n = p.len() - 1;
        let mut q = vec![F::zero(); n];
        let mut carry = F::zero();
        for i in (1..=n).rev() {
            carry = p[i].clone() + carry * root.clone();
            q[i - 1] = carry.clone();
        }
        q
    }
}

/// `g(1, t)` for `g = Σ k_i X^{r-i} Y^i`, plus the multiplicity of the
/// factor `X` that the dehomogenization loses.
fn dehomogenize<F: Scalar>(g: &BinaryForm<F>) -> (Vec<F>, usize) {
    let p = poly::trim(g.coeffs().to_vec());
    let lost = g.degree() + 1 - p.len();
    (p, lost)
}

/// Whether `g` has no repeated linear factor over the algebraic closure.
pub fn is_squarefree<F: Scalar>(g: &BinaryForm<F>) -> Result<bool> {
    nonzero(g, "form")?;
    let (p, at_infinity) = dehomogenize(g);
    if at_infinity > 1 {
        return Ok(false);
    }
    if p.len() <= 2 {
        return Ok(true);
    }
    let gcd = poly::gcd(&p, &poly::derivative(&p));
    Ok(poly::degree(&gcd) == Some(0))
}

/// Deterministic weights for kernel combinations: attempt `m` uses the
/// powers of `m + 1`.
fn combination_weights(attempt: usize, len: usize) -> Vec<i64> {
    let base = attempt as i64 + 1;
    (0..len as u32).map(|j| base.pow(j)).collect()
}

/// A squarefree element of the kernel of `catalecticant(f, s)`, searched
/// over deterministic combinations of the kernel basis.
pub fn squarefree_apolar_form<F: Scalar>(
    f: &BinaryForm<F>,
    s: usize,
) -> Result<Option<BinaryForm<F>>> {
    if s > f.degree() {
        return Ok(None);
    }
    let basis = kernel(&catalecticant(f, s)?);
    match basis.len() {
        0 => Ok(None),
        1 => {
            let g = BinaryForm::new(basis[0].clone())?;
            Ok(is_squarefree(&g)?.then_some(g))
        }
        n => {
            for attempt in 0..SQUAREFREE_ATTEMPTS {
                let w = combination_weights(attempt, n);
                let mut coeffs = vec![F::zero(); s + 1];
                for (v, &wj) in basis.iter().zip(&w) {
                    for (c, vi) in coeffs.iter_mut().zip(v) {
                        *c = c.clone() + vi.clone() * F::from_i64(wj);
                    }
                }
                let g = BinaryForm::new(coeffs)?;
                if !g.is_zero() && is_squarefree(&g)? {
                    return Ok(Some(g));
                }
            }
            Ok(None)
        }
    }
}

/// Rank data for one binary form.
#[derive(Debug, Clone, PartialEq)]
pub struct SylvesterAnalysis<F> {
    pub degree: usize,
    pub border_rank: usize,
    pub rank: usize,
    /// Squarefree apolar form of degree `rank` whose roots give a minimal
    /// decomposition.
    pub apolar_form: BinaryForm<F>,
    /// `d` even and border rank `d/2 + 1`: minimal decompositions form a
    /// positive-dimensional family and the one returned is a convention.
    pub non_unique: bool,
}

/// Runs Sylvester's algorithm on a nonzero form.
pub fn sylvester_analysis<F: Scalar>(f: &BinaryForm<F>) -> Result<SylvesterAnalysis<F>> {
    nonzero(f, "form")?;
    let d = f.degree();
    if d == 0 {
        return Ok(SylvesterAnalysis {
            degree: 0,
            border_rank: 1,
            rank: 1,
            apolar_form: BinaryForm::new(vec![F::one(), F::zero()])?,
            non_unique: false,
        });
    }
    let r = border_rank(f)?;
    let non_unique = d.is_multiple_of(2) && r == d / 2 + 1;
    if let Some(g) = squarefree_apolar_form(f, r)? {
        return Ok(SylvesterAnalysis {
            degree: d,
            border_rank: r,
            rank: r,
            apolar_form: g,
            non_unique,
        });
    }
    let s = d + 2 - r;
    let g = squarefree_apolar_form(f, s)?.ok_or_else(|| {
        Error::Numeric(format!(
            "no squarefree apolar form of degree {s} found in {SQUAREFREE_ATTEMPTS} attempts"
        ))
    })?;
    Ok(SylvesterAnalysis {
        degree: d,
        border_rank: r,
        rank: s,
        apolar_form: g,
        non_unique,
    })
}

/// Waring rank of a nonzero binary form.
pub fn sylvester_rank<F: Scalar>(f: &BinaryForm<F>) -> Result<usize> {
    nonzero(f, "form")?;
    let d = f.degree();
    if d == 0 {
        return Ok(1);
    }
    let r = border_rank(f)?;
    if squarefree_apolar_form(f, r)?.is_some() {
        Ok(r)
    } else {
        Ok(d + 2 - r)
    }
}

// ---------------------------------------------------------------------------
// Root extraction
// ---------------------------------------------------------------------------

/// Largest integer whose divisors are enumerated in the rational-root search.
const DIVISOR_SEARCH_LIMIT: u64 = 1_000_000_000_000;

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > DIVISOR_SEARCH_LIMIT {
        return None;
    }
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            out.push(BigInt::from(i));
            if i * i != n {
                out.push(BigInt::from(n / i));
            }
        }
        i += 1;
    }
    Some(out)
}

/// Rational roots of a squarefree rational polynomial (ascending powers),
/// and the cofactor left after dividing them out.
fn rational_roots(p: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut rest = poly::trim(p.to_vec());
    let mut roots = Vec::new();
    if rest.len() <= 1 {
        return (roots, rest);
    }
    if rest[0].is_zero() {
        roots.push(Rational::zero());
        rest.remove(0);
    }
    // Integer coefficients with the same roots.
    let lcm = rest.iter().fold(BigInt::from(1), |acc, c| {
        num_integer::lcm(acc, c.denom().clone())
    });
    let ints: Vec<BigInt> = rest
        .iter()
        .map(|c| c.numer() * (&lcm / c.denom()))
        .collect();
    let (Some(ps), Some(qs)) = (divisors(&ints[0]), divisors(ints.last().expect("nonempty")))
    else {
        return (roots, rest);
    };
    for num in &ps {
        for den in &qs {
            for sign in [1i64, -1] {
                if rest.len() <= 1 {
                    return (roots, rest);
                }
                let cand = Rational::new(num * sign, den.clone());
                if roots.contains(&cand) {
                    continue;
                }
                if poly::eval(&rest, &cand).is_zero() {
                    rest = poly::deflate(&rest, &cand);
                    roots.push(cand);
                }
            }
        }
    }
    (roots, rest)
}

/// Roots in `K` of a polynomial of degree at most two.
fn low_degree_roots<K: Scalar>(p: &[K]) -> Option<Vec<K>> {
    let p = poly::trim(p.to_vec());
    match p.len() {
        0 | 1 => Some(Vec::new()),
        2 => Some(vec![-p[0].clone() / p[1].clone()]),
        3 => {
            let lead = p[2].clone();
            let (r1, r2) = quadratic_roots(&(p[1].clone() / lead.clone()), &(p[0].clone() / lead))?;
            Some(vec![r1, r2])
        }
        _ => None,
    }
}

/// All roots in `K` of `p`, or `None` if `p` does not split there with the
/// available exact methods.
fn exact_roots<K: Scalar>(p: &[GaussianRational]) -> Option<Vec<K>> {
    let p = poly::trim(p.to_vec());
    if p.iter().all(GaussianRational::is_real) {
        let real: Vec<Rational> = p.iter().map(|c| c.re.clone()).collect();
        let (found, rest) = rational_roots(&real);
        let mut out: Vec<K> = found.iter().map(K::from_rational).collect();
        let rest: Vec<K> = rest.iter().map(K::from_rational).collect();
        out.extend(low_degree_roots(&rest)?);
        Some(out)
    } else {
        let lifted: Option<Vec<K>> = p.iter().map(K::from_gaussian).collect();
        low_degree_roots(&lifted?)
    }
}

/// Nodes `x + t·y` for the affine roots and `y` for a root at infinity.
fn nodes_from_roots<K: Scalar>(roots: Vec<K>, at_infinity: bool) -> Vec<LinearForm<K>> {
    let mut nodes: Vec<LinearForm<K>> = roots
        .into_iter()
        .map(|t| LinearForm::new(K::one(), t))
        .collect();
    if at_infinity {
        nodes.push(LinearForm::y());
    }
    nodes
}

/// Solves `Σ λ_j ℓ_j^d = f` for the weights.
fn exact_weights<K: Scalar>(
    f: &BinaryForm<K>,
    nodes: &[LinearForm<K>],
) -> Result<Decomposition<K>> {
    let d = f.degree();
    let columns: Vec<Vec<K>> = nodes.iter().map(|l| l.power(d).into_coeffs()).collect();
    let a = Matrix::from_columns(&columns, d + 1)?;
    let weights = solve(&a, f.coeffs())?.ok_or_else(|| {
        Error::Inconsistent("apolar nodes do not span the form; this is a bug".into())
    })?;
    let terms = weights
        .into_iter()
        .zip(nodes)
        .map(|(w, l)| RankOneTerm::new(w, vec![l.clone()]))
        .collect();
    Decomposition::new(vec![d], terms)
}

fn eval_complex(p: &[Complex64], t: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::zero(), |acc, c| acc * t + c)
}

/// Roots of `p` (ascending powers) from the companion matrix, polished by a
/// few Newton steps.
fn numeric_roots(p: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = p.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p[n];
    let companion = DMatrix::from_fn(n, n, |r, c| {
        if c == n - 1 {
            -p[r] / lead
        } else if r == c + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::zero()
        }
    });
    let eig = companion
        .clone()
        .try_schur(1e-14, 10_000)
        .ok_or_else(|| Error::Numeric("companion eigenvalue iteration did not converge".into()))?
        .eigenvalues()
        .ok_or_else(|| Error::Numeric("companion eigenvalues unavailable".into()))?;
    let dp: Vec<Complex64> = p[..=n]
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect();
    let mut roots: Vec<Complex64> = eig.iter().copied().collect();
    for r in &mut roots {
        for _ in 0..20 {
            let fp = eval_complex(&p[..=n], *r);
            let dfp = eval_complex(&dp, *r);
            if dfp.norm() == 0.0 {
                break;
            }
            let step = fp / dfp;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
        if !(r.re.is_finite() && r.im.is_finite()) {
            return Err(Error::Numeric("root polishing diverged".into()));
        }
    }
    Ok(roots)
}

/// Least-squares weights for numeric nodes.
fn numeric_weights(
    f: &BinaryForm<ApproxComplex>,
    nodes: &[LinearForm<ApproxComplex>],
) -> Result<Decomposition<ApproxComplex>> {
    let d = f.degree();
    let powers: Vec<BinaryForm<ApproxComplex>> = nodes.iter().map(|l| l.power(d)).collect();
    let a = DMatrix::from_fn(d + 1, nodes.len(), |r, c| powers[c].coeff(r).0);
    let b = DMatrix::from_fn(d + 1, 1, |r, _| f.coeff(r).0);
    let svd = a.clone().svd(true, true);
    let mut x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numeric(format!("least-squares solve failed: {e}")))?;
    // One round of iterative refinement.
    let r = &b - &a * &x;
    if let Ok(dx) = svd.solve(&r, 1e-14) {
        x += dx;
    }
    let terms = nodes
        .iter()
        .enumerate()
        .map(|(j, l)| RankOneTerm::new(ApproxComplex(x[(j, 0)]), vec![l.clone()]))
        .collect();
    Decomposition::new(vec![d], terms)
}

/// A minimal Waring decomposition together with the rank data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SylvesterDecomposition {
    pub degree: usize,
    pub rank: usize,
    pub border_rank: usize,
    pub non_unique: bool,
    pub apolar_form: BinaryForm<GaussianRational>,
    pub decomposition: AnyDecomposition,
    pub residual: f64,
}

impl SylvesterDecomposition {
    pub fn field(&self) -> FieldTag {
        self.decomposition.field()
    }
}

/// Minimal Waring decomposition of `f`.
///
/// When the apolar form splits over the requested exact field the result is
/// exact there; otherwise, or when `field` is [`FieldTag::Approx`], the
/// nodes are computed numerically and the decomposition is accepted only if
/// its residual is at most `1e-9`.
pub fn sylvester_decompose<F: Scalar>(
    f: &BinaryForm<F>,
    field: FieldTag,
) -> Result<SylvesterDecomposition> {
    nonzero(f, "form")?;
    let g_form: BinaryForm<GaussianRational> = match f
        .coeffs()
        .iter()
        .map(Scalar::to_gaussian)
        .collect::<Option<Vec<_>>>()
    {
        Some(c) => BinaryForm::new(c)?,
        None => {
            return Err(Error::InvalidArgument(
                "Sylvester's algorithm needs an exact input form".into(),
            ))
        }
    };
    if field == FieldTag::Rational && !g_form.coeffs().iter().all(GaussianRational::is_real) {
        return Err(Error::InvalidArgument(
            "a form with non-real coefficients has no decomposition over Q".into(),
        ));
    }
    let analysis = sylvester_analysis(&g_form)?;
    let d = analysis.degree;

    let finish = |decomposition: AnyDecomposition, residual: f64| SylvesterDecomposition {
        degree: d,
        rank: analysis.rank,
        border_rank: analysis.border_rank,
        non_unique: analysis.non_unique,
        apolar_form: analysis.apolar_form.clone(),
        decomposition,
        residual,
    };

    if d == 0 {
        return Err(Error::InvalidArgument(
            "constant forms have no tensor representation; degree must be at least 1".into(),
        ));
    }

    let (p, lost) = dehomogenize(&analysis.apolar_form);
    let at_infinity = lost == 1;
    let target = PSTensor::from_form(&g_form)?;

    match field {
        FieldTag::Rational => {
            if let Some(roots) = exact_roots::<Rational>(&p) {
                let f_q = g_form.map_field(|c| c.re.clone());
                let dec = exact_weights(&f_q, &nodes_from_roots(roots, at_infinity))?;
                let any = AnyDecomposition::Rational(dec);
                return Ok(finish(any.clone(), checked_exact(&any, &target)?));
            }
        }
        FieldTag::Gaussian => {
            if let Some(roots) = exact_roots::<GaussianRational>(&p) {
                let dec = exact_weights(&g_form, &nodes_from_roots(roots, at_infinity))?;
                let any = narrow_to_rational(dec);
                return Ok(finish(any.clone(), checked_exact(&any, &target)?));
            }
        }
        FieldTag::Approx => {}
    }

    let pc: Vec<Complex64> = p.iter().map(|c| c.to_approx().0).collect();
    let roots = numeric_roots(&pc)?;
    // Unit max-norm nodes keep the power columns on a common scale.
    let mut nodes: Vec<LinearForm<ApproxComplex>> = roots
        .into_iter()
        .map(|t| {
            if t.norm() <= 1.0 {
                LinearForm::new(ApproxComplex::new(1.0, 0.0), ApproxComplex(t))
            } else {
                LinearForm::new(ApproxComplex(t.inv()), ApproxComplex::new(1.0, 0.0))
            }
        })
        .collect();
    if at_infinity {
        nodes.push(LinearForm::y());
    }
    let f_c = g_form.map_field(Scalar::to_approx);
    let dec = numeric_weights(&f_c, &nodes)?;
    let target_c = target.map_field(Scalar::to_approx);
    let residual = crate::forms::expand(&dec)?.max_abs_diff(&target_c)?;
    if residual > DEFAULT_TOLERANCE {
        return Err(Error::Numeric(format!(
            "numeric decomposition residual {residual:e} exceeds {DEFAULT_TOLERANCE:e}"
        )));
    }
    Ok(finish(AnyDecomposition::Approx(dec), residual))
}

/// Reports a ℚ(i) decomposition with only real entries as rational.
fn narrow_to_rational(dec: Decomposition<GaussianRational>) -> AnyDecomposition {
    let real = dec
        .terms
        .iter()
        .all(|t| t.weight.is_real() && t.vectors.iter().all(|v| v.a.is_real() && v.b.is_real()));
    if real {
        AnyDecomposition::Rational(dec.map_field(|z| z.re.clone()))
    } else {
        AnyDecomposition::Gaussian(dec)
    }
}

fn checked_exact(dec: &AnyDecomposition, target: &PSTensor<GaussianRational>) -> Result<f64> {
    let exact = dec.to_gaussian().expect("exact decomposition");
    let expanded = crate::forms::expand(&exact)?;
    if expanded != *target {
        return Err(Error::IdentityCheck(
            "exact Sylvester decomposition does not expand to the input".into(),
        ));
    }
    Ok(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::expand;

    type Q = Rational;

    fn form(c: &[i64]) -> BinaryForm<Q> {
        BinaryForm::from_i64s(c).unwrap()
    }

    fn w(d: usize) -> BinaryForm<Q> {
        BinaryForm::monomial(d, 1)
    }

    #[test]
    fn catalecticant_examples() {
        let m = catalecticant(&BinaryForm::<Q>::monomial(4, 0), 1).unwrap();
        assert_eq!(rank(&m), 1);

        let m = catalecticant(&w(3), 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(rank(&m), 2);
        // ∂_x(x²y) = 2xy, ∂_y(x²y) = x²
        assert_eq!(m.column(0), vec![Q::from(0), Q::from(2), Q::from(0)]);
        assert_eq!(m.column(1), vec![Q::from(1), Q::from(0), Q::from(0)]);

        assert_eq!(rank(&catalecticant(&form(&[1, 0, 0, 1]), 1).unwrap()), 2);
        assert!(catalecticant(&w(3), 4).is_err());
    }

    #[test]
    fn border_rank_examples() {
        for d in 2..=10 {
            assert_eq!(border_rank(&w(d)).unwrap(), 2, "W_{d}");
            assert_eq!(border_rank(&BinaryForm::<Q>::monomial(d, 0)).unwrap(), 1);
        }
        // g_r = x^{d-r+1} y^{r-1}, d = 8, r = 4
        assert_eq!(border_rank(&BinaryForm::<Q>::monomial(8, 3)).unwrap(), 4);
        assert!(matches!(
            border_rank(&BinaryForm::<Q>::zero(3)),
            Err(Error::ZeroInput(_))
        ));
    }

    #[test]
    fn apolar_form_of_w3() {
        // Hand computation: catalecticant(x²y, 2) = [[0, 2, 0], [2, 0, 0]]
        // has kernel spanned by (0, 0, 1), i.e. Y².
        let m = catalecticant(&w(3), 2).unwrap();
        assert_eq!(m, Matrix::from_i64_rows(&[&[0, 2, 0], &[2, 0, 0]]).unwrap());
        let g = apolar_form(&w(3), 2).unwrap().unwrap();
        assert_eq!(g.coeffs(), &[Q::from(0), Q::from(0), Q::from(1)]);
        assert!(!is_squarefree(&g).unwrap());
    }

    #[test]
    fn apolar_form_of_pure_power() {
        // x^d is killed by ∂_y: dual form Y.
        let g = apolar_form(&BinaryForm::<Q>::monomial(5, 0), 1)
            .unwrap()
            .unwrap();
        assert_eq!(g.coeffs(), &[Q::from(0), Q::from(1)]);
    }

    #[test]
    fn generic_odd_form_has_middle_apolar_form() {
        let f = form(&[3, -1, 4, 1, -5, 9, 2, 6]);
        let r = f.degree().div_ceil(2);
        assert!(apolar_form(&f, r).unwrap().is_some());
    }

    #[test]
    fn squarefree_examples() {
        assert!(!is_squarefree(&BinaryForm::<Q>::monomial(2, 2)).unwrap());
        assert!(!is_squarefree(&BinaryForm::<Q>::monomial(2, 0)).unwrap());
        assert!(is_squarefree(&BinaryForm::<Q>::monomial(2, 1)).unwrap());
        assert!(is_squarefree(&form(&[1, 0, 1])).unwrap());
        assert!(!is_squarefree(&form(&[1, 2, 1])).unwrap());
        assert!(is_squarefree(&form(&[0, 1, 0, -1])).unwrap());
        assert!(!is_squarefree(&form(&[0, 0, 1, 0])).unwrap());
        assert!(is_squarefree(&BinaryForm::<Q>::monomial(0, 0)).unwrap());
        assert!(is_squarefree(&BinaryForm::<Q>::zero(2)).is_err());
    }

    #[test]
    fn sylvester_rank_of_w_states() {
        for d in 1..=12 {
            assert_eq!(sylvester_rank(&w(d)).unwrap(), d, "W_{d}");
        }
    }

    #[test]
    fn sylvester_rank_of_monomials() {
        assert_eq!(sylvester_rank(&BinaryForm::<Q>::monomial(9, 3)).unwrap(), 7);
        assert_eq!(sylvester_rank(&BinaryForm::<Q>::monomial(6, 3)).unwrap(), 4);
        assert_eq!(sylvester_rank(&BinaryForm::<Q>::monomial(6, 0)).unwrap(), 1);
        assert_eq!(sylvester_rank(&form(&[1, 0, 0, 1])).unwrap(), 2);
        assert_eq!(sylvester_rank(&BinaryForm::<Q>::monomial(0, 0)).unwrap(), 1);
    }

    #[test]
    fn ghz_cubic_decomposes_over_q() {
        let f = form(&[1, 0, 0, 1]);
        let out = sylvester_decompose(&f, FieldTag::Rational).unwrap();
        assert_eq!(out.rank, 2);
        let AnyDecomposition::Rational(dec) = &out.decomposition else {
            panic!("expected an exact rational decomposition");
        };
        assert_eq!(dec.len(), 2);
        assert_eq!(expand(dec).unwrap(), PSTensor::from_form(&f).unwrap());
        let mut nodes: Vec<_> = dec.terms.iter().map(|t| t.vectors[0].clone()).collect();
        nodes.sort_by_key(|l| (l.a.clone(), l.b.clone()));
        assert_eq!(nodes, vec![LinearForm::y(), LinearForm::x()]);
        assert!(dec.terms.iter().all(|t| t.weight == Q::from(1)));
    }

    #[test]
    fn w3_numeric_decomposition() {
        let out = sylvester_decompose(&w(3), FieldTag::Approx).unwrap();
        assert_eq!(out.rank, 3);
        assert_eq!(out.decomposition.len(), 3);
        assert!(out.residual <= 1e-9);
        let report = out
            .decomposition
            .verify_against(&PSTensor::from_form(&w(3)).unwrap(), Some(1e-9))
            .unwrap();
        assert!(report.ok);
    }

    #[test]
    fn cubic_with_imaginary_roots_needs_sqrt3() {
        // y(x² + y²): apolar quadric 3X² - Y², nodes x ± √3 y.
        let f = form(&[0, 1, 0, 1]);
        let analysis = sylvester_analysis(&f).unwrap();
        assert_eq!(analysis.rank, 2);
        let p = &analysis.apolar_form;
        let ratio = p.coeff(0).clone() / p.coeff(2).clone();
        assert_eq!(ratio, Q::from(-3));
        assert_eq!(p.coeff(1), &Q::from(0));

        let out = sylvester_decompose(&f, FieldTag::Gaussian).unwrap();
        assert_eq!(out.field(), FieldTag::Approx);
        assert_eq!(out.decomposition.len(), 2);
        assert!(out.residual <= 1e-9);
    }

    #[test]
    fn gaussian_split_when_square_in_q_i() {
        // x²y - y³/3: apolar 3·(-1/3)X² - Y² = -(X² + Y²), nodes x ± i y.
        let f = BinaryForm::new(vec![Q::from(0), Q::from(1), Q::from(0), Q::new(-1, 3)]).unwrap();
        let out = sylvester_decompose(&f, FieldTag::Gaussian).unwrap();
        assert_eq!(out.field(), FieldTag::Gaussian);
        assert_eq!(out.decomposition.len(), 2);
        let report = out
            .decomposition
            .verify_against(&PSTensor::from_form(&f).unwrap(), None)
            .unwrap();
        assert!(report.ok);
        assert_eq!(report.residual, 0.0);
        // Over Q it only splits numerically.
        let over_q = sylvester_decompose(&f, FieldTag::Rational).unwrap();
        assert_eq!(over_q.field(), FieldTag::Approx);
    }

    #[test]
    fn rational_split_of_cubic_factor() {
        // x²y + 3y³: apolar 9X² - Y², nodes x ± 3y, rational.
        let f = form(&[0, 1, 0, 3]);
        let out = sylvester_decompose(&f, FieldTag::Rational).unwrap();
        assert_eq!(out.field(), FieldTag::Rational);
        assert_eq!(out.decomposition.len(), 2);
    }

    #[test]
    fn boundary_case_is_flagged() {
        let f = BinaryForm::<Q>::monomial(4, 2);
        let a = sylvester_analysis(&f).unwrap();
        assert_eq!(a.rank, 3);
        assert!(a.non_unique);
        let out = sylvester_decompose(&f, FieldTag::Gaussian).unwrap();
        assert!(out.non_unique);
        assert!(
            out.decomposition
                .verify_against(&PSTensor::from_form(&f).unwrap(), None)
                .unwrap()
                .ok
        );
    }

    #[test]
    fn decompose_rejects_zero() {
        assert!(matches!(
            sylvester_decompose(&BinaryForm::<Q>::zero(3), FieldTag::Rational),
            Err(Error::ZeroInput(_))
        ));
    }

    #[test]
    fn rational_root_search() {
        // (t - 2)(t + 1/3)(t² + 1) = t⁴ - 5/3 t³ + 1/3 t² - 5/3 t - 2/3
        let p: Vec<Q> = vec![
            Q::new(-2, 3),
            Q::new(-5, 3),
            Q::new(1, 3),
            Q::new(-5, 3),
            Q::from(1),
        ];
        let (mut roots, rest) = rational_roots(&p);
        roots.sort();
        assert_eq!(roots, vec![Q::new(-1, 3), Q::from(2)]);
        assert_eq!(poly::degree(&rest), Some(2));
        let gauss: Vec<GaussianRational> = p.iter().cloned().map(GaussianRational::from).collect();
        assert_eq!(exact_roots::<GaussianRational>(&gauss).unwrap().len(), 4);
        assert!(exact_roots::<Rational>(&gauss).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn power_sum(d: usize, nodes: &[i64], weights: &[i64]) -> BinaryForm<Q> {
            nodes
                .iter()
                .zip(weights)
                .map(|(&t, &w)| {
                    LinearForm::new(Q::from(1), Q::from(t))
                        .power(d)
                        .scale(&Q::from(w))
                })
                .reduce(|a, b| a.add(&b).unwrap())
                .unwrap()
        }

        fn power_sum_case() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>)> {
            (2usize..=12).prop_flat_map(|d| {
                let max_r = (d + 2) / 2;
                (1..=max_r).prop_flat_map(move |r| {
                    (
                        Just(d),
                        proptest::sample::subsequence((-9i64..=9).collect::<Vec<_>>(), r),
                        proptest::collection::vec((1i64..=5).prop_union(-5i64..=-1), r),
                    )
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn power_sums_have_their_length_as_rank((d, nodes, weights) in power_sum_case()) {
                let f = power_sum(d, &nodes, &weights);
                prop_assert_eq!(sylvester_rank(&f).unwrap(), nodes.len());
            }

            #[test]
            fn rank_is_gl2_invariant(
                coeffs in proptest::collection::vec(-4i64..=4, 2..=8),
                m in proptest::array::uniform4(-3i64..=3),
            ) {
                prop_assume!(coeffs.iter().any(|&c| c != 0));
                prop_assume!(m[0] * m[3] - m[1] * m[2] != 0);
                let f = form(&coeffs);
                let g = f.substitute([
                    [Q::from(m[0]), Q::from(m[1])],
                    [Q::from(m[2]), Q::from(m[3])],
                ]);
                prop_assert_eq!(sylvester_rank(&f).unwrap(), sylvester_rank(&g).unwrap());
                prop_assert_eq!(border_rank(&f).unwrap(), border_rank(&g).unwrap());
            }

            #[test]
            fn rank_bounds_and_decompositions_verify(
                coeffs in proptest::collection::vec(-5i64..=5, 2..=8),
            ) {
                prop_assume!(coeffs.iter().any(|&c| c != 0));
                let f = form(&coeffs);
                let d = f.degree();
                let b = border_rank(&f).unwrap();
                let r = sylvester_rank(&f).unwrap();
                prop_assert!(b <= r && r <= d.max(1));
                prop_assert!(b <= (d + 2) / 2);
                let out = sylvester_decompose(&f, FieldTag::Gaussian).unwrap();
                prop_assert_eq!(out.decomposition.len(), r);
                let report = out
                    .decomposition
                    .verify_against(&PSTensor::from_form(&f).unwrap(), None)
                    .unwrap();
                prop_assert!(report.ok, "residual {}", report.residual);
            }
        }
    }
}
