//! Scalar fields used throughout the crate.
//!
//! Two exact fields are supported, the rationals [`Rational`] and the
//! Gaussian rationals [`GaussianRational`] (ℚ(i)), together with a 64-bit
//! complex fallback [`ApproxComplex`] used only when an apolar form does not
//! split over an exact field. All three implement [`Scalar`], so the tensor,
//! matrix and decomposition types are generic over the field.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Default absolute tolerance for comparisons of approximate scalars.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Which field a value (or a whole decomposition) lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldTag {
    #[serde(rename = "Q")]
    Rational,
    #[serde(rename = "Q(i)")]
    Gaussian,
    #[serde(rename = "approx")]
    Approx,
}

impl FieldTag {
    pub fn is_exact(self) -> bool {
        !matches!(self, FieldTag::Approx)
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldTag::Rational => "Q",
            FieldTag::Gaussian => "Q(i)",
            FieldTag::Approx => "approx",
        })
    }
}

impl FromStr for FieldTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "q" | "rational" => Ok(FieldTag::Rational),
            "q(i)" | "qi" | "gaussian" => Ok(FieldTag::Gaussian),
            "approx" | "c" | "numeric" => Ok(FieldTag::Approx),
            other => Err(format!(
                "unknown field `{other}` (expected Q, Qi or approx)"
            )),
        }
    }
}

/// Field operations needed by the rest of the crate.
///
/// Division by zero panics for every implementation, like integer division.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const FIELD: FieldTag;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn from_gaussian(z: &GaussianRational) -> Option<Self>;

    /// Exact zero test. Approximate scalars compare against literal zero;
    /// tolerance-aware code uses [`Scalar::magnitude`].
    fn is_zero(&self) -> bool;

    /// Absolute value as a float, used for residuals and numeric pivoting.
    fn magnitude(&self) -> f64;

    fn to_approx(&self) -> ApproxComplex;
    fn to_gaussian(&self) -> Option<GaussianRational>;

    /// A square root inside the field, if one exists.
    fn sqrt(&self) -> Option<Self>;

    fn is_exact() -> bool {
        Self::FIELD.is_exact()
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Rational
// ---------------------------------------------------------------------------

/// Arbitrary-precision rational number in lowest terms with positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Nonnegative square root when `self` is the square of a rational.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.0.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &n * &n == *self.numer() && &d * &d == *self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(q: BigRational) -> Self {
        Rational(q)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| format!("invalid rational `{s}`"))?;
        let d: BigInt = d.parse().map_err(|_| format!("invalid rational `{s}`"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in `{s}`"));
        }
        Ok(Rational::new(n, d))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", self.numer(), self.denom()))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Int(i64),
        }
        match Repr::deserialize(d)? {
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(n) => Ok(Rational::from(n)),
        }
    }
}

macro_rules! forward_binop {
    ($ty:ident, $trait:ident, $method:ident, |$a:ident, $b:ident| $body:expr) => {
        impl $trait for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                let $a = &self;
                let $b = &rhs;
                $body
            }
        }
        impl<'a, 'b> $trait<&'b $ty> for &'a $ty {
            type Output = $ty;
            fn $method(self, rhs: &'b $ty) -> $ty {
                let $a = self;
                let $b = rhs;
                $body
            }
        }
    };
}

forward_binop!(Rational, Add, add, |a, b| Rational(&a.0 + &b.0));
forward_binop!(Rational, Sub, sub, |a, b| Rational(&a.0 - &b.0));
forward_binop!(Rational, Mul, mul, |a, b| Rational(&a.0 * &b.0));
forward_binop!(Rational, Div, div, |a, b| {
    assert!(!b.0.is_zero(), "division by zero rational");
    Rational(&a.0 / &b.0)
});

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Scalar for Rational {
    const FIELD: FieldTag = FieldTag::Rational;

    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn one() -> Self {
        Rational(BigRational::one())
    }
    fn from_i64(n: i64) -> Self {
        Rational::from(n)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn from_gaussian(z: &GaussianRational) -> Option<Self> {
        z.im.is_zero().then(|| z.re.clone())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    fn to_approx(&self) -> ApproxComplex {
        ApproxComplex::new(self.to_f64(), 0.0)
    }
    fn to_gaussian(&self) -> Option<GaussianRational> {
        Some(GaussianRational::from(self.clone()))
    }
    fn sqrt(&self) -> Option<Self> {
        self.sqrt_exact()
    }
}

// ---------------------------------------------------------------------------
// Gaussian rationals
// ---------------------------------------------------------------------------

/// Element `re + im·i` of ℚ(i).
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn i() -> Self {
        GaussianRational::new(Rational::zero(), Rational::one())
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -self.im.clone())
    }

    /// `re² + im²`.
    pub fn norm(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl From<Rational> for GaussianRational {
    fn from(re: Rational) -> Self {
        GaussianRational::new(re, Rational::zero())
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) if self.im.is_negative() => write!(f, "{}-{}i", self.re, self.im.abs()),
            (false, false) => write!(f, "{}+{}i", self.re, self.im),
        }
    }
}

forward_binop!(GaussianRational, Add, add, |a, b| GaussianRational::new(
    &a.re + &b.re,
    &a.im + &b.im
));
forward_binop!(GaussianRational, Sub, sub, |a, b| GaussianRational::new(
    &a.re - &b.re,
    &a.im - &b.im
));
forward_binop!(GaussianRational, Mul, mul, |a, b| GaussianRational::new(
    &a.re * &b.re - &a.im * &b.im,
    &a.re * &b.im + &a.im * &b.re
));
forward_binop!(GaussianRational, Div, div, |a, b| {
    let n = b.norm();
    assert!(!n.is_zero(), "division by zero gaussian rational");
    let num = a * &b.conj();
    GaussianRational::new(num.re / n.clone(), num.im / n)
});

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

impl Scalar for GaussianRational {
    const FIELD: FieldTag = FieldTag::Gaussian;

    fn zero() -> Self {
        GaussianRational::default()
    }
    fn one() -> Self {
        GaussianRational::from(Rational::one())
    }
    fn from_i64(n: i64) -> Self {
        GaussianRational::from(Rational::from(n))
    }
    fn from_rational(q: &Rational) -> Self {
        GaussianRational::from(q.clone())
    }
    fn from_gaussian(z: &GaussianRational) -> Option<Self> {
        Some(z.clone())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }
    fn to_approx(&self) -> ApproxComplex {
        ApproxComplex::new(self.re.to_f64(), self.im.to_f64())
    }
    fn to_gaussian(&self) -> Option<GaussianRational> {
        Some(self.clone())
    }

    /// `(u + vi)² = p + qi` needs `|p + qi|` rational and then
    /// `u² = (p + |z|)/2`, `v² = (|z| − p)/2` both rational squares.
    /// Returns the root with `u > 0`, or `v ≥ 0` when `u = 0`.
    fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        let modulus = self.norm().sqrt_exact()?;
        let two = Rational::from(2);
        let u = ((&self.re + &modulus) / two.clone()).sqrt_exact()?;
        let v = ((&modulus - &self.re) / two).sqrt_exact()?;
        // Fix the relative sign so that 2uv = im.
        let v = if self.im.is_negative() { -v } else { v };
        let root = GaussianRational::new(u, v);
        debug_assert_eq!(&root * &root, *self);
        Some(root)
    }
}

// ---------------------------------------------------------------------------
// Approximate complex numbers
// ---------------------------------------------------------------------------

/// Double-precision complex number. JSON form is `[re, im]`.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ApproxComplex(pub Complex64);

impl ApproxComplex {
    pub fn new(re: f64, im: f64) -> Self {
        ApproxComplex(Complex64::new(re, im))
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn is_finite(&self) -> bool {
        self.0.re.is_finite() && self.0.im.is_finite()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.0 - other.0).norm() <= tol
    }
}

impl From<Complex64> for ApproxComplex {
    fn from(z: Complex64) -> Self {
        ApproxComplex(z)
    }
}

impl fmt::Debug for ApproxComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e}, {:e})", self.0.re, self.0.im)
    }
}

impl fmt::Display for ApproxComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for ApproxComplex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ApproxComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        let z = ApproxComplex::new(re, im);
        if !z.is_finite() {
            return Err(serde::de::Error::custom("non-finite complex component"));
        }
        Ok(z)
    }
}

forward_binop!(ApproxComplex, Add, add, |a, b| ApproxComplex(a.0 + b.0));
forward_binop!(ApproxComplex, Sub, sub, |a, b| ApproxComplex(a.0 - b.0));
forward_binop!(ApproxComplex, Mul, mul, |a, b| ApproxComplex(a.0 * b.0));
forward_binop!(ApproxComplex, Div, div, |a, b| {
    assert!(!b.0.is_zero(), "division by zero complex");
    ApproxComplex(a.0 / b.0)
});

impl Neg for ApproxComplex {
    type Output = ApproxComplex;
    fn neg(self) -> ApproxComplex {
        ApproxComplex(-self.0)
    }
}

impl Scalar for ApproxComplex {
    const FIELD: FieldTag = FieldTag::Approx;

    fn zero() -> Self {
        ApproxComplex::default()
    }
    fn one() -> Self {
        ApproxComplex::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        ApproxComplex::new(n as f64, 0.0)
    }
    fn from_rational(q: &Rational) -> Self {
        q.to_approx()
    }
    fn from_gaussian(z: &GaussianRational) -> Option<Self> {
        Some(z.to_approx())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.0.norm()
    }
    fn to_approx(&self) -> ApproxComplex {
        *self
    }
    fn to_gaussian(&self) -> Option<GaussianRational> {
        None
    }
    fn sqrt(&self) -> Option<Self> {
        Some(ApproxComplex(self.0.sqrt()))
    }
}

/// Roots of `t² + p·t + q` in the field of `F`, when the discriminant has a
/// square root there. The first root uses the field's canonical square root.
pub fn quadratic_roots<F: Scalar>(p: &F, q: &F) -> Option<(F, F)> {
    let disc = p.clone() * p.clone() - F::from_i64(4) * q.clone();
    let s = disc.sqrt()?;
    let two = F::from_i64(2);
    let r1 = (s.clone() - p.clone()) / two.clone();
    let r2 = (-s - p.clone()) / two;
    Some((r1, r2))
}
