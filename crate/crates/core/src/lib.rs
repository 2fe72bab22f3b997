//! Certified bounds and explicit decompositions for the partially symmetric
//! rank of tensors in `S^{d1}C² ⊗ … ⊗ S^{dk}C²`.
//!
//! Upper bounds come with decompositions that can be re-expanded and checked
//! coefficient by coefficient; lower bounds come with flattening matrices
//! whose exact rank is the certificate.
//!
//! - [`scalars`]: ℚ, ℚ(i) and a double-precision complex fallback.
//! - [`forms`]: binary forms, tensors, rank-one terms, decompositions.
//! - [`exactla`]: Gauss–Jordan elimination over exact fields.
//! - [`apolarity`]: catalecticants and Sylvester's algorithm for binary forms.
//! - [`flatten`]: multi-factor flattenings, polarization and the merge map.
//! - [`constructions`]: W-state decompositions and closed-form bounds.
//! - [`bounds`]: aggregated bound reports.
//! - [`repro`]: the reproduction table behind `psrank repro`.

pub mod apolarity;
pub mod bounds;
pub mod constructions;
pub mod error;
pub mod exactla;
pub mod flatten;
pub mod forms;
pub mod json;
pub mod repro;
pub mod scalars;

pub use error::{Error, Result};
pub use forms::{
    BinaryForm, Decomposition, FactorDecomposition, LinearForm, PSTensor, RankOneTerm,
};
pub use scalars::{ApproxComplex, FieldTag, GaussianRational, Rational, Scalar};
