//! Hardy–Littlewood constants for `m`-linear forms on `ℓ_p^n`.
//!
//! The crate has two halves. The closed-form half evaluates Khinchin
//! constants, Bohnenblust–Hille products and the Hardy–Littlewood upper
//! bounds ([`constants`]), together with the exponent bookkeeping behind
//! them ([`exponents`]). The numerical half builds dense multilinear forms,
//! computes their coefficient mixed norms and estimates operator norms
//! ([`multilinear`]), and drives seeded randomized searches and sweeps on
//! top of them ([`experiments`]).
//!
//! Numerical code is generic over the scalar type. Exponent ladders work
//! over any [`exponents::LadderScalar`] (exact [`Rational`] or `f64`), and
//! multilinear forms over any [`multilinear::Scalar`] (real or complex,
//! `f32` or `f64`). The aliases below name the instantiations used by the
//! command-line tool.

pub mod cli;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod multilinear;
pub mod special_functions;

pub use constants::{BoundReport, FieldTag};
pub use error::{Error, Result};
pub use exponents::{ExponentLadder, ExtendedP, HLParams};
pub use multilinear::{MultilinearForm, NormOptions, RatioResult};

/// Arbitrary-precision rational used for exact exponent arithmetic.
pub type Rational = num_rational::BigRational;

/// Complex scalar with `f64` parts.
pub type Complex64 = num_complex::Complex64;

/// Exponent ladder computed in exact rational arithmetic.
pub type RationalLadder = ExponentLadder<Rational>;

/// Exponent ladder computed in double precision.
pub type FloatLadder = ExponentLadder<f64>;

/// Real `m`-linear form with `f64` coefficients.
pub type RealForm = MultilinearForm<f64>;

/// Complex `m`-linear form with `f64` parts.
pub type ComplexForm = MultilinearForm<Complex64>;

/// Hardy–Littlewood parameters with exact rational `p`.
pub type RationalParams = HLParams<Rational>;
