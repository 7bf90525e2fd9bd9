//! Hardy–Littlewood exponent, the `s`/`λ_0` choice, the `λ_j` ladder and
//! the interpolation weights `θ_1`, `θ_2`.
//!
//! Everything here is generic over [`LadderScalar`]. With [`Rational`]
//! the identities between exponents hold with zero error, which is the
//! point: a transcription slip in a formula shows up as a hard mismatch
//! instead of hiding under a tolerance.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constants::FieldTag;
use crate::error::{Error, Result};
use crate::Rational;

/// Scalar type the exponent machinery can run on.
pub trait LadderScalar: Num + Clone + PartialOrd + fmt::Debug + fmt::Display {
    /// Whether arithmetic is exact, so identities are compared with `==`.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Equality up to the scalar's arithmetic: exact for rationals,
    /// `1e-12` relative (floored at absolute `1e-12`) for floats.
    fn agrees(&self, other: &Self) -> bool;

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl LadderScalar for Rational {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn agrees(&self, other: &Self) -> bool {
        self == other
    }
}

macro_rules! float_ladder_scalar {
    ($t:ty) => {
        impl LadderScalar for $t {
            const EXACT: bool = false;

            fn from_int(v: i64) -> Self {
                v as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn agrees(&self, other: &Self) -> bool {
                let scale = 1.0_f64.max(self.abs() as f64).max(other.abs() as f64);
                ((*self - *other).abs() as f64) <= 1e-12 * scale
            }
        }
    };
}

float_ladder_scalar!(f64);

/// A real exponent that may also be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtendedP<S> {
    Finite(S),
    Infinite,
}

impl<S: LadderScalar> ExtendedP<S> {
    pub fn finite(v: S) -> Self {
        ExtendedP::Finite(v)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedP::Infinite)
    }

    pub fn as_finite(&self) -> Option<&S> {
        match self {
            ExtendedP::Finite(v) => Some(v),
            ExtendedP::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> ExtendedP<f64> {
        match self {
            ExtendedP::Finite(v) => ExtendedP::Finite(v.to_f64()),
            ExtendedP::Infinite => ExtendedP::Infinite,
        }
    }

    /// `p ≥ v` with `∞` above everything.
    pub fn at_least(&self, v: &S) -> bool {
        match self {
            ExtendedP::Finite(p) => p >= v,
            ExtendedP::Infinite => true,
        }
    }

    /// Conjugate exponent `x/(x − 1)`, with `1* = ∞` and `∞* = 1`.
    ///
    /// Returns a domain error for `x < 1`.
    pub fn conjugate(&self) -> Result<Self> {
        match self {
            ExtendedP::Infinite => Ok(ExtendedP::Finite(S::one())),
            ExtendedP::Finite(x) => {
                let one = S::one();
                if *x < one {
                    Err(Error::domain(format!("conjugate exponent needs x ≥ 1, got {x}")))
                } else if *x == one {
                    Ok(ExtendedP::Infinite)
                } else {
                    Ok(ExtendedP::Finite(x.clone() / (x.clone() - one)))
                }
            }
        }
    }

    pub fn agrees(&self, other: &Self) -> bool {
        match (self, other) {
            (ExtendedP::Infinite, ExtendedP::Infinite) => true,
            (ExtendedP::Finite(a), ExtendedP::Finite(b)) => a.agrees(b),
            _ => false,
        }
    }
}

impl ExtendedP<f64> {
    /// Value as a plain `f64`, with `∞` mapped to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match self {
            ExtendedP::Finite(v) => *v,
            ExtendedP::Infinite => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::domain("p is NaN"))
        } else if v == f64::INFINITY {
            Ok(ExtendedP::Infinite)
        } else if v.is_infinite() {
            Err(Error::domain("p = -inf"))
        } else {
            Ok(ExtendedP::Finite(v))
        }
    }
}

impl<S: fmt::Display> fmt::Display for ExtendedP<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedP::Finite(v) => write!(f, "{v}"),
            ExtendedP::Infinite => f.write_str("inf"),
        }
    }
}

fn is_infinity_token(s: &str) -> bool {
    matches!(
        s.to_ascii_lowercase().as_str(),
        "inf" | "+inf" | "infinity" | "+infinity" | "∞"
    )
}

/// Parses an integer, a fraction `a/b`, a decimal such as `4.5`, or `inf`.
/// Decimals are converted to the exact rational they spell.
impl FromStr for ExtendedP<Rational> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if is_infinity_token(s) {
            return Ok(ExtendedP::Infinite);
        }
        parse_rational(s).map(ExtendedP::Finite)
    }
}

impl FromStr for ExtendedP<f64> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if is_infinity_token(s) {
            return Ok(ExtendedP::Infinite);
        }
        if s.contains('/') {
            let r = parse_rational(s)?;
            return Ok(ExtendedP::Finite(LadderScalar::to_f64(&r)));
        }
        let v: f64 = s.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
        ExtendedP::from_f64(v)
    }
}

/// Parses `a`, `a/b` or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("expected an integer, a/b, a decimal or inf; got {s:?}"));
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            t => t.parse().map_err(|_| bad())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = Rational::new(int_part.abs() * &scale + frac_part, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let v: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(v))
}

impl<S: fmt::Display> Serialize for ExtendedP<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, S> Deserialize<'de> for ExtendedP<S>
where
    ExtendedP<S>: FromStr<Err = Error>,
{
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The pair `(m, p)` together with the scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct HLParams<S> {
    pub m: u32,
    pub p: ExtendedP<S>,
    pub field: FieldTag,
}

impl<S: LadderScalar> HLParams<S> {
    /// Validates `m ≥ 2` and `2m ≤ p ≤ ∞`.
    pub fn new(m: u32, p: ExtendedP<S>, field: FieldTag) -> Result<Self> {
        validate(m, &p)?;
        Ok(Self { m, p, field })
    }

    pub fn to_f64(&self) -> HLParams<f64> {
        HLParams {
            m: self.m,
            p: self.p.to_f64(),
            field: self.field,
        }
    }
}

pub(crate) fn validate<S: LadderScalar>(m: u32, p: &ExtendedP<S>) -> Result<()> {
    if m < 2 {
        return Err(Error::domain(format!("m must be at least 2, got {m}")));
    }
    let two_m = S::from_int(2 * i64::from(m));
    if !p.at_least(&two_m) {
        return Err(Error::domain(format!(
            "p must satisfy 2m ≤ p ≤ ∞; got m = {m}, p = {p}"
        )));
    }
    Ok(())
}

/// `ρ = 2mp/(mp + p − 2m)`, and `2m/(m + 1)` at `p = ∞`.
pub fn hl_exponent<S: LadderScalar>(m: u32, p: &ExtendedP<S>) -> Result<S> {
    validate(m, p)?;
    let m = S::from_int(i64::from(m));
    let two = S::from_int(2);
    Ok(match p {
        ExtendedP::Infinite => two * m.clone() / (m + S::one()),
        ExtendedP::Finite(p) => {
            let mp = m.clone() * p.clone();
            two.clone() * mp.clone() / (mp + p.clone() - two * m)
        }
    })
}

/// Exponents attached to one `(m, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentLadder<S> {
    pub m: u32,
    pub p: ExtendedP<S>,
    /// Hardy–Littlewood exponent `2mp/(mp + p − 2m)`.
    pub rho: S,
    pub s: S,
    /// `λ_0, …, λ_m`.
    pub lambda: Vec<S>,
    pub theta1: S,
    pub theta2: S,
}

/// Builds `s`, `λ_0…λ_m`, `θ_1`, `θ_2` from their defining formulas.
///
/// `s = ρ`, `λ_0 = 2s/(ms + s − 2m + 2)`, `λ_j = λ_0 p/(p − λ_0 j)` (so
/// `λ_j = λ_0` at `p = ∞`), `θ_1 = 2(1/λ_0 − 1/s)`, `θ_2 = m(2/s − 1)`.
pub fn build_ladder<S: LadderScalar>(params: &HLParams<S>) -> Result<ExponentLadder<S>> {
    let m_int = params.m;
    let rho = hl_exponent(m_int, &params.p)?;
    let s = rho.clone();
    let m = S::from_int(i64::from(m_int));
    let one = S::one();
    let two = S::from_int(2);

    let lambda0 = two.clone() * s.clone() / (m.clone() * s.clone() + s.clone() - two.clone() * m.clone() + two.clone());

    let lambda = (0..=m_int)
        .map(|j| match &params.p {
            ExtendedP::Infinite => lambda0.clone(),
            ExtendedP::Finite(p) => {
                let j = S::from_int(i64::from(j));
                lambda0.clone() * p.clone() / (p.clone() - lambda0.clone() * j)
            }
        })
        .collect();

    let theta1 = two.clone() * (lambda0.recip() - s.recip());
    let theta2 = m * (two / s.clone() - one);

    Ok(ExponentLadder {
        m: m_int,
        p: params.p.clone(),
        rho,
        s,
        lambda,
        theta1,
        theta2,
    })
}

impl<S: LadderScalar> ExponentLadder<S> {
    pub fn lambda0(&self) -> &S {
        &self.lambda[0]
    }

    pub fn lambda_m(&self) -> &S {
        self.lambda.last().expect("ladder has m + 1 ≥ 3 entries")
    }

    /// `θ_1 = 2m/p` and `θ_2 = (p − 2m)/p`, the closed forms of the weights.
    pub fn simplified_weights(&self) -> (S, S) {
        match &self.p {
            ExtendedP::Infinite => (S::zero(), S::one()),
            ExtendedP::Finite(p) => {
                let two_m = S::from_int(2 * i64::from(self.m));
                (two_m.clone() / p.clone(), (p.clone() - two_m) / p.clone())
            }
        }
    }

    /// Checks `(p/λ_j)* = λ_{j+1}/λ_j` for every `j = 0…m−1`; returns the
    /// indices where it fails.
    pub fn conjugate_identity_failures(&self) -> Vec<usize> {
        (0..self.m as usize)
            .filter(|&j| {
                let lhs = match &self.p {
                    ExtendedP::Infinite => ExtendedP::Infinite,
                    ExtendedP::Finite(p) => ExtendedP::Finite(p.clone() / self.lambda[j].clone()),
                };
                let rhs = ExtendedP::Finite(self.lambda[j + 1].clone() / self.lambda[j].clone());
                match lhs.conjugate() {
                    Ok(conj) => !conj.agrees(&rhs),
                    Err(_) => true,
                }
            })
            .collect()
    }

    /// `λ_{j−1} < λ_j` for all `j`.
    pub fn is_strictly_increasing(&self) -> bool {
        self.lambda.windows(2).all(|w| w[0] < w[1])
    }

    /// `λ_0 ≤ s ≤ 2`.
    pub fn within_bounds(&self) -> bool {
        *self.lambda0() <= self.s && self.s <= S::from_int(2)
    }
}

/// Identities checked by [`check_interpolation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationIdentity {
    /// `1/λ_0 = θ_1 + θ_2 (m+1)/(2m)`
    FirstSlot,
    /// `1/s = θ_1/2 + θ_2 (m+1)/(2m)`
    OtherSlots,
    /// `θ_1 + θ_2 = 1`
    WeightsSumToOne,
}

impl fmt::Display for InterpolationIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterpolationIdentity::FirstSlot => "1/λ_0 = θ_1·1 + θ_2·(m+1)/(2m)",
            InterpolationIdentity::OtherSlots => "1/s = θ_1·(1/2) + θ_2·(m+1)/(2m)",
            InterpolationIdentity::WeightsSumToOne => "θ_1 + θ_2 = 1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpolationCheck {
    pub failed: Vec<InterpolationIdentity>,
}

impl InterpolationCheck {
    pub fn is_consistent(&self) -> bool {
        self.failed.is_empty()
    }
}

impl fmt::Display for InterpolationCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failed.is_empty() {
            return f.write_str("all interpolation identities hold");
        }
        f.write_str("failed:")?;
        for id in &self.failed {
            write!(f, " [{id}]")?;
        }
        Ok(())
    }
}

/// Verifies that `(λ_0, s, …, s)` is the `(θ_1, θ_2)` interpolation of the
/// multiple exponents `(1, 2, …, 2)` and `(2m/(m+1), …, 2m/(m+1))`.
pub fn check_interpolation<S: LadderScalar>(ladder: &ExponentLadder<S>, m: u32) -> InterpolationCheck {
    let m = S::from_int(i64::from(m));
    let two = S::from_int(2);
    let bh_recip = (m.clone() + S::one()) / (two.clone() * m);
    let t1 = &ladder.theta1;
    let t2 = &ladder.theta2;

    let mut failed = Vec::new();
    let first = t1.clone() + t2.clone() * bh_recip.clone();
    if !ladder.lambda0().recip().agrees(&first) {
        failed.push(InterpolationIdentity::FirstSlot);
    }
    let other = t1.clone() / two + t2.clone() * bh_recip;
    if !ladder.s.recip().agrees(&other) {
        failed.push(InterpolationIdentity::OtherSlots);
    }
    if !(t1.clone() + t2.clone()).agrees(&S::one()) {
        failed.push(InterpolationIdentity::WeightsSumToOne);
    }
    InterpolationCheck { failed }
}
