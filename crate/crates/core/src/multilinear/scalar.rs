use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, One, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::constants::FieldTag;
use crate::error::{Error, Result};

/// Real floating-point type underlying a [`Scalar`].
pub trait RealScalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

/// Coefficient type of a multilinear form: a real float or a complex
/// number over one.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    type Real: RealScalar;

    const FIELD: FieldTag;

    fn modulus(self) -> Self::Real;

    fn conj(self) -> Self;

    fn from_real(r: Self::Real) -> Self;

    /// Builds `re + i·im`; the imaginary part is dropped for real scalars.
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;

    fn re(self) -> Self::Real;

    fn im(self) -> Self::Real;

    fn scale(self, r: Self::Real) -> Self;

    fn is_finite(self) -> bool;

    /// Standard normal draw; complex draws have `E|z|² = 1`.
    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw from the unit circle of the field (`±1` for reals).
    fn sample_unimodular<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Writes the value as whitespace-separated text that parses back
    /// to the identical value.
    fn to_text(self) -> String;

    fn parse_text(s: &str) -> Result<Self>;
}

fn parse_real<F: std::str::FromStr>(s: &str) -> Result<F> {
    s.parse()
        .map_err(|_| Error::Format(format!("invalid real number {s:?}")))
}

macro_rules! impl_real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;

            const FIELD: FieldTag = FieldTag::Real;

            fn modulus(self) -> $t {
                self.abs()
            }

            fn conj(self) -> Self {
                self
            }

            fn from_real(r: $t) -> Self {
                r
            }

            fn from_parts(re: $t, _im: $t) -> Self {
                re
            }

            fn re(self) -> $t {
                self
            }

            fn im(self) -> $t {
                0.0
            }

            fn scale(self, r: $t) -> Self {
                self * r
            }

            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }

            fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            fn sample_unimodular<R: Rng + ?Sized>(rng: &mut R) -> Self {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }

            fn to_text(self) -> String {
                format!("{self:?}")
            }

            fn parse_text(s: &str) -> Result<Self> {
                let mut it = s.split_whitespace();
                let v = parse_real(it.next().ok_or_else(|| Error::Format("empty scalar".into()))?)?;
                if it.next().is_some() {
                    return Err(Error::Format(format!("real scalar expected, got {s:?}")));
                }
                Ok(v)
            }
        }

        impl Scalar for Complex<$t> {
            type Real = $t;

            const FIELD: FieldTag = FieldTag::Complex;

            fn modulus(self) -> $t {
                self.norm()
            }

            fn conj(self) -> Self {
                Complex::conj(&self)
            }

            fn from_real(r: $t) -> Self {
                Complex::new(r, 0.0)
            }

            fn from_parts(re: $t, im: $t) -> Self {
                Complex::new(re, im)
            }

            fn re(self) -> $t {
                self.re
            }

            fn im(self) -> $t {
                self.im
            }

            fn scale(self, r: $t) -> Self {
                self * r
            }

            fn is_finite(self) -> bool {
                self.re.is_finite() && self.im.is_finite()
            }

            fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
                let re: $t = StandardNormal.sample(rng);
                let im: $t = StandardNormal.sample(rng);
                Complex::new(re, im) * <$t>::FRAC_1_SQRT_2()
            }

            fn sample_unimodular<R: Rng + ?Sized>(rng: &mut R) -> Self {
                let angle: $t = rng.random::<$t>() * <$t>::TAU();
                Complex::from_polar(1.0, angle)
            }

            fn to_text(self) -> String {
                format!("{:?} {:?}", self.re, self.im)
            }

            fn parse_text(s: &str) -> Result<Self> {
                let parts: Vec<&str> = s.split_whitespace().collect();
                match parts.as_slice() {
                    [re, im] => Ok(Complex::new(parse_real(re)?, parse_real(im)?)),
                    _ => Err(Error::Format(format!(
                        "complex scalar needs two parts, got {s:?}"
                    ))),
                }
            }
        }
    };
}

impl_real_scalar!(f32);
impl_real_scalar!(f64);
