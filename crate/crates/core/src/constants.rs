//! Closed-form constants: Khinchin `A_q`, Bohnenblust–Hille products,
//! Hardy–Littlewood upper bounds and the growth envelopes.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{self, ExtendedP};
use crate::special_functions::{gamma, solve_q0};

/// Euler–Mascheroni constant γ.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;

/// `2`-exponent offset in the real `m ≥ 14` closed form; equals
/// `H_12/2 + 13/2` with `H_12` the twelfth harmonic number.
pub const EXPLICIT_TWO_EXPONENT: (u64, u64) = (446_381, 55_440);

/// First `m` for which the real closed form switches to the Gamma product.
pub const EXPLICIT_REAL_SPLIT: u32 = 14;

/// Scalar field of the forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldTag::Real => "real",
            FieldTag::Complex => "complex",
        })
    }
}

impl FromStr for FieldTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(FieldTag::Real),
            "complex" | "c" => Ok(FieldTag::Complex),
            other => Err(Error::Parse(format!(
                "unknown field {other:?}; expected real or complex"
            ))),
        }
    }
}

/// The Haagerup threshold `q_0 ≈ 1.8474`, solved once per process.
pub fn q0() -> f64 {
    static Q0: OnceLock<f64> = OnceLock::new();
    *Q0.get_or_init(|| solve_q0::<f64>().expect("q_0 root finding on a certified bracket"))
}

/// Lower Khinchin constant `A_q` for `0 < q ≤ 2`.
///
/// Real (Rademacher) case: `√2 (Γ((q+1)/2)/√π)^{1/q}` for `q > q_0` and
/// `2^{1/2 − 1/q}` otherwise. Complex (Steinhaus) case:
/// `Γ((q+2)/2)^{1/q}`; the formula is applied on all of `(0, 2]`, though
/// only `q ∈ [1, 2)` is ever needed by the bounds.
pub fn khinchin_a(q: f64, field: FieldTag) -> Result<f64> {
    if !(q > 0.0 && q <= 2.0) {
        return Err(Error::domain(format!("Khinchin constant needs 0 < q ≤ 2, got {q}")));
    }
    Ok(match field {
        FieldTag::Real if q > q0() => SQRT_2 * (gamma((q + 1.0) / 2.0)? / PI.sqrt()).powf(1.0 / q),
        FieldTag::Real => 2f64.powf(0.5 - 1.0 / q),
        FieldTag::Complex => gamma((q + 2.0) / 2.0)?.powf(1.0 / q),
    })
}

/// Upper estimate `∏_{j=2}^m A_{(2j−2)/j}^{−1}` for the Bohnenblust–Hille
/// constant; the empty product `1` at `m = 1`.
pub fn bh_upper_bound(m: u32, field: FieldTag) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("Bohnenblust–Hille bound needs m ≥ 1"));
    }
    (2..=m).try_fold(1.0, |acc, j| {
        let q = f64::from(2 * j - 2) / f64::from(j);
        Ok(acc / khinchin_a(q, field)?)
    })
}

/// `(√2)^{m−1}`.
pub fn legacy_bound(m: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain(format!("legacy bound needs m ≥ 2, got {m}")));
    }
    Ok(SQRT_2.powf(f64::from(m - 1)))
}

/// The Khinchin-type base of the `(1, 2, …, 2)` constant: `√2` or `2/√π`.
pub fn mixed_exponent_base(field: FieldTag) -> f64 {
    match field {
        FieldTag::Real => SQRT_2,
        FieldTag::Complex => 2.0 / PI.sqrt(),
    }
}

/// `(2m(m−1)/p, (p−2m)/p)`, with limits `(0, 1)` at `p = ∞`.
pub fn theorem_exponents(m: u32, p: &ExtendedP<f64>) -> (f64, f64) {
    let m = f64::from(m);
    match p {
        ExtendedP::Infinite => (0.0, 1.0),
        ExtendedP::Finite(p) => (2.0 * m * (m - 1.0) / p, (p - 2.0 * m) / p),
    }
}

/// Hardy–Littlewood upper bound `base^{2m(m−1)/p} · B_m^{(p−2m)/p}` with
/// `base = √2` (real) or `2/√π` (complex) and `B_m` from [`bh_upper_bound`].
pub fn hl_upper_bound(m: u32, p: &ExtendedP<f64>, field: FieldTag) -> Result<f64> {
    exponents::validate(m, p)?;
    let (e_mixed, e_bh) = theorem_exponents(m, p);
    let bh = bh_upper_bound(m, field)?;
    Ok(mixed_exponent_base(field).powf(e_mixed) * bh.powf(e_bh))
}

/// Result of [`section3_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplicitValue {
    pub value: f64,
    /// Set when the explicit formula is singular (real branch, `m ≥ 14`,
    /// `p = 2m`) and the value came from [`hl_upper_bound`] instead.
    pub singular_fallback: bool,
}

/// Explicit product formulas for the Hardy–Littlewood bound, evaluated as
/// displayed and branching on the field and on `m`:
///
/// * real, `2 ≤ m ≤ 13`: `(√2)^{2m(m−1)/p} (∏_{j=2}^m 2^{1/(2j−2)})^{(p−2m)/p}`
/// * real, `m ≥ 14`: `(2^{(4m²−pm−2m)/(2p−4m) + 446381/55440}
///   ∏_{j=14}^m (Γ(3/2 − 1/j)/√π)^{j/(2−2j)})^{(p−2m)/p}`
/// * complex: `(2/√π)^{2m(m−1)/p} (∏_{j=2}^m Γ(2 − 1/j)^{j/(2−2j)})^{(p−2m)/p}`
pub fn section3_bound(m: u32, p: &ExtendedP<f64>, field: FieldTag) -> Result<ExplicitValue> {
    exponents::validate(m, p)?;
    let (e_mixed, e_bh) = theorem_exponents(m, p);
    let mf = f64::from(m);

    let value = match field {
        FieldTag::Real if m < EXPLICIT_REAL_SPLIT => {
            let product: f64 = (2..=m).map(|j| 2f64.powf(1.0 / f64::from(2 * j - 2))).product();
            SQRT_2.powf(e_mixed) * product.powf(e_bh)
        }
        FieldTag::Real => {
            let pf = p.value();
            if pf == 2.0 * mf {
                return Ok(ExplicitValue {
                    value: hl_upper_bound(m, p, field)?,
                    singular_fallback: true,
                });
            }
            let rational_part = match p {
                ExtendedP::Infinite => -mf / 2.0,
                ExtendedP::Finite(p) => (4.0 * mf * mf - p * mf - 2.0 * mf) / (2.0 * p - 4.0 * mf),
            };
            let (num, den) = EXPLICIT_TWO_EXPONENT;
            let mut log2_inner = rational_part + num as f64 / den as f64;
            for j in EXPLICIT_REAL_SPLIT..=m {
                let jf = f64::from(j);
                let ratio = gamma(1.5 - 1.0 / jf)? / PI.sqrt();
                log2_inner += jf / (2.0 - 2.0 * jf) * ratio.log2();
            }
            (log2_inner * e_bh).exp2()
        }
        FieldTag::Complex => {
            let product = (2..=m).try_fold(1.0, |acc, j| {
                let jf = f64::from(j);
                Ok::<_, Error>(acc * gamma(2.0 - 1.0 / jf)?.powf(jf / (2.0 - 2.0 * jf)))
            })?;
            (2.0 / PI.sqrt()).powf(e_mixed) * product.powf(e_bh)
        }
    };
    Ok(ExplicitValue {
        value,
        singular_fallback: false,
    })
}

/// Growth exponent of the Bohnenblust–Hille envelope: `(2 − ln 2 − γ)/2`
/// (real) or `(1 − γ)/2` (complex).
pub fn envelope_exponent(field: FieldTag) -> f64 {
    match field {
        FieldTag::Real => (2.0 - LN_2 - EULER_MASCHERONI) / 2.0,
        FieldTag::Complex => (1.0 - EULER_MASCHERONI) / 2.0,
    }
}

/// `κ · m^{envelope_exponent(field)}`. `κ` is not known in closed form and
/// is supplied by the caller.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn asymptotic_envelope(m: u32, field: FieldTag, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("kappa must be positive and finite, got {kappa}")));
    }
    Ok(kappa * f64::from(m).powf(envelope_exponent(field)))
}

/// All bounds for one `(m, p, field)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub m: u32,
    pub p: ExtendedP<f64>,
    pub field: FieldTag,
    pub theorem1_bound: f64,
    pub section3_bound: f64,
    pub explicit_singular: bool,
    pub legacy_bound: f64,
    pub bh_bound: f64,
    pub kappa: f64,
    pub asymptotic_envelope: f64,
}

impl BoundReport {
    pub fn compute(m: u32, p: ExtendedP<f64>, field: FieldTag, kappa: f64) -> Result<Self> {
        let theorem1_bound = hl_upper_bound(m, &p, field)?;
        let explicit = section3_bound(m, &p, field)?;
        Ok(Self {
            m,
            field,
            theorem1_bound,
            section3_bound: explicit.value,
            explicit_singular: explicit.singular_fallback,
            legacy_bound: legacy_bound(m)?,
            bh_bound: bh_upper_bound(m, field)?,
            kappa,
            asymptotic_envelope: asymptotic_envelope(m, field, kappa)?,
            p,
        })
    }
}
