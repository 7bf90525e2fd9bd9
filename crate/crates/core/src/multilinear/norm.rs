//! Operator norms `‖T‖ = sup |T(x_1, …, x_m)|` over `ℓ_p` unit balls.

use num_traits::{Float, One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lp_norm, MultilinearForm, Scalar};
use crate::constants::FieldTag;
use crate::error::{Error, Result};
use crate::exponents::{hl_exponent, ExtendedP, HLParams};

/// Default seed for every randomized computation in the crate.
pub const DEFAULT_SEED: u64 = 0x5EED_2015_0601;

/// Sign enumeration runs only when `n(m − 1)` is at most this.
pub const SIGN_ENUMERATION_MAX_BITS: usize = 20;

/// Largest number of grid points (over slots `1…m−1`) the dense-grid oracle visits.
pub const GRID_BUDGET: usize = 1 << 18;

const GRID_MAX_STEPS: i64 = 12;
const GRID_POLISH: usize = 8;

/// How an operator norm value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormOracle {
    /// Multi-start alternating Hölder ascent; a lower estimate.
    AlternatingAscent,
    /// Exhaustive sign vectors (real scalars, `p = ∞`); exact.
    SignEnumeration,
    /// Deterministic direction grid refined by ascent; a lower estimate.
    DenseGrid,
}

impl NormOracle {
    pub fn is_exact(self) -> bool {
        self == NormOracle::SignEnumeration
    }
}

/// Settings for operator-norm estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop a restart once a full sweep improves the objective by less
    /// than this relative amount.
    pub tol: f64,
    pub seed: u64,
    /// Use sign enumeration instead of ascent whenever it is feasible.
    pub prefer_exact: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 500,
            tol: 1e-12,
            seed: DEFAULT_SEED,
            prefer_exact: true,
        }
    }
}

/// One ascent run from a fixed starting point.
#[derive(Debug, Clone)]
pub struct AscentRun<K: Scalar> {
    pub value: K::Real,
    /// Objective after the start and after every single-slot update.
    pub trace: Vec<K::Real>,
    /// Full sweeps over all slots.
    pub iterations: usize,
    /// Slots that met an identically zero functional and were redrawn.
    pub reseeds: usize,
    pub point: Vec<Vec<K>>,
}

/// Best of several ascent restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentOutcome<R> {
    pub value: R,
    pub restarts: usize,
    pub best_restart: usize,
    /// Restarts that ended with objective zero.
    pub degenerate_restarts: usize,
    pub total_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue<R> {
    pub value: R,
    pub oracle: NormOracle,
}

/// Empirical Hardy–Littlewood ratio for one form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioResult {
    pub exponent: f64,
    pub mixed_norm: f64,
    pub op_norm_estimate: f64,
    pub ratio: f64,
    /// Ascent restarts behind `op_norm_estimate`; 0 for exact oracles.
    pub restarts_used: usize,
    pub oracle: NormOracle,
    pub seed: u64,
}

/// Dual exponent of the slot update.
#[derive(Clone, Copy)]
enum Dual<R> {
    /// `p = ∞`
    One,
    /// `p = 1`
    Infinity,
    /// `1 < p < ∞`, holding `p* = p/(p − 1)`
    Finite(R),
}

fn dual_of<R: Float>(p: &ExtendedP<f64>) -> Result<Dual<R>> {
    match p {
        ExtendedP::Infinite => Ok(Dual::One),
        ExtendedP::Finite(v) if *v == 1.0 => Ok(Dual::Infinity),
        ExtendedP::Finite(v) if *v > 1.0 && v.is_finite() => {
            let q = *v / (*v - 1.0);
            Ok(Dual::Finite(num_traits::cast(q).expect("finite conjugate exponent")))
        }
        ExtendedP::Finite(v) => Err(Error::domain(format!("operator norm needs p ≥ 1, got {v}"))),
    }
}

/// Unit-modulus `u` with `g·u = |g|`; zero for `g = 0`.
fn aligning_phase<K: Scalar>(g: K) -> K {
    let r = g.modulus();
    if r.is_zero() {
        K::zero()
    } else {
        g.conj().scale(r.recip())
    }
}

/// Hölder maximizer of `|Σ g_j x_j|` over the unit ball of `ℓ_p`, and the
/// maximum `‖g‖_{p*}`. `None` when `g = 0`.
fn holder_step<K: Scalar>(g: &[K], dual: Dual<K::Real>) -> Option<(Vec<K>, K::Real)> {
    let moduli: Vec<K::Real> = g.iter().map(|c| c.modulus()).collect();
    let max = moduli.iter().copied().fold(K::Real::zero(), Float::max);
    if max.is_zero() {
        return None;
    }
    match dual {
        Dual::One => {
            let x = g.iter().map(|&c| aligning_phase(c)).collect();
            Some((x, moduli.iter().copied().sum()))
        }
        Dual::Infinity => {
            let j = moduli.iter().position(|&v| v == max).expect("max is attained");
            let mut x = vec![K::zero(); g.len()];
            x[j] = aligning_phase(g[j]);
            Some((x, max))
        }
        Dual::Finite(q) => {
            let one = K::Real::one();
            let sum: K::Real = moduli.iter().map(|&v| (v / max).powf(q)).sum();
            let denom = sum.powf((q - one) / q);
            let x = g
                .iter()
                .zip(&moduli)
                .map(|(&c, &v)| {
                    if v.is_zero() {
                        K::zero()
                    } else {
                        aligning_phase(c).scale((v / max).powf(q - one) / denom)
                    }
                })
                .collect();
            Some((x, max * sum.powf(q.recip())))
        }
    }
}

fn p_as_real<R: Float>(p: &ExtendedP<f64>) -> R {
    match p {
        ExtendedP::Infinite => R::infinity(),
        ExtendedP::Finite(v) => num_traits::cast(*v).expect("finite p"),
    }
}

/// Gaussian direction normalized to the unit sphere of `ℓ_p`.
fn random_unit<K: Scalar>(n: usize, p: &ExtendedP<f64>, rng: &mut ChaCha8Rng) -> Vec<K> {
    loop {
        let v: Vec<K> = (0..n).map(|_| K::sample_gaussian(rng)).collect();
        let norm = lp_norm(v.iter().map(|c| c.modulus()), p_as_real::<K::Real>(p));
        if norm > K::Real::zero() {
            let inv = norm.recip();
            return v.into_iter().map(|c| c.scale(inv)).collect();
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Alternating maximization from `start`.
///
/// Each sweep visits slots `1…m` in order; for the free slot it computes
/// `g_j = T(x_1, …, e_j, …, x_m)` and moves to the Hölder maximizer
/// `x_j = phase(ḡ_j) |g_j|^{p*−1} / ‖g‖_{p*}^{p*−1}`. The objective
/// `|T(x)|` therefore never decreases. A slot whose functional vanishes
/// identically is redrawn from `rng`.
pub fn ascent_from<K: Scalar>(
    t: &MultilinearForm<K>,
    p: &ExtendedP<f64>,
    start: Vec<Vec<K>>,
    max_iters: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<AscentRun<K>> {
    let dual = dual_of::<K::Real>(p)?;
    let mut x = start;
    let first = t.evaluate(&x)?.modulus();
    let tol: K::Real = num_traits::cast(tol).unwrap_or_else(K::Real::epsilon);
    let max_reseeds = 16 * t.order();

    let mut trace = vec![first];
    let mut current = first;
    let mut reseeds = 0;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let before = current;
        for slot in 0..t.order() {
            let g = t.contract(Some(slot), &x);
            match holder_step(&g, dual) {
                Some((update, value)) => {
                    x[slot] = update;
                    current = value;
                }
                None => {
                    x[slot] = random_unit(t.dim(), p, rng);
                    reseeds += 1;
                    current = K::Real::zero();
                }
            }
            trace.push(current);
        }
        let stalled = current.is_zero() && reseeds >= max_reseeds;
        if stalled || (current > K::Real::zero() && current - before <= tol * current) {
            break;
        }
    }

    Ok(AscentRun {
        value: current,
        trace,
        iterations,
        reseeds,
        point: x,
    })
}

/// Lower estimate of `‖T‖` on `ℓ_p^n` from `opts.restarts` independent
/// ascent runs. Restart `r` draws from its own ChaCha stream `(seed, r)`,
/// so the result does not depend on scheduling.
pub fn operator_norm_ascent<K: Scalar>(
    t: &MultilinearForm<K>,
    p: &ExtendedP<f64>,
    opts: &NormOptions,
) -> Result<AscentOutcome<K::Real>> {
    dual_of::<K::Real>(p)?;
    if opts.restarts == 0 {
        return Err(Error::domain("ascent needs at least one restart"));
    }
    if t.is_zero() {
        return Ok(AscentOutcome {
            value: K::Real::zero(),
            restarts: opts.restarts,
            best_restart: 0,
            degenerate_restarts: 0,
            total_iterations: 0,
        });
    }

    let runs: Vec<(K::Real, usize)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(opts.seed, r as u64);
            let start = (0..t.order()).map(|_| random_unit(t.dim(), p, &mut rng)).collect();
            ascent_from(t, p, start, opts.max_iters, opts.tol, &mut rng).map(|run| (run.value, run.iterations))
        })
        .collect::<Result<_>>()?;

    let mut best_restart = 0;
    for (r, (value, _)) in runs.iter().enumerate() {
        if *value > runs[best_restart].0 {
            best_restart = r;
        }
    }
    let degenerate_restarts = runs.iter().filter(|(v, _)| v.is_zero()).count();
    if degenerate_restarts == runs.len() {
        return Err(Error::AllRestartsDegenerate(runs.len()));
    }
    Ok(AscentOutcome {
        value: runs[best_restart].0,
        restarts: opts.restarts,
        best_restart,
        degenerate_restarts,
        total_iterations: runs.iter().map(|(_, it)| it).sum(),
    })
}

/// Whether exhaustive sign enumeration applies: real scalars, `p = ∞`
/// and `n(m − 1) ≤ 20`.
pub fn sign_enumeration_feasible<K: Scalar>(t: &MultilinearForm<K>, p: &ExtendedP<f64>) -> bool {
    K::FIELD == FieldTag::Real && p.is_infinite() && t.dim() * (t.order() - 1) <= SIGN_ENUMERATION_MAX_BITS
}

/// Exact `‖T‖` on `ℓ_∞^n` for real `T`: the supremum is attained at sign
/// vectors, and for fixed signs in slots `1…m−1` the last slot contributes
/// the `ℓ_1` norm of the induced functional. Walks the sign patterns in
/// Gray-code order, updating the functional by one fixed-index slice per
/// step. The first sign is pinned since `|T|` is invariant under a global
/// flip of one slot.
fn sign_enumeration<K: Scalar>(t: &MultilinearForm<K>) -> Result<K::Real> {
    let (m, n) = (t.order(), t.dim());
    let l1 = |g: &[K]| g.iter().map(|c| c.modulus()).sum::<K::Real>();
    if m == 1 {
        return Ok(l1(t.coefficients()));
    }
    let bits = n * (m - 1);
    if bits > SIGN_ENUMERATION_MAX_BITS {
        return Err(Error::SizeGuard(format!(
            "sign enumeration needs n(m − 1) ≤ {SIGN_ENUMERATION_MAX_BITS}, got {bits}"
        )));
    }

    // slices[k][i] = T with slot k fixed to index i (order m − 1).
    let sub_count = n.pow((m - 1) as u32);
    let slices: Vec<Vec<MultilinearForm<K>>> = (0..m - 1)
        .map(|k| {
            let stride = n.pow((m - 1 - k) as u32);
            (0..n)
                .map(|i| {
                    let coeffs = t
                        .coefficients()
                        .iter()
                        .enumerate()
                        .filter(|(idx, _)| (idx / stride) % n == i)
                        .map(|(_, &c)| c)
                        .collect::<Vec<_>>();
                    debug_assert_eq!(coeffs.len(), sub_count);
                    MultilinearForm::new(m - 1, n, coeffs).expect("slice of a valid form")
                })
                .collect()
        })
        .collect();

    let mut xs: Vec<Vec<K>> = vec![vec![K::one(); n]; m];
    let mut g = t.contract(Some(m - 1), &xs);
    let mut best = l1(&g);
    let mut best_code: u64 = 0;
    let two = K::one() + K::one();
    let free_bits = bits - 1;
    let mut code: u64 = 0;
    for step in 1..(1u64 << free_bits) {
        let flip = step.trailing_zeros() as usize + 1;
        let (k, i) = (flip / n, flip % n);
        code ^= 1 << (flip - 1);

        let others: Vec<&[K]> = (0..m).filter(|&s| s != k).map(|s| xs[s].as_slice()).collect();
        let h = slices[k][i].contract(Some(m - 2), &others);
        let factor = -(two * xs[k][i]);
        for (gj, hj) in g.iter_mut().zip(&h) {
            *gj = *gj + factor * *hj;
        }
        xs[k][i] = -xs[k][i];

        let value = l1(&g);
        if value > best {
            best = value;
            best_code = code;
        }
    }

    // Recompute the winner from scratch to shed accumulated rounding.
    let mut xs: Vec<Vec<K>> = vec![vec![K::one(); n]; m];
    for b in 0..free_bits {
        if best_code & (1 << b) != 0 {
            let flip = b + 1;
            xs[flip / n][flip % n] = -K::one();
        }
    }
    Ok(l1(&t.contract(Some(m - 1), &xs)))
}

/// Directions of the lattice `{−g…g}^n` (Gaussian integers for complex
/// scalars), up to sign and scaling, normalized to the `ℓ_p` sphere.
fn grid_directions<K: Scalar>(n: usize, p: &ExtendedP<f64>, steps: i64) -> Vec<Vec<K>> {
    let complex = K::FIELD == FieldTag::Complex;
    let width = (2 * steps + 1) as usize;
    let coords = if complex { 2 * n } else { n };
    let total = width.pow(coords as u32);
    let pr = p_as_real::<K::Real>(p);
    let mut out = Vec::new();
    for code in 0..total {
        let mut rem = code;
        let ints: Vec<i64> = (0..coords)
            .map(|_| {
                let d = (rem % width) as i64 - steps;
                rem /= width;
                d
            })
            .collect();
        let gcd = ints.iter().fold(0i64, |a, &b| num_integer::gcd(a, b));
        if gcd != 1 {
            continue;
        }
        if !complex && ints.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
            continue;
        }
        let real = |v: i64| -> K::Real { num_traits::cast(v).expect("small integer") };
        let v: Vec<K> = if complex {
            (0..n)
                .map(|j| K::from_parts(real(ints[2 * j]), real(ints[2 * j + 1])))
                .collect()
        } else {
            ints.iter().map(|&a| K::from_real(real(a))).collect()
        };
        let norm = lp_norm(v.iter().map(|c| c.modulus()), pr);
        let inv = norm.recip();
        out.push(v.into_iter().map(|c| c.scale(inv)).collect());
    }
    out
}

fn grid_search<K: Scalar>(t: &MultilinearForm<K>, p: &ExtendedP<f64>) -> Result<K::Real> {
    let (m, n) = (t.order(), t.dim());
    let dual = dual_of::<K::Real>(p)?;
    if m == 1 {
        return Ok(holder_step(t.coefficients(), dual).map_or(K::Real::zero(), |(_, v)| v));
    }
    let free = m - 1;
    let width_for = |steps: i64| -> Option<usize> {
        let per_coord = (2 * steps + 1) as usize;
        let coords = if K::FIELD == FieldTag::Complex { 2 * n } else { n };
        let dirs = per_coord.checked_pow(coords as u32)?;
        let combos = dirs.checked_pow(free as u32)?;
        (combos <= GRID_BUDGET).then_some(dirs)
    };
    let steps = (1..=GRID_MAX_STEPS)
        .rev()
        .find(|&s| width_for(s).is_some())
        .ok_or_else(|| Error::SizeGuard(format!("dense grid for m = {m}, n = {n} exceeds {GRID_BUDGET} points")))?;

    let dirs = grid_directions::<K>(n, p, steps);
    let combos = dirs.len().pow(free as u32);
    let scored: Vec<(K::Real, usize)> = (0..combos)
        .into_par_iter()
        .map(|code| {
            let xs = grid_point(&dirs, code, m);
            let g = t.contract(Some(m - 1), &xs);
            let value = holder_step(&g, dual).map_or(K::Real::zero(), |(_, v)| v);
            (value, code)
        })
        .collect();

    let mut ranked = scored;
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let mut best = ranked.first().map_or(K::Real::zero(), |r| r.0);

    let mut rng = rng_for(DEFAULT_SEED, u64::MAX);
    for &(_, code) in ranked.iter().take(GRID_POLISH) {
        let mut start = grid_point(&dirs, code, m);
        let g = t.contract(Some(m - 1), &start);
        if let Some((last, _)) = holder_step(&g, dual) {
            start[m - 1] = last;
        }
        let run = ascent_from(t, p, start, 500, 1e-15, &mut rng)?;
        if run.value > best {
            best = run.value;
        }
    }
    Ok(best)
}

fn grid_point<K: Scalar>(dirs: &[Vec<K>], code: usize, m: usize) -> Vec<Vec<K>> {
    let n = dirs[0].len();
    let mut rem = code;
    let mut xs = Vec::with_capacity(m);
    for _ in 0..m - 1 {
        xs.push(dirs[rem % dirs.len()].clone());
        rem /= dirs.len();
    }
    xs.push(vec![K::zero(); n]);
    xs
}

/// Certification oracle for small forms.
///
/// Real scalars with `p = ∞`: exact sign enumeration (size guard
/// `n(m − 1) ≤ 20`). Anything else: best point of a deterministic lattice
/// of directions in slots `1…m−1`, with the last slot solved exactly by
/// Hölder, then polished by ascent. That value is a lower estimate and is
/// labelled [`NormOracle::DenseGrid`].
pub fn operator_norm_exact_small<K: Scalar>(t: &MultilinearForm<K>, p: &ExtendedP<f64>) -> Result<NormValue<K::Real>> {
    dual_of::<K::Real>(p)?;
    if K::FIELD == FieldTag::Real && p.is_infinite() {
        return Ok(NormValue {
            value: sign_enumeration(t)?,
            oracle: NormOracle::SignEnumeration,
        });
    }
    Ok(NormValue {
        value: grid_search(t, p)?,
        oracle: NormOracle::DenseGrid,
    })
}

fn to_f64<R: ToPrimitive>(v: R) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `mixed_norm(T, exponent) / ‖T‖_p`, using sign enumeration when
/// `opts.prefer_exact` and it is feasible, ascent otherwise.
pub fn ratio_with_exponent<K: Scalar>(
    t: &MultilinearForm<K>,
    p: &ExtendedP<f64>,
    exponent: f64,
    opts: &NormOptions,
) -> Result<RatioResult> {
    let rho: K::Real = num_traits::cast(exponent).ok_or_else(|| Error::domain("exponent not representable"))?;
    let mixed = t.mixed_norm(rho)?;
    if t.is_zero() {
        return Err(Error::ZeroForm);
    }
    let (norm, oracle, restarts_used) = if opts.prefer_exact && sign_enumeration_feasible(t, p) {
        (sign_enumeration(t)?, NormOracle::SignEnumeration, 0)
    } else {
        let outcome = operator_norm_ascent(t, p, opts)?;
        (outcome.value, NormOracle::AlternatingAscent, outcome.restarts)
    };
    let (mixed, norm) = (to_f64(mixed), to_f64(norm));
    Ok(RatioResult {
        exponent,
        mixed_norm: mixed,
        op_norm_estimate: norm,
        ratio: mixed / norm,
        restarts_used,
        oracle,
        seed: opts.seed,
    })
}

/// Hardy–Littlewood ratio at `ρ = 2mp/(mp + p − 2m)`: an empirical lower
/// witness for the optimal constant `C_{m,p}`.
pub fn hl_ratio<K: Scalar>(t: &MultilinearForm<K>, params: &HLParams<f64>, opts: &NormOptions) -> Result<RatioResult> {
    if params.field != K::FIELD {
        return Err(Error::domain(format!(
            "form has {} coefficients but parameters ask for {}",
            K::FIELD,
            params.field
        )));
    }
    if t.order() != params.m as usize {
        return Err(Error::DimensionMismatch {
            expected: params.m as usize,
            actual: t.order(),
        });
    }
    let rho = hl_exponent(params.m, &params.p)?;
    ratio_with_exponent(t, &params.p, rho, opts)
}
