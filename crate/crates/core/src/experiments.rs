//! Seeded random searches, exponent sweeps and closed-form growth studies.
//!
//! Every trial draws its form and its ascent restarts from a seed derived
//! from `(config.seed, n-index, trial)`. The seed is logged with the trial,
//! so [`random_form`] plus [`ratio_with_exponent`] on that seed reproduces
//! the row bit for bit, whatever the thread count.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{hl_upper_bound, legacy_bound, FieldTag};
use crate::error::{Error, Result};
use crate::exponents::{hl_exponent, validate, ExtendedP, HLParams};
use crate::multilinear::{
    coefficient_count, ratio_with_exponent, MultilinearForm, NormOptions, NormOracle, RatioResult, Scalar, DEFAULT_SEED,
};
use crate::Complex64;

/// ChaCha stream used for coefficient draws. Ascent restarts use streams
/// `0, 1, …` of the same seed, so this one is kept out of their way.
const FORM_STREAM: u64 = u64::MAX;

/// Coefficient ensemble for random forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Standard normal coefficients (standard complex normal over `ℂ`).
    Gaussian,
    /// `±1` coefficients (uniform on the unit circle over `ℂ`).
    Rademacher,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Gaussian => "gaussian",
            Distribution::Rademacher => "rademacher",
        })
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Distribution::Gaussian),
            "rademacher" | "sign" => Ok(Distribution::Rademacher),
            other => Err(Error::Parse(format!(
                "unknown distribution {other:?}; expected gaussian or rademacher"
            ))),
        }
    }
}

/// A random `m`-linear form on `𝕂^n` with i.i.d. coefficients, fully
/// determined by `seed`.
pub fn random_form<K: Scalar>(dist: Distribution, m: usize, n: usize, seed: u64) -> Result<MultilinearForm<K>> {
    if m == 0 || n == 0 {
        return Err(Error::domain(format!(
            "form needs m ≥ 1 and n ≥ 1, got m = {m}, n = {n}"
        )));
    }
    let count = coefficient_count(m, n).ok_or_else(|| Error::SizeGuard(format!("n^m = {n}^{m} is too large")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(FORM_STREAM);
    let coeffs = (0..count)
        .map(|_| match dist {
            Distribution::Gaussian => K::sample_gaussian(&mut rng),
            Distribution::Rademacher => K::sample_unimodular(&mut rng),
        })
        .collect();
    MultilinearForm::new(m, n, coeffs)
}

/// Seed of trial `trial` at the `n_index`-th dimension of a run seeded
/// with `base`.
pub fn trial_seed(base: u64, n_index: usize, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(((n_index as u64) << 32) | trial as u64);
    rng.next_u64()
}

/// Settings shared by [`search_lower_bound`] and
/// [`exponent_optimality_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: HLParams<f64>,
    /// Dimensions to try, strictly increasing.
    pub n_values: Vec<usize>,
    /// Trials per dimension.
    pub trials: usize,
    pub distribution: Distribution,
    pub seed: u64,
    /// Norm settings; the seed is replaced by each trial's own seed.
    pub norm_opts: NormOptions,
}

impl ExperimentConfig {
    pub fn new(params: HLParams<f64>, n_values: Vec<usize>, trials: usize, distribution: Distribution) -> Self {
        Self {
            params,
            n_values,
            trials,
            distribution,
            seed: DEFAULT_SEED,
            norm_opts: NormOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate(self.params.m, &self.params.p)?;
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if self.n_values.is_empty() {
            return Err(Error::domain("n_values is empty"));
        }
        if self.n_values[0] == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "n_values must be strictly increasing, got {:?}",
                self.n_values
            )));
        }
        if self.norm_opts.restarts == 0 {
            return Err(Error::domain("norm_opts.restarts must be at least 1"));
        }
        Ok(())
    }
}

/// One logged trial. `seed` regenerates both the form and the restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    pub seed: u64,
    pub exponent: f64,
    pub mixed_norm: f64,
    pub op_norm_estimate: f64,
    pub ratio: f64,
    pub restarts_used: usize,
    pub oracle: NormOracle,
}

impl TrialRecord {
    pub fn new(trial: usize, n: usize, r: RatioResult) -> Self {
        Self {
            trial,
            n,
            seed: r.seed,
            exponent: r.exponent,
            mixed_norm: r.mixed_norm,
            op_norm_estimate: r.op_norm_estimate,
            ratio: r.ratio,
            restarts_used: r.restarts_used,
            oracle: r.oracle,
        }
    }

    pub fn result(&self) -> RatioResult {
        RatioResult {
            exponent: self.exponent,
            mixed_norm: self.mixed_norm,
            op_norm_estimate: self.op_norm_estimate,
            ratio: self.ratio,
            restarts_used: self.restarts_used,
            oracle: self.oracle,
            seed: self.seed,
        }
    }
}

/// Best ratio found and the full trial log, ordered by `(n, trial)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: RatioResult,
    /// Index of the best trial in `log`; the first one on ties.
    pub best_index: usize,
    pub log: Vec<TrialRecord>,
}

fn run_trials<K: Scalar>(config: &ExperimentConfig, n_index: usize, exponent: f64) -> Result<Vec<TrialRecord>> {
    let n = config.n_values[n_index];
    let m = config.params.m as usize;
    (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(config.seed, n_index, trial);
            let form = random_form::<K>(config.distribution, m, n, seed)?;
            let opts = NormOptions {
                seed,
                ..config.norm_opts
            };
            let r = ratio_with_exponent(&form, &config.params.p, exponent, &opts)?;
            Ok(TrialRecord::new(trial, n, r))
        })
        .collect()
}

fn run_all<K: Scalar>(config: &ExperimentConfig, exponent: f64) -> Result<Vec<TrialRecord>> {
    let mut log = Vec::with_capacity(config.trials * config.n_values.len());
    for n_index in 0..config.n_values.len() {
        log.extend(run_trials::<K>(config, n_index, exponent)?);
    }
    Ok(log)
}

fn run_for_field(config: &ExperimentConfig, exponent: f64) -> Result<Vec<TrialRecord>> {
    match config.params.field {
        FieldTag::Real => run_all::<f64>(config, exponent),
        FieldTag::Complex => run_all::<Complex64>(config, exponent),
    }
}

/// Like [`search_lower_bound`] with `ρ` replaced by `exponent`.
pub fn search_with_exponent(config: &ExperimentConfig, exponent: f64) -> Result<SearchOutcome> {
    config.validate()?;
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(Error::domain(format!(
            "exponent must be positive and finite, got {exponent}"
        )));
    }
    let log = run_for_field(config, exponent)?;
    let mut best_index = 0;
    for (i, rec) in log.iter().enumerate() {
        if rec.ratio > log[best_index].ratio {
            best_index = i;
        }
    }
    Ok(SearchOutcome {
        best: log[best_index].result(),
        best_index,
        log,
    })
}

/// Largest Hardy–Littlewood ratio over `config.trials` random forms per
/// dimension. Each ratio is a lower witness for the optimal constant.
pub fn search_lower_bound(config: &ExperimentConfig) -> Result<SearchOutcome> {
    config.validate()?;
    let rho = hl_exponent(config.params.m, &config.params.p)?;
    search_with_exponent(config, rho)
}

/// Ratio statistics at one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub exponent_used: f64,
    pub best_ratio: f64,
    pub median_ratio: f64,
    pub trials: usize,
    /// Norm oracle behind the row's ratios.
    pub oracle: NormOracle,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len() / 2;
    if values.len() % 2 == 1 {
        values[k]
    } else {
        0.5 * (values[k - 1] + values[k])
    }
}

/// `mixed_norm(T, r)/‖T‖` statistics for each `n` in `config.n_values`.
/// Requires `1 ≤ r ≤ ρ`; below `ρ` the ratios are expected to grow with `n`.
pub fn exponent_optimality_sweep(config: &ExperimentConfig, exponent_r: f64) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let rho = hl_exponent(config.params.m, &config.params.p)?;
    if !(1.0..=rho * (1.0 + 4.0 * f64::EPSILON)).contains(&exponent_r) {
        return Err(Error::domain(format!(
            "sweep exponent must satisfy 1 ≤ r ≤ ρ = {rho}, got {exponent_r}"
        )));
    }
    let log = run_for_field(config, exponent_r)?;
    Ok(log
        .chunks(config.trials)
        .map(|chunk| {
            let mut ratios: Vec<f64> = chunk.iter().map(|r| r.ratio).collect();
            SweepRow {
                n: chunk[0].n,
                exponent_used: exponent_r,
                best_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                median_ratio: median(&mut ratios),
                trials: chunk.len(),
                oracle: chunk[0].oracle,
            }
        })
        .collect())
}

/// How `p` depends on `m` in a growth study.
#[derive(Debug, Clone, PartialEq)]
pub enum PRule {
    Fixed(ExtendedP<f64>),
    /// `p = m²`
    Square,
    /// `p = c·m`
    Linear(f64),
}

impl PRule {
    pub fn p_for(&self, m: u32) -> ExtendedP<f64> {
        match self {
            PRule::Fixed(p) => p.clone(),
            PRule::Square => ExtendedP::Finite(f64::from(m) * f64::from(m)),
            PRule::Linear(c) => ExtendedP::Finite(c * f64::from(m)),
        }
    }
}

impl fmt::Display for PRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PRule::Fixed(p) => write!(f, "fixed({p})"),
            PRule::Square => f.write_str("square"),
            PRule::Linear(c) => write!(f, "linear({c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub m: u32,
    pub p: ExtendedP<f64>,
    /// `hl_upper_bound(m, p, field)`
    pub bound: f64,
    /// `(√2)^{m−1}`
    pub legacy: f64,
    /// `ln(bound/legacy)`, zero when the bounds coincide.
    pub log_ratio: f64,
}

/// Bounds along a range of `m`, with slopes fitted over the upper half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthStudy {
    pub field: FieldTag,
    pub rows: Vec<GrowthRow>,
    /// Smallest `m` in the fit window; the window runs to the last row.
    pub fit_from: u32,
    /// Least-squares slope of `ln bound` against `ln m`.
    pub loglog_slope: f64,
    /// Least-squares slope of `log₂ bound` against `m`.
    pub log2_slope: f64,
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Theorem bound and legacy bound for every `m` in `m_range`, with `p`
/// given by `rule`. The fit window is `m ≥ ⌈m_max/2⌉`, or the whole range
/// when that leaves fewer than two points.
pub fn growth_study(m_range: RangeInclusive<u32>, rule: &PRule, field: FieldTag) -> Result<GrowthStudy> {
    let (lo, hi) = (*m_range.start(), *m_range.end());
    if lo < 2 || hi <= lo {
        return Err(Error::domain(format!(
            "growth study needs 2 ≤ m_min < m_max, got {lo}..={hi}"
        )));
    }
    let rows = m_range
        .map(|m| {
            let p = rule.p_for(m);
            validate(m, &p).map_err(|e| Error::domain(format!("rule {rule} at m = {m}: {e}")))?;
            let bound = hl_upper_bound(m, &p, field)?;
            let legacy = legacy_bound(m)?;
            Ok(GrowthRow {
                m,
                p,
                bound,
                legacy,
                log_ratio: (bound / legacy).ln(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let half = hi.div_ceil(2);
    let fit_from = if hi - half.max(lo) >= 1 { half.max(lo) } else { lo };
    let window: Vec<&GrowthRow> = rows.iter().filter(|r| r.m >= fit_from).collect();
    let ms: Vec<f64> = window.iter().map(|r| f64::from(r.m)).collect();
    let ln_ms: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    let ln_b: Vec<f64> = window.iter().map(|r| r.bound.ln()).collect();
    let log2_b: Vec<f64> = window.iter().map(|r| r.bound.log2()).collect();
    Ok(GrowthStudy {
        field,
        fit_from,
        loglog_slope: ls_slope(&ln_ms, &ln_b),
        log2_slope: ls_slope(&ms, &log2_b),
        rows,
    })
}

fn format_err(e: impl fmt::Display) -> Error {
    Error::Format(e.to_string())
}

/// Writes rows as CSV with a header of field names.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(format_err)?;
    }
    w.flush().map_err(format_err)
}

/// Parses CSV written by [`write_csv`].
pub fn read_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(format_err))
        .collect()
}

/// Writes a value as pretty JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(format_err)?;
    writeln!(out).map_err(format_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::bh_upper_bound;
    use crate::multilinear::hl_ratio;
    use std::f64::consts::SQRT_2;

    fn config(m: u32, p: ExtendedP<f64>, n_values: Vec<usize>, trials: usize, dist: Distribution) -> ExperimentConfig {
        ExperimentConfig::new(HLParams::new(m, p, FieldTag::Real).unwrap(), n_values, trials, dist)
    }

    #[test]
    fn rademacher_support_and_determinism() {
        let t = random_form::<f64>(Distribution::Rademacher, 2, 2, 11).unwrap();
        assert!(t.coefficients().iter().all(|c| *c == 1.0 || *c == -1.0));
        assert_eq!(t, random_form::<f64>(Distribution::Rademacher, 2, 2, 11).unwrap());
        let z = random_form::<Complex64>(Distribution::Rademacher, 3, 3, 11).unwrap();
        assert!(z.coefficients().iter().all(|c| (c.norm() - 1.0).abs() < 1e-15));
        assert_ne!(
            random_form::<f64>(Distribution::Gaussian, 2, 3, 1).unwrap(),
            random_form::<f64>(Distribution::Gaussian, 2, 3, 2).unwrap()
        );
    }

    #[test]
    fn gaussian_moments() {
        let draws: Vec<f64> = (0..10_000u64)
            .flat_map(|s| {
                random_form::<f64>(Distribution::Gaussian, 2, 3, s)
                    .unwrap()
                    .into_coefficients()
            })
            .collect();
        let k = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / k;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        assert!(mean.abs() < 3.0 / k.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "variance {var}");

        let z: Vec<Complex64> = (0..2_000u64)
            .flat_map(|s| {
                random_form::<Complex64>(Distribution::Gaussian, 2, 3, s)
                    .unwrap()
                    .into_coefficients()
            })
            .collect();
        let second = z.iter().map(|c| c.norm_sqr()).sum::<f64>() / z.len() as f64;
        assert!((second - 1.0).abs() < 0.05, "E|z|² = {second}");
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let mut seeds: Vec<u64> = (0..4)
            .flat_map(|i| (0..64).map(move |t| trial_seed(DEFAULT_SEED, i, t)))
            .collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 256);
    }

    #[test]
    fn littlewood_pattern_found_among_signs() {
        let out = search_lower_bound(&config(2, ExtendedP::Infinite, vec![2], 50, Distribution::Rademacher)).unwrap();
        assert!((out.best.ratio - SQRT_2).abs() < 1e-9);
        assert!(out.best.oracle.is_exact());
        assert_eq!(out.log.len(), 50);
    }

    #[test]
    fn search_respects_theorem_at_p_4() {
        let bound = hl_upper_bound(2, &ExtendedP::Finite(4.0), FieldTag::Real).unwrap();
        assert!((bound - SQRT_2).abs() < 1e-12);
        for dist in [Distribution::Rademacher, Distribution::Gaussian] {
            let out = search_lower_bound(&config(2, ExtendedP::Finite(4.0), vec![2, 3], 20, dist)).unwrap();
            assert!(out.best.ratio <= bound + 1e-6, "{dist}: {}", out.best.ratio);
        }
    }

    #[test]
    fn logged_rows_replay_bit_identically() {
        let cfg = config(3, ExtendedP::Finite(9.0), vec![2, 3], 3, Distribution::Gaussian);
        let out = search_lower_bound(&cfg).unwrap();
        for rec in &out.log {
            let form = random_form::<f64>(cfg.distribution, 3, rec.n, rec.seed).unwrap();
            let opts = NormOptions {
                seed: rec.seed,
                ..cfg.norm_opts
            };
            let replay = hl_ratio(&form, &cfg.params, &opts).unwrap();
            assert_eq!(replay, rec.result());
        }
        let one = search_lower_bound(&ExperimentConfig {
            trials: 1,
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(one.log[0], out.log[0]);
    }

    #[test]
    fn best_ratio_nondecreasing_in_trials() {
        let base = config(2, ExtendedP::Infinite, vec![3], 1, Distribution::Gaussian);
        let mut last = 0.0;
        for trials in [1, 2, 5, 10, 20] {
            let best = search_lower_bound(&ExperimentConfig { trials, ..base.clone() })
                .unwrap()
                .best
                .ratio;
            assert!(best >= last);
            last = best;
        }
    }

    #[test]
    fn single_dimension_sweep_matches_search() {
        let cfg = config(2, ExtendedP::Infinite, vec![5], 12, Distribution::Rademacher);
        let rows = exponent_optimality_sweep(&cfg, 1.25).unwrap();
        let search = search_with_exponent(&cfg, 1.25).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].best_ratio, search.best.ratio);
        assert!(rows[0].best_ratio >= rows[0].median_ratio && rows[0].median_ratio >= 0.0);
        assert_eq!(rows[0].trials, 12);
    }

    #[test]
    fn sweep_rejects_exponents_outside_range() {
        let cfg = config(2, ExtendedP::Infinite, vec![2], 2, Distribution::Rademacher);
        assert!(exponent_optimality_sweep(&cfg, 0.9).is_err());
        assert!(exponent_optimality_sweep(&cfg, 1.4).is_err());
        assert!(exponent_optimality_sweep(&cfg, 4.0 / 3.0).is_ok());
    }

    #[test]
    fn config_validation() {
        let good = config(2, ExtendedP::Infinite, vec![2, 4], 1, Distribution::Rademacher);
        assert!(good.validate().is_ok());
        assert!(ExperimentConfig {
            trials: 0,
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            n_values: vec![],
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            n_values: vec![4, 2],
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            n_values: vec![2, 2],
            ..good
        }
        .validate()
        .is_err());
    }

    #[test]
    fn square_rule_stays_within_twice_bh() {
        let study = growth_study(2..=100, &PRule::Square, FieldTag::Real).unwrap();
        assert_eq!(study.fit_from, 50);
        for row in &study.rows {
            assert!(row.bound <= 2.0 * bh_upper_bound(row.m, FieldTag::Real).unwrap());
            assert!(row.log_ratio <= 1e-12);
        }
    }

    #[test]
    fn linear_two_rule_is_legacy() {
        let study = growth_study(2..=40, &PRule::Linear(2.0), FieldTag::Real).unwrap();
        for row in &study.rows {
            assert!(((row.bound - row.legacy) / row.legacy).abs() < 1e-12);
        }
        assert!((study.log2_slope - 0.5).abs() < 1e-10);
    }

    #[test]
    fn growth_rejects_small_p() {
        assert!(growth_study(2..=10, &PRule::Fixed(ExtendedP::Finite(12.0)), FieldTag::Real).is_err());
        assert!(growth_study(2..=10, &PRule::Linear(1.5), FieldTag::Complex).is_err());
        assert!(growth_study(5..=5, &PRule::Square, FieldTag::Real).is_err());
        assert!(growth_study(2..=10, &PRule::Fixed(ExtendedP::Infinite), FieldTag::Real).is_ok());
    }

    #[test]
    fn tables_round_trip() {
        let study = growth_study(2..=12, &PRule::Fixed(ExtendedP::Infinite), FieldTag::Complex).unwrap();
        let mut buf = Vec::new();
        write_csv(&study.rows, &mut buf).unwrap();
        let back: Vec<GrowthRow> = read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, study.rows);

        let mut buf = Vec::new();
        write_json(&study, &mut buf).unwrap();
        let back: GrowthStudy = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, study);

        let cfg = config(2, ExtendedP::Finite(5.0), vec![2], 4, Distribution::Gaussian);
        let log = search_lower_bound(&cfg).unwrap().log;
        let mut buf = Vec::new();
        write_csv(&log, &mut buf).unwrap();
        let back: Vec<TrialRecord> = read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, log);
    }
}
