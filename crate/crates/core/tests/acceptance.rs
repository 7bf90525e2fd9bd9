//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hl_bounds::constants::{
    bh_upper_bound, hl_upper_bound, khinchin_a, legacy_bound, q0, section3_bound, EXPLICIT_TWO_EXPONENT,
};
use hl_bounds::experiments::{
    exponent_optimality_sweep, growth_study, random_form, Distribution, ExperimentConfig, PRule,
};
use hl_bounds::exponents::{build_ladder, check_interpolation};
use hl_bounds::multilinear::{hl_ratio, operator_norm_ascent, operator_norm_exact_small, NormOracle, DEFAULT_SEED};
use hl_bounds::special_functions::{gamma, q0_residual, solve_q0};
use hl_bounds::{ExtendedP, FieldTag, HLParams, MultilinearForm, NormOptions, Rational};
use num_bigint::BigInt;
use num_traits::One;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `x* = x/(x − 1)`, with `1* = ∞`; `None` stands for `∞`.
fn conj(x: &Rational) -> Option<Rational> {
    if x.is_one() {
        None
    } else {
        Some(x / (x - Rational::one()))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn grid(m: u32, p_max: u32) -> Vec<ExtendedP<f64>> {
    (2 * m..=p_max)
        .map(|p| ExtendedP::Finite(f64::from(p)))
        .chain([ExtendedP::Infinite])
        .collect()
}

fn c1_ladder_identities() -> Outcome {
    let mut cases = 0;
    for m in 2..=10u32 {
        for p in 2 * m..=60 {
            let pr = rat(i64::from(p));
            let params = HLParams::new(m, ExtendedP::Finite(pr.clone()), FieldTag::Real).map_err(|e| e.to_string())?;
            let l = build_ladder(&params).map_err(|e| e.to_string())?;
            check(l.lambda[m as usize] == l.s, || format!("λ_m ≠ s at m={m}, p={p}"))?;
            for j in 0..m as usize {
                let lhs = conj(&(&pr / &l.lambda[j]));
                let rhs = &l.lambda[j + 1] / &l.lambda[j];
                check(lhs.as_ref() == Some(&rhs), || {
                    format!("(p/λ_{j})* ≠ λ_{}/λ_{j} at m={m}, p={p}", j + 1)
                })?;
            }
            let two_m = rat(2 * i64::from(m));
            let theta1_def = rat(2) * (l.lambda[0].recip() - l.s.recip());
            let theta2_def = rat(i64::from(m)) * (rat(2) / &l.s - rat(1));
            check(theta1_def == &two_m / &pr && l.theta1 == theta1_def, || {
                format!("θ1 mismatch at m={m}, p={p}")
            })?;
            check(theta2_def == (&pr - &two_m) / &pr && l.theta2 == theta2_def, || {
                format!("θ2 mismatch at m={m}, p={p}")
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (m, p) pairs exact"))
}

fn c2_interpolation() -> Outcome {
    let mut cases = 0;
    for m in 2..=10u32 {
        let ps = (2 * m..=60)
            .map(|p| ExtendedP::Finite(rat(i64::from(p))))
            .chain([ExtendedP::Infinite]);
        for p in ps {
            let params = HLParams::new(m, p.clone(), FieldTag::Real).map_err(|e| e.to_string())?;
            let l = build_ladder(&params).map_err(|e| e.to_string())?;
            let c = check_interpolation(&l, m);
            check(c.is_consistent(), || format!("m={m}, p={p}: {c}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} ladders consistent, p = ∞ included"))
}

fn c3_section3_equivalence() -> Outcome {
    let (num, den) = EXPLICIT_TWO_EXPONENT;
    let h12: Rational = (1..=12).map(|k| Rational::new(BigInt::one(), BigInt::from(k))).sum();
    let identity = Rational::new(BigInt::from(num), BigInt::from(den));
    check(
        identity == h12 / rat(2) + Rational::new(BigInt::from(13), BigInt::from(2)),
        || format!("{num}/{den} ≠ H₁₂/2 + 13/2"),
    )?;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for field in [FieldTag::Real, FieldTag::Complex] {
        for m in 2..=30u32 {
            for p in grid(m, 200) {
                let a = hl_upper_bound(m, &p, field).map_err(|e| e.to_string())?;
                let b = section3_bound(m, &p, field).map_err(|e| e.to_string())?.value;
                let r = rel(b, a);
                check(r <= 1e-10, || format!("{field} m={m}, p={p}: {b} vs {a} (rel {r:e})"))?;
                worst = worst.max(r);
                cases += 1;
            }
        }
    }
    Ok(format!("identity exact; {cases} cases, worst rel {worst:.1e}"))
}

fn c4_improvement() -> Outcome {
    let mut cases = 0;
    let mut worst_strict: f64 = 0.0;
    for field in [FieldTag::Real, FieldTag::Complex] {
        let base = match field {
            FieldTag::Real => SQRT_2,
            FieldTag::Complex => 2.0 / PI.sqrt(),
        };
        for m in 2..=30u32 {
            let legacy = legacy_bound(m).map_err(|e| e.to_string())?;
            for p in grid(m, 200) {
                let b = hl_upper_bound(m, &p, field).map_err(|e| e.to_string())?;
                check(b <= legacy + 1e-12, || format!("{field} m={m}, p={p}: {b} > {legacy}"))?;
                let pv = p.value();
                if pv == f64::from(2 * m) {
                    // Over ℝ the p = 2m value is (√2)^{m−1} itself. Over ℂ it is
                    // (2/√π)^{m−1}, which sits strictly below (√2)^{m−1}.
                    let own = base.powi(m as i32 - 1);
                    check(rel(b, own) <= 1e-12, || format!("{field} m={m}, p=2m: {b} ≠ {own}"))?;
                    if field == FieldTag::Real {
                        check(rel(b, legacy) <= 1e-12, || format!("real m={m}, p=2m: {b} ≠ {legacy}"))?;
                    } else {
                        check(b < legacy, || format!("complex m={m}, p=2m: {b} not below {legacy}"))?;
                    }
                } else if field == FieldTag::Real && m >= 3 {
                    // At m = 2 the real B-H bound is √2 = (√2)^{m−1}, so the
                    // bound is flat in p and no strict gain is possible.
                    check(b < legacy, || format!("real m={m}, p={p}: no strict improvement"))?;
                }
                if m >= 3 && pv >= f64::from(4 * m) {
                    let r = b / legacy;
                    check(r < 0.999, || format!("{field} m={m}, p={p}: ratio {r}"))?;
                    worst_strict = worst_strict.max(r);
                }
                cases += 1;
            }
        }
    }
    Ok(format!(
        "{cases} cases; real equality at p = 2m; complex p = 2m equals (2/√π)^(m−1) < (√2)^(m−1); max ratio for p ≥ 4m is {worst_strict:.4}"
    ))
}

fn c5_q0() -> Outcome {
    let q: f64 = solve_q0().map_err(|e| e.to_string())?;
    check(q > 1.846 && q < 1.848, || format!("q0 = {q}"))?;
    check(q == q0(), || "memoized q0 differs".into())?;
    let res = q0_residual(q).map_err(|e| e.to_string())?.abs();
    check(res <= 1e-12, || format!("residual {res:e}"))?;
    // Independent residual: Γ((q+1)/2) − √π/2.
    let direct = (gamma((q + 1.0) / 2.0).map_err(|e| e.to_string())? - PI.sqrt() / 2.0).abs();
    check(direct <= 1e-12, || format!("Γ((q0+1)/2) − √π/2 = {direct:e}"))?;
    let upper_branch = SQRT_2 * (gamma((q + 1.0) / 2.0).map_err(|e| e.to_string())? / PI.sqrt()).powf(1.0 / q);
    let lower_branch = 2f64.powf(0.5 - 1.0 / q);
    let jump = (upper_branch - lower_branch).abs();
    check(jump <= 1e-9, || format!("branch jump {jump:e}"))?;
    let h = 1e-9;
    let lib_jump = (khinchin_a(q + h, FieldTag::Real).unwrap() - khinchin_a(q - h, FieldTag::Real).unwrap()).abs();
    check(lib_jump <= 1e-8, || format!("khinchin_a jump across q0: {lib_jump:e}"))?;
    Ok(format!("q0 = {q:.15}, residual {res:.1e}, branch gap {jump:.1e}"))
}

fn c6_littlewood() -> Outcome {
    let t = MultilinearForm::<f64>::new(2, 2, vec![1.0, 1.0, 1.0, -1.0]).map_err(|e| e.to_string())?;
    let mixed = t.mixed_norm(4.0 / 3.0).map_err(|e| e.to_string())?;
    check((mixed - 2f64.powf(1.5)).abs() <= 1e-9, || format!("mixed norm {mixed}"))?;
    let exact = operator_norm_exact_small(&t, &ExtendedP::Infinite).map_err(|e| e.to_string())?;
    check(exact.oracle == NormOracle::SignEnumeration, || {
        "oracle is not exact".into()
    })?;
    check((exact.value - 2.0).abs() <= 1e-9, || format!("‖T‖ = {}", exact.value))?;
    let params = HLParams::new(2, ExtendedP::Infinite, FieldTag::Real).map_err(|e| e.to_string())?;
    let r = hl_ratio(&t, &params, &NormOptions::default()).map_err(|e| e.to_string())?;
    check((r.ratio - SQRT_2).abs() <= 1e-9, || format!("ratio {}", r.ratio))?;
    let bound = hl_upper_bound(2, &ExtendedP::Infinite, FieldTag::Real).map_err(|e| e.to_string())?;
    check(SQRT_2 <= bound + 1e-9 && (bound - SQRT_2).abs() <= 1e-9, || {
        format!("bound {bound}")
    })?;
    Ok(format!("ratio {:.12} = bound {bound:.12}", r.ratio))
}

fn c7_oracle_equivalence() -> Outcome {
    let opts = NormOptions {
        restarts: 32,
        ..NormOptions::default()
    };
    let inf = ExtendedP::Infinite;
    let mut forms = Vec::new();
    for code in 0u32..16 {
        let c: Vec<f64> = (0..4).map(|b| if code >> b & 1 == 1 { -1.0 } else { 1.0 }).collect();
        forms.push(MultilinearForm::new(2, 2, c).map_err(|e| e.to_string())?);
    }
    let mut k = 0u64;
    for (m, n) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        for _ in 0..128 {
            forms.push(random_form::<f64>(Distribution::Gaussian, m, n, DEFAULT_SEED ^ k).map_err(|e| e.to_string())?);
            k += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for (i, t) in forms.iter().enumerate() {
        let exact = operator_norm_exact_small(t, &inf).map_err(|e| e.to_string())?.value;
        let ascent = operator_norm_ascent(t, &inf, &opts).map_err(|e| e.to_string())?.value;
        let gap = (exact - ascent).abs();
        check(gap <= 1e-9, || {
            format!(
                "form {i} (m={}, n={}): ascent {ascent} vs exact {exact}",
                t.order(),
                t.dim()
            )
        })?;
        worst = worst.max(gap);
    }
    Ok(format!("{} forms, worst gap {worst:.1e}", forms.len()))
}

fn c8_soundness() -> Outcome {
    let ps = [ExtendedP::Finite(4.0), ExtendedP::Finite(8.0), ExtendedP::Infinite];
    let opts = NormOptions {
        restarts: 64,
        ..NormOptions::default()
    };
    let mut flags = 0;
    let mut ratios = 0;
    let mut worst: f64 = 0.0;
    for i in 0..200u64 {
        let n = [2, 3, 4][(i % 3) as usize];
        let seed = DEFAULT_SEED.wrapping_add(1_000 + i);
        let t = random_form::<f64>(Distribution::Gaussian, 2, n, seed).map_err(|e| e.to_string())?;
        for p in &ps {
            let params = HLParams::new(2, p.clone(), FieldTag::Real).map_err(|e| e.to_string())?;
            let bound = hl_upper_bound(2, p, FieldTag::Real).map_err(|e| e.to_string())?;
            let r = hl_ratio(&t, &params, &NormOptions { seed, ..opts }).map_err(|e| e.to_string())?;
            let over = r.ratio > bound * (1.0 + 1e-6);
            if over && r.oracle.is_exact() {
                return Err(format!(
                    "form {i}, n={n}, p={p}: exact ratio {} > bound {bound}",
                    r.ratio
                ));
            }
            if p.is_infinite() {
                check(r.oracle.is_exact(), || format!("form {i}: p = ∞ not exact"))?;
            }
            flags += usize::from(over);
            worst = worst.max(r.ratio / bound);
            ratios += 1;
        }
    }
    check(flags == 0, || format!("{flags} estimator flags"))?;
    Ok(format!(
        "200 forms, {ratios} ratios, 0 flags, max ratio/bound {worst:.4}"
    ))
}

fn c9_growth() -> Outcome {
    let real = growth_study(2..=100, &PRule::Square, FieldTag::Real).map_err(|e| e.to_string())?;
    let complex = growth_study(2..=100, &PRule::Square, FieldTag::Complex).map_err(|e| e.to_string())?;
    for row in &real.rows {
        let bh = bh_upper_bound(row.m, FieldTag::Real).map_err(|e| e.to_string())?;
        check(row.bound <= 2.0 * bh, || format!("m={}: {} > 2·{bh}", row.m, row.bound))?;
    }
    // Independent least-squares fit over m ∈ [50, 100].
    let fit = |field| {
        let pts: Vec<(f64, f64)> = (50..=100u32)
            .map(|m| {
                let p = ExtendedP::Finite(f64::from(m * m));
                (f64::from(m).ln(), hl_upper_bound(m, &p, field).unwrap().ln())
            })
            .collect();
        let k = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / k, b + y / k));
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        sxy / sxx
    };
    let (sr, sc) = (fit(FieldTag::Real), fit(FieldTag::Complex));
    check(real.fit_from == 50 && (sr - real.loglog_slope).abs() < 1e-12, || {
        format!("library slope {} vs independent {sr}", real.loglog_slope)
    })?;
    check((sc - complex.loglog_slope).abs() < 1e-12, || {
        format!("library complex slope {} vs independent {sc}", complex.loglog_slope)
    })?;
    let detail = format!("real slope {sr:.4} (< 0.40 required), complex slope {sc:.4} (< 0.25 required)");
    check(sr < 0.40 && sc < 0.25, || detail.clone())?;
    Ok(detail)
}

fn c10_sweep() -> Outcome {
    let params = HLParams::new(2, ExtendedP::Infinite, FieldTag::Real).map_err(|e| e.to_string())?;
    let config = ExperimentConfig::new(params, vec![4, 8, 16, 32, 64], 30, Distribution::Rademacher);
    let below = exponent_optimality_sweep(&config, 1.2).map_err(|e| e.to_string())?;
    let medians: Vec<f64> = below.iter().map(|r| r.median_ratio).collect();
    check(medians.windows(2).all(|w| w[0] < w[1]), || {
        format!("r = 1.2 medians not increasing: {medians:?}")
    })?;
    let at = exponent_optimality_sweep(&config, 4.0 / 3.0).map_err(|e| e.to_string())?;
    let m43: Vec<f64> = at.iter().map(|r| r.median_ratio).collect();
    let (lo, hi) = m43
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let variation = (hi - lo) / lo;
    check(variation < 0.25, || {
        format!("r = 4/3 medians vary by {variation:.3}: {m43:?}")
    })?;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    Ok(format!(
        "seed {DEFAULT_SEED}; r = 1.2 medians [{}]; r = 4/3 medians [{}], variation {variation:.3}",
        fmt(&medians),
        fmt(&m43)
    ))
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (
            1,
            "exponent-ladder identities",
            Duration::from_secs(1),
            c1_ladder_identities,
        ),
        (2, "interpolation consistency", Duration::from_secs(1), c2_interpolation),
        (
            3,
            "constant-formula equivalence",
            Duration::from_secs(5),
            c3_section3_equivalence,
        ),
        (4, "improvement over (√2)^(m−1)", Duration::from_secs(1), c4_improvement),
        (5, "q0 root and branch continuity", Duration::from_secs(1), c5_q0),
        (6, "Littlewood witness", Duration::from_millis(100), c6_littlewood),
        (
            7,
            "norm-oracle equivalence",
            Duration::from_secs(30),
            c7_oracle_equivalence,
        ),
        (
            8,
            "theorem soundness at desk scale",
            Duration::from_secs(120),
            c8_soundness,
        ),
        (9, "growth study", Duration::from_secs(1), c9_growth),
        (10, "exponent-optimality sweep", Duration::from_secs(300), c10_sweep),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > budget => Err(format!("{d}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail} [{elapsed:.2?}]");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
