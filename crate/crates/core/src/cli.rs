//! The `hlbounds` command line.
//!
//! Exit codes: 0 on success, 2 on usage or domain errors, 3 when `verify`
//! flags an estimated ratio above the bound, 1 when the norm estimator
//! itself fails.
//!
//! CSV columns and JSON keys are the field names of [`BoundReport`],
//! [`TrialRecord`], [`SweepRow`] and [`GrowthRow`]. Floats are written in
//! shortest round-trip form.
//!
//! [`GrowthRow`]: crate::experiments::GrowthRow

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::constants::{hl_upper_bound, BoundReport, FieldTag};
use crate::error::{Error, Result};
use crate::experiments::{
    exponent_optimality_sweep, growth_study, random_form, search_lower_bound, write_csv, write_json, Distribution,
    ExperimentConfig, GrowthStudy, PRule, SweepRow, TrialRecord,
};
use crate::exponents::{build_ladder, check_interpolation, hl_exponent, ExtendedP, HLParams};
use crate::multilinear::{
    peek_field, ratio_with_exponent, read_form, write_form, MultilinearForm, NormOptions, NormOracle, Scalar,
    DEFAULT_SEED,
};
use crate::{Complex64, Rational};

/// Exit code for usage and domain errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code when `verify` flags a ratio above the bound.
pub const EXIT_FLAG: i32 = 3;
/// Exit code when norm estimation fails.
pub const EXIT_ESTIMATOR: i32 = 1;

/// Relative slack allowed between a ratio and the bound it is checked against.
pub const VERIFY_SLACK: f64 = 1e-6;

/// Restart multiplier used to re-examine a trial before flagging it.
const RETRY_FACTOR: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "hlbounds",
    version,
    about = "Hardy–Littlewood constants, exponents and numerical checks"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,

    /// Worker threads for trials and restarts (default: all cores).
    #[arg(long, global = true, env = "HLBOUNDS_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form upper bounds for C_{m,p}.
    Constants(ConstantsArgs),
    /// Exponent ladder as exact fractions.
    Exponents(ExponentsArgs),
    /// Random forms checked against the theorem bound.
    Verify(VerifyArgs),
    /// Ratios with a substitute exponent r across dimensions.
    Sweep(SweepArgs),
    /// Bounds along a range of m.
    Growth(GrowthArgs),
    /// Writes one random form in the hlform text format.
    RandomForm(RandomFormArgs),
    /// Ratio of a form read from an hlform file.
    Ratio(RatioArgs),
}

fn parse_p(s: &str) -> std::result::Result<ExtendedP<Rational>, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_field(s: &str) -> std::result::Result<FieldTag, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_dist(s: &str) -> std::result::Result<Distribution, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<ExtendedP<f64>>().map_err(|e| e.to_string())? {
        ExtendedP::Finite(v) => Ok(v),
        ExtendedP::Infinite => Err("expected a finite number".into()),
    }
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub m: u32,
    /// Integer, fraction a/b, decimal or inf.
    #[arg(long, value_parser = parse_p)]
    pub p: ExtendedP<Rational>,
    #[arg(long, value_parser = parse_field, default_value = "real")]
    pub field: FieldTag,
    /// Multiplier of the asymptotic envelope κ·m^e.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
}

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long, value_parser = parse_p)]
    pub p: ExtendedP<Rational>,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Ascent restarts per operator norm.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Always use ascent, even where sign enumeration is exact.
    #[arg(long)]
    pub no_exact: bool,
}

impl EstimatorArgs {
    fn norm_options(&self) -> NormOptions {
        NormOptions {
            restarts: self.restarts,
            max_iters: self.max_iters,
            seed: self.seed,
            prefer_exact: !self.no_exact,
            ..NormOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long, value_parser = parse_p)]
    pub p: ExtendedP<Rational>,
    #[arg(long, value_parser = parse_field, default_value = "real")]
    pub field: FieldTag,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long = "dist", value_parser = parse_dist, default_value = "rademacher")]
    pub distribution: Distribution,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long, value_parser = parse_p)]
    pub p: ExtendedP<Rational>,
    #[arg(long, value_parser = parse_field, default_value = "real")]
    pub field: FieldTag,
    /// Substitute exponent, 1 ≤ r ≤ ρ; accepts a/b.
    #[arg(long, value_parser = parse_real)]
    pub r: f64,
    /// Comma-separated, strictly increasing dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub trials: usize,
    #[arg(long = "dist", value_parser = parse_dist, default_value = "rademacher")]
    pub distribution: Distribution,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleKind {
    Fixed,
    Square,
    Linear,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    #[arg(long, value_enum)]
    pub rule: RuleKind,
    /// For `fixed`: a value or inf, or `<c>m` to tie p to c·m.
    #[arg(long)]
    pub p: Option<String>,
    /// For `linear`: p = c·m.
    #[arg(long, value_parser = parse_real)]
    pub c: Option<f64>,
    #[arg(long, value_parser = parse_field, default_value = "real")]
    pub field: FieldTag,
    #[arg(long, default_value_t = 2)]
    pub m_min: u32,
    #[arg(long, default_value_t = 100)]
    pub m_max: u32,
}

#[derive(Debug, Args)]
pub struct RandomFormArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_field, default_value = "real")]
    pub field: FieldTag,
    #[arg(long = "dist", value_parser = parse_dist, default_value = "gaussian")]
    pub distribution: Distribution,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    /// hlform file, or `-` for stdin.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_p)]
    pub p: ExtendedP<Rational>,
    /// Coefficient exponent (default: ρ).
    #[arg(long, value_parser = parse_real)]
    pub exponent: Option<f64>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

fn out_err(e: io::Error) -> Error {
    Error::Format(e.to_string())
}

/// Right-aligned columns from the CSV rendering of `rows`.
fn write_table<T: Serialize>(rows: &[T], out: &mut dyn Write) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    let records: Vec<csv::StringRecord> = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(buf.as_slice())
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Format(e.to_string()))?;
    let Some(first) = records.first() else {
        return Ok(());
    };
    let widths: Vec<usize> = (0..first.len())
        .map(|j| records.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    for r in &records {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        writeln!(out, "{}", cells.join("  ")).map_err(out_err)?;
    }
    Ok(())
}

/// One record as `key  value` lines.
fn write_keyed<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(std::slice::from_ref(value), &mut buf)?;
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let headers = reader.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    let width = headers.iter().map(str::len).max().unwrap_or(0);
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        for (k, v) in headers.iter().zip(rec.iter()) {
            writeln!(out, "{k:<width$}  {v}").map_err(out_err)?;
        }
    }
    Ok(())
}

fn emit_record<T: Serialize>(value: &T, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Table => write_keyed(value, out),
        OutputFormat::Csv => write_csv(std::slice::from_ref(value), out),
        OutputFormat::Json => write_json(value, out),
    }
}

fn cmd_constants(args: &ConstantsArgs, format: OutputFormat, out: &mut dyn Write) -> Result<i32> {
    let report = BoundReport::compute(args.m, args.p.to_f64(), args.field, args.kappa)?;
    emit_record(&report, format, out)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct LadderView {
    m: u32,
    p: String,
    rho: String,
    s: String,
    lambda: Vec<String>,
    theta1: String,
    theta2: String,
    interpolation_consistent: bool,
}

fn cmd_exponents(args: &ExponentsArgs, format: OutputFormat, out: &mut dyn Write) -> Result<i32> {
    let params = HLParams::new(args.m, args.p.clone(), FieldTag::Real)?;
    let ladder = build_ladder(&params)?;
    let check = check_interpolation(&ladder, args.m);
    let view = LadderView {
        m: ladder.m,
        p: ladder.p.to_string(),
        rho: ladder.rho.to_string(),
        s: ladder.s.to_string(),
        lambda: ladder.lambda.iter().map(ToString::to_string).collect(),
        theta1: ladder.theta1.to_string(),
        theta2: ladder.theta2.to_string(),
        interpolation_consistent: check.is_consistent(),
    };
    if format == OutputFormat::Json {
        write_json(&view, out)?;
        return Ok(0);
    }
    let mut pairs = vec![
        ("m".to_string(), view.m.to_string()),
        ("p".into(), view.p.clone()),
        ("rho".into(), view.rho.clone()),
        ("s".into(), view.s.clone()),
    ];
    pairs.extend(
        view.lambda
            .iter()
            .enumerate()
            .map(|(j, l)| (format!("lambda_{j}"), l.clone())),
    );
    pairs.push(("theta1".into(), view.theta1.clone()));
    pairs.push(("theta2".into(), view.theta2.clone()));
    pairs.push(("interpolation".into(), check.to_string()));
    if format == OutputFormat::Csv {
        #[derive(Serialize)]
        struct Pair<'a> {
            name: &'a str,
            value: &'a str,
        }
        let rows: Vec<Pair> = pairs.iter().map(|(name, value)| Pair { name, value }).collect();
        write_csv(&rows, out)?;
    } else {
        let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &pairs {
            writeln!(out, "{k:<width$}  {v}").map_err(out_err)?;
        }
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    m: u32,
    p: ExtendedP<f64>,
    field: FieldTag,
    n: usize,
    distribution: Distribution,
    seed: u64,
    bound: f64,
    max_ratio: f64,
    status: &'static str,
    trials: &'a [TrialRecord],
}

fn experiment_config(
    m: u32,
    p: &ExtendedP<Rational>,
    field: FieldTag,
    n_values: Vec<usize>,
    trials: usize,
    distribution: Distribution,
    est: &EstimatorArgs,
) -> Result<ExperimentConfig> {
    let params = HLParams::new(m, p.to_f64(), field)?;
    Ok(ExperimentConfig {
        seed: est.seed,
        norm_opts: est.norm_options(),
        ..ExperimentConfig::new(params, n_values, trials, distribution)
    })
}

/// Recomputes an estimated trial with more restarts.
fn retry_trial(config: &ExperimentConfig, rec: &TrialRecord) -> Result<TrialRecord> {
    let opts = NormOptions {
        seed: rec.seed,
        restarts: config.norm_opts.restarts * RETRY_FACTOR,
        ..config.norm_opts
    };
    let m = config.params.m as usize;
    let r = match config.params.field {
        FieldTag::Real => {
            let t = random_form::<f64>(config.distribution, m, rec.n, rec.seed)?;
            ratio_with_exponent(&t, &config.params.p, rec.exponent, &opts)?
        }
        FieldTag::Complex => {
            let t = random_form::<Complex64>(config.distribution, m, rec.n, rec.seed)?;
            ratio_with_exponent(&t, &config.params.p, rec.exponent, &opts)?
        }
    };
    Ok(TrialRecord::new(rec.trial, rec.n, r))
}

fn cmd_verify(args: &VerifyArgs, format: OutputFormat, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = experiment_config(
        args.m,
        &args.p,
        args.field,
        vec![args.n],
        args.trials,
        args.distribution,
        &args.estimator,
    )?;
    let bound = hl_upper_bound(args.m, &config.params.p, args.field)?;
    let limit = bound * (1.0 + VERIFY_SLACK);
    let mut log = search_lower_bound(&config)?.log;
    for rec in log.iter_mut() {
        if rec.ratio > limit && !rec.oracle.is_exact() {
            *rec = retry_trial(&config, rec)?;
        }
    }
    let max_ratio = log.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let pass = max_ratio <= limit;
    let status = if pass { "PASS" } else { "FLAG" };
    let summary = format!(
        "seed = {}\nbound = {bound}\nmax_ratio = {max_ratio}\nmax_ratio ≤ bound: {status}\n",
        config.seed
    );
    match format {
        OutputFormat::Table => {
            writeln!(out, "# seed = {}", config.seed).map_err(out_err)?;
            write_table(&log, out)?;
            writeln!(out).map_err(out_err)?;
            write!(out, "{summary}").map_err(out_err)?;
        }
        OutputFormat::Csv => {
            write_csv(&log, &mut *out)?;
            write!(err, "{summary}").map_err(out_err)?;
        }
        OutputFormat::Json => write_json(
            &VerifyReport {
                m: args.m,
                p: config.params.p.clone(),
                field: args.field,
                n: args.n,
                distribution: args.distribution,
                seed: config.seed,
                bound,
                max_ratio,
                status,
                trials: &log,
            },
            out,
        )?,
    }
    Ok(if pass { 0 } else { EXIT_FLAG })
}

fn cmd_sweep(args: &SweepArgs, format: OutputFormat, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = experiment_config(
        args.m,
        &args.p,
        args.field,
        args.n.clone(),
        args.trials,
        args.distribution,
        &args.estimator,
    )?;
    let rows: Vec<SweepRow> = exponent_optimality_sweep(&config, args.r)?;
    match format {
        OutputFormat::Table => {
            writeln!(out, "# seed = {}", config.seed).map_err(out_err)?;
            write_table(&rows, out)?;
        }
        OutputFormat::Csv => {
            writeln!(err, "seed = {}", config.seed).map_err(out_err)?;
            write_csv(&rows, out)?;
        }
        OutputFormat::Json => write_json(&rows, out)?,
    }
    Ok(0)
}

fn growth_rule(args: &GrowthArgs) -> Result<PRule> {
    match args.rule {
        RuleKind::Square => Ok(PRule::Square),
        RuleKind::Linear => args
            .c
            .map(PRule::Linear)
            .ok_or_else(|| Error::domain("--rule linear needs --c")),
        RuleKind::Fixed => {
            let p = args
                .p
                .as_deref()
                .ok_or_else(|| Error::domain("--rule fixed needs --p"))?
                .trim();
            if let Some(c) = p.strip_suffix('m') {
                let c = if c.is_empty() {
                    Ok(1.0)
                } else {
                    parse_real(c).map_err(Error::Parse)
                }?;
                return Ok(PRule::Linear(c));
            }
            Ok(PRule::Fixed(p.parse()?))
        }
    }
}

fn cmd_growth(args: &GrowthArgs, format: OutputFormat, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let rule = growth_rule(args)?;
    let study: GrowthStudy = growth_study(args.m_min..=args.m_max, &rule, args.field)?;
    let summary = format!(
        "rule = {rule}\nfield = {}\nfit_from = {}\nloglog_slope = {}\nlog2_slope = {}\n",
        study.field, study.fit_from, study.loglog_slope, study.log2_slope
    );
    match format {
        OutputFormat::Table => {
            write_table(&study.rows, out)?;
            writeln!(out).map_err(out_err)?;
            write!(out, "{summary}").map_err(out_err)?;
        }
        OutputFormat::Csv => {
            write_csv(&study.rows, &mut *out)?;
            write!(err, "{summary}").map_err(out_err)?;
        }
        OutputFormat::Json => write_json(&study, out)?,
    }
    Ok(0)
}

fn cmd_random_form(args: &RandomFormArgs, out: &mut dyn Write) -> Result<i32> {
    let mut file;
    let sink: &mut dyn Write = match &args.output {
        Some(path) => {
            file = File::create(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            &mut file
        }
        None => out,
    };
    match args.field {
        FieldTag::Real => write_form(&random_form::<f64>(args.distribution, args.m, args.n, args.seed)?, sink)?,
        FieldTag::Complex => write_form(
            &random_form::<Complex64>(args.distribution, args.m, args.n, args.seed)?,
            sink,
        )?,
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct FileRatio {
    m: usize,
    n: usize,
    field: FieldTag,
    p: ExtendedP<f64>,
    exponent: f64,
    mixed_norm: f64,
    op_norm_estimate: f64,
    ratio: f64,
    restarts_used: usize,
    oracle: NormOracle,
    seed: u64,
    bound: f64,
}

fn file_ratio<K: Scalar>(text: &str, args: &RatioArgs) -> Result<FileRatio> {
    let t: MultilinearForm<K> = read_form(text.as_bytes())?;
    let m = u32::try_from(t.order()).map_err(|_| Error::domain("order too large"))?;
    let p = args.p.to_f64();
    let rho = hl_exponent(m, &p)?;
    let r = ratio_with_exponent(&t, &p, args.exponent.unwrap_or(rho), &args.estimator.norm_options())?;
    Ok(FileRatio {
        m: t.order(),
        n: t.dim(),
        field: K::FIELD,
        bound: hl_upper_bound(m, &p, K::FIELD)?,
        p,
        exponent: r.exponent,
        mixed_norm: r.mixed_norm,
        op_norm_estimate: r.op_norm_estimate,
        ratio: r.ratio,
        restarts_used: r.restarts_used,
        oracle: r.oracle,
        seed: r.seed,
    })
}

fn cmd_ratio(args: &RatioArgs, format: OutputFormat, out: &mut dyn Write) -> Result<i32> {
    let mut text = String::new();
    if args.input.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map_err(out_err)?;
    } else {
        let file = File::open(&args.input).map_err(|e| Error::Format(format!("{}: {e}", args.input.display())))?;
        BufReader::new(file).read_to_string(&mut text).map_err(out_err)?;
    }
    let report = match peek_field(&text)? {
        FieldTag::Real => file_ratio::<f64>(&text, args)?,
        FieldTag::Complex => file_ratio::<Complex64>(&text, args)?,
    };
    emit_record(&report, format, out)?;
    Ok(0)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence(_) | Error::AllRestartsDegenerate(_) => EXIT_ESTIMATOR,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let format = cli.format;
    match &cli.command {
        Command::Constants(a) => cmd_constants(a, format, out),
        Command::Exponents(a) => cmd_exponents(a, format, out),
        Command::Verify(a) => cmd_verify(a, format, out, err),
        Command::Sweep(a) => cmd_sweep(a, format, out, err),
        Command::Growth(a) => cmd_growth(a, format, out, err),
        Command::RandomForm(a) => cmd_random_form(a, out),
        Command::Ratio(a) => cmd_ratio(a, format, out),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.threads {
        Some(0) => Err(Error::domain("--threads must be at least 1")),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => {
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| dispatch(cli, &mut o, &mut e));
                out.write_all(&o)
                    .and_then(|_| err.write_all(&e))
                    .map_err(out_err)
                    .and(r)
            }
            Err(e) => Err(Error::domain(format!("cannot start {k} threads: {e}"))),
        },
        None => dispatch(cli, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            let to_out = !e.use_stderr();
            let text = e.render().to_string();
            let _ = if to_out {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            if to_out {
                0
            } else {
                EXIT_USAGE
            }
        }
    }
}
