//! Command-line front end: argument parsing, dispatch and table rendering.
//!
//! Every command produces a [`Table`]. CSV output is a block of
//! `# key=value` lines (the run configuration, then any summary), a header
//! row and one line per record, with floats at 10 significant digits. JSON
//! output carries the same fields as an object with `config`, `summary`,
//! `columns` and `rows`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::dct_verify::{domination_grid, limit_integral_ladder, LIMIT_LADDER};
use crate::distribution::inverse_normalization_slope;
use crate::distribution::{median_curve, normalization, sample, LogPareto, ThetaParam};
use crate::error::Error;
use crate::estimators::{
    estimate_bias_curve, run_experiment, EstimatorKind, EstimatorReport, ExperimentConfig,
};
use crate::information::{cr_bound_from, fisher, fisher_truncated, InformationKind};

/// Environment variable read for `--seed` when the flag is absent.
pub const SEED_ENV: &str = "LOGPARETO_SEED";

/// Significant digits of every float in CSV output.
pub const SIGNIFICANT_DIGITS: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "logpareto",
    version,
    about = "Log-perturbed Pareto family: constants, information, sampling and estimator experiments"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// a_θ, da/dθ, d(1/a)/dθ, the score offset c_θ and the median.
    Constants {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
    },
    /// Fisher information: finite value, truncated value or divergence fit.
    Info(InfoArgs),
    /// Population median on an evenly spaced θ grid.
    MedianCurve(GridArgs),
    /// Draws from the distribution by inverse transform.
    Sample {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Monte Carlo bias, variance and bounds of one estimator.
    Experiment(ExperimentArgs),
    /// Monte Carlo bias curve with finite-difference slopes.
    BiasCurve(BiasCurveArgs),
    /// Domination bound on the fixed (h, x) grid and the limit integral.
    DctCheck,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Truncate at x = e^U (U is the log-space upper limit).
    #[arg(long = "trunc-log", value_name = "U")]
    pub trunc_log: Option<f64>,
    /// Sample size for the Cramér–Rao bound column.
    #[arg(long)]
    pub n: Option<u64>,
    /// Bias slope dF/dθ for the generalized bound.
    #[arg(
        long,
        default_value_t = 0.0,
        allow_negative_numbers = true,
        requires = "n"
    )]
    pub bias_slope: f64,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    /// Defaults to `--from`, which needs `--points 1`.
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Base seed; falls back to $LOGPARETO_SEED, then 0.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct WorkersArg {
    /// Worker threads; 0 uses every available core. Does not affect output.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Sample size per trial (odd).
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, value_enum)]
    pub estimator: EstimatorArg,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub workers: WorkersArg,
    /// Bias slope dF/dθ for the generalized bound.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "bias_step")]
    pub bias_slope: Option<f64>,
    /// Measure the bias slope over {θ-h, θ, θ+h} with common random numbers.
    #[arg(long, value_name = "H")]
    pub bias_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BiasCurveArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, value_enum)]
    pub estimator: EstimatorArg,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub workers: WorkersArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Median,
    Mle,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Median => EstimatorKind::Median,
            EstimatorArg::Mle => EstimatorKind::Mle,
        }
    }
}

/// Failure of a command, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } => CliError::Numerical(e.to_string()),
            Error::Domain { .. } | Error::OutOfRange { .. } => CliError::Usage(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub config: Vec<(&'static str, Cell)>,
    pub summary: Vec<(&'static str, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(command: &str, columns: &[&'static str]) -> Self {
        Table {
            config: vec![("command", command.into())],
            columns: columns.to_vec(),
            ..Table::default()
        }
    }

    fn with(mut self, key: &'static str, value: impl Into<Cell>) -> Self {
        self.config.push((key, value.into()));
        self
    }

    fn note(&mut self, key: &'static str, value: impl Into<Cell>) {
        self.summary.push((key, value.into()));
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k}={}", config_text(v));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k}={}", cell_text(v));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(cell_text).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let object = |pairs: &[(&'static str, Cell)], exact: bool| {
            pairs
                .iter()
                .map(|(k, v)| (k.to_string(), cell_json(v, exact)))
                .collect::<Map<_, _>>()
        };
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), cell_json(v, false)))
                        .collect(),
                )
            })
            .collect();
        let mut root = Map::new();
        root.insert("config".into(), Value::Object(object(&self.config, true)));
        root.insert(
            "summary".into(),
            Value::Object(object(&self.summary, false)),
        );
        root.insert(
            "columns".into(),
            self.columns.iter().map(|c| Value::from(*c)).collect(),
        );
        root.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("plain JSON values");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits: positional notation for
/// magnitudes in `[1e-4, 1e10)`, scientific otherwise.
pub fn format_significant(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let digits = SIGNIFICANT_DIGITS - 1;
    let sci = format!("{x:.digits$e}");
    let exp: i32 = sci[sci.find('e').expect("exponent present") + 1..]
        .parse()
        .expect("integer exponent");
    if x == 0.0 {
        return format!("{:.digits$}", 0.0);
    }
    if (-4..10).contains(&exp) {
        let decimals = (digits as i32 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Float(v) => format_significant(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

/// Configuration floats echo the parsed flag exactly rather than rounded.
fn config_text(c: &Cell) -> String {
    match c {
        Cell::Float(v) => v.to_string(),
        other => cell_text(other),
    }
}

fn cell_json(c: &Cell, exact: bool) -> Value {
    match c {
        Cell::Float(v) if exact => Value::from(*v),
        Cell::Float(v) => {
            let rounded: f64 = format_significant(*v).parse().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Cell::Int(v) => Value::from(*v),
        Cell::Bool(v) => Value::from(*v),
        Cell::Text(s) => Value::from(s.as_str()),
        Cell::Empty => Value::Null,
    }
}

fn theta_param(theta: f64) -> Result<ThetaParam, CliError> {
    Ok(ThetaParam::new(theta)?)
}

fn grid(args: &GridArgs) -> Result<Vec<f64>, CliError> {
    let to = args.to.unwrap_or(args.from);
    if args.points == 0 {
        return Err(usage("points = 0: grid needs at least one point"));
    }
    if !args.from.is_finite() || !to.is_finite() {
        return Err(usage("grid bounds must be finite"));
    }
    if args.points == 1 {
        if to != args.from {
            return Err(usage("points = 1 requires --to equal to --from"));
        }
        return Ok(vec![args.from]);
    }
    if !(to > args.from) {
        return Err(usage(format!(
            "to = {to}: must exceed from = {}",
            args.from
        )));
    }
    let last = (args.points - 1) as f64;
    Ok((0..args.points)
        .map(|i| {
            if i == args.points - 1 {
                to
            } else {
                args.from + (to - args.from) * (i as f64 / last)
            }
        })
        .collect())
}

fn with_workers<T: Send>(
    workers: usize,
    job: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    pool.install(job)
}

fn constants(theta: f64) -> Result<Table, CliError> {
    let t = theta_param(theta)?;
    let norm = normalization(t);
    let dist = LogPareto::new(t);
    let mut table = Table::new(
        "constants",
        &[
            "theta",
            "a_theta",
            "da_dtheta",
            "d_inv_a_dtheta",
            "score_offset",
            "median",
        ],
    )
    .with("theta", theta);
    table.push(vec![
        theta.into(),
        norm.a_theta.into(),
        norm.da_dtheta.into(),
        inverse_normalization_slope(t).into(),
        dist.score_offset().into(),
        dist.quantile(0.5)?.into(),
    ]);
    Ok(table)
}

fn info(args: &InfoArgs) -> Result<Table, CliError> {
    let t = theta_param(args.theta)?;
    let mut columns = vec!["theta", "kind", "value", "rate", "offset"];
    if args.n.is_some() {
        columns.extend(["n", "bias_slope", "cr_bound", "no_information"]);
    }
    let mut table = Table::new("info", &columns).with("theta", args.theta);
    if let Some(u) = args.trunc_log {
        table = table.with("trunc_log", u);
    }
    if let Some(n) = args.n {
        table = table.with("n", n).with("bias_slope", args.bias_slope);
    }

    let info = fisher(t)?;
    let mut row: Vec<Cell> = vec![args.theta.into()];
    match (args.trunc_log, info.kind) {
        (Some(u), _) => {
            row.extend([
                "truncated".into(),
                fisher_truncated(t, u)?.into(),
                Cell::Empty,
                Cell::Empty,
            ]);
        }
        (None, InformationKind::Finite { value }) => {
            row.extend(["finite".into(), value.into(), Cell::Empty, Cell::Empty]);
        }
        (None, InformationKind::Divergent { rate, offset }) => {
            row.extend(["divergent".into(), Cell::Empty, rate.into(), offset.into()]);
            table.note(
                "diagnosis",
                Cell::Text(format!(
                    "divergent: J(U) ~ {:.2} ln U {} {:.1}",
                    rate,
                    if offset < 0.0 { '-' } else { '+' },
                    offset.abs()
                )),
            );
        }
    }
    if let Some(n) = args.n {
        let b = cr_bound_from(&info, n, args.bias_slope)?;
        row.extend([
            n.into(),
            args.bias_slope.into(),
            b.bound.into(),
            b.no_information.into(),
        ]);
    }
    table.push(row);
    Ok(table)
}

fn median_curve_table(args: &GridArgs) -> Result<Table, CliError> {
    let thetas = grid(args)?;
    let params = thetas
        .iter()
        .map(|&t| theta_param(t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new("median-curve", &["theta", "median"])
        .with("from", args.from)
        .with("to", args.to.unwrap_or(args.from))
        .with("points", args.points);
    for (theta, median) in median_curve(&params)? {
        table.push(vec![theta.into(), median.into()]);
    }
    Ok(table)
}

fn sample_table(theta: f64, n: usize, seed: u64) -> Result<Table, CliError> {
    let t = theta_param(theta)?;
    if n == 0 {
        return Err(usage("n = 0: sample size must be >= 1"));
    }
    let batch = sample(n, t, seed)?;
    let mut table = Table::new("sample", &["index", "x"])
        .with("theta", theta)
        .with("n", n)
        .with("seed", seed);
    for (i, &x) in batch.values.iter().enumerate() {
        table.push(vec![i.into(), x.into()]);
    }
    Ok(table)
}

const REPORT_COLUMNS: [&str; 18] = [
    "estimator",
    "theta",
    "n",
    "trials",
    "seed",
    "mean_estimate",
    "bias",
    "bias_se",
    "variance",
    "variance_se",
    "rmse",
    "clamp_rate",
    "asymptotic_variance",
    "bias_slope",
    "bias_slope_se",
    "information",
    "cr_bound",
    "no_information",
];

fn report_row(r: &EstimatorReport, slope_se: Option<f64>, information: Option<f64>) -> Vec<Cell> {
    vec![
        r.estimator.as_str().into(),
        r.theta_true.into(),
        r.n.into(),
        r.trials.into(),
        r.seed.into(),
        r.mean_estimate.into(),
        r.bias.into(),
        r.bias_se.into(),
        r.variance.into(),
        r.variance_se.into(),
        r.rmse.into(),
        r.clamp_rate.into(),
        r.asymptotic_variance.into(),
        r.cr_bound.bias_slope.into(),
        slope_se.into(),
        information.into(),
        r.cr_bound.bound.into(),
        r.cr_bound.no_information.into(),
    ]
}

fn experiment(args: &ExperimentArgs) -> Result<Table, CliError> {
    let t = theta_param(args.theta)?;
    let kind = EstimatorKind::from(args.estimator);
    let seed = args.seed.seed;
    let mut table = Table::new("experiment", &REPORT_COLUMNS)
        .with("theta", args.theta)
        .with("n", args.n)
        .with("trials", args.trials)
        .with("estimator", kind.to_string().as_str())
        .with("seed", seed);
    let measured = match (args.bias_slope, args.bias_step) {
        (Some(s), _) => {
            table = table.with("bias_slope", s);
            Some((s, None))
        }
        (None, Some(h)) => {
            table = table.with("bias_step", h);
            if !(h > 0.0) || !h.is_finite() {
                return Err(usage(format!("bias_step = {h}: must be finite and > 0")));
            }
            let lo = ThetaParam::new(args.theta - h)
                .map_err(|_| usage(format!("bias_step = {h}: theta - h falls below 1")))?;
            let hi = ThetaParam::new(args.theta + h)
                .map_err(|_| usage(format!("bias_step = {h}: theta + h exceeds the maximum")))?;
            let curve = with_workers(args.workers.workers, || {
                Ok(estimate_bias_curve(
                    &[lo, t, hi],
                    args.n,
                    args.trials,
                    kind,
                    seed,
                )?)
            })?;
            let s = curve.slopes[0];
            Some((s.slope, Some(s.standard_error)))
        }
        (None, None) => None,
    };
    let mut cfg = ExperimentConfig::new(t, args.n, args.trials, kind, seed);
    cfg.bias_slope = measured.map(|(s, _)| s);
    let report = with_workers(args.workers.workers, || Ok(run_experiment(&cfg)?))?;
    let information = fisher(t)?.finite_value();
    table.push(report_row(
        &report,
        measured.and_then(|(_, se)| se),
        information,
    ));
    Ok(table)
}

fn bias_curve_table(args: &BiasCurveArgs) -> Result<Table, CliError> {
    let thetas = grid(&args.grid)?;
    let params = thetas
        .iter()
        .map(|&t| theta_param(t))
        .collect::<Result<Vec<_>, _>>()?;
    let kind = EstimatorKind::from(args.estimator);
    let seed = args.seed.seed;
    let curve = with_workers(args.workers.workers, || {
        Ok(estimate_bias_curve(
            &params,
            args.n,
            args.trials,
            kind,
            seed,
        )?)
    })?;
    let mut table = Table::new(
        "bias-curve",
        &["theta", "bias", "bias_se", "slope", "slope_se"],
    )
    .with("from", args.grid.from)
    .with("to", args.grid.to.unwrap_or(args.grid.from))
    .with("points", args.grid.points)
    .with("n", args.n)
    .with("trials", args.trials)
    .with("estimator", kind.to_string().as_str())
    .with("seed", seed);
    for p in &curve.points {
        let slope = curve.slope_at(p.theta);
        table.push(vec![
            p.theta.into(),
            p.bias.into(),
            p.standard_error.into(),
            slope.map(|s| s.slope).into(),
            slope.map(|s| s.standard_error).into(),
        ]);
    }
    Ok(table)
}

fn dct_check() -> Result<Table, CliError> {
    let checks = domination_grid();
    let ladder = limit_integral_ladder(&LIMIT_LADDER)?;
    let violations = checks.iter().filter(|c| !c.ok).count();
    let mut table = Table::new("dct-check", &["h", "log_x", "ratio", "bound", "ok"]);
    table.note(
        "result",
        Cell::Text(format!(
            "{violations} violations on {} grid points",
            checks.len()
        )),
    );
    table.note(
        "limit_step",
        *ladder.steps.last().expect("non-empty ladder"),
    );
    table.note("limit_integral", ladder.last());
    for c in &checks {
        table.push(vec![
            c.h.into(),
            c.x.ln().into(),
            c.ratio.into(),
            c.bound.into(),
            c.ok.into(),
        ]);
    }
    Ok(table)
}

/// Runs one parsed command and returns its table.
pub fn run(command: &Command) -> Result<Table, CliError> {
    match command {
        Command::Constants { theta } => constants(*theta),
        Command::Info(args) => info(args),
        Command::MedianCurve(args) => median_curve_table(args),
        Command::Sample { theta, n, seed } => sample_table(*theta, *n, seed.seed),
        Command::Experiment(args) => experiment(args),
        Command::BiasCurve(args) => bias_curve_table(args),
        Command::DctCheck => dct_check(),
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = run(&cli.command)?.render(cli.format);
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Process entry point: usage errors exit 2, numerical failures 3.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("logpareto").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(2.0), "2.000000000");
        assert_eq!(
            format_significant(std::f64::consts::SQRT_2.exp()),
            "4.113250379"
        );
        assert_eq!(format_significant(-0.25), "-0.2500000000");
        assert_eq!(format_significant(0.0), "0.000000000");
        assert_eq!(format_significant(1.5e-7), "1.500000000e-7");
        assert_eq!(format_significant(123456.0), "123456.0000");
        assert_eq!(format_significant(9.9999999999), "10.00000000");
    }

    #[test]
    fn constants_at_the_boundary() {
        let t = run(&parse(&["constants", "--theta", "1"]).command).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("# command=constants\n# theta=1\n"));
        assert!(csv.contains(
            "\n1.000000000,2.000000000,4.000000000,-1.000000000,2.000000000,4.113250379\n"
        ));
    }

    #[test]
    fn usage_errors_name_the_constraint() {
        let e = run(&parse(&["constants", "--theta", "0.5"]).command).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("theta below 1"));
        let e = run(&parse(&["median-curve", "--from", "1", "--to", "2", "--points", "0"]).command)
            .unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = run(&parse(&[
            "experiment",
            "--theta",
            "1",
            "--n",
            "10",
            "--trials",
            "5",
            "--estimator",
            "median",
        ])
        .command)
        .unwrap_err();
        assert!(e.to_string().contains("odd"));
    }

    #[test]
    fn divergent_information_is_structured() {
        let t = run(&parse(&["info", "--theta", "1", "--n", "50"]).command).unwrap();
        let csv = t.to_csv();
        assert!(!csv.contains(",inf") && !csv.contains("inf,"), "{csv}");
        assert!(csv.contains("# diagnosis=divergent: J(U) ~ 2.00 ln U - 4.0\n"));
        assert!(csv.contains(",divergent,,2.0000"));
        assert!(csv.trim_end().ends_with(",50,0.000000000,0.000000000,true"));
        let json: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json["rows"][0]["kind"], "divergent");
        assert_eq!(json["rows"][0]["no_information"], true);
    }

    #[test]
    fn single_point_grid() {
        let t = run(&parse(&["median-curve", "--from", "1", "--points", "1"]).command).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(
            t.rows[0][1],
            Cell::Float(
                LogPareto::new(theta_param(1.0).unwrap())
                    .quantile(0.5)
                    .unwrap()
            )
        );
        assert!(run(
            &parse(&["median-curve", "--from", "1", "--to", "2", "--points", "1"]).command
        )
        .is_err());
        assert!(run(
            &parse(&["median-curve", "--from", "2", "--to", "1", "--points", "3"]).command
        )
        .is_err());
    }

    #[test]
    fn grid_ends_exactly_at_to() {
        let g = grid(&GridArgs {
            from: 1.0,
            to: Some(2.0),
            points: 101,
        })
        .unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[100], 2.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dct_summary() {
        let t = run(&Command::DctCheck).unwrap();
        assert_eq!(t.rows.len(), 54);
        assert!(t
            .to_csv()
            .contains("# result=0 violations on 54 grid points\n"));
    }

    #[test]
    fn json_rows_match_columns() {
        let t =
            run(&parse(&["sample", "--theta", "2", "--n", "3", "--seed", "4"]).command).unwrap();
        let json: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json["config"]["seed"], 4);
        assert_eq!(json["rows"].as_array().unwrap().len(), 3);
        assert!(json["rows"][2]["x"].as_f64().unwrap() >= std::f64::consts::E);
    }

    #[test]
    fn bias_step_must_stay_in_range() {
        let args = [
            "experiment",
            "--theta",
            "1",
            "--n",
            "11",
            "--trials",
            "4",
            "--estimator",
            "mle",
            "--bias-step",
            "0.1",
        ];
        let e = run(&parse(&args).command).unwrap_err();
        assert!(e.to_string().contains("below 1"));
    }
}
