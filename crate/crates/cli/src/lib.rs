//! Batch front-end for the TMA laboratory: `estimate`, `bias` and `bearings`.
//!
//! Every command writes CSV artifacts under an output directory. Each CSV
//! starts with one `#` comment line carrying the tool version, a SHA-256 of
//! the effective configuration, and the seed, followed by a header row.
//! Outputs depend only on `(config, seed)`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use tma_core::config::{parse_bias, parse_scenario, scenario_to_toml, BiasFile};
use tma_core::estimator::{monte_carlo, Anchor, CostKind, GridAxis, MonteCarloSummary, SearchSpace};
use tma_core::{bias, Scenario};

pub const TOOL: &str = concat!("tma ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable or invalid configuration, bad flag values.
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn config_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "tma", version, about = "Bearings-only target motion analysis experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo grid-search estimation for one scenario file.
    Estimate(EstimateArgs),
    /// Segment-length distribution and kurtosis, optionally swept over range.
    Bias(BiasArgs),
    /// Export the true and noisy bearing series of a scenario.
    Bearings(BearingsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostChoice {
    Both,
    BearingDiff,
    Equidistant,
}

impl CostChoice {
    fn kinds(self) -> Vec<CostKind> {
        match self {
            CostChoice::Both => CostKind::ALL.to_vec(),
            CostChoice::BearingDiff => vec![CostKind::BearingDiff],
            CostChoice::Equidistant => vec![CostKind::Equidistant],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnchorChoice {
    TrueB0,
    MeasuredB0,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub cost: CostChoice,
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Bearing used to place candidate start points.
    #[arg(long, value_enum, default_value = "true-b0")]
    pub anchor: AnchorChoice,
    /// Override the scenario's bearing noise (degrees).
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Range grid `lo:hi:step` in meters (default: true r0 ± 1000, step 10).
    #[arg(long, value_parser = parse_axis)]
    pub r0_grid: Option<GridAxis>,
    /// Course grid `lo:hi:step` in degrees (default: true course ± 2, step 0.1).
    #[arg(long, value_parser = parse_axis)]
    pub course_grid: Option<GridAxis>,
    /// Speed grid `lo:hi:step` in m/s (default: 1:20:0.1).
    #[arg(long, value_parser = parse_axis)]
    pub speed_grid: Option<GridAxis>,
}

#[derive(Debug, Clone, Args)]
pub struct BiasArgs {
    /// Bias experiment file (TOML).
    pub config: PathBuf,
    /// Run the file's `[sweep]` over initial range instead of a single point.
    #[arg(long)]
    pub sweep: bool,
    /// Override the number of accepted draws per experiment.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BearingsArgs {
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn parse_axis(s: &str) -> Result<GridAxis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(format!("expected lo:hi:step, got {s:?}"));
    };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    let axis = GridAxis::new(num(lo)?, num(hi)?, num(step)?);
    axis.validate("grid").map_err(|e| e.to_string())?;
    Ok(axis)
}

/// Everything needed to rerun a command: the effective config and seed, plus
/// what it produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub wall_seconds: f64,
    pub artifacts: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub summaries: Vec<SummaryRow>,
    pub config: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub cost_kind: String,
    pub runs: usize,
    pub failed: usize,
    pub mean_abs_dr0: f64,
    pub mean_abs_dcourse: f64,
    pub mean_abs_dspeed: f64,
    pub mean_rms: f64,
}

impl From<&MonteCarloSummary> for SummaryRow {
    fn from(s: &MonteCarloSummary) -> Self {
        Self {
            cost_kind: s.kind.to_string(),
            runs: s.runs,
            failed: s.failed,
            mean_abs_dr0: s.mean_param_error.r0,
            mean_abs_dcourse: s.mean_param_error.course,
            mean_abs_dspeed: s.mean_param_error.speed,
            mean_rms: s.mean_rms_error,
        }
    }
}

fn sha256_hex(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

/// CSV file with the provenance comment line already written.
struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl CsvOut {
    fn create(path: PathBuf, config_hash: &str, seed: u64, header: &[&str]) -> Result<Self, CliError> {
        let mut file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        writeln!(file, "# {TOOL} config_sha256={config_hash} seed={seed}").map_err(|e| io_err(&path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header).map_err(|e| io_err(&path, e))?;
        Ok(Self { path, writer })
    }

    fn row<I, T>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| io_err(&self.path, e))
    }

    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush().map_err(|e| io_err(&self.path, e))?;
        Ok(self.path)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| config_err(path, e))
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_report(dir: &Path, report: &mut RunReport) -> Result<(), CliError> {
    let path = dir.join("run_report.toml");
    report.artifacts.push(path.clone());
    let text = toml::to_string(report).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    parse_scenario(&read(path)?).map_err(|e| config_err(path, e))
}

/// Effective search space and the text used to fingerprint the run.
fn estimate_setup(args: &EstimateArgs) -> Result<(Scenario, SearchSpace, String), CliError> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(sigma) = args.noise_sigma {
        scenario.noise_sigma = sigma;
        scenario.validate().map_err(|e| CliError::Config(format!("--noise-sigma: {e}")))?;
    }
    if args.runs == 0 {
        return Err(CliError::Config("--runs must be >= 1".into()));
    }
    let mut space = SearchSpace::around(&scenario.target);
    if let Some(a) = args.r0_grid {
        space.r0 = a;
    }
    if let Some(a) = args.course_grid {
        space.course = a;
    }
    if let Some(a) = args.speed_grid {
        space.speed = a;
    }
    #[derive(Serialize)]
    struct Effective<'a> {
        cost: &'a [CostKind],
        anchor: &'a str,
        runs: usize,
        search: &'a SearchSpace,
    }
    let kinds = args.cost.kinds();
    let anchor = match args.anchor {
        AnchorChoice::TrueB0 => Anchor::TrueB0,
        AnchorChoice::MeasuredB0 => Anchor::MeasuredB0,
    };
    let effective = toml::to_string(&Effective {
        cost: &kinds,
        anchor: anchor.as_str(),
        runs: args.runs,
        search: &space,
    })
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let echo = format!("{}\n[run]\n{}", scenario_to_toml(&scenario), effective);
    Ok((scenario, space, echo))
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let (scenario, space, echo) = estimate_setup(args)?;
    let anchor = match args.anchor {
        AnchorChoice::TrueB0 => Anchor::TrueB0,
        AnchorChoice::MeasuredB0 => Anchor::MeasuredB0,
    };
    let hash = sha256_hex(&echo);
    prepare_out(&args.out)?;

    let summaries = args
        .cost
        .kinds()
        .into_iter()
        .map(|kind| {
            monte_carlo(&scenario, &space, kind, anchor, args.runs, args.seed)
                .map_err(|e| CliError::Runtime(format!("{kind}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut summary = CsvOut::create(
        args.out.join("estimate_summary.csv"),
        &hash,
        args.seed,
        &[
            "cost_kind",
            "mean_abs_dr0_m",
            "mean_abs_dcourse_deg",
            "mean_abs_dspeed_mps",
            "mean_rms_m",
            "runs",
            "failed",
        ],
    )?;
    let mut detail = CsvOut::create(
        args.out.join("estimate_runs.csv"),
        &hash,
        args.seed,
        &[
            "cost_kind",
            "run",
            "seed",
            "status",
            "est_r0_m",
            "est_course_deg",
            "est_speed_mps",
            "dr0_m",
            "dcourse_deg",
            "dspeed_mps",
            "rms_m",
            "cost",
            "cells",
        ],
    )?;
    for s in &summaries {
        let e = s.mean_param_error;
        summary.row([
            s.kind.to_string(),
            e.r0.to_string(),
            e.course.to_string(),
            e.speed.to_string(),
            s.mean_rms_error.to_string(),
            s.runs.to_string(),
            s.failed.to_string(),
        ])?;
        for run in &s.per_run {
            let head = [s.kind.to_string(), run.index.to_string(), run.seed.to_string()];
            let rest: Vec<String> = match &run.result {
                Ok(r) => [
                    "ok".to_string(),
                    r.best.r0.to_string(),
                    r.best.course.degrees().to_string(),
                    r.best.speed.to_string(),
                    r.param_error.r0.to_string(),
                    r.param_error.course.to_string(),
                    r.param_error.speed.to_string(),
                    r.rms_error.to_string(),
                    r.cost.to_string(),
                    r.cells_evaluated.to_string(),
                ]
                .into(),
                Err(err) => std::iter::once(format!("failed: {err}"))
                    .chain(std::iter::repeat_n(String::new(), 9))
                    .collect(),
            };
            detail.row(head.into_iter().chain(rest))?;
        }
    }
    let artifacts = vec![summary.finish()?, detail.finish()?];

    let mut report = RunReport {
        tool: TOOL.into(),
        command: "estimate".into(),
        seed: args.seed,
        config_sha256: hash,
        wall_seconds: started.elapsed().as_secs_f64(),
        artifacts,
        summaries: summaries.iter().map(SummaryRow::from).collect(),
        config: echo,
    };
    write_report(&args.out, &mut report)?;
    Ok(report)
}

fn load_bias(args: &BiasArgs) -> Result<BiasFile, CliError> {
    let text = read(&args.config)?;
    let mut file = parse_bias(&text).map_err(|e| config_err(&args.config, e))?;
    if let Some(runs) = args.runs {
        file.bias.runs = runs;
        file.bias.validate().map_err(|e| CliError::Config(format!("--runs: {e}")))?;
    }
    if args.sweep && file.sweep.is_none() {
        return Err(config_err(&args.config, "--sweep needs a [sweep] table"));
    }
    Ok(file)
}

pub fn cmd_bias(args: &BiasArgs) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let file = load_bias(args)?;
    let echo = file.to_toml();
    let hash = sha256_hex(&echo);
    prepare_out(&args.out)?;
    let mut artifacts = Vec::new();

    if args.sweep {
        let ranges = file
            .sweep
            .as_ref()
            .expect("checked in load_bias")
            .r0_values()
            .map_err(|e| config_err(&args.config, e))?;
        let points = bias::range_sweep(&file.bias, &ranges, args.seed).map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut csv = CsvOut::create(
            args.out.join("bias_sweep.csv"),
            &hash,
            args.seed,
            &["r0_m", "kurtosis", "mean_m", "std_m", "runs_kept", "runs_rejected", "status"],
        )?;
        for p in &points {
            match &p.report {
                Ok(r) => csv.row([
                    p.r0.to_string(),
                    r.kurtosis.to_string(),
                    r.mean.to_string(),
                    r.std.to_string(),
                    r.runs_kept.to_string(),
                    r.runs_rejected.to_string(),
                    if r.geometry_warning { "geometry-warning" } else { "ok" }.to_string(),
                ])?,
                Err(e) => csv.row([
                    p.r0.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("failed: {e}"),
                ])?,
            }
        }
        artifacts.push(csv.finish()?);
    } else {
        let r = bias::bias_experiment(&file.bias, args.seed).map_err(|e| CliError::Runtime(e.to_string()))?;
        let path = args.out.join("bias_report.txt");
        let text = format!(
            "# {TOOL} config_sha256={hash} seed={}\nruns_kept = {}\nruns_rejected = {}\nmean_m = {}\nstd_m = {}\nkurtosis = {}\ngeometry_warning = {}\n",
            args.seed, r.runs_kept, r.runs_rejected, r.mean, r.std, r.kurtosis, r.geometry_warning
        );
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        artifacts.push(path);

        let mut csv = CsvOut::create(
            args.out.join("bias_histogram.csv"),
            &hash,
            args.seed,
            &["bin_lo", "bin_hi", "count"],
        )?;
        for (lo, hi, c) in r.histogram.rows() {
            csv.row([lo.to_string(), hi.to_string(), c.to_string()])?;
        }
        artifacts.push(csv.finish()?);
    }

    let mut report = RunReport {
        tool: TOOL.into(),
        command: if args.sweep { "bias --sweep" } else { "bias" }.into(),
        seed: args.seed,
        config_sha256: hash,
        wall_seconds: started.elapsed().as_secs_f64(),
        artifacts,
        summaries: Vec::new(),
        config: echo,
    };
    write_report(&args.out, &mut report)?;
    Ok(report)
}

pub fn cmd_bearings(args: &BearingsArgs) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let scenario = load_scenario(&args.scenario)?;
    let echo = scenario_to_toml(&scenario);
    let hash = sha256_hex(&echo);
    let series = scenario
        .generate_bearings(args.seed)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    prepare_out(&args.out)?;
    let mut csv = CsvOut::create(
        args.out.join("bearings.csv"),
        &hash,
        args.seed,
        &[
            "t_s",
            "true_bearing_deg",
            "measured_bearing_deg",
            "ownship_x_m",
            "ownship_y_m",
            "target_x_m",
            "target_y_m",
        ],
    )?;
    for k in 0..series.len() {
        let t = series.times[k];
        let own = series.ownship_positions[k];
        let tgt = scenario.target_position_at(t).map_err(|e| CliError::Runtime(e.to_string()))?;
        csv.row([
            t.to_string(),
            series.true_bearings[k].degrees().to_string(),
            series.measured_bearings[k].degrees().to_string(),
            own.x.to_string(),
            own.y.to_string(),
            tgt.x.to_string(),
            tgt.y.to_string(),
        ])?;
    }
    let mut report = RunReport {
        tool: TOOL.into(),
        command: "bearings".into(),
        seed: args.seed,
        config_sha256: hash,
        wall_seconds: started.elapsed().as_secs_f64(),
        artifacts: vec![csv.finish()?],
        summaries: Vec::new(),
        config: echo,
    };
    write_report(&args.out, &mut report)?;
    Ok(report)
}

pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Bias(a) => cmd_bias(a),
        Command::Bearings(a) => cmd_bearings(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        assert_eq!(parse_axis("1:20:0.1").unwrap(), GridAxis::new(1.0, 20.0, 0.1));
        assert!(parse_axis("1:20").is_err());
        assert!(parse_axis("5:1:1").is_err());
        assert!(parse_axis("a:1:1").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Runtime(String::new()).exit_code(), 1);
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
