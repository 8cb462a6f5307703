//! Command-line front end: flag/config resolution, experiment orchestration,
//! CSV/JSON persistence and SVG plots.
//!
//! Resolution order for every setting is CLI flag, then the TOML file given by
//! `--config`, then the built-in default. Everything is validated before the
//! first run starts; validation failures exit with [`EXIT_CONFIG`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::constrained::PenaltySchedule;
use crate::error::{Error, Result};
use crate::experiments::{
    best_design, config_for, mean_best_experiment, pearson, time_to_region, DesignReport,
    MeanBestCell, TimeToRegionResult, TimeToRegionSettings, DEFAULT_TTR_POPULATION,
};
use crate::optimizers::{Algorithm, AlgorithmConfig, RunRecord};
use crate::plot::{Chart, Series};
use crate::problems::ProblemKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const CSV_SCHEMA: &str = "#schema=1";

#[derive(Debug, Parser)]
#[command(name = "qpsocd", version, about = "QPSO-CD optimizer experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean best fitness of one or more algorithms on a benchmark function.
    Bench(BenchArgs),
    /// Best-of-runs design for the truss, spring or vessel problem.
    Engineer(EngineerArgs),
    /// Evaluations needed to reach the optimal region of the constrained sphere.
    Timecomplexity(TimeComplexityArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with defaults for any of the flags (kebab-case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Algorithm to run: pso, qpso, qpso-mo, qpso-cd. Repeatable.
    #[arg(long = "algo")]
    pub algo: Vec<String>,
    /// Population size.
    #[arg(long)]
    pub pop: Option<usize>,
    /// Independent runs per algorithm.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Master seed; run i uses stream i of this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cauchy mutation probability.
    #[arg(long)]
    pub pr: Option<f64>,
    /// Natural-selection parameter S, or "off".
    #[arg(long)]
    pub selection: Option<String>,
    #[arg(long)]
    pub alpha_start: Option<f64>,
    #[arg(long)]
    pub alpha_end: Option<f64>,
    /// Penalty schedule as kind:coefficient (constant, sqrt, linear).
    #[arg(long)]
    pub penalty: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write SVG plots under <out>/plots.
    #[arg(long)]
    pub plot: bool,
    /// Worker threads (default: logical processors).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EngineerArgs {
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TimeComplexityArgs {
    /// Inclusive dimension range, e.g. 2..10.
    #[arg(long)]
    pub dims: Option<String>,
    /// Optimal-region threshold.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Evaluation budget per run; runs that miss the region are censored.
    #[arg(long)]
    pub max_evals: Option<u64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Selection parameter as written in a config file: an integer or "off".
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SelectionValue {
    Count(u32),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    problem: Option<String>,
    algo: Option<Vec<String>>,
    pop: Option<usize>,
    dim: Option<usize>,
    iters: Option<usize>,
    runs: Option<usize>,
    seed: Option<u64>,
    pr: Option<f64>,
    selection: Option<SelectionValue>,
    alpha_start: Option<f64>,
    alpha_end: Option<f64>,
    penalty: Option<String>,
    out: Option<PathBuf>,
    plot: Option<bool>,
    workers: Option<usize>,
    dims: Option<String>,
    xi: Option<f64>,
    max_evals: Option<u64>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Bench,
    Engineer,
    Timecomplexity,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Bench => "bench",
            Experiment::Engineer => "engineer",
            Experiment::Timecomplexity => "timecomplexity",
        }
    }
}

/// Fully resolved settings of one invocation. Serialized into every output
/// file; `out`, `plot` and `workers` do not affect results and are omitted.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub version: &'static str,
    pub problem: String,
    pub algorithms: Vec<Algorithm>,
    pub population: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    pub runs: usize,
    pub seed: u64,
    pub mutation_prob: f64,
    pub selection: Option<u32>,
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub penalty: PenaltySchedule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_evals: Option<u64>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub plot: bool,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Merges flags over the config file over defaults and validates.
    pub fn resolve(command: &Command) -> Result<Self> {
        let (experiment, common) = match command {
            Command::Bench(a) => (Experiment::Bench, &a.common),
            Command::Engineer(a) => (Experiment::Engineer, &a.common),
            Command::Timecomplexity(a) => (Experiment::Timecomplexity, &a.common),
        };
        let file = FileConfig::load(common.config.as_deref())?;

        let algo_names = if !common.algo.is_empty() {
            common.algo.clone()
        } else if let Some(a) = &file.algo {
            a.clone()
        } else if experiment == Experiment::Timecomplexity {
            vec!["qpso-cd".into(), "pso".into()]
        } else {
            vec!["qpso-cd".into()]
        };
        let mut algorithms = Vec::new();
        for name in &algo_names {
            let a: Algorithm = name.parse()?;
            if !algorithms.contains(&a) {
                algorithms.push(a);
            }
        }
        if algorithms.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one algorithm is required".into(),
            ));
        }

        let defaults = AlgorithmConfig::new(Algorithm::QpsoCd);
        let selection = match (&common.selection, &file.selection) {
            (Some(s), _) => parse_selection(s)?,
            (None, Some(SelectionValue::Count(n))) => Some(*n),
            (None, Some(SelectionValue::Text(s))) => parse_selection(s)?,
            (None, None) => defaults.selection,
        };
        let penalty = match common.penalty.as_ref().or(file.penalty.as_ref()) {
            Some(s) => s.parse()?,
            None => defaults.penalty,
        };
        let (pop_default, runs_default) = match experiment {
            Experiment::Bench => (defaults.population, 30),
            Experiment::Engineer => (40, 30),
            Experiment::Timecomplexity => (DEFAULT_TTR_POPULATION, 40),
        };
        let (alpha_start_default, alpha_end_default) = match experiment {
            Experiment::Timecomplexity => {
                let a = TimeToRegionSettings::new(Algorithm::QpsoCd).alpha;
                (a, a)
            }
            _ => (defaults.alpha_start, defaults.alpha_end),
        };

        let mut cfg = ExperimentConfig {
            experiment,
            version: env!("CARGO_PKG_VERSION"),
            problem: String::new(),
            algorithms,
            population: common.pop.or(file.pop).unwrap_or(pop_default),
            dimension: None,
            iterations: None,
            runs: common.runs.or(file.runs).unwrap_or(runs_default),
            seed: common.seed.or(file.seed).unwrap_or(0),
            mutation_prob: common.pr.or(file.pr).unwrap_or(defaults.mutation_prob),
            selection,
            alpha_start: common
                .alpha_start
                .or(file.alpha_start)
                .unwrap_or(alpha_start_default),
            alpha_end: common
                .alpha_end
                .or(file.alpha_end)
                .unwrap_or(alpha_end_default),
            penalty,
            dims: None,
            xi: None,
            max_evals: None,
            out: common
                .out
                .clone()
                .or(file.out.clone())
                .unwrap_or_else(|| PathBuf::from("qpsocd-out")),
            plot: common.plot || file.plot.unwrap_or(false),
            workers: common.workers.or(file.workers),
        };

        match command {
            Command::Bench(a) => {
                let kind: ProblemKind = a
                    .problem
                    .as_ref()
                    .or(file.problem.as_ref())
                    .map(String::as_str)
                    .unwrap_or("sphere")
                    .parse()?;
                cfg.problem = kind.name().into();
                cfg.dimension = Some(a.dim.or(file.dim).or(kind.fixed_dimension()).unwrap_or(10));
                cfg.iterations = Some(a.iters.or(file.iters).unwrap_or(defaults.iterations));
            }
            Command::Engineer(a) => {
                let name = a
                    .problem
                    .as_ref()
                    .or(file.problem.as_ref())
                    .ok_or_else(|| {
                        Error::InvalidConfig("engineer needs --problem truss|spring|vessel".into())
                    })?;
                let kind: ProblemKind = name.parse()?;
                if !kind.is_engineering() {
                    return Err(Error::InvalidConfig(format!(
                        "engineer expects truss, spring or vessel, got '{name}'"
                    )));
                }
                cfg.problem = kind.name().into();
                cfg.dimension = kind.fixed_dimension();
                cfg.iterations = Some(a.iters.or(file.iters).unwrap_or(2000));
            }
            Command::Timecomplexity(a) => {
                cfg.problem = ProblemKind::ConstrainedSphere.name().into();
                let dims = match a.dims.as_ref().or(file.dims.as_ref()) {
                    Some(s) => parse_dims(s)?,
                    None => (2, 10),
                };
                let ttr = TimeToRegionSettings::new(Algorithm::QpsoCd);
                cfg.dims = Some(dims);
                cfg.xi = Some(a.xi.or(file.xi).unwrap_or(ttr.xi));
                cfg.max_evals = Some(a.max_evals.or(file.max_evals).unwrap_or(ttr.max_evals));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        // population first so its message wins over derived complaints
        if self.population < 2 {
            return bad("population must be ≥ 2".into());
        }
        if self.runs < 1 {
            return bad("runs must be ≥ 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be ≥ 1".into());
        }
        match self.experiment {
            Experiment::Timecomplexity => {
                if self.runs < 2 {
                    return bad("time-complexity needs runs ≥ 2".into());
                }
                if self.alpha_start != self.alpha_end {
                    return bad(format!(
                        "time-complexity holds alpha fixed; got alpha-start {} ≠ alpha-end {}",
                        self.alpha_start, self.alpha_end
                    ));
                }
                let xi = self.xi.unwrap_or_default();
                if xi.is_nan() {
                    return bad("xi must not be NaN".into());
                }
                if self.max_evals.unwrap_or(0) < self.population as u64 {
                    return bad("max-evals must be ≥ population".into());
                }
                for s in self.ttr_settings() {
                    s.algorithm_config().validate()?;
                }
            }
            _ => {
                let kind: ProblemKind = self.problem.parse()?;
                kind.spec(self.dimension.unwrap_or(0))?;
                for &a in &self.algorithms {
                    self.algorithm_config(a).validate()?;
                }
            }
        }
        Ok(())
    }

    /// Run configuration for `algorithm` (bench and engineer).
    pub fn algorithm_config(&self, algorithm: Algorithm) -> AlgorithmConfig {
        let mut base = AlgorithmConfig::new(Algorithm::QpsoCd);
        base.mutation_prob = self.mutation_prob;
        base.selection = self.selection;
        base.alpha_start = self.alpha_start;
        base.alpha_end = self.alpha_end;
        base.penalty = self.penalty;
        base.seed = self.seed;
        config_for(
            &base,
            algorithm,
            self.population,
            self.iterations.unwrap_or(1),
        )
    }

    /// Time-to-region settings per algorithm.
    pub fn ttr_settings(&self) -> Vec<TimeToRegionSettings> {
        self.algorithms
            .iter()
            .map(|&a| {
                let mut s = TimeToRegionSettings::new(a);
                s.population = self.population;
                s.runs = self.runs;
                s.master_seed = self.seed;
                s.alpha = self.alpha_start;
                s.mutation_prob = self.mutation_prob;
                s.selection = self.selection;
                s.penalty = self.penalty;
                if let Some(xi) = self.xi {
                    s.xi = xi;
                }
                if let Some(m) = self.max_evals {
                    s.max_evals = m;
                }
                s
            })
            .collect()
    }

    fn provenance(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

fn parse_selection(s: &str) -> Result<Option<u32>> {
    match s.trim().to_ascii_lowercase().as_str() {
        "off" | "none" => Ok(None),
        t => t.parse::<u32>().map(Some).map_err(|_| {
            Error::InvalidConfig(format!(
                "selection must be a positive integer or 'off', got '{s}'"
            ))
        }),
    }
}

/// Parses an inclusive range `A..B` (also `A..=B` or a single `A`).
pub fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let err = || {
        Error::InvalidConfig(format!(
            "dims must look like A..B with 1 ≤ A ≤ B, got '{s}'"
        ))
    };
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let a: usize = a.trim().parse().map_err(|_| err())?;
    let b: usize = b.trim().parse().map_err(|_| err())?;
    if a < 1 || a > b {
        return Err(err());
    }
    Ok((a, b))
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match ExperimentConfig::resolve(&cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&cfg) {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Runs a resolved experiment, writes its artifacts and returns the text
/// report.
pub fn execute(cfg: &ExperimentConfig) -> Result<String> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    match cfg.experiment {
        Experiment::Bench => cmd_bench(cfg),
        Experiment::Engineer => cmd_engineer(cfg),
        Experiment::Timecomplexity => cmd_timecomplexity(cfg),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn run_cells(cfg: &ExperimentConfig) -> Result<Vec<MeanBestCell>> {
    let kind: ProblemKind = cfg.problem.parse()?;
    let spec = kind.spec(cfg.dimension.unwrap_or(0))?;
    let iterations = cfg.iterations.unwrap_or(1);
    let mut cells = Vec::new();
    for &a in &cfg.algorithms {
        let base = cfg.algorithm_config(a);
        cells.extend(mean_best_experiment(
            &spec,
            &[a],
            &base,
            cfg.population,
            iterations,
            cfg.runs,
            cfg.seed,
            cfg.workers,
        )?);
    }
    Ok(cells)
}

fn cmd_bench(cfg: &ExperimentConfig) -> Result<String> {
    let cells = run_cells(cfg)?;
    write_runs_csv(cfg, &cells)?;
    write_summary(cfg, &serde_json::json!({ "cells": cells }))?;
    if cfg.plot {
        convergence_plot(cfg, &cells)?;
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} P={} D={} G={} runs={} seed={}",
        cfg.problem,
        cfg.population,
        cfg.dimension.unwrap_or(0),
        cfg.iterations.unwrap_or(0),
        cfg.runs,
        cfg.seed
    );
    let _ = writeln!(
        out,
        "{:<10}{:>16}{:>16}{:>16}{:>16}",
        "Algorithm", "Mean", "SD", "Min", "Max"
    );
    for c in &cells {
        let _ = writeln!(
            out,
            "{:<10}{:>16.6e}{:>16.6e}{:>16.6e}{:>16.6e}",
            c.algorithm.label(),
            c.mean,
            c.sd,
            c.min,
            c.max
        );
    }
    let _ = writeln!(out, "wrote {}", cfg.out.display());
    Ok(out)
}

fn cmd_engineer(cfg: &ExperimentConfig) -> Result<String> {
    let kind: ProblemKind = cfg.problem.parse()?;
    let spec = kind.spec(cfg.dimension.unwrap_or(0))?;
    let cells = run_cells(cfg)?;
    let designs: Vec<DesignReport> = cells
        .iter()
        .map(|c| {
            best_design(&spec, &c.records)
                .ok_or_else(|| Error::Degenerate("no runs to report".into()))
        })
        .collect::<Result<_>>()?;

    write_runs_csv(cfg, &cells)?;
    let summary: Vec<_> = cells
        .iter()
        .zip(&designs)
        .map(|(c, d)| {
            serde_json::json!({
                "algorithm": c.algorithm,
                "best": d,
                "mean_final_value": c.mean,
                "sd_final_value": c.sd,
            })
        })
        .collect();
    write_summary(cfg, &serde_json::json!({ "designs": summary }))?;
    if cfg.plot {
        convergence_plot(cfg, &cells)?;
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} best of {} runs (P={}, G={}, seed={})",
        cfg.problem,
        cfg.runs,
        cfg.population,
        cfg.iterations.unwrap_or(0),
        cfg.seed
    );
    let _ = write!(out, "{:<10}", "Variables");
    for c in &cells {
        let _ = write!(out, "{:>16}", c.algorithm.label());
    }
    out.push('\n');
    let mut row = |name: String, values: Vec<String>| {
        let _ = write!(out, "{name:<10}");
        for v in values {
            let _ = write!(out, "{v:>16}");
        }
        out.push('\n');
    };
    for j in 0..spec.dimension {
        row(
            format!("x{}", j + 1),
            designs
                .iter()
                .map(|d| format!("{:.8}", d.position[j]))
                .collect(),
        );
    }
    let n_g = designs.first().map_or(0, |d| d.constraints.len());
    for j in 0..n_g {
        row(
            format!("g{}(x)", j + 1),
            designs
                .iter()
                .map(|d| format!("{:.5e}", d.constraints[j]))
                .collect(),
        );
    }
    row(
        "f(x)".into(),
        designs
            .iter()
            .map(|d| format!("{:.6}", d.objective))
            .collect(),
    );
    row(
        "feasible".into(),
        designs.iter().map(|d| d.feasible.to_string()).collect(),
    );
    let _ = writeln!(out, "wrote {}", cfg.out.display());
    Ok(out)
}

fn cmd_timecomplexity(cfg: &ExperimentConfig) -> Result<String> {
    let (lo, hi) = cfg.dims.unwrap_or((2, 10));
    let mut per_algo: Vec<(TimeToRegionSettings, Vec<TimeToRegionResult>)> = Vec::new();
    for s in cfg.ttr_settings() {
        let results = (lo..=hi)
            .map(|d| time_to_region(d, &s, cfg.workers))
            .collect::<Result<Vec<_>>>()?;
        per_algo.push((s, results));
    }

    let g = |s: &TimeToRegionSettings| s.algorithm_config().iterations;
    write_time_csv(cfg, &per_algo, g)?;

    let mut summary = Vec::new();
    let mut out = String::new();
    let mut chart = Chart::new(
        "Time complexity",
        "dimension N",
        "mean evaluations to region",
    );
    for (s, results) in &per_algo {
        let _ = writeln!(
            out,
            "{} (P={}, xi={:e}, runs={}, max evals={})",
            s.algorithm.label(),
            s.population,
            s.xi,
            s.runs,
            s.max_evals
        );
        let _ = writeln!(
            out,
            "{:>9}{:>14}{:>18}{:>14}{:>12}{:>10}",
            "Dimension", "Mean", "Variance", "SD", "SE", "Mean/N"
        );
        let mut points = Vec::new();
        for r in results {
            match &r.summary {
                Some(st) => {
                    let _ = writeln!(
                        out,
                        "{:>9}{:>14.4}{:>18.4}{:>14.4}{:>12.4}{:>10.4}",
                        r.dimension, st.mean, st.variance, st.sd, st.se, st.mean_per_dim
                    );
                    points.push((r.dimension as f64, st.mean));
                }
                None => {
                    let _ = writeln!(out, "{:>9}{:>14}", r.dimension, "no hits");
                }
            }
        }
        for r in results.iter().filter(|r| !r.censored.is_empty()) {
            let _ = writeln!(
                out,
                "note: D={}: {} of {} runs did not reach the region within {} evaluations (excluded)",
                r.dimension,
                r.censored.len(),
                s.runs,
                s.max_evals
            );
        }
        let r = correlation(&points);
        match r {
            Some(r) => {
                let _ = writeln!(out, "Pearson(Mean, N) = {r:.6}");
            }
            None => {
                let _ = writeln!(
                    out,
                    "Pearson(Mean, N) = undefined (needs ≥ 2 dimensions with distinct means)"
                );
            }
        }
        out.push('\n');
        chart = chart.with_series(Series::new(s.algorithm.label(), points));
        summary.push(serde_json::json!({
            "algorithm": s.algorithm,
            "rows": results,
            "pearson": r,
        }));
    }
    write_summary(cfg, &serde_json::json!({ "algorithms": summary }))?;
    if cfg.plot {
        let dir = plots_dir(cfg)?;
        chart.write(&dir.join("complexity.svg"))?;
    }
    let _ = writeln!(out, "wrote {}", cfg.out.display());
    Ok(out)
}

fn correlation(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    pearson(&xs, &ys).ok()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: &'a str,
    algorithm: &'a str,
    problem: &'a str,
    #[serde(rename = "P")]
    population: usize,
    #[serde(rename = "D")]
    dimension: usize,
    #[serde(rename = "G")]
    iterations: usize,
    run: usize,
    seed: u64,
    final_value: String,
    evals_total: u64,
    evals_to_region: String,
    position: String,
}

/// Locale-independent fixed-precision float.
fn fmt_f64(v: f64) -> String {
    format!("{v:.15e}")
}

fn csv_row<'a>(
    cfg: &'a ExperimentConfig,
    record: &'a RunRecord,
    run: usize,
    p: usize,
    d: usize,
    g: usize,
) -> CsvRow<'a> {
    CsvRow {
        experiment: cfg.experiment.name(),
        algorithm: record.algorithm.name(),
        problem: &record.problem,
        population: p,
        dimension: d,
        iterations: g,
        run,
        seed: record.seed,
        final_value: fmt_f64(record.final_value),
        evals_total: record.evals_total,
        evals_to_region: record
            .evals_to_region
            .map(|e| e.to_string())
            .unwrap_or_default(),
        position: record
            .final_position
            .iter()
            .map(|&x| fmt_f64(x))
            .collect::<Vec<_>>()
            .join(";"),
    }
}

fn write_runs_csv(cfg: &ExperimentConfig, cells: &[MeanBestCell]) -> Result<()> {
    let rows = cells.iter().flat_map(|c| {
        c.records
            .iter()
            .enumerate()
            .map(move |(i, r)| csv_row(cfg, r, i, c.population, c.dimension, c.iterations))
    });
    write_csv(cfg, rows)
}

fn write_time_csv(
    cfg: &ExperimentConfig,
    per_algo: &[(TimeToRegionSettings, Vec<TimeToRegionResult>)],
    iterations: impl Fn(&TimeToRegionSettings) -> usize,
) -> Result<()> {
    let rows = per_algo.iter().flat_map(|(s, results)| {
        let g = iterations(s);
        results.iter().flat_map(move |res| {
            res.records
                .iter()
                .enumerate()
                .map(move |(i, r)| csv_row(cfg, r, i, s.population, res.dimension, g))
        })
    });
    write_csv(cfg, rows)
}

fn write_csv<'a>(cfg: &ExperimentConfig, rows: impl Iterator<Item = CsvRow<'a>>) -> Result<()> {
    let path = cfg.out.join("runs.csv");
    let mut buf = format!("{CSV_SCHEMA}\n# config={}\n", cfg.provenance()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in rows {
            w.serialize(row)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
    }
    fs::write(&path, buf).map_err(|e| io_err(&path, e))
}

fn write_summary(cfg: &ExperimentConfig, body: &serde_json::Value) -> Result<()> {
    let path = cfg.out.join("summary.json");
    let mut doc = serde_json::json!({ "schema": 1, "config": cfg });
    if let (Some(doc), Some(body)) = (doc.as_object_mut(), body.as_object()) {
        doc.extend(body.clone());
    }
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
}

fn plots_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg.out.join("plots");
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    Ok(dir)
}

fn convergence_plot(cfg: &ExperimentConfig, cells: &[MeanBestCell]) -> Result<()> {
    let Some(first) = cells.first() else {
        return Ok(());
    };
    let mut chart = Chart::new(
        format!(
            "{} (P={}, D={})",
            first.problem, first.population, first.dimension
        ),
        "iteration",
        "mean best fitness",
    )
    .log_y(true);
    for c in cells {
        chart = chart.with_series(Series::from_trajectory(
            c.algorithm.label(),
            &c.mean_trajectory,
        ));
    }
    let name = format!(
        "convergence_{}_P{}_D{}_G{}.svg",
        first.problem, first.population, first.dimension, first.iterations
    );
    chart.write(&plots_dir(cfg)?.join(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> Result<ExperimentConfig> {
        let cli = Cli::try_parse_from(std::iter::once("qpsocd").chain(args.iter().copied()))
            .expect("flags parse");
        ExperimentConfig::resolve(&cli.command)
    }

    #[test]
    fn dims_parsing() {
        assert_eq!(parse_dims("2..10").unwrap(), (2, 10));
        assert_eq!(parse_dims("3..=3").unwrap(), (3, 3));
        assert_eq!(parse_dims("4").unwrap(), (4, 4));
        assert!(parse_dims("5..3").is_err());
        assert!(parse_dims("0..3").is_err());
        assert!(parse_dims("a..b").is_err());
    }

    #[test]
    fn bench_defaults() {
        let c = resolve(&["bench"]).unwrap();
        assert_eq!(c.problem, "sphere");
        assert_eq!(c.algorithms, vec![Algorithm::QpsoCd]);
        assert_eq!(
            (c.population, c.dimension, c.iterations, c.runs),
            (20, Some(10), Some(1000), 30)
        );
        assert_eq!(
            (c.alpha_start, c.alpha_end, c.selection),
            (1.0, 0.5, Some(2))
        );
    }

    #[test]
    fn population_one_is_rejected_with_message() {
        let e = resolve(&["bench", "--pop", "1"]).unwrap_err();
        assert_eq!(e.to_string(), "population must be ≥ 2");
    }

    #[test]
    fn selection_off_and_repeated_algorithms() {
        let c = resolve(&[
            "bench",
            "--selection",
            "off",
            "--algo",
            "pso",
            "--algo",
            "qpso",
            "--algo",
            "pso",
        ])
        .unwrap();
        assert_eq!(c.selection, None);
        assert_eq!(c.algorithms, vec![Algorithm::Pso, Algorithm::Qpso]);
        assert!(resolve(&["bench", "--selection", "0"]).is_err());
        assert!(resolve(&["bench", "--algo", "ga"]).is_err());
    }

    #[test]
    fn engineer_rejects_benchmarks() {
        assert!(resolve(&["engineer", "--problem", "sphere"]).is_err());
        assert!(resolve(&["engineer", "--problem", "bridge"]).is_err());
        let c = resolve(&["engineer", "--problem", "vessel"]).unwrap();
        assert_eq!(c.dimension, Some(4));
    }

    #[test]
    fn timecomplexity_fixed_alpha() {
        let c = resolve(&["timecomplexity"]).unwrap();
        assert_eq!(c.dims, Some((2, 10)));
        assert_eq!(c.algorithms, vec![Algorithm::QpsoCd, Algorithm::Pso]);
        assert_eq!((c.alpha_start, c.alpha_end), (0.75, 0.75));
        assert!(resolve(&["timecomplexity", "--alpha-start", "0.9"]).is_err());
        assert!(resolve(&["timecomplexity", "--runs", "1"]).is_err());
    }

    #[test]
    fn cli_overrides_file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(
            &path,
            "pop = 30\nruns = 5\nselection = \"off\"\nalgo = [\"qpso\"]\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let c = resolve(&["bench", "--config", p, "--runs", "7"]).unwrap();
        assert_eq!(c.population, 30);
        assert_eq!(c.runs, 7);
        assert_eq!(c.selection, None);
        assert_eq!(c.algorithms, vec![Algorithm::Qpso]);
        assert_eq!(c.iterations, Some(1000));

        fs::write(&path, "popsize = 30\n").unwrap();
        assert!(resolve(&["bench", "--config", p]).is_err());
    }

    #[test]
    fn provenance_omits_output_location() {
        let a = resolve(&["bench", "--out", "x", "--workers", "1"]).unwrap();
        let b = resolve(&["bench", "--out", "y"]).unwrap();
        assert_eq!(a.provenance(), b.provenance());
        assert!(a.provenance().contains("\"seed\":0"));
    }
}
