//! Batch experiments: mean-best-fitness tables, time-to-region statistics,
//! Pearson correlation and the scaled-Cauchy tail check.
//!
//! Run `i` of an experiment always draws from `RngStream::for_run(master, i)`,
//! independent of algorithm, so algorithms are compared under common random
//! numbers and results never depend on worker scheduling.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizers::{run_with_rng, Algorithm, AlgorithmConfig, RunRecord};
use crate::problems::{constrained_sphere_spec, ProblemSpec};
use crate::rng::RngStream;

/// Moments of a sample of hitting times (or any scalar).
///
/// `variance` is the plug-in estimate `E[W^2] - E[W]^2` (divisor `n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub n_runs: usize,
    pub mean: f64,
    pub variance: f64,
    pub sd: f64,
    pub se: f64,
    pub mean_per_dim: f64,
}

impl StatsSummary {
    pub fn from_samples(samples: &[f64], dimension: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Degenerate("no samples to summarize".into()));
        }
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be ≥ 1".into()));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).max(0.0);
        let sd = variance.sqrt();
        Ok(Self {
            n_runs: samples.len(),
            mean,
            variance,
            sd,
            se: sd / n.sqrt(),
            mean_per_dim: mean / dimension as f64,
        })
    }
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "pearson needs equal lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Degenerate("pearson needs at least 2 points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("pearson input has zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Closed-form `P(|n^-lambda C| > xi)` for standard Cauchy `C`.
pub fn scaled_cauchy_tail(lambda: f64, n: f64, xi: f64) -> f64 {
    1.0 - 2.0 / PI * (xi * n.powf(lambda)).atan()
}

/// Monte Carlo estimate of `P(|n^-lambda C| > xi)` for each `n`, using
/// `samples` fresh Cauchy draws per entry.
pub fn scaled_cauchy_tail_estimates(
    lambda: f64,
    ns: &[u64],
    xi: f64,
    samples: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be ≥ 1".into()));
    }
    Ok(ns
        .iter()
        .map(|&n| {
            let scale = (n as f64).powf(-lambda);
            let exceed = (0..samples)
                .filter(|_| (scale * rng.cauchy_standard()).abs() > xi)
                .count();
            exceed as f64 / samples as f64
        })
        .collect())
}

/// Runs `runs` seeded repetitions, optionally on a pool of `workers` threads.
/// Output is ordered by run index.
pub fn run_batch(
    problem: &ProblemSpec,
    cfg: &AlgorithmConfig,
    runs: usize,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let job = || {
        (0..runs)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::for_run(master_seed, i as u64);
                run_with_rng(problem, cfg, &mut rng)
            })
            .collect::<Result<Vec<_>>>()
    };
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?
            .install(job),
        None => job(),
    }
}

/// One (problem, P, D, G, algorithm) cell of a mean-best-fitness table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanBestCell {
    pub problem: String,
    pub algorithm: Algorithm,
    pub population: usize,
    pub dimension: usize,
    pub iterations: usize,
    pub runs: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    /// Mean global-best value per iteration across runs.
    pub mean_trajectory: Vec<f64>,
    #[serde(skip)]
    pub records: Vec<RunRecord>,
}

/// Mean (and spread) of final global-best values for each algorithm.
///
/// `base` supplies everything except algorithm, population, iterations.
#[allow(clippy::too_many_arguments)]
pub fn mean_best_experiment(
    problem: &ProblemSpec,
    algorithms: &[Algorithm],
    base: &AlgorithmConfig,
    population: usize,
    iterations: usize,
    runs: usize,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<Vec<MeanBestCell>> {
    if runs < 1 {
        return Err(Error::InvalidConfig("runs must be ≥ 1".into()));
    }
    algorithms
        .iter()
        .map(|&algorithm| {
            let cfg = config_for(base, algorithm, population, iterations);
            let records = run_batch(problem, &cfg, runs, master_seed, workers)?;
            let finals: Vec<f64> = records.iter().map(|r| r.final_value).collect();
            let stats = StatsSummary::from_samples(&finals, problem.dimension)?;
            Ok(MeanBestCell {
                problem: problem.name.clone(),
                algorithm,
                population,
                dimension: problem.dimension,
                iterations,
                runs,
                mean: stats.mean,
                sd: stats.sd,
                min: finals.iter().copied().fold(f64::INFINITY, f64::min),
                max: finals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_trajectory: mean_trajectory(&records),
                records,
            })
        })
        .collect()
}

/// Keeps shared tunables from `base` but switches algorithm; the PSO-specific
/// acceleration defaults apply when switching between PSO and the QPSO family.
pub fn config_for(
    base: &AlgorithmConfig,
    algorithm: Algorithm,
    population: usize,
    iterations: usize,
) -> AlgorithmConfig {
    let mut cfg = base.clone();
    if (algorithm == Algorithm::Pso) != (base.algorithm == Algorithm::Pso) {
        let d = AlgorithmConfig::new(algorithm);
        cfg.c1 = d.c1;
        cfg.c2 = d.c2;
    }
    cfg.algorithm = algorithm;
    cfg.population = population;
    cfg.iterations = iterations;
    cfg
}

fn mean_trajectory(records: &[RunRecord]) -> Vec<f64> {
    let len = records
        .iter()
        .map(|r| r.trajectory.len())
        .max()
        .unwrap_or(0);
    (0..len)
        .map(|k| {
            // runs that stopped early carry their last value forward
            let sum: f64 = records
                .iter()
                .map(|r| {
                    r.trajectory
                        .get(k)
                        .or(r.trajectory.last())
                        .copied()
                        .unwrap_or(r.final_value)
                })
                .sum();
            sum / records.len() as f64
        })
        .collect()
}

/// Tolerance on each `g_i` for a design to count as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-4;

/// A reported design point with its raw objective and constraint values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignReport {
    pub run: usize,
    pub position: Vec<f64>,
    pub objective: f64,
    pub constraints: Vec<f64>,
    pub feasible: bool,
}

impl DesignReport {
    pub fn evaluate(problem: &ProblemSpec, run: usize, position: &[f64]) -> Self {
        let constraints = problem
            .constraints
            .as_ref()
            .map(|cs| cs.values(position))
            .unwrap_or_default();
        Self {
            run,
            position: position.to_vec(),
            objective: problem.evaluate(position),
            feasible: constraints.iter().all(|&g| g <= FEASIBILITY_TOL),
            constraints,
        }
    }
}

/// Best-of-runs design: lowest objective among feasible final points, or the
/// least-violating point when no run ended feasible.
pub fn best_design(problem: &ProblemSpec, records: &[RunRecord]) -> Option<DesignReport> {
    let reports: Vec<DesignReport> = records
        .iter()
        .enumerate()
        .map(|(i, r)| DesignReport::evaluate(problem, i, &r.final_position))
        .collect();
    let violation = |d: &DesignReport| d.constraints.iter().map(|g| g.max(0.0)).sum::<f64>();
    reports.into_iter().min_by(|a, b| {
        (
            !a.feasible,
            if a.feasible {
                a.objective
            } else {
                violation(a)
            },
        )
            .partial_cmp(&(
                !b.feasible,
                if b.feasible {
                    b.objective
                } else {
                    violation(b)
                },
            ))
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// Settings of the time-to-region experiment on the constrained sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeToRegionSettings {
    pub algorithm: Algorithm,
    pub population: usize,
    pub xi: f64,
    pub runs: usize,
    pub max_evals: u64,
    pub master_seed: u64,
    /// Fixed contraction-expansion coefficient for the QPSO family.
    pub alpha: f64,
    /// PSO constriction coefficient and acceleration factors.
    pub chi: f64,
    pub pso_c: f64,
    pub mutation_prob: f64,
    pub selection: Option<u32>,
    pub penalty: crate::constrained::PenaltySchedule,
}

impl TimeToRegionSettings {
    /// `alpha = 0.75`, `chi = 0.73`, `c1 = c2 = 2.25`, `xi = 1e-4`, 40 runs.
    pub fn new(algorithm: Algorithm) -> Self {
        let d = AlgorithmConfig::new(Algorithm::QpsoCd);
        Self {
            algorithm,
            population: DEFAULT_TTR_POPULATION,
            xi: 1e-4,
            runs: 40,
            max_evals: 200_000,
            master_seed: 0,
            alpha: 0.75,
            chi: 0.73,
            pso_c: 2.25,
            mutation_prob: d.mutation_prob,
            selection: d.selection,
            penalty: d.penalty,
        }
    }

    pub fn algorithm_config(&self) -> AlgorithmConfig {
        let mut cfg = AlgorithmConfig::new(self.algorithm).with_population(self.population);
        let pop = self.population.max(1) as u64;
        let iterations = self.max_evals.saturating_sub(pop).div_ceil(pop).max(1);
        cfg.iterations = iterations as usize;
        cfg.alpha_start = self.alpha;
        cfg.alpha_end = self.alpha;
        cfg.mutation_prob = self.mutation_prob;
        cfg.selection = self.selection;
        cfg.penalty = self.penalty;
        cfg.target = Some(self.xi);
        cfg.stop_at_target = true;
        if self.algorithm == Algorithm::Pso {
            cfg.chi = self.chi;
            cfg.c1 = self.pso_c;
            cfg.c2 = self.pso_c;
        }
        cfg
    }
}

/// Default swarm size of the time-to-region experiment.
pub const DEFAULT_TTR_POPULATION: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeToRegionResult {
    pub algorithm: Algorithm,
    pub dimension: usize,
    /// `None` when fewer than one run reached the region.
    pub summary: Option<StatsSummary>,
    /// Evaluation counts of the runs that reached the region, by run index.
    pub hits: Vec<u64>,
    /// Run indices that never reached the region within `max_evals`.
    pub censored: Vec<usize>,
    #[serde(skip)]
    pub records: Vec<RunRecord>,
}

/// Evaluations needed to reach `{f <= xi}` on the constrained sphere in
/// dimension `dimension`, summarized over `settings.runs` runs. Runs that
/// never hit are reported in `censored` and left out of the moments.
pub fn time_to_region(
    dimension: usize,
    settings: &TimeToRegionSettings,
    workers: Option<usize>,
) -> Result<TimeToRegionResult> {
    if settings.runs < 2 {
        return Err(Error::InvalidConfig("time-to-region needs runs ≥ 2".into()));
    }
    let problem = constrained_sphere_spec(dimension)?;
    let cfg = settings.algorithm_config();
    let records = run_batch(&problem, &cfg, settings.runs, settings.master_seed, workers)?;
    let mut hits = Vec::new();
    let mut censored = Vec::new();
    for (i, r) in records.iter().enumerate() {
        match r.evals_to_region {
            Some(e) if e <= settings.max_evals => hits.push(e),
            _ => censored.push(i),
        }
    }
    let samples: Vec<f64> = hits.iter().map(|&e| e as f64).collect();
    let summary = if samples.is_empty() {
        None
    } else {
        Some(StatsSummary::from_samples(&samples, dimension)?)
    };
    Ok(TimeToRegionResult {
        algorithm: settings.algorithm,
        dimension,
        summary,
        hits,
        censored,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemKind;

    #[test]
    fn stats_match_textbook_values() {
        let s = StatsSummary::from_samples(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0], 2).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.variance, 4.0);
        assert_eq!(s.sd, 2.0);
        assert!((s.se - 2.0 / 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.mean_per_dim, 2.5);
    }

    #[test]
    fn stats_two_runs_se() {
        let s = StatsSummary::from_samples(&[10.0, 20.0], 1).unwrap();
        assert!((s.se - s.sd / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pearson_exact_cases() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.7 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_rejects_degenerate() {
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn tail_closed_form_points() {
        assert!((scaled_cauchy_tail(0.3, 1.0, 1.0) - 0.5).abs() < 1e-15);
        let expected = 2.0 / PI * (1.0f64 / 100.0).atan();
        assert!((scaled_cauchy_tail(1.0, 100.0, 1.0) - expected).abs() < 1e-15);
        assert!((scaled_cauchy_tail(1.0, 100.0, 1.0) - 0.00637).abs() < 1e-5);
    }

    #[test]
    fn tail_estimates_decrease() {
        let mut rng = RngStream::new(12);
        let est =
            scaled_cauchy_tail_estimates(0.5, &[1, 100, 10_000], 1.0, 200_000, &mut rng).unwrap();
        assert!((est[0] - 0.5).abs() < 0.01);
        assert!(est[0] > est[1] && est[1] > est[2], "{est:?}");
        assert!(scaled_cauchy_tail_estimates(0.0, &[1], 1.0, 10, &mut rng).is_err());
    }

    #[test]
    fn single_run_mean_is_that_run() {
        let spec = ProblemKind::Sphere.spec(4).unwrap();
        let base = AlgorithmConfig::new(Algorithm::QpsoCd);
        let cells = mean_best_experiment(&spec, &[Algorithm::QpsoCd], &base, 10, 30, 1, 5, Some(1))
            .unwrap();
        assert_eq!(cells[0].mean, cells[0].records[0].final_value);
        assert_eq!(cells[0].mean_trajectory, cells[0].records[0].trajectory);
    }

    #[test]
    fn batch_is_independent_of_worker_count() {
        let spec = ProblemKind::Rastrigin.spec(3).unwrap();
        let cfg = AlgorithmConfig::new(Algorithm::QpsoCd).with_iterations(40);
        let a = run_batch(&spec, &cfg, 6, 99, Some(1)).unwrap();
        let b = run_batch(&spec, &cfg, 6, 99, Some(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn best_design_prefers_feasible_points() {
        let spec = crate::constrained::three_bar_truss_spec();
        let mk = |x: Vec<f64>| RunRecord {
            algorithm: Algorithm::QpsoCd,
            problem: "truss".into(),
            trajectory: vec![],
            final_value: 0.0,
            final_position: x,
            evals_total: 0,
            evals_to_region: None,
            iteration_to_region: None,
            seed: 0,
            stream: 0,
        };
        // the first point is cheaper but violates g1
        let records = vec![mk(vec![0.5, 0.2]), mk(vec![0.788658, 0.40828488])];
        let best = best_design(&spec, &records).unwrap();
        assert_eq!(best.run, 1);
        assert!(best.feasible);
        assert_eq!(best.constraints.len(), 3);
        assert!(best_design(&spec, &[]).is_none());
    }

    #[test]
    fn infinite_region_hits_at_population() {
        let mut s = TimeToRegionSettings::new(Algorithm::QpsoCd);
        s.xi = f64::INFINITY;
        s.runs = 5;
        let r = time_to_region(3, &s, Some(1)).unwrap();
        let summary = r.summary.unwrap();
        assert_eq!(summary.mean, s.population as f64);
        assert_eq!(summary.variance, 0.0);
        assert!(r.censored.is_empty());
    }

    #[test]
    fn unreachable_region_is_censored() {
        let mut s = TimeToRegionSettings::new(Algorithm::Pso);
        s.xi = -1.0;
        s.runs = 3;
        s.max_evals = 200;
        let r = time_to_region(2, &s, Some(1)).unwrap();
        assert!(r.summary.is_none());
        assert_eq!(r.censored, vec![0, 1, 2]);
        assert!(time_to_region(2, &TimeToRegionSettings { runs: 1, ..s }, None).is_err());
    }
}
