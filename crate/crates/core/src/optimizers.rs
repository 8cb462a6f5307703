//! Swarm optimizers: constriction PSO, QPSO, QPSO with Cauchy mutation of the
//! global best (QPSO-MO), and QPSO-CD (Cauchy mutation of the mean-best
//! position plus natural selection).
//!
//! A run is a deterministic function of `(problem, config, rng stream)`.
//!
//! Per-iteration order for the QPSO family:
//!
//! 1. `alpha` from the linear schedule, `mbest` from all personal bests.
//! 2. QPSO-CD: `mbest` is Cauchy-mutated with probability `Pr`;
//!    QPSO-MO: the global best used for attractors is mutated instead.
//!    The mutated vector is only used inside the iteration.
//! 3. For each particle: local attractor, quantum move, box repair
//!    (constrained problems only), one evaluation, then pbest/gbest update.
//! 4. QPSO-CD: natural selection copies the best `Z` positions over the
//!    worst `Z`. Personal bests only ever change through evaluated moves, so
//!    a copied position steers the next move but never becomes a pbest by
//!    itself.
//!
//! Evaluation accounting: `N` for initialization plus `N` per iteration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constrained::{repair_bounds, violation_sum, PenaltySchedule};
use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "pso")]
    Pso,
    #[serde(rename = "qpso")]
    Qpso,
    #[serde(rename = "qpso-mo")]
    QpsoMo,
    #[serde(rename = "qpso-cd")]
    QpsoCd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Pso,
        Algorithm::Qpso,
        Algorithm::QpsoMo,
        Algorithm::QpsoCd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pso => "pso",
            Algorithm::Qpso => "qpso",
            Algorithm::QpsoMo => "qpso-mo",
            Algorithm::QpsoCd => "qpso-cd",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Pso => "PSO",
            Algorithm::Qpso => "QPSO",
            Algorithm::QpsoMo => "QPSO-MO",
            Algorithm::QpsoCd => "QPSO-CD",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == lower)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown algorithm '{s}' (expected pso, qpso, qpso-mo or qpso-cd)"
                ))
            })
    }
}

/// All tunables of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    pub population: usize,
    pub iterations: usize,
    pub c1: f64,
    pub c2: f64,
    pub alpha_start: f64,
    pub alpha_end: f64,
    /// Cauchy mutation probability `Pr` (QPSO-MO, QPSO-CD).
    pub mutation_prob: f64,
    /// Natural-selection parameter `S` (QPSO-CD); `None` disables selection.
    pub selection: Option<u32>,
    /// Constriction coefficient (PSO).
    pub chi: f64,
    pub penalty: PenaltySchedule,
    /// Re-score stored personal bests with the current penalty weight at the
    /// start of every iteration.
    pub reweigh_penalty: bool,
    /// Optimal-region threshold; enables `evals_to_region` tracking.
    pub target: Option<f64>,
    /// Stop after the iteration in which the target region is first reached.
    pub stop_at_target: bool,
    pub seed: u64,
}

impl AlgorithmConfig {
    /// Defaults: `alpha` 1.0 -> 0.5, `S = 2`, `c1 = c2 = 2`, `Pr = 0.1` for
    /// the QPSO family; `chi = 0.729`, `c1 = c2 = 2.05` for PSO.
    pub fn new(algorithm: Algorithm) -> Self {
        let (c1, c2) = match algorithm {
            Algorithm::Pso => (2.05, 2.05),
            _ => (2.0, 2.0),
        };
        Self {
            algorithm,
            population: 20,
            iterations: 1000,
            c1,
            c2,
            alpha_start: 1.0,
            alpha_end: 0.5,
            mutation_prob: 0.1,
            selection: Some(2),
            chi: 0.729,
            penalty: PenaltySchedule::default(),
            reweigh_penalty: true,
            target: None,
            stop_at_target: false,
            seed: 0,
        }
    }

    pub fn with_population(mut self, n: usize) -> Self {
        self.population = n;
        self
    }

    pub fn with_iterations(mut self, m: usize) -> Self {
        self.iterations = m;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_fixed_alpha(mut self, alpha: f64) -> Self {
        self.alpha_start = alpha;
        self.alpha_end = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population < 2 {
            return bad("population must be ≥ 2".into());
        }
        if self.iterations < 1 {
            return bad("iterations must be ≥ 1".into());
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad(format!(
                "mutation probability must be in [0, 1], got {}",
                self.mutation_prob
            ));
        }
        if self.selection == Some(0) {
            return bad("selection parameter S must be ≥ 1".into());
        }
        if !(self.alpha_end > 0.0)
            || !(self.alpha_start >= self.alpha_end)
            || !self.alpha_start.is_finite()
        {
            return bad(format!(
                "alpha schedule must satisfy alpha_start ≥ alpha_end > 0, got {} -> {}",
                self.alpha_start, self.alpha_end
            ));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0 && self.c1 + self.c2 > 0.0)
            || !self.c1.is_finite()
            || !self.c2.is_finite()
        {
            return bad(format!(
                "acceleration coefficients must be ≥ 0 and not both zero, got c1={} c2={}",
                self.c1, self.c2
            ));
        }
        if !(self.chi >= 0.0) || !self.chi.is_finite() {
            return bad(format!(
                "constriction coefficient must be ≥ 0, got {}",
                self.chi
            ));
        }
        if let Some(t) = self.target {
            if t.is_nan() {
                return bad("target threshold must not be NaN".into());
            }
        }
        PenaltySchedule::new(self.penalty.kind, self.penalty.coefficient)?;
        Ok(())
    }
}

/// Raw objective and total constraint violation of an evaluated point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub objective: f64,
    pub violation: f64,
}

impl Score {
    pub fn unconstrained(objective: f64) -> Self {
        Self {
            objective,
            violation: 0.0,
        }
    }

    /// Penalized fitness under penalty weight `weight`; non-finite maps to `+inf`.
    pub fn fitness(&self, weight: f64) -> f64 {
        let v = if self.violation == 0.0 {
            self.objective
        } else {
            self.objective + weight * self.violation
        };
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    /// Fitness of `position` (the last evaluation, or the copied value after
    /// natural selection).
    pub fitness: f64,
    pub score: Score,
    pub pbest_position: Vec<f64>,
    pub pbest_value: f64,
    pub pbest_score: Score,
    /// Empty for the QPSO family.
    pub velocity: Vec<f64>,
}

impl Particle {
    /// Particle of an unconstrained problem whose objective at `position` is `fitness`.
    pub fn new(position: Vec<f64>, fitness: f64) -> Self {
        Self::scored(position, Score::unconstrained(fitness), 0.0)
    }

    pub fn scored(position: Vec<f64>, score: Score, weight: f64) -> Self {
        let fitness = score.fitness(weight);
        Self {
            pbest_position: position.clone(),
            pbest_value: fitness,
            pbest_score: score,
            position,
            fitness,
            score,
            velocity: Vec::new(),
        }
    }

    /// Adopts the current position as personal best when strictly better.
    pub fn update_pbest(&mut self) -> bool {
        if self.fitness < self.pbest_value {
            self.pbest_position.clone_from(&self.position);
            self.pbest_value = self.fitness;
            self.pbest_score = self.score;
            true
        } else {
            false
        }
    }

    /// Recomputes cached fitness values under a new penalty weight.
    pub fn reweigh(&mut self, weight: f64) {
        self.fitness = self.score.fitness(weight);
        self.pbest_value = self.pbest_score.fitness(weight);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub gbest_position: Vec<f64>,
    pub gbest_value: f64,
    pub iteration: usize,
    pub mbest: Vec<f64>,
}

impl SwarmState {
    /// Builds a swarm whose global best is the best personal best.
    pub fn from_particles(particles: Vec<Particle>) -> Self {
        let dim = particles.first().map_or(0, |p| p.position.len());
        let mut swarm = Self {
            particles,
            gbest_position: vec![0.0; dim],
            gbest_value: f64::INFINITY,
            iteration: 0,
            mbest: vec![0.0; dim],
        };
        swarm.refresh_gbest();
        swarm
    }

    /// Recomputes gbest as the minimum personal best (first index on ties).
    pub fn refresh_gbest(&mut self) {
        let best = self.particles.iter().enumerate().min_by(|a, b| {
            a.1.pbest_value
                .total_cmp(&b.1.pbest_value)
                .then(a.0.cmp(&b.0))
        });
        if let Some((_, p)) = best {
            self.gbest_position.clone_from(&p.pbest_position);
            self.gbest_value = p.pbest_value;
        }
    }

    /// Strict-improvement update of gbest from particle `i`'s pbest.
    fn offer_gbest(&mut self, i: usize) -> bool {
        let p = &self.particles[i];
        if p.pbest_value < self.gbest_value {
            self.gbest_position.clone_from(&p.pbest_position);
            self.gbest_value = p.pbest_value;
            true
        } else {
            false
        }
    }
}

/// Linear contraction-expansion schedule `a0 - (a0 - a1) k / M`.
pub fn alpha_at(k: usize, m: usize, a0: f64, a1: f64) -> f64 {
    a0 - (a0 - a1) * k as f64 / m as f64
}

/// Coordinate-wise mean of all personal-best positions.
pub fn mean_best(particles: &[Particle]) -> Vec<f64> {
    let Some(first) = particles.first() else {
        return Vec::new();
    };
    let mut acc = vec![0.0; first.pbest_position.len()];
    for p in particles {
        for (a, v) in acc.iter_mut().zip(&p.pbest_position) {
            *a += v;
        }
    }
    let n = particles.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// Convex weight `c1 r1 / (c1 r1 + c2 r2)`; 1/2 when both terms vanish.
pub fn attractor_weight(c1: f64, r1: f64, c2: f64, r2: f64) -> f64 {
    let a = c1 * r1;
    let denom = a + c2 * r2;
    if denom > 0.0 {
        a / denom
    } else {
        0.5
    }
}

/// Per-coordinate random convex combination of `pbest` and `gbest`.
pub fn local_attractor(
    pbest: &[f64],
    gbest: &[f64],
    c1: f64,
    c2: f64,
    rng: &mut RngStream,
) -> Vec<f64> {
    pbest
        .iter()
        .zip(gbest)
        .map(|(&p, &g)| {
            let r1 = rng.uniform01();
            let r2 = rng.uniform01();
            let phi = attractor_weight(c1, r1, c2, r2);
            // clamp guards against one-ulp overshoot from rounding
            (phi * p + (1.0 - phi) * g).max(p.min(g)).min(p.max(g))
        })
        .collect()
}

/// `p +/- alpha |mbest - x| ln(1/u)` for one coordinate.
pub fn qpso_coordinate(x: f64, attractor: f64, mbest: f64, alpha: f64, u: f64, plus: bool) -> f64 {
    let step = alpha * (mbest - x).abs() * (1.0 / u).ln();
    if plus {
        attractor + step
    } else {
        attractor - step
    }
}

/// Quantum-behaved position update. Per coordinate one uniform picks the
/// sign (`+` when below 1/2) and one `u` in `(0, 1)` sets the step length.
pub fn qpso_move(
    position: &[f64],
    attractor: &[f64],
    mbest: &[f64],
    alpha: f64,
    rng: &mut RngStream,
) -> Vec<f64> {
    position
        .iter()
        .zip(attractor)
        .zip(mbest)
        .map(|((&x, &p), &m)| {
            let plus = rng.uniform01() < 0.5;
            let u = rng.uniform_open01();
            qpso_coordinate(x, p, m, alpha, u, plus)
        })
        .collect()
}

/// Cauchy mutation `v' = v + phi * C` applied to every coordinate, gated by
/// one Bernoulli(`pr`) draw. `phi` is a fresh uniform per coordinate and `C`
/// a fresh standard Cauchy variate. With `pr == 0` no random numbers are
/// consumed.
pub fn cauchy_mutate(v: &[f64], pr: f64, rng: &mut RngStream) -> Vec<f64> {
    if !(pr > 0.0) || rng.uniform01() >= pr {
        return v.to_vec();
    }
    v.iter()
        .map(|&x| {
            let phi = rng.uniform01();
            x + phi * rng.cauchy_standard()
        })
        .collect()
}

/// Number of positions replaced by natural selection: `round((N - 1) / S)`,
/// halves rounded away from zero.
pub fn selection_count(n: usize, s: u32) -> usize {
    if n == 0 || s == 0 {
        return 0;
    }
    ((n - 1) as f64 / s as f64).round() as usize
}

/// Overwrites the positions (and their cached fitness) of the `Z` worst
/// particles with those of the `Z` best, rank for rank. Personal bests are
/// left alone. Returns the indices that received a new position.
pub fn natural_selection(swarm: &mut SwarmState, s: u32) -> Result<Vec<usize>> {
    let n = swarm.particles.len();
    if s < 1 {
        return Err(Error::InvalidConfig(
            "selection parameter S must be ≥ 1".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidConfig(
            "natural selection needs at least 2 particles".into(),
        ));
    }
    let z = selection_count(n, s);
    if z >= n {
        return Err(Error::InvalidConfig(format!(
            "selection would replace {z} of {n} particles"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        swarm.particles[a]
            .fitness
            .total_cmp(&swarm.particles[b].fitness)
            .then(a.cmp(&b))
    });
    // snapshot first: for S = 1 the source and destination ranks overlap
    let sources: Vec<(Vec<f64>, f64, Score)> = order[..z]
        .iter()
        .map(|&i| {
            let p = &swarm.particles[i];
            (p.position.clone(), p.fitness, p.score)
        })
        .collect();
    let mut replaced = Vec::with_capacity(z);
    for (r, (pos, fit, score)) in sources.into_iter().enumerate() {
        let dst = order[n - z + r];
        let target = &mut swarm.particles[dst];
        target.position = pos;
        target.fitness = fit;
        target.score = score;
        replaced.push(dst);
    }
    Ok(replaced)
}

/// Counts evaluations and applies penalty/repair for constrained problems.
#[derive(Debug)]
pub struct Evaluator<'a> {
    problem: &'a ProblemSpec,
    penalty: PenaltySchedule,
    evals: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a ProblemSpec, penalty: PenaltySchedule) -> Self {
        Self {
            problem,
            penalty,
            evals: 0,
        }
    }

    pub fn evals(&self) -> u64 {
        self.evals
    }

    pub fn problem(&self) -> &ProblemSpec {
        self.problem
    }

    /// One objective evaluation (plus constraint check).
    pub fn score(&mut self, x: &[f64]) -> Score {
        self.evals += 1;
        let objective = self.problem.evaluate(x);
        let violation = match &self.problem.constraints {
            None => 0.0,
            Some(cs) => violation_sum(x, cs),
        };
        Score {
            objective,
            violation,
        }
    }

    /// Penalty weight `y(t)`; zero for unconstrained problems.
    pub fn weight(&self, t: usize) -> f64 {
        if self.problem.is_constrained() {
            self.penalty.weight(t)
        } else {
            0.0
        }
    }

    /// Penalized fitness at iteration `t`; non-finite values map to `+inf`.
    pub fn fitness(&mut self, x: &[f64], t: usize) -> f64 {
        let weight = self.weight(t);
        self.score(x).fitness(weight)
    }

    /// Box repair for constrained problems; identity otherwise.
    pub fn repair(&self, x: Vec<f64>, rng: &mut RngStream) -> Vec<f64> {
        match &self.problem.constraints {
            Some(cs) => repair_bounds(&x, &cs.lower, &cs.upper, rng),
            None => x,
        }
    }
}

/// Outcome of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub problem: String,
    /// Global-best value after each iteration.
    pub trajectory: Vec<f64>,
    pub final_value: f64,
    pub final_position: Vec<f64>,
    pub evals_total: u64,
    /// Evaluation count at which the best fitness first entered the target
    /// region (initialization counts as one batch of `N`).
    pub evals_to_region: Option<u64>,
    /// Iteration at which the target region was first entered (0 = init).
    pub iteration_to_region: Option<usize>,
    pub seed: u64,
    pub stream: u64,
}

/// Runs `cfg.algorithm` on `problem` with the stream seeded from `cfg.seed`.
pub fn run(problem: &ProblemSpec, cfg: &AlgorithmConfig) -> Result<RunRecord> {
    let mut rng = RngStream::new(cfg.seed);
    run_with_rng(problem, cfg, &mut rng)
}

/// Runs with an explicit stream; `cfg.seed` is ignored.
pub fn run_with_rng(
    problem: &ProblemSpec,
    cfg: &AlgorithmConfig,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    cfg.validate()?;
    let (seed, stream) = (rng.seed(), rng.stream());
    let mut eval = Evaluator::new(problem, cfg.penalty);
    let mut swarm = initialize(problem, cfg, &mut eval, rng)?;

    let mut tracker = RegionTracker::new(cfg.target);
    tracker.observe_batch(swarm.gbest_value, eval.evals(), 0);

    let mut trajectory = Vec::with_capacity(cfg.iterations);
    for k in 1..=cfg.iterations {
        swarm.iteration = k;
        if problem.is_constrained() && cfg.reweigh_penalty {
            let w = eval.weight(k);
            swarm.particles.iter_mut().for_each(|p| p.reweigh(w));
            swarm.refresh_gbest();
        }
        match cfg.algorithm {
            Algorithm::Pso => pso_step(&mut swarm, &mut eval, cfg, k, rng, &mut tracker),
            _ => qpso_step(&mut swarm, &mut eval, cfg, k, rng, &mut tracker)?,
        }
        trajectory.push(swarm.gbest_value);
        if cfg.stop_at_target && tracker.hit() {
            break;
        }
    }

    Ok(RunRecord {
        algorithm: cfg.algorithm,
        problem: problem.name.clone(),
        trajectory,
        final_value: swarm.gbest_value,
        final_position: swarm.gbest_position,
        evals_total: eval.evals(),
        evals_to_region: tracker.evals,
        iteration_to_region: tracker.iteration,
        seed,
        stream,
    })
}

/// First entry of the best fitness into `{f <= target}`.
#[derive(Debug, Clone, Copy)]
pub struct RegionTracker {
    target: Option<f64>,
    evals: Option<u64>,
    iteration: Option<usize>,
}

impl RegionTracker {
    pub fn new(target: Option<f64>) -> Self {
        Self {
            target,
            evals: None,
            iteration: None,
        }
    }

    pub fn hit(&self) -> bool {
        self.evals.is_some()
    }

    pub fn observe_batch(&mut self, value: f64, evals: u64, iteration: usize) {
        if self.evals.is_none() {
            if let Some(t) = self.target {
                if value <= t {
                    self.evals = Some(evals);
                    self.iteration = Some(iteration);
                }
            }
        }
    }
}

fn initialize(
    problem: &ProblemSpec,
    cfg: &AlgorithmConfig,
    eval: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Result<SwarmState> {
    let mut particles = Vec::with_capacity(cfg.population);
    for _ in 0..cfg.population {
        let x: Vec<f64> = problem
            .lower
            .iter()
            .zip(&problem.upper)
            .map(|(&lo, &hi)| rng.uniform_in(lo, hi))
            .collect::<Result<_>>()?;
        let score = eval.score(&x);
        let mut p = Particle::scored(x, score, eval.weight(1));
        if cfg.algorithm == Algorithm::Pso {
            p.velocity = vec![0.0; problem.dimension];
        }
        particles.push(p);
    }
    let swarm = SwarmState::from_particles(particles);
    if !swarm.gbest_value.is_finite() {
        return Err(Error::NonFinite {
            iteration: 0,
            detail: format!(
                "no initial particle of {} has a finite fitness on '{}'",
                cfg.population, problem.name
            ),
        });
    }
    Ok(swarm)
}

fn qpso_step(
    swarm: &mut SwarmState,
    eval: &mut Evaluator<'_>,
    cfg: &AlgorithmConfig,
    k: usize,
    rng: &mut RngStream,
    tracker: &mut RegionTracker,
) -> Result<()> {
    let alpha = alpha_at(k, cfg.iterations, cfg.alpha_start, cfg.alpha_end);
    swarm.mbest = mean_best(&swarm.particles);
    let mbest = match cfg.algorithm {
        Algorithm::QpsoCd => cauchy_mutate(&swarm.mbest, cfg.mutation_prob, rng),
        _ => swarm.mbest.clone(),
    };
    let mut guide = match cfg.algorithm {
        Algorithm::QpsoMo => cauchy_mutate(&swarm.gbest_position, cfg.mutation_prob, rng),
        _ => swarm.gbest_position.clone(),
    };

    for i in 0..swarm.particles.len() {
        let p = &swarm.particles[i];
        let attractor = local_attractor(&p.pbest_position, &guide, cfg.c1, cfg.c2, rng);
        let moved = qpso_move(&p.position, &attractor, &mbest, alpha, rng);
        let moved = eval.repair(moved, rng);
        let score = eval.score(&moved);
        let p = &mut swarm.particles[i];
        p.position = moved;
        p.score = score;
        p.fitness = score.fitness(eval.weight(k));
        if p.update_pbest() && swarm.offer_gbest(i) {
            guide.clone_from(&swarm.gbest_position);
            tracker.observe_batch(swarm.gbest_value, eval.evals(), k);
        }
    }

    if cfg.algorithm == Algorithm::QpsoCd {
        if let Some(s) = cfg.selection {
            natural_selection(swarm, s)?;
        }
    }
    Ok(())
}

/// One constriction-PSO iteration:
/// `v <- chi (v + c1 r1 (P - x) + c2 r2 (G - x))`, `x <- x + v`, followed by
/// evaluation and pbest/gbest update, particle by particle.
pub fn pso_step(
    swarm: &mut SwarmState,
    eval: &mut Evaluator<'_>,
    cfg: &AlgorithmConfig,
    k: usize,
    rng: &mut RngStream,
    tracker: &mut RegionTracker,
) {
    for i in 0..swarm.particles.len() {
        let p = &mut swarm.particles[i];
        if p.velocity.len() != p.position.len() {
            p.velocity = vec![0.0; p.position.len()];
        }
        for j in 0..p.position.len() {
            let r1 = rng.uniform01();
            let r2 = rng.uniform01();
            let x = p.position[j];
            let v = cfg.chi
                * (p.velocity[j]
                    + cfg.c1 * r1 * (p.pbest_position[j] - x)
                    + cfg.c2 * r2 * (swarm.gbest_position[j] - x));
            p.velocity[j] = v;
            p.position[j] = x + v;
        }
        let moved = std::mem::take(&mut p.position);
        let moved = eval.repair(moved, rng);
        let score = eval.score(&moved);
        let p = &mut swarm.particles[i];
        p.position = moved;
        p.score = score;
        p.fitness = score.fitness(eval.weight(k));
        if p.update_pbest() && swarm.offer_gbest(i) {
            tracker.observe_batch(swarm.gbest_value, eval.evals(), k);
        }
    }
}
