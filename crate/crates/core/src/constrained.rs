//! Penalty-method constraint handling, box repair, and the engineering design
//! problems (three-bar truss, tension/compression spring, pressure vessel).

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::rng::RngStream;

/// Inequality constraint `g(x) <= 0`.
pub type Inequality = fn(&[f64]) -> f64;

/// Reported points with every `g_i(x) <= FEASIBILITY_TOLERANCE` count as feasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-4;

/// Maximum number of random pull-back attempts per coordinate in
/// [`repair_bounds`] before clamping.
pub const REPAIR_ATTEMPTS: usize = 10;

#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub inequalities: Vec<Inequality>,
    /// Lower bound `q(i)` of each design variable.
    pub lower: Vec<f64>,
    /// Upper bound `p(i)` of each design variable.
    pub upper: Vec<f64>,
}

impl ConstraintSet {
    pub fn new(inequalities: Vec<Inequality>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidInput(
                "constraint box bounds differ in length".into(),
            ));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::InvalidInput(format!(
                "constraint box coordinate {i} is empty: [{}, {}]",
                lower[i], upper[i]
            )));
        }
        Ok(Self {
            inequalities,
            lower,
            upper,
        })
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    /// All `g_i(x)` in declaration order.
    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        self.inequalities.iter().map(|g| g(x)).collect()
    }

    pub fn violation_sum(&self, x: &[f64]) -> f64 {
        violation_sum(x, self)
    }

    /// True when every `g_i(x) <= tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.inequalities.iter().all(|g| g(x) <= tol)
    }
}

/// `sum_i max(0, g_i(x))`.
pub fn violation_sum(x: &[f64], cs: &ConstraintSet) -> f64 {
    cs.inequalities
        .iter()
        .map(|g| {
            let v = g(x);
            // NaN constraint values count as unbounded violation.
            if v.is_nan() {
                f64::INFINITY
            } else {
                v.max(0.0)
            }
        })
        .sum()
}

/// Shape of the penalty weight `y(t)` as a function of iteration `t >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    /// `y(t) = c`
    Constant,
    /// `y(t) = c * sqrt(t)`
    Sqrt,
    /// `y(t) = c * t`
    Linear,
}

/// Iteration-dependent penalty weight; default `1000 * sqrt(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySchedule {
    pub kind: PenaltyKind,
    pub coefficient: f64,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        Self {
            kind: PenaltyKind::Sqrt,
            coefficient: 1000.0,
        }
    }
}

impl PenaltySchedule {
    pub fn new(kind: PenaltyKind, coefficient: f64) -> Result<Self> {
        if !(coefficient > 0.0) || !coefficient.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "penalty coefficient must be a positive finite number, got {coefficient}"
            )));
        }
        Ok(Self { kind, coefficient })
    }

    pub fn weight(&self, t: usize) -> f64 {
        let t = t.max(1) as f64;
        match self.kind {
            PenaltyKind::Constant => self.coefficient,
            PenaltyKind::Sqrt => self.coefficient * t.sqrt(),
            PenaltyKind::Linear => self.coefficient * t,
        }
    }
}

impl fmt::Display for PenaltySchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            PenaltyKind::Constant => "constant",
            PenaltyKind::Sqrt => "sqrt",
            PenaltyKind::Linear => "linear",
        };
        write!(f, "{kind}:{}", self.coefficient)
    }
}

/// Parses `kind:coefficient`, e.g. `sqrt:1000` or `constant:5000`.
impl FromStr for PenaltySchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, coef) = s.split_once(':').ok_or_else(|| {
            Error::InvalidConfig(format!(
                "penalty must look like 'kind:coefficient' (e.g. sqrt:1000), got '{s}'"
            ))
        })?;
        let kind = match kind.trim().to_ascii_lowercase().as_str() {
            "constant" => PenaltyKind::Constant,
            "sqrt" => PenaltyKind::Sqrt,
            "linear" => PenaltyKind::Linear,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown penalty kind '{other}' (expected constant, sqrt or linear)"
                )))
            }
        };
        let coefficient: f64 = coef.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("penalty coefficient '{coef}' is not a number"))
        })?;
        PenaltySchedule::new(kind, coefficient)
    }
}

/// `f(x)` for feasible points, else `f(x) + y(t) * violation_sum(x)`.
pub fn penalized_objective(
    x: &[f64],
    t: usize,
    spec: &ProblemSpec,
    schedule: &PenaltySchedule,
) -> f64 {
    let f = spec.evaluate(x);
    match &spec.constraints {
        None => f,
        Some(cs) => {
            let v = violation_sum(x, cs);
            if v == 0.0 {
                f
            } else {
                f + schedule.weight(t) * v
            }
        }
    }
}

/// Pulls out-of-box coordinates back inside by random fractions of the box
/// width: below `q(i)` adds `(p(i) - q(i)) * r`, above `p(i)` subtracts it.
/// Each coordinate gets at most [`REPAIR_ATTEMPTS`] draws and is clamped to the
/// nearer bound if still outside.
pub fn repair_bounds(x: &[f64], lower: &[f64], upper: &[f64], rng: &mut RngStream) -> Vec<f64> {
    x.iter()
        .zip(lower.iter().zip(upper))
        .map(|(&xi, (&q, &p))| repair_coordinate(xi, q, p, rng))
        .collect()
}

fn repair_coordinate(mut xi: f64, q: f64, p: f64, rng: &mut RngStream) -> f64 {
    if xi.is_nan() {
        return q + (p - q) * rng.uniform01();
    }
    let width = p - q;
    for _ in 0..REPAIR_ATTEMPTS {
        if xi < q {
            xi += width * rng.uniform01();
        } else if xi > p {
            xi -= width * rng.uniform01();
        } else {
            return xi;
        }
    }
    xi.clamp(q, p)
}

const TRUSS_LENGTH: f64 = 100.0;
const TRUSS_LOAD: f64 = 2.0;
const TRUSS_STRESS: f64 = 2.0;

pub fn truss_weight(x: &[f64]) -> f64 {
    (2.0 * SQRT_2 * x[0] + x[1]) * TRUSS_LENGTH
}

pub fn truss_g1(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    (SQRT_2 * x1 + x2) / (SQRT_2 * x1 * x1 + 2.0 * x1 * x2) * TRUSS_LOAD - TRUSS_STRESS
}

pub fn truss_g2(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    x2 / (SQRT_2 * x1 * x1 + 2.0 * x1 * x2) * TRUSS_LOAD - TRUSS_STRESS
}

pub fn truss_g3(x: &[f64]) -> f64 {
    1.0 / (x[0] + SQRT_2 * x[1]) * TRUSS_LOAD - TRUSS_STRESS
}

/// Three-bar truss weight, `0 <= x1, x2 <= 1`.
pub fn three_bar_truss_spec() -> ProblemSpec {
    let lower = vec![0.0, 0.0];
    let upper = vec![1.0, 1.0];
    let cs = ConstraintSet::new(
        vec![truss_g1, truss_g2, truss_g3],
        lower.clone(),
        upper.clone(),
    )
    .expect("static truss box");
    ProblemSpec::new("truss", lower, upper, truss_weight)
        .and_then(|s| s.with_constraints(cs))
        .expect("static truss spec")
}

/// Spring volume `(x3 + 2) x2 x1^2`; x1 wire diameter, x2 coil diameter,
/// x3 number of active coils (treated as continuous).
pub fn spring_volume(x: &[f64]) -> f64 {
    (x[2] + 2.0) * x[1] * x[0] * x[0]
}

pub fn spring_g1(x: &[f64]) -> f64 {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    1.0 - x2.powi(3) * x3 / (71785.0 * x1.powi(4))
}

pub fn spring_g2(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    (4.0 * x2 * x2 - x1 * x2) / (12566.0 * (x2 * x1.powi(3) - x1.powi(4)))
        + 1.0 / (5108.0 * x1 * x1)
        - 1.0
}

pub fn spring_g3(x: &[f64]) -> f64 {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    (1.0 - 140.45 * x1) / (x2 * x2 * x3)
}

pub fn spring_g4(x: &[f64]) -> f64 {
    (x[1] + x[0]) / 1.5 - 1.0
}

/// Tension/compression spring, `0.05 <= x1 <= 2`, `0.25 <= x2 <= 1.3`,
/// `2 <= x3 <= 15`.
pub fn tension_spring_spec() -> ProblemSpec {
    let lower = vec![0.05, 0.25, 2.0];
    let upper = vec![2.0, 1.3, 15.0];
    let cs = ConstraintSet::new(
        vec![spring_g1, spring_g2, spring_g3, spring_g4],
        lower.clone(),
        upper.clone(),
    )
    .expect("static spring box");
    ProblemSpec::new("spring", lower, upper, spring_volume)
        .and_then(|s| s.with_constraints(cs))
        .expect("static spring spec")
}

/// Fabrication cost; x1 shell thickness, x2 head thickness, x3 inner radius,
/// x4 length.
pub fn vessel_cost(x: &[f64]) -> f64 {
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    0.6224 * x1 * x3 * x4 + 1.7781 * x2 * x3 * x3 + 3.166 * x1 * x1 * x4 + 19.84 * x1 * x1 * x3
}

pub fn vessel_g1(x: &[f64]) -> f64 {
    -x[0] + 0.0193 * x[2]
}

pub fn vessel_g2(x: &[f64]) -> f64 {
    -x[1] + 0.00954 * x[2]
}

pub fn vessel_g3(x: &[f64]) -> f64 {
    let (x3, x4) = (x[2], x[3]);
    -PI * x3 * x3 * x4 - 4.0 / 3.0 * PI * x3.powi(3) + 1_296_000.0
}

pub fn vessel_g4(x: &[f64]) -> f64 {
    x[3] - 240.0
}

/// Pressure vessel, `0.0625 <= x1, x2 <= 6.1875`, `10 <= x3, x4 <= 200`
/// (thicknesses treated as continuous).
pub fn pressure_vessel_spec() -> ProblemSpec {
    let lower = vec![0.0625, 0.0625, 10.0, 10.0];
    let upper = vec![99.0 * 0.0625, 99.0 * 0.0625, 200.0, 200.0];
    let cs = ConstraintSet::new(
        vec![vessel_g1, vessel_g2, vessel_g3, vessel_g4],
        lower.clone(),
        upper.clone(),
    )
    .expect("static vessel box");
    ProblemSpec::new("vessel", lower, upper, vessel_cost)
        .and_then(|s| s.with_constraints(cs))
        .expect("static vessel spec")
}
