//! Benchmark objectives and the problem-definition type shared by every
//! optimizer.
//!
//! Formulas are written with 1-based indices in the docs; storage is 0-based,
//! so coordinate `x[k]` is `x_{k+1}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::constrained::{self, ConstraintSet};
use crate::error::{Error, Result};

/// Pure objective evaluator.
pub type Objective = fn(&[f64]) -> f64;

/// A minimization problem: initialization box, objective, optional constraints.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub dimension: usize,
    /// Lower corner of the initialization box.
    pub lower: Vec<f64>,
    /// Upper corner of the initialization box.
    pub upper: Vec<f64>,
    pub objective: Objective,
    pub constraints: Option<ConstraintSet>,
    pub known_optimum: Option<f64>,
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        objective: Objective,
    ) -> Result<Self> {
        let name = name.into();
        if lower.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{name}: dimension must be ≥ 1"
            )));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidInput(format!(
                "{name}: bound vectors differ in length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::InvalidInput(format!(
                "{name}: empty initialization range in coordinate {i}: [{}, {}]",
                lower[i], upper[i]
            )));
        }
        Ok(Self {
            name,
            dimension: lower.len(),
            lower,
            upper,
            objective,
            constraints: None,
            known_optimum: None,
        })
    }

    /// Same range `[lo, hi]` in every coordinate.
    pub fn uniform_box(
        name: impl Into<String>,
        dimension: usize,
        lo: f64,
        hi: f64,
        objective: Objective,
    ) -> Result<Self> {
        Self::new(name, vec![lo; dimension], vec![hi; dimension], objective)
    }

    pub fn with_constraints(mut self, constraints: ConstraintSet) -> Result<Self> {
        if constraints.dimension() != self.dimension {
            return Err(Error::InvalidInput(format!(
                "{}: constraint box has dimension {}, problem has {}",
                self.name,
                constraints.dimension(),
                self.dimension
            )));
        }
        self.constraints = Some(constraints);
        Ok(self)
    }

    pub fn with_known_optimum(mut self, value: f64) -> Self {
        self.known_optimum = Some(value);
        self
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    pub fn is_constrained(&self) -> bool {
        self.constraints.is_some()
    }
}

/// f1: `sum x_i^2`.
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// f2: `sum_{i=1}^{D-1} 100 (x_{i+1} - x_i^2)^2 + (x_i - 1)^2`.
///
/// Only meaningful for `D >= 2`; a 1-vector yields the empty sum. Use
/// [`ProblemKind::spec`] to get the dimension check.
pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = w[0] - 1.0;
            100.0 * a * a + b * b
        })
        .sum()
}

/// f3 with the `cos(x_i / sqrt(i + 1))` product term (i counted from 1).
pub fn griewank(x: &[f64]) -> f64 {
    griewank_with_offset(x, 1.0)
}

/// The common Griewank form with `cos(x_i / sqrt(i))`.
pub fn griewank_classic(x: &[f64]) -> f64 {
    griewank_with_offset(x, 0.0)
}

fn griewank_with_offset(x: &[f64], offset: f64) -> f64 {
    let sum: f64 = x.iter().map(|v| v * v).sum();
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(k, v)| (v / ((k + 1) as f64 + offset).sqrt()).cos())
        .product();
    sum / 4000.0 - prod + 1.0
}

/// f4: `sum x_i^2 - 10 cos(2 pi x_i) + 10`.
pub fn rastrigin(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
        .sum()
}

/// `g(x) = -sum x_j`, i.e. the linear constraint `sum x_j >= 0`.
pub fn nonnegative_sum_constraint(x: &[f64]) -> f64 {
    -x.iter().sum::<f64>()
}

/// Sphere restricted to `sum x_j >= 0`, initialized in `[-10, 10]^D`; the
/// setting of the time-to-region experiment.
pub fn constrained_sphere_spec(dimension: usize) -> Result<ProblemSpec> {
    if dimension < 1 {
        return Err(Error::InvalidInput(
            "constrained sphere: dimension must be ≥ 1".into(),
        ));
    }
    let lower = vec![-10.0; dimension];
    let upper = vec![10.0; dimension];
    let cs = ConstraintSet::new(
        vec![nonnegative_sum_constraint],
        lower.clone(),
        upper.clone(),
    )?;
    Ok(
        ProblemSpec::new("constrained-sphere", lower, upper, sphere)?
            .with_constraints(cs)?
            .with_known_optimum(0.0),
    )
}

/// CLI-facing problem selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Sphere,
    Rosenbrock,
    Griewank,
    GriewankClassic,
    Rastrigin,
    ConstrainedSphere,
    Truss,
    Spring,
    Vessel,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 9] = [
        ProblemKind::Sphere,
        ProblemKind::Rosenbrock,
        ProblemKind::Griewank,
        ProblemKind::GriewankClassic,
        ProblemKind::Rastrigin,
        ProblemKind::ConstrainedSphere,
        ProblemKind::Truss,
        ProblemKind::Spring,
        ProblemKind::Vessel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Sphere => "sphere",
            ProblemKind::Rosenbrock => "rosenbrock",
            ProblemKind::Griewank => "griewank",
            ProblemKind::GriewankClassic => "griewank-classic",
            ProblemKind::Rastrigin => "rastrigin",
            ProblemKind::ConstrainedSphere => "constrained-sphere",
            ProblemKind::Truss => "truss",
            ProblemKind::Spring => "spring",
            ProblemKind::Vessel => "vessel",
        }
    }

    /// Dimension of the engineering problems; `None` for scalable benchmarks.
    pub fn fixed_dimension(self) -> Option<usize> {
        match self {
            ProblemKind::Truss => Some(2),
            ProblemKind::Spring => Some(3),
            ProblemKind::Vessel => Some(4),
            _ => None,
        }
    }

    pub fn is_engineering(self) -> bool {
        self.fixed_dimension().is_some()
    }

    pub fn spec(self, dimension: usize) -> Result<ProblemSpec> {
        if let Some(d) = self.fixed_dimension() {
            if d != dimension {
                return Err(Error::InvalidInput(format!(
                    "{} has fixed dimension {d}, got {dimension}",
                    self.name()
                )));
            }
        }
        if dimension < 1 {
            return Err(Error::InvalidInput(format!(
                "{}: dimension must be ≥ 1",
                self.name()
            )));
        }
        let spec = match self {
            ProblemKind::Sphere => {
                ProblemSpec::uniform_box(self.name(), dimension, -100.0, 100.0, sphere)?
            }
            ProblemKind::Rosenbrock => {
                if dimension < 2 {
                    return Err(Error::InvalidInput(
                        "rosenbrock: dimension must be ≥ 2".into(),
                    ));
                }
                ProblemSpec::uniform_box(self.name(), dimension, -5.12, 5.12, rosenbrock)?
            }
            ProblemKind::Griewank => {
                ProblemSpec::uniform_box(self.name(), dimension, -600.0, 600.0, griewank)?
            }
            ProblemKind::GriewankClassic => {
                ProblemSpec::uniform_box(self.name(), dimension, -600.0, 600.0, griewank_classic)?
            }
            ProblemKind::Rastrigin => {
                ProblemSpec::uniform_box(self.name(), dimension, -5.12, 5.12, rastrigin)?
            }
            ProblemKind::ConstrainedSphere => return constrained_sphere_spec(dimension),
            ProblemKind::Truss => return Ok(constrained::three_bar_truss_spec()),
            ProblemKind::Spring => return Ok(constrained::tension_spring_spec()),
            ProblemKind::Vessel => return Ok(constrained::pressure_vessel_spec()),
        };
        Ok(spec.with_known_optimum(0.0))
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                let names: Vec<_> = ProblemKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidConfig(format!(
                    "unknown problem '{s}' (expected one of: {})",
                    names.join(", ")
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_values() {
        assert_eq!(sphere(&[0.0; 7]), 0.0);
        assert_eq!(sphere(&[1.0, 2.0, 3.0]), 14.0);
        assert_eq!(sphere(&[-100.0; 10]), 100_000.0);
    }

    #[test]
    fn rosenbrock_values() {
        assert_eq!(rosenbrock(&[1.0; 6]), 0.0);
        assert_eq!(rosenbrock(&[0.0, 0.0]), 1.0);
        assert_eq!(rosenbrock(&[-1.0, 1.0]), 4.0);
        assert!(ProblemKind::Rosenbrock.spec(1).is_err());
    }

    #[test]
    fn griewank_values() {
        assert_eq!(griewank(&[0.0; 5]), 0.0);
        // cos(x / sqrt(2)) = cos(2 pi) for x = 2 pi sqrt(2)
        let x = 2.0 * PI * 2f64.sqrt();
        let expected = 8.0 * PI * PI / 4000.0;
        assert!((griewank(&[x]) - expected).abs() < 1e-12);
    }

    #[test]
    fn griewank_at_600_600_matches_hand_evaluation() {
        // 720000/4000 - cos(600/sqrt 2) cos(600/sqrt 3) + 1
        let expected = 180.0 - (600.0 / 2f64.sqrt()).cos() * (600.0 / 3f64.sqrt()).cos() + 1.0;
        assert_eq!(griewank(&[600.0, 600.0]), expected);
        assert!((griewank(&[600.0, 600.0]) - 181.0).abs() <= 1.0);
    }

    #[test]
    fn griewank_classic_differs_but_shares_optimum() {
        assert_eq!(griewank_classic(&[0.0; 4]), 0.0);
        assert_ne!(griewank(&[1.0, 2.0]), griewank_classic(&[1.0, 2.0]));
    }

    #[test]
    fn rastrigin_values() {
        assert_eq!(rastrigin(&[0.0; 3]), 0.0);
        assert!((rastrigin(&[1.0, 1.0]) - 2.0).abs() < 1e-12);
        assert!((rastrigin(&[0.5]) - 20.25).abs() < 1e-12);
    }

    #[test]
    fn constrained_sphere_cases() {
        let spec = constrained_sphere_spec(4).unwrap();
        let cs = spec.constraints.as_ref().unwrap();
        assert_eq!(spec.evaluate(&[1.0; 4]), 4.0);
        assert_eq!(cs.violation_sum(&[1.0; 4]), 0.0);
        assert_eq!(cs.values(&[-1.0; 4]), vec![4.0]);
        assert_eq!(spec.evaluate(&[0.0; 4]), 0.0);
        assert_eq!(cs.values(&[0.0; 4]), vec![0.0]);
        assert_eq!(cs.violation_sum(&[0.0; 4]), 0.0);
        assert_eq!(spec.lower, vec![-10.0; 4]);
        assert!(constrained_sphere_spec(0).is_err());
    }

    #[test]
    fn problem_names_round_trip() {
        for k in ProblemKind::ALL {
            assert_eq!(k.name().parse::<ProblemKind>().unwrap(), k);
        }
        assert!("ackley".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn spec_rejects_bad_boxes() {
        assert!(ProblemSpec::new("x", vec![1.0], vec![1.0], sphere).is_err());
        assert!(ProblemSpec::new("x", vec![], vec![], sphere).is_err());
        assert!(ProblemKind::Truss.spec(3).is_err());
    }
}
