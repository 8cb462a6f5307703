//! Quantum-behaved particle swarm optimization with Cauchy mutation and
//! natural selection (QPSO-CD), baseline PSO/QPSO variants, benchmark and
//! engineering design problems, and an experiment harness for repeated
//! seeded runs.
//!
//! ```
//! use qpsocd::{run, Algorithm, AlgorithmConfig, ProblemKind};
//!
//! let problem = ProblemKind::Sphere.spec(5).unwrap();
//! let cfg = AlgorithmConfig::new(Algorithm::QpsoCd).with_iterations(200).with_seed(1);
//! let record = run(&problem, &cfg).unwrap();
//! assert!(record.final_value < 1e-3);
//! ```

// `!(a < b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constrained;
pub mod error;
pub mod experiments;
pub mod optimizers;
pub mod plot;
pub mod problems;
pub mod rng;

pub use constrained::{ConstraintSet, PenaltyKind, PenaltySchedule};
pub use error::{Error, Result};
pub use experiments::{pearson, StatsSummary};
pub use optimizers::{run, run_with_rng, Algorithm, AlgorithmConfig, RunRecord};
pub use problems::{ProblemKind, ProblemSpec};
pub use rng::RngStream;
