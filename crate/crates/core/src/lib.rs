//! Heavy tails of Lipschitz stochastic recursions `X = Ψ(X)` driven by
//! i.i.d. copies of `(A, B, C)`.
//!
//! * [`measure`]: atomic and parametric drivers
//! * [`cramer`]: the exponent `α` with `E A^α = 1`
//! * [`engine`]: reproducible parallel simulation
//! * [`tailstats`]: Hill, empirical tails, KS
//! * [`criteria`]: closed-form positivity tests for the tail constant
//! * [`experiment`]: all of the above on one measure, with a report

pub mod cramer;
pub mod criteria;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod io;
pub mod measure;
pub mod rng;
pub mod tailstats;
pub mod verify;

pub use cramer::{solve_alpha, CramerRoot, MomentFunction};
pub use criteria::{full_verdict, CriteriaVerdict, LetacConstants, SupportClass, TailClaim};
pub use engine::{MapFamily, SampleBatch, SimConfig};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport};
pub use measure::{Atom, AtomicMeasure, Driver, ParametricDriver};
pub use tailstats::{TailOptions, TailReport, TailSide};
