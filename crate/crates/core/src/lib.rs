//! Online influence maximization under adversarial corruption.
//!
//! The crate is split along the pieces of an experiment:
//!
//! - [`graph`]: directed graphs, generators, edge-list ingestion and the
//!   topology constants (`E*`, `E^c`, reachability) that size the learner.
//! - [`environment`]: the hidden linear activation model and corruption
//!   schedules that produce per-round edge probabilities.
//! - [`diffusion`]: independent-cascade simulation with edge semi-bandit
//!   feedback, plus Monte-Carlo and exact spread estimators.
//! - [`oracle`]: seed-selection oracles (DegreeDiscount, MC greedy).
//! - [`linalg`]: the small SPD state behind weighted ridge regression.
//! - [`learner`]: CW-IMLinUCB and the IMLinUCB / CUCB / ε-greedy baselines.
//! - [`harness`]: experiment configs, the regret loop, CSV output and
//!   aggregation.

pub mod diffusion;
pub mod environment;
pub mod error;
pub mod graph;
pub mod harness;
pub mod learner;
pub mod linalg;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{EdgeId, Graph, GraphStats, NodeId};
