//! Bandit policies behind a round-based interface: propose seeds, receive
//! the cascade's edge-level feedback, update.

mod counting;
mod linear;
mod params;
mod snapshot;

use std::path::Path;

use crate::diffusion::CascadeFeedback;
use crate::environment::LinearActivationModel;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::oracle::OracleSpec;
use crate::rng::StreamRng;

pub use counting::{cucb_index, Cucb, EdgeCounters, EpsGreedy, UNOBSERVED_PRIOR};
pub use linear::LinUcb;
pub use params::{stochastic_radius, CwParams, ProblemSize, ResolvedParams, Setting};
pub use snapshot::SNAPSHOT_HEADER;

pub trait Learner: Send {
    fn name(&self) -> &str;

    /// Seed set for the coming round, built from the current estimates.
    fn propose(
        &mut self,
        g: &Graph,
        k: usize,
        oracle: &OracleSpec,
        rng: &mut StreamRng,
    ) -> Result<Vec<NodeId>>;

    /// Incorporates the feedback of round `t` (rounds start at 1).
    fn update(&mut self, g: &Graph, feedback: &CascadeFeedback, t: usize) -> Result<()>;

    /// Current per-edge probability estimates handed to the oracle.
    fn p_hat(&self) -> &[f64];

    fn save_state(&self, path: &Path) -> Result<()>;
}

/// Plays the same seed set every round and ignores feedback. Used to replay
/// the comparator as a zero-regret sanity policy.
#[derive(Debug, Clone)]
pub struct FixedSeeds {
    seeds: Vec<NodeId>,
    p_hat: Vec<f64>,
}

impl FixedSeeds {
    pub fn new(seeds: Vec<NodeId>, m: usize) -> Self {
        FixedSeeds {
            seeds,
            p_hat: vec![0.0; m],
        }
    }
}

impl Learner for FixedSeeds {
    fn name(&self) -> &str {
        "replay_comparator"
    }

    fn propose(
        &mut self,
        _g: &Graph,
        _k: usize,
        _oracle: &OracleSpec,
        _rng: &mut StreamRng,
    ) -> Result<Vec<NodeId>> {
        Ok(self.seeds.clone())
    }

    fn update(&mut self, _g: &Graph, _feedback: &CascadeFeedback, _t: usize) -> Result<()> {
        Ok(())
    }

    fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    fn save_state(&self, _path: &Path) -> Result<()> {
        Err(Error::Parameter(
            "the replay policy has no state to save".into(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmId {
    CwImLinUcb,
    ImLinUcb,
    Cucb,
    EpsGreedy,
    ReplayComparator,
}

impl AlgorithmId {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmId::CwImLinUcb => "cw_imlinucb",
            AlgorithmId::ImLinUcb => "imlinucb",
            AlgorithmId::Cucb => "cucb",
            AlgorithmId::EpsGreedy => "eps_greedy",
            AlgorithmId::ReplayComparator => "replay_comparator",
        }
    }
}

impl std::str::FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cw_imlinucb" => Ok(AlgorithmId::CwImLinUcb),
            "imlinucb" => Ok(AlgorithmId::ImLinUcb),
            "cucb" => Ok(AlgorithmId::Cucb),
            "eps_greedy" => Ok(AlgorithmId::EpsGreedy),
            "replay_comparator" => Ok(AlgorithmId::ReplayComparator),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl std::fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything needed to instantiate a policy for one run.
pub struct LearnerContext<'a> {
    pub model: &'a LinearActivationModel,
    pub size: ProblemSize,
    pub params: CwParams,
    pub epsilon: f64,
    pub comparator: &'a [NodeId],
}

pub fn build_learner(id: AlgorithmId, ctx: &LearnerContext<'_>) -> Result<Box<dyn Learner>> {
    let m = ctx.model.edge_count();
    Ok(match id {
        AlgorithmId::CwImLinUcb => Box::new(LinUcb::new(
            id.as_str(),
            ctx.model,
            ctx.params.resolve_weighted(&ctx.size),
        )),
        AlgorithmId::ImLinUcb => Box::new(LinUcb::new(
            id.as_str(),
            ctx.model,
            ctx.params.resolve_unweighted(&ctx.size),
        )),
        AlgorithmId::Cucb => Box::new(Cucb::new(m)),
        AlgorithmId::EpsGreedy => Box::new(EpsGreedy::new(m, ctx.epsilon)?),
        AlgorithmId::ReplayComparator => Box::new(FixedSeeds::new(ctx.comparator.to_vec(), m)),
    })
}

/// Restores any saved learner. Linear learners take their features from
/// `model`.
pub fn load_learner(path: &Path, model: &LinearActivationModel) -> Result<Box<dyn Learner>> {
    Ok(match snapshot::Reader::kind(path)?.as_str() {
        "linucb" => Box::new(LinUcb::restore(path, model)?),
        "cucb" => Box::new(Cucb::restore(path)?),
        "eps_greedy" => Box::new(EpsGreedy::restore(path)?),
        other => return Err(Error::Format(format!("unknown learner kind {other:?}"))),
    })
}
