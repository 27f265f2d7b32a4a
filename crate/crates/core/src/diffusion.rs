//! Independent-cascade diffusion with edge semi-bandit feedback.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::rng;

/// Largest edge count `exact_spread_small` will enumerate.
pub const EXACT_EDGE_LIMIT: usize = 20;

/// Outcome of one cascade as seen by the learner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeFeedback {
    /// Activated nodes in activation order (seeds first).
    pub activated: Vec<NodeId>,
    active: Vec<bool>,
    /// Observed edges, ascending by id, with their coin outcomes.
    pub observed: Vec<(EdgeId, bool)>,
}

impl CascadeFeedback {
    /// Assembles feedback from parts; used when replaying recorded rounds.
    pub fn from_parts(n: usize, activated: Vec<NodeId>, mut observed: Vec<(EdgeId, bool)>) -> Self {
        let mut active = vec![false; n];
        for &u in &activated {
            active[u] = true;
        }
        observed.sort_unstable_by_key(|&(e, _)| e);
        CascadeFeedback {
            activated,
            active,
            observed,
        }
    }

    pub fn is_active(&self, u: NodeId) -> bool {
        self.active.get(u).copied().unwrap_or(false)
    }

    pub fn activated_count(&self) -> usize {
        self.activated.len()
    }

    pub fn outcome(&self, e: EdgeId) -> Option<bool> {
        self.observed
            .binary_search_by_key(&e, |&(id, _)| id)
            .ok()
            .map(|i| self.observed[i].1)
    }
}

fn check_seeds(g: &Graph, seeds: &[NodeId]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::Parameter("seed set is empty".into()));
    }
    for &s in seeds {
        if s >= g.node_count() {
            return Err(Error::NodeOutOfRange {
                node: s,
                n: g.node_count(),
            });
        }
    }
    Ok(())
}

fn check_probs(g: &Graph, probs: &[f64]) -> Result<()> {
    if probs.len() != g.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: g.edge_count(),
            actual: probs.len(),
        });
    }
    Ok(())
}

/// Runs one cascade, asking `coin(e, p_e)` whether edge `e` fires.
///
/// Nodes are expanded FIFO; on first activation every out-edge of the node
/// is tried exactly once, in ascending edge-id order.
pub fn simulate_cascade_with<F>(
    g: &Graph,
    probs: &[f64],
    seeds: &[NodeId],
    mut coin: F,
) -> Result<CascadeFeedback>
where
    F: FnMut(EdgeId, f64) -> bool,
{
    check_seeds(g, seeds)?;
    check_probs(g, probs)?;
    let mut active = vec![false; g.node_count()];
    let mut activated = Vec::new();
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !active[s] {
            active[s] = true;
            activated.push(s);
            queue.push_back(s);
        }
    }
    let mut observed = Vec::new();
    while let Some(u) = queue.pop_front() {
        for &e in g.out_edges(u) {
            let fired = coin(e, probs[e]);
            observed.push((e, fired));
            let v = g.head(e);
            if fired && !active[v] {
                active[v] = true;
                activated.push(v);
                queue.push_back(v);
            }
        }
    }
    observed.sort_unstable_by_key(|&(e, _)| e);
    Ok(CascadeFeedback {
        activated,
        active,
        observed,
    })
}

/// One cascade drawing a uniform per tried edge from `rng`.
pub fn simulate_cascade<R: Rng + ?Sized>(
    g: &Graph,
    probs: &[f64],
    seeds: &[NodeId],
    rng: &mut R,
) -> Result<CascadeFeedback> {
    simulate_cascade_with(g, probs, seeds, |_, p| rng.gen::<f64>() < p)
}

/// One cascade against a pre-drawn uniform per edge (a live-edge world):
/// edge `e` fires iff `uniforms[e] < p_e`. Cascades from different seed sets
/// that share `uniforms` are coupled.
pub fn simulate_cascade_coupled(
    g: &Graph,
    probs: &[f64],
    seeds: &[NodeId],
    uniforms: &[f64],
) -> Result<CascadeFeedback> {
    if uniforms.len() != g.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: g.edge_count(),
            actual: uniforms.len(),
        });
    }
    simulate_cascade_with(g, probs, seeds, |e, p| uniforms[e] < p)
}

/// Rebuilds the activated set from the seeds and the recorded edge outcomes.
pub fn replay_activation(g: &Graph, seeds: &[NodeId], feedback: &CascadeFeedback) -> Vec<bool> {
    let mut active = vec![false; g.node_count()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !active[s] {
            active[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &e in g.out_edges(u) {
            if feedback.outcome(e) == Some(true) {
                let v = g.head(e);
                if !active[v] {
                    active[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    active
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadEstimate {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator; 0 for one sample).
    pub std_dev: f64,
    pub samples: usize,
    /// Per-cascade activated counts, when requested.
    pub values: Option<Vec<usize>>,
}

impl SpreadEstimate {
    pub fn from_values(values: Vec<usize>, keep: bool) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<usize>() as f64 / n as f64;
        let var = if n > 1 {
            values
                .iter()
                .map(|&v| (v as f64 - mean).powi(2))
                .sum::<f64>()
                / (n - 1) as f64
        } else {
            0.0
        };
        SpreadEstimate {
            mean,
            std_dev: var.sqrt(),
            samples: n,
            values: keep.then_some(values),
        }
    }

    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.samples as f64).sqrt()
    }
}

/// Monte-Carlo estimate of the expected activated count.
pub fn estimate_spread<R: Rng + ?Sized>(
    g: &Graph,
    probs: &[f64],
    seeds: &[NodeId],
    samples: usize,
    rng: &mut R,
) -> Result<SpreadEstimate> {
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        values.push(simulate_cascade(g, probs, seeds, rng)?.activated_count());
    }
    Ok(SpreadEstimate::from_values(values, false))
}

const CHUNK: usize = 1024;

/// Parallel Monte-Carlo estimate. Samples are cut into fixed-size chunks,
/// chunk `i` drawing from substream `(seed, i)`, so the result does not
/// depend on the worker count. Per-sample values are kept in chunk order.
pub fn estimate_spread_par(
    g: &Graph,
    probs: &[f64],
    seeds: &[NodeId],
    samples: usize,
    seed: u64,
) -> Result<SpreadEstimate> {
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    check_seeds(g, seeds)?;
    check_probs(g, probs)?;
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<usize>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::substream(&[seed, c as u64]);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .map(|_| {
                    simulate_cascade(g, probs, seeds, &mut rng)
                        .map(|fb| fb.activated_count())
                        .unwrap_or(0)
                })
                .collect()
        })
        .collect();
    Ok(SpreadEstimate::from_values(
        per_chunk.into_iter().flatten().collect(),
        true,
    ))
}

/// Exact expected spread by enumerating all `2^m` live-edge worlds.
pub fn exact_spread_small(g: &Graph, probs: &[f64], seeds: &[NodeId]) -> Result<f64> {
    check_seeds(g, seeds)?;
    check_probs(g, probs)?;
    let m = g.edge_count();
    if m > EXACT_EDGE_LIMIT {
        return Err(Error::TooManyEdges {
            m,
            limit: EXACT_EDGE_LIMIT,
        });
    }
    let n = g.node_count();
    let mut total = 0.0;
    let mut active = vec![false; n];
    let mut stack = Vec::with_capacity(n);
    for world in 0u32..(1u32 << m) {
        let mut weight = 1.0;
        for (e, &p) in probs.iter().enumerate() {
            weight *= if world >> e & 1 == 1 { p } else { 1.0 - p };
        }
        if weight == 0.0 {
            continue;
        }
        active.iter_mut().for_each(|a| *a = false);
        let mut count = 0usize;
        for &s in seeds {
            if !active[s] {
                active[s] = true;
                count += 1;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for &e in g.out_edges(u) {
                let v = g.head(e);
                if world >> e & 1 == 1 && !active[v] {
                    active[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        total += weight * count as f64;
    }
    Ok(total)
}
