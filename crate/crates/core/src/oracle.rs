//! Seed-selection oracles: `(graph, K, edge probabilities) -> K seeds`.

use crate::diffusion::estimate_spread_par;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    DegreeDiscount,
    GreedyMc,
}

impl std::str::FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree_discount" => Ok(OracleKind::DegreeDiscount),
            "greedy_mc" => Ok(OracleKind::GreedyMc),
            other => Err(Error::Config(format!("unknown oracle {other:?}"))),
        }
    }
}

impl std::fmt::Display for OracleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OracleKind::DegreeDiscount => "degree_discount",
            OracleKind::GreedyMc => "greedy_mc",
        })
    }
}

/// An oracle plus its declared `(α, γ)` approximation guarantee. The
/// guarantee is metadata: it only enters the regret scaling `1/(αγ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub kind: OracleKind,
    pub alpha: f64,
    pub gamma: f64,
    pub mc_samples: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            kind: OracleKind::DegreeDiscount,
            alpha: 1.0,
            gamma: 1.0,
            mc_samples: 1000,
        }
    }
}

impl OracleSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("gamma", self.gamma)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("oracle {name} = {v} outside (0, 1]")));
            }
        }
        if self.kind == OracleKind::GreedyMc && self.mc_samples < 100 {
            return Err(Error::Config("greedy_mc needs at least 100 samples".into()));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        self.alpha * self.gamma
    }

    /// Runs the oracle. `seed` feeds the Monte-Carlo oracle only; seed sets
    /// come back sorted ascending.
    pub fn select(&self, g: &Graph, k: usize, probs: &[f64], seed: u64) -> Result<Vec<NodeId>> {
        let mut seeds = match self.kind {
            OracleKind::DegreeDiscount => degree_discount(g, k, probs)?,
            OracleKind::GreedyMc => greedy_mc(g, k, probs, self.mc_samples, seed)?,
        };
        seeds.sort_unstable();
        Ok(seeds)
    }
}

fn check_budget(g: &Graph, k: usize, probs: &[f64]) -> Result<()> {
    if k == 0 || k > g.node_count() {
        return Err(Error::Parameter(format!(
            "seed budget {k} outside 1..={}",
            g.node_count()
        )));
    }
    if probs.len() != g.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: g.edge_count(),
            actual: probs.len(),
        });
    }
    Ok(())
}

/// Index of the largest score, the smallest id winning ties.
fn argmax(scores: &[f64], taken: &[bool]) -> Option<NodeId> {
    let mut best: Option<NodeId> = None;
    for (u, &s) in scores.iter().enumerate() {
        if taken[u] {
            continue;
        }
        match best {
            Some(b) if scores[b] >= s => {}
            _ => best = Some(u),
        }
    }
    best
}

/// DegreeDiscount over heterogeneous edge probabilities.
///
/// Weighted out-degree `d_v = Σ_{e ∈ out(v)} p_e`. After a node is picked,
/// each of its out-neighbours `v` is rescored as
/// `d_v − 2 t_v p̄_v − (d_v − t_v p̄_v) t_v p̄_v`, where `t_v` counts selected
/// in-neighbours and `p̄_v` is the mean probability on the edges from them.
/// With a single shared probability `p` this is `p` times the classic
/// `deg − 2t − (deg − t) t p` discount, so the selection is unchanged.
pub fn degree_discount(g: &Graph, k: usize, probs: &[f64]) -> Result<Vec<NodeId>> {
    check_budget(g, k, probs)?;
    let n = g.node_count();
    let degree: Vec<f64> = (0..n)
        .map(|u| g.out_edges(u).iter().map(|&e| probs[e]).sum())
        .collect();
    let mut score = degree.clone();
    let mut selected_in = vec![0usize; n];
    let mut selected_prob_sum = vec![0.0f64; n];
    let mut taken = vec![false; n];
    let mut seeds = Vec::with_capacity(k);

    for _ in 0..k {
        let s = argmax(&score, &taken).expect("k <= n leaves a candidate");
        taken[s] = true;
        seeds.push(s);
        for &e in g.out_edges(s) {
            let v = g.head(e);
            if taken[v] {
                continue;
            }
            selected_in[v] += 1;
            selected_prob_sum[v] += probs[e];
            let t = selected_in[v] as f64;
            let p_bar = selected_prob_sum[v] / t;
            let d = degree[v];
            score[v] = d - 2.0 * t * p_bar - (d - t * p_bar) * t * p_bar;
        }
    }
    Ok(seeds)
}

/// Greedy marginal-gain maximization with Monte-Carlo spread estimates.
///
/// Every candidate in an iteration is scored with the same substream, so
/// candidate comparisons share randomness. No lazy evaluation.
pub fn greedy_mc(
    g: &Graph,
    k: usize,
    probs: &[f64],
    mc_samples: usize,
    seed: u64,
) -> Result<Vec<NodeId>> {
    check_budget(g, k, probs)?;
    if mc_samples < 100 {
        return Err(Error::Parameter(
            "greedy_mc needs at least 100 samples".into(),
        ));
    }
    let n = g.node_count();
    let mut taken = vec![false; n];
    let mut seeds: Vec<NodeId> = Vec::with_capacity(k);
    for round in 0..k {
        let stream = rng::derive_seed(&[rng::tag::ORACLE, seed, round as u64]);
        let mut scores = vec![f64::NEG_INFINITY; n];
        for v in (0..n).filter(|&v| !taken[v]) {
            let mut trial = seeds.clone();
            trial.push(v);
            scores[v] = estimate_spread_par(g, probs, &trial, mc_samples, stream)?.mean;
        }
        let best = argmax(&scores, &taken).expect("k <= n leaves a candidate");
        taken[best] = true;
        seeds.push(best);
    }
    Ok(seeds)
}
