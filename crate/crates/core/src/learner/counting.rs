//! Per-edge counting baselines: CUCB and ε-greedy.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::diffusion::CascadeFeedback;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::oracle::OracleSpec;
use crate::rng::StreamRng;

use super::snapshot::{Reader, SNAPSHOT_HEADER};
use super::Learner;

/// Prior success probability ε-greedy assumes for never-observed edges.
pub const UNOBSERVED_PRIOR: f64 = 0.5;

/// Observation and success counts per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeCounters {
    pub observations: Vec<u64>,
    pub successes: Vec<u64>,
}

impl EdgeCounters {
    pub fn new(m: usize) -> Self {
        EdgeCounters {
            observations: vec![0; m],
            successes: vec![0; m],
        }
    }

    pub fn record(&mut self, feedback: &CascadeFeedback) -> Result<()> {
        let m = self.observations.len();
        for &(e, y) in &feedback.observed {
            if e >= m {
                return Err(Error::UnknownEdge { edge: e, m });
            }
            self.observations[e] += 1;
            self.successes[e] += y as u64;
        }
        Ok(())
    }

    pub fn mean(&self, e: usize) -> Option<f64> {
        let n = self.observations[e];
        (n > 0).then(|| self.successes[e] as f64 / n as f64)
    }
}

/// `clamp(S/N + √(3 ln t / (2N)))`, or 1 for an edge never observed.
pub fn cucb_index(successes: u64, observations: u64, t: f64) -> f64 {
    if observations == 0 {
        return 1.0;
    }
    let n = observations as f64;
    let bonus = (3.0 * t.ln() / (2.0 * n)).max(0.0).sqrt();
    (successes as f64 / n + bonus).clamp(0.0, 1.0)
}

#[derive(Debug, Clone)]
pub struct Cucb {
    counters: EdgeCounters,
    p_hat: Vec<f64>,
}

impl Cucb {
    pub fn new(m: usize) -> Self {
        Cucb {
            counters: EdgeCounters::new(m),
            p_hat: vec![1.0; m],
        }
    }

    pub fn counters(&self) -> &EdgeCounters {
        &self.counters
    }

    pub fn restore(path: &Path) -> Result<Self> {
        let mut r = Reader::open(path)?;
        r.expect_kind("cucb")?;
        let (counters, p_hat) = read_counters(&mut r)?;
        Ok(Cucb { counters, p_hat })
    }
}

impl Learner for Cucb {
    fn name(&self) -> &str {
        "cucb"
    }

    fn propose(
        &mut self,
        g: &Graph,
        k: usize,
        oracle: &OracleSpec,
        rng: &mut StreamRng,
    ) -> Result<Vec<NodeId>> {
        oracle.select(g, k, &self.p_hat, rng.gen())
    }

    fn update(&mut self, _g: &Graph, feedback: &CascadeFeedback, t: usize) -> Result<()> {
        if t == 0 {
            return Err(Error::Parameter("rounds start at 1".into()));
        }
        self.counters.record(feedback)?;
        for e in 0..self.p_hat.len() {
            self.p_hat[e] = cucb_index(
                self.counters.successes[e],
                self.counters.observations[e],
                t as f64,
            );
        }
        Ok(())
    }

    fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    fn save_state(&self, path: &Path) -> Result<()> {
        write_counters(path, "cucb", None, &self.counters, &self.p_hat)
    }
}

#[derive(Debug, Clone)]
pub struct EpsGreedy {
    epsilon: f64,
    counters: EdgeCounters,
    means: Vec<f64>,
}

impl EpsGreedy {
    pub fn new(m: usize, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Parameter(format!(
                "epsilon {epsilon} outside [0, 1]"
            )));
        }
        Ok(EpsGreedy {
            epsilon,
            counters: EdgeCounters::new(m),
            means: vec![UNOBSERVED_PRIOR; m],
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn counters(&self) -> &EdgeCounters {
        &self.counters
    }

    pub fn restore(path: &Path) -> Result<Self> {
        let mut r = Reader::open(path)?;
        r.expect_kind("eps_greedy")?;
        let epsilon = r.float("epsilon")?;
        let (counters, means) = read_counters(&mut r)?;
        Ok(EpsGreedy {
            epsilon,
            counters,
            means,
        })
    }
}

impl Learner for EpsGreedy {
    fn name(&self) -> &str {
        "eps_greedy"
    }

    fn propose(
        &mut self,
        g: &Graph,
        k: usize,
        oracle: &OracleSpec,
        rng: &mut StreamRng,
    ) -> Result<Vec<NodeId>> {
        if self.epsilon > 0.0 && rng.gen::<f64>() < self.epsilon {
            let n = g.node_count();
            if k == 0 || k > n {
                return Err(Error::Parameter(format!("seed budget {k} outside 1..={n}")));
            }
            let mut seeds = index::sample(rng, n, k).into_vec();
            seeds.sort_unstable();
            return Ok(seeds);
        }
        oracle.select(g, k, &self.means, rng.gen())
    }

    fn update(&mut self, _g: &Graph, feedback: &CascadeFeedback, _t: usize) -> Result<()> {
        self.counters.record(feedback)?;
        for &(e, _) in &feedback.observed {
            self.means[e] = self.counters.mean(e).unwrap_or(UNOBSERVED_PRIOR);
        }
        Ok(())
    }

    fn p_hat(&self) -> &[f64] {
        &self.means
    }

    fn save_state(&self, path: &Path) -> Result<()> {
        write_counters(
            path,
            "eps_greedy",
            Some(self.epsilon),
            &self.counters,
            &self.means,
        )
    }
}

fn write_counters(
    path: &Path,
    kind: &str,
    epsilon: Option<f64>,
    counters: &EdgeCounters,
    p_hat: &[f64],
) -> Result<()> {
    let join_u = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    let _ = writeln!(out, "{SNAPSHOT_HEADER}");
    let _ = writeln!(out, "kind {kind}");
    if let Some(eps) = epsilon {
        let _ = writeln!(out, "epsilon {eps}");
    }
    let _ = writeln!(out, "edges {}", p_hat.len());
    let _ = writeln!(out, "observations {}", join_u(&counters.observations));
    let _ = writeln!(out, "successes {}", join_u(&counters.successes));
    let _ = writeln!(
        out,
        "p_hat {}",
        p_hat
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    );
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn read_counters(r: &mut Reader) -> Result<(EdgeCounters, Vec<f64>)> {
    let m = r.usize("edges")?;
    let to_u = |v: Vec<f64>| v.into_iter().map(|x| x as u64).collect::<Vec<_>>();
    let observations = to_u(r.floats("observations", m)?);
    let successes = to_u(r.floats("successes", m)?);
    if successes.iter().zip(&observations).any(|(s, n)| s > n) {
        return Err(Error::Format(
            "success count exceeds observation count".into(),
        ));
    }
    let p_hat = r.floats("p_hat", m)?;
    Ok((
        EdgeCounters {
            observations,
            successes,
        },
        p_hat,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::collections::HashMap;

    fn fb(n: usize, observed: Vec<(usize, bool)>) -> CascadeFeedback {
        CascadeFeedback::from_parts(n, vec![0], observed)
    }

    #[test]
    fn cucb_index_values() {
        assert_eq!(cucb_index(0, 0, 10.0), 1.0);
        // N = 100, S = 30, ln t = 2: 0.3 + √(6/200).
        let got = cucb_index(30, 100, std::f64::consts::E.powi(2));
        assert!((got - (0.3 + 0.03f64.sqrt())).abs() < 1e-12);
        assert!((got - 0.4732).abs() < 1e-4);
        assert_eq!(cucb_index(500, 500, 1000.0), 1.0);
    }

    #[test]
    fn cucb_updates_observed_edges_only() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let mut c = Cucb::new(2);
        c.update(&g, &fb(3, vec![(0, false)]), 1).unwrap();
        // ln 1 = 0: no bonus on round 1.
        assert_eq!(c.p_hat(), &[0.0, 1.0]);
        c.update(&g, &fb(3, vec![(0, true)]), 2).unwrap();
        let want = 0.5 + (3.0 * 2f64.ln() / 4.0).sqrt();
        assert!((c.p_hat()[0] - want.min(1.0)).abs() < 1e-15);
        assert_eq!(c.p_hat()[1], 1.0);
        assert!(c.update(&g, &fb(3, vec![(5, true)]), 3).is_err());
    }

    #[test]
    fn eps_greedy_means() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let mut l = EpsGreedy::new(2, 0.1).unwrap();
        assert_eq!(l.p_hat(), &[0.5, 0.5]);
        for i in 0..10 {
            l.update(&g, &fb(3, vec![(0, i < 7)]), i + 1).unwrap();
        }
        assert!((l.p_hat()[0] - 0.7).abs() < 1e-15);
        assert_eq!(l.p_hat()[1], 0.5);
        assert!(EpsGreedy::new(2, 1.5).is_err());
    }

    #[test]
    fn zero_epsilon_is_deterministic() {
        let g = crate::graph::gen_erdos_renyi(8, 0.4, 3).unwrap();
        let oracle = OracleSpec::default();
        let run = |seed| {
            let mut l = EpsGreedy::new(g.edge_count(), 0.0).unwrap();
            let mut rng = StreamRng::seed_from_u64(seed);
            let mut picks = Vec::new();
            for t in 1..=20 {
                let s = l.propose(&g, 2, &oracle, &mut rng).unwrap();
                let obs = g.out_edges(s[0]).iter().map(|&e| (e, e % 2 == 0)).collect();
                l.update(&g, &fb(8, obs), t).unwrap();
                picks.push(s);
            }
            picks
        };
        assert_eq!(run(1), run(999));
    }

    #[test]
    fn full_exploration_is_uniform_over_subsets() {
        let g = Graph::new(5, vec![(0, 1)]).unwrap();
        let oracle = OracleSpec::default();
        let mut l = EpsGreedy::new(1, 1.0).unwrap();
        let mut rng = StreamRng::seed_from_u64(17);
        let draws = 10_000;
        let mut freq: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            *freq
                .entry(l.propose(&g, 2, &oracle, &mut rng).unwrap())
                .or_default() += 1;
        }
        assert_eq!(freq.len(), 10);
        let p = 0.1;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        for (set, count) in freq {
            let f = count as f64 / draws as f64;
            assert!((f - p).abs() < 4.0 * se, "{set:?}: {f}");
        }
    }

    #[test]
    fn snapshots_round_trip() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let mut c = Cucb::new(2);
        c.update(&g, &fb(3, vec![(0, true), (1, false)]), 3)
            .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        c.save_state(f.path()).unwrap();
        let back = Cucb::restore(f.path()).unwrap();
        assert_eq!(back.p_hat(), c.p_hat());
        assert_eq!(back.counters(), c.counters());

        let mut e = EpsGreedy::new(2, 0.25).unwrap();
        e.update(&g, &fb(3, vec![(1, true)]), 1).unwrap();
        e.save_state(f.path()).unwrap();
        let back = EpsGreedy::restore(f.path()).unwrap();
        assert_eq!(back.epsilon(), 0.25);
        assert_eq!(back.p_hat(), e.p_hat());
        assert!(Cucb::restore(f.path()).is_err());
    }
}
