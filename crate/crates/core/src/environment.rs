//! Ground-truth activation probabilities.
//!
//! Normal users activate along edge `e` with probability `x_eᵀθ`. A corrupted
//! user perturbs the probabilities of its out-edges for the first `C_T`
//! rounds and then behaves normally.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::rng;

pub const MODEL_FORMAT_HEADER: &str = "cwim-model v1";

/// Per-edge features and the hidden coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearActivationModel {
    d: usize,
    /// Row-major `m × d` feature matrix.
    features: Vec<f64>,
    theta: Vec<f64>,
    theta_bound: f64,
}

impl LinearActivationModel {
    /// Assembles a model from explicit parts, checking the feature-norm and
    /// probability-range invariants.
    pub fn from_parts(d: usize, features: Vec<Vec<f64>>, theta: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Parameter(
                "feature dimension must be at least 1".into(),
            ));
        }
        if theta.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: theta.len(),
            });
        }
        let mut flat = Vec::with_capacity(features.len() * d);
        for x in &features {
            if x.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: x.len(),
                });
            }
            flat.extend_from_slice(x);
        }
        let model = LinearActivationModel {
            d,
            features: flat,
            theta_bound: norm(&theta),
            theta,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        for e in 0..self.edge_count() {
            let x = self.feature(e);
            if norm(x) > 1.0 + 1e-9 {
                return Err(Error::Parameter(format!(
                    "feature of edge {e} has norm > 1"
                )));
            }
            let p = dot(x, &self.theta);
            if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                return Err(Error::Parameter(format!(
                    "edge {e} has activation probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.features.len() / self.d
    }

    pub fn feature(&self, e: EdgeId) -> &[f64] {
        &self.features[e * self.d..(e + 1) * self.d]
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Θ, the known bound on ‖θ‖₂.
    pub fn theta_bound(&self) -> f64 {
        self.theta_bound
    }

    /// `x_eᵀθ`, clamped into `[0, 1]` against rounding at the boundary.
    pub fn true_prob(&self, e: EdgeId) -> f64 {
        dot(self.feature(e), &self.theta).clamp(0.0, 1.0)
    }

    pub fn true_probs(&self) -> Vec<f64> {
        (0..self.edge_count()).map(|e| self.true_prob(e)).collect()
    }

    pub fn mean_prob(&self) -> f64 {
        let m = self.edge_count();
        if m == 0 {
            return 0.0;
        }
        self.true_probs().iter().sum::<f64>() / m as f64
    }

    /// Rescales θ so the mean edge probability equals `target`, unless that
    /// would push some edge above 1; then the largest edge is pinned at 1.
    pub fn rescale_to_mean(&mut self, target: f64) -> Result<()> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::Parameter(format!(
                "mean probability {target} outside (0, 1]"
            )));
        }
        let probs: Vec<f64> = (0..self.edge_count())
            .map(|e| dot(self.feature(e), &self.theta))
            .collect();
        let mean = probs.iter().sum::<f64>() / probs.len().max(1) as f64;
        let max = probs.iter().cloned().fold(0.0, f64::max);
        if mean <= 0.0 {
            return Ok(());
        }
        let factor = (target / mean).min(1.0 / max);
        self.theta.iter_mut().for_each(|t| *t *= factor);
        self.theta_bound = norm(&self.theta);
        Ok(())
    }

    /// Writes the versioned text sidecar. Floats use Rust's shortest
    /// round-trip representation so a reload is bit-exact.
    ///
    /// ```text
    /// cwim-model v1
    /// dim <d>
    /// edges <m>
    /// theta_bound <Θ>
    /// theta <θ_1> ... <θ_d>
    /// x <edge id> <x_1> ... <x_d>      (one line per edge, ascending id)
    /// ```
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_FORMAT_HEADER}");
        let _ = writeln!(out, "dim {}", self.d);
        let _ = writeln!(out, "edges {}", self.edge_count());
        let _ = writeln!(out, "theta_bound {}", self.theta_bound);
        let _ = writeln!(out, "theta {}", join(&self.theta));
        for e in 0..self.edge_count() {
            let _ = writeln!(out, "x {e} {}", join(self.feature(e)));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        if lines.next() != Some(MODEL_FORMAT_HEADER) {
            return Err(Error::Format(format!(
                "{}: missing model header",
                path.display()
            )));
        }
        let mut field = |name: &str| -> Result<Vec<String>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("model file ends before {name}")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(name) {
                return Err(Error::Format(format!(
                    "expected `{name}` line, got {line:?}"
                )));
            }
            Ok(parts.map(str::to_owned).collect())
        };
        let d: usize = parse_one(&field("dim")?)?;
        let m: usize = parse_one(&field("edges")?)?;
        let theta_bound: f64 = parse_one(&field("theta_bound")?)?;
        let theta = parse_floats(&field("theta")?, d)?;
        let mut features = Vec::with_capacity(m * d);
        for e in 0..m {
            let parts = field("x")?;
            let id: usize = parse_one(&parts[..1.min(parts.len())])?;
            if id != e {
                return Err(Error::Format(format!("edge rows out of order at {id}")));
            }
            features.extend(parse_floats(&parts[1..], d)?);
        }
        let model = LinearActivationModel {
            d,
            features,
            theta,
            theta_bound,
        };
        model.validate()?;
        Ok(model)
    }
}

fn parse_one<T: std::str::FromStr>(parts: &[String]) -> Result<T> {
    match parts {
        [one] => one
            .parse()
            .map_err(|_| Error::Format(format!("cannot parse {one:?}"))),
        _ => Err(Error::Format(format!("expected one value, got {parts:?}"))),
    }
}

fn parse_floats(parts: &[String], len: usize) -> Result<Vec<f64>> {
    if parts.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            actual: parts.len(),
        });
    }
    parts
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Format(format!("cannot parse float {s:?}")))
        })
        .collect()
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Draws a model for `g`.
///
/// Every coordinate of each `x_e` and of `θ` is i.i.d. `U(0, 0.1)`. Each
/// `x_e` is then scaled to unit length; `θ` keeps its drawn scale and is only
/// shrunk if some edge probability would exceed 1. Θ is the final ‖θ‖₂.
pub fn gen_model(g: &Graph, d: usize, rng_seed: u64) -> Result<LinearActivationModel> {
    if d == 0 {
        return Err(Error::Parameter(
            "feature dimension must be at least 1".into(),
        ));
    }
    let mut rng = rng::substream(&[rng::tag::MODEL, rng_seed]);
    let m = g.edge_count();
    let mut features = Vec::with_capacity(m * d);
    for _ in 0..m {
        let mut x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..0.1)).collect();
        let len = norm(&x);
        if len > 0.0 {
            x.iter_mut().for_each(|v| *v /= len);
        } else {
            x[0] = 1.0;
        }
        features.extend(x);
    }
    let mut theta: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..0.1)).collect();
    let max_p = (0..m)
        .map(|e| dot(&features[e * d..(e + 1) * d], &theta))
        .fold(0.0, f64::max);
    if max_p > 1.0 {
        theta.iter_mut().for_each(|t| *t /= max_p);
    }
    Ok(LinearActivationModel {
        d,
        features,
        theta_bound: norm(&theta),
        theta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionStrategy {
    /// Corrupted users behave normally.
    None,
    /// `p_t(e) = max(0, floor − x_eᵀθ)` while `t ≤ C_T`.
    Flip,
}

impl std::str::FromStr for CorruptionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(CorruptionStrategy::None),
            "flip" => Ok(CorruptionStrategy::Flip),
            other => Err(Error::Config(format!(
                "unknown corruption strategy {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for CorruptionStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CorruptionStrategy::None => "none",
            CorruptionStrategy::Flip => "flip",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionSchedule {
    corrupted: Vec<NodeId>,
    is_corrupted: Vec<bool>,
    pub strategy: CorruptionStrategy,
    /// `C_T`: the last corrupted round.
    pub horizon: usize,
    pub floor: f64,
}

impl CorruptionSchedule {
    pub fn new(
        n: usize,
        corrupted: &[NodeId],
        strategy: CorruptionStrategy,
        horizon: usize,
        floor: f64,
    ) -> Result<Self> {
        let mut is_corrupted = vec![false; n];
        for &u in corrupted {
            if u >= n {
                return Err(Error::NodeOutOfRange { node: u, n });
            }
            is_corrupted[u] = true;
        }
        if !(0.0..=1.0).contains(&floor) {
            return Err(Error::Parameter(format!(
                "corruption floor {floor} outside [0, 1]"
            )));
        }
        let corrupted = (0..n).filter(|&u| is_corrupted[u]).collect();
        Ok(CorruptionSchedule {
            corrupted,
            is_corrupted,
            strategy,
            horizon,
            floor,
        })
    }

    /// A schedule under which every user acts normally.
    pub fn clean(n: usize) -> Self {
        CorruptionSchedule {
            corrupted: Vec::new(),
            is_corrupted: vec![false; n],
            strategy: CorruptionStrategy::None,
            horizon: 0,
            floor: 0.05,
        }
    }

    pub fn corrupted_users(&self) -> &[NodeId] {
        &self.corrupted
    }

    pub fn is_corrupted(&self, u: NodeId) -> bool {
        self.is_corrupted.get(u).copied().unwrap_or(false)
    }

    /// Whether round `t` may differ from the clean model for some edge.
    pub fn active_at(&self, t: usize) -> bool {
        t <= self.horizon && self.strategy != CorruptionStrategy::None && !self.corrupted.is_empty()
    }
}

/// Activation probability of edge `e` at round `t` (rounds start at 1).
pub fn prob_at(
    model: &LinearActivationModel,
    schedule: &CorruptionSchedule,
    g: &Graph,
    e: EdgeId,
    t: usize,
) -> f64 {
    let base = model.true_prob(e);
    if !schedule.active_at(t) || !schedule.is_corrupted(g.tail(e)) {
        return base;
    }
    match schedule.strategy {
        CorruptionStrategy::None => base,
        CorruptionStrategy::Flip => (schedule.floor - base).max(0.0),
    }
}

/// `prob_at` for every edge at round `t`.
pub fn probs_at(
    model: &LinearActivationModel,
    schedule: &CorruptionSchedule,
    g: &Graph,
    t: usize,
) -> Vec<f64> {
    (0..g.edge_count())
        .map(|e| prob_at(model, schedule, g, e, t))
        .collect()
}

/// Corruption level `c_{u,t}` of every user at round `t`: the largest
/// absolute perturbation it applies to any of its out-edges.
pub fn corruption_levels_at(
    model: &LinearActivationModel,
    schedule: &CorruptionSchedule,
    g: &Graph,
    t: usize,
) -> Vec<f64> {
    let mut levels = vec![0.0; g.node_count()];
    if !schedule.active_at(t) {
        return levels;
    }
    for &u in schedule.corrupted_users() {
        levels[u] = g
            .out_edges(u)
            .iter()
            .map(|&e| (prob_at(model, schedule, g, e, t) - model.true_prob(e)).abs())
            .fold(0.0, f64::max);
    }
    levels
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionBudget {
    /// `C_u` for every node.
    pub per_user: Vec<f64>,
    /// `C = max_u C_u`.
    pub max_budget: f64,
}

impl CorruptionBudget {
    pub fn zero(n: usize) -> Self {
        CorruptionBudget {
            per_user: vec![0.0; n],
            max_budget: 0.0,
        }
    }

    /// Adds one round of per-user corruption levels.
    pub fn accumulate(&mut self, levels: &[f64]) {
        for (b, c) in self.per_user.iter_mut().zip(levels) {
            *b += c.abs();
        }
        self.max_budget = self.per_user.iter().cloned().fold(0.0, f64::max);
    }
}

/// Per-user budgets `C_u = Σ_{t ≤ T} c_{u,t}` and their maximum.
pub fn total_budget(
    model: &LinearActivationModel,
    schedule: &CorruptionSchedule,
    g: &Graph,
    horizon: usize,
) -> CorruptionBudget {
    let mut budget = CorruptionBudget::zero(g.node_count());
    for t in 1..=horizon {
        if !schedule.active_at(t) {
            // Later rounds contribute nothing.
            break;
        }
        budget.accumulate(&corruption_levels_at(model, schedule, g, t));
    }
    budget
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_erdos_renyi;

    fn two_edge_model(p0: f64, p1: f64) -> (Graph, LinearActivationModel) {
        // θ = (1, 0) scaled; features chosen so x_eᵀθ equals the targets.
        let g = Graph::new(3, vec![(0, 1), (0, 2)]).unwrap();
        let feat = |p: f64| vec![p, (1.0 - p * p).sqrt()];
        let model =
            LinearActivationModel::from_parts(2, vec![feat(p0), feat(p1)], vec![1.0, 0.0]).unwrap();
        (g, model)
    }

    #[test]
    fn one_dimension_forces_unit_features() {
        let g = gen_erdos_renyi(10, 0.3, 3).unwrap();
        let model = gen_model(&g, 1, 9).unwrap();
        let p0 = model.true_prob(0);
        for e in 0..g.edge_count() {
            assert_eq!(model.feature(e), &[1.0]);
            assert_eq!(model.true_prob(e), p0);
        }
        assert!(gen_model(&g, 0, 9).is_err());
    }

    #[test]
    fn generated_models_respect_invariants() {
        for seed in 0..20 {
            let g = gen_erdos_renyi(15, 0.3, seed).unwrap();
            let model = gen_model(&g, 25, seed).unwrap();
            for e in 0..g.edge_count() {
                assert!((norm(model.feature(e)) - 1.0).abs() <= 1e-12);
                let p = dot(model.feature(e), model.theta());
                assert!((0.0..=1.0).contains(&p));
            }
            assert!(norm(model.theta()) <= model.theta_bound() + 1e-15);
        }
    }

    #[test]
    fn toy_mean_probability_near_reference() {
        let means: Vec<f64> = (0..100)
            .map(|s| {
                let g = gen_erdos_renyi(10, 0.3, 1000 + s).unwrap();
                gen_model(&g, 25, 2000 + s).unwrap().mean_prob()
            })
            .collect();
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        assert!(
            (mean - 0.175).abs() <= 0.08,
            "mean activation probability {mean}"
        );
    }

    #[test]
    fn true_prob_aligned_and_orthogonal() {
        let model = LinearActivationModel::from_parts(
            2,
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.3, 0.0],
        )
        .unwrap();
        assert!((model.true_prob(0) - 0.3).abs() < 1e-15);
        assert_eq!(model.true_prob(1), 0.0);
    }

    #[test]
    fn true_prob_matches_naive_loop() {
        let g = gen_erdos_renyi(12, 0.4, 1).unwrap();
        let model = gen_model(&g, 7, 4).unwrap();
        for e in 0..g.edge_count() {
            let mut acc = 0.0;
            for i in 0..7 {
                acc += model.feature(e)[i] * model.theta()[i];
            }
            assert!((model.true_prob(e) - acc).abs() < 1e-15);
        }
    }

    #[test]
    fn flip_rule_and_recovery() {
        let (g, model) = two_edge_model(0.2, 0.1);
        let sched = CorruptionSchedule::new(3, &[0], CorruptionStrategy::Flip, 100, 0.05).unwrap();
        assert_eq!(prob_at(&model, &sched, &g, 0, 1), 0.0);
        assert_eq!(prob_at(&model, &sched, &g, 0, 100), 0.0);
        assert!((prob_at(&model, &sched, &g, 0, 101) - 0.2).abs() < 1e-15);
        let c = prob_at(&model, &sched, &g, 0, 50) - model.true_prob(0);
        assert!((c + 0.2).abs() < 1e-15);
        // Tail not corrupted.
        let clean = CorruptionSchedule::new(3, &[1], CorruptionStrategy::Flip, 100, 0.05).unwrap();
        assert_eq!(prob_at(&model, &clean, &g, 0, 1), model.true_prob(0));
    }

    #[test]
    fn flip_keeps_small_probabilities_positive() {
        let (g, model) = two_edge_model(0.02, 0.5);
        let sched = CorruptionSchedule::new(3, &[0], CorruptionStrategy::Flip, 10, 0.05).unwrap();
        assert!((prob_at(&model, &sched, &g, 0, 3) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn budgets() {
        let (g, model) = two_edge_model(0.2, 0.1);
        let none = CorruptionSchedule::new(3, &[], CorruptionStrategy::Flip, 100, 0.05).unwrap();
        let b = total_budget(&model, &none, &g, 500);
        assert_eq!(b.max_budget, 0.0);
        assert!(b.per_user.iter().all(|&c| c == 0.0));

        let sched = CorruptionSchedule::new(3, &[0], CorruptionStrategy::Flip, 100, 0.05).unwrap();
        // Per-round perturbations {0.2, 0.1}: the level is 0.2 for 100 rounds.
        let mut direct = 0.0;
        for _ in 0..100 {
            direct += 0.2f64.max(0.1);
        }
        let b = total_budget(&model, &sched, &g, 150);
        assert!((b.per_user[0] - direct).abs() < 1e-9);
        assert!((b.per_user[0] - 20.0).abs() < 1e-9);
        assert_eq!(b.max_budget, b.per_user[0]);
        assert_eq!(b.per_user[1], 0.0);

        let short = total_budget(&model, &sched, &g, 40);
        assert!((short.per_user[0] - 8.0).abs() < 1e-9);
    }

    #[test]
    fn model_file_round_trip_is_exact() {
        let g = gen_erdos_renyi(10, 0.3, 2).unwrap();
        let model = gen_model(&g, 25, 8).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        model.save(f.path()).unwrap();
        let back = LinearActivationModel::load(f.path()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn rescale_to_mean_hits_target() {
        let g = gen_erdos_renyi(50, 0.3, 2).unwrap();
        let mut model = gen_model(&g, 25, 8).unwrap();
        model.rescale_to_mean(0.0295).unwrap();
        assert!((model.mean_prob() - 0.0295).abs() < 1e-12);
        assert!(model.rescale_to_mean(0.0).is_err());
    }
}
