//! Linear UCB learners over shared edge features.
//!
//! One type covers both policies. With a weight threshold λ the learner is
//! CW-IMLinUCB: each observation is weighted by `min(1, λ / ‖x_e‖_{M⁻¹})`,
//! evaluated against the Gram matrix from the end of the previous round.
//! Without one it is IMLinUCB (every weight 1).

use std::fmt::Write as _;
use std::path::Path;

use crate::diffusion::CascadeFeedback;
use crate::environment::{dot, LinearActivationModel};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::linalg::SpdState;
use crate::oracle::OracleSpec;
use crate::rng::StreamRng;

use super::params::ResolvedParams;
use super::snapshot::{Reader, SNAPSHOT_HEADER};
use super::Learner;

#[derive(Debug, Clone)]
pub struct LinUcb {
    name: String,
    params: ResolvedParams,
    dim: usize,
    /// Row-major `m × d` edge features.
    features: Vec<f64>,
    spd: SpdState,
    b: Vec<f64>,
    theta_hat: Vec<f64>,
    p_hat: Vec<f64>,
    last_round: Vec<(EdgeId, bool, f64)>,
}

impl LinUcb {
    pub fn new(
        name: impl Into<String>,
        model: &LinearActivationModel,
        params: ResolvedParams,
    ) -> Self {
        let dim = model.dim();
        let m = model.edge_count();
        let mut features = Vec::with_capacity(m * dim);
        for e in 0..m {
            features.extend_from_slice(model.feature(e));
        }
        LinUcb {
            name: name.into(),
            params,
            dim,
            features,
            spd: SpdState::identity(dim),
            b: vec![0.0; dim],
            theta_hat: vec![0.0; dim],
            p_hat: vec![1.0; m],
            last_round: Vec::new(),
        }
    }

    /// Overrides how often the Gram inverse is rebuilt from scratch.
    pub fn with_rebuild_every(mut self, every: usize) -> Self {
        self.spd = self.spd.with_rebuild_every(every);
        self
    }

    fn feature(&self, e: EdgeId) -> &[f64] {
        &self.features[e * self.dim..(e + 1) * self.dim]
    }

    fn edge_count(&self) -> usize {
        self.p_hat.len()
    }

    pub fn params(&self) -> &ResolvedParams {
        &self.params
    }

    pub fn gram(&self) -> &SpdState {
        &self.spd
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn theta_hat(&self) -> &[f64] {
        &self.theta_hat
    }

    /// `(edge, outcome, weight)` for every sample of the latest update.
    pub fn last_round(&self) -> &[(EdgeId, bool, f64)] {
        &self.last_round
    }

    /// Edges whose true probability `x_eᵀθ` falls outside the current
    /// confidence interval `x_eᵀθ̂ ± β ‖x_e‖_{M⁻¹}`.
    pub fn confidence_violations(&self, theta: &[f64]) -> usize {
        (0..self.edge_count())
            .filter(|&e| {
                let x = self.feature(e);
                let err = dot(x, &self.theta_hat) - dot(x, theta);
                err.abs() > self.params.beta * self.spd.inv_quad(x)
            })
            .count()
    }

    /// Applies one round of feedback (Gram, `b`, `θ̂`, and `p̂`).
    pub fn observe(&mut self, feedback: &CascadeFeedback) -> Result<()> {
        let m = self.edge_count();
        if let Some(&(e, _)) = feedback.observed.iter().find(|&&(e, _)| e >= m) {
            return Err(Error::UnknownEdge { edge: e, m });
        }
        let inv_sigma2 = 1.0 / (self.params.sigma * self.params.sigma);

        // Weights are fixed against the Gram state before this round.
        self.last_round.clear();
        for &(e, y) in &feedback.observed {
            let w = match self.params.lambda {
                None => 1.0,
                Some(lambda) => (lambda / self.spd.inv_quad(self.feature(e))).min(1.0),
            };
            self.last_round.push((e, y, w));
        }

        for i in 0..self.last_round.len() {
            let (e, y, w) = self.last_round[i];
            let start = e * self.dim;
            if y {
                for (bi, xi) in self
                    .b
                    .iter_mut()
                    .zip(&self.features[start..start + self.dim])
                {
                    *bi += w * xi;
                }
            }
            self.spd
                .rank1_update(&self.features[start..start + self.dim], inv_sigma2 * w)?;
        }

        self.theta_hat = self.spd.solve_theta(&self.b, self.params.sigma)?;
        for e in 0..m {
            let x = self.feature(e);
            let ucb = dot(&self.theta_hat, x) + self.params.beta * self.spd.inv_quad(x);
            self.p_hat[e] = ucb.clamp(0.0, 1.0);
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "{SNAPSHOT_HEADER}");
        let _ = writeln!(out, "kind linucb");
        let _ = writeln!(out, "name {}", self.name);
        let _ = writeln!(out, "sigma {}", self.params.sigma);
        match self.params.lambda {
            Some(l) => {
                let _ = writeln!(out, "lambda {l}");
            }
            None => {
                let _ = writeln!(out, "lambda none");
            }
        }
        let _ = writeln!(out, "beta {}", self.params.beta);
        let _ = writeln!(out, "dim {}", self.dim);
        let _ = writeln!(out, "edges {}", self.edge_count());
        let _ = writeln!(
            out,
            "rebuild {} {}",
            self.spd.since_rebuild(),
            self.spd.rebuild_every()
        );
        let _ = writeln!(out, "gram {}", join(self.spd.matrix()));
        let _ = writeln!(out, "gram_inv {}", join(self.spd.inverse()));
        let _ = writeln!(out, "b {}", join(&self.b));
        let _ = writeln!(out, "theta_hat {}", join(&self.theta_hat));
        let _ = writeln!(out, "p_hat {}", join(&self.p_hat));
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Restores a snapshot written by [`LinUcb::save`]; features come from
    /// the model, which must match the snapshot's shape.
    pub fn restore(path: &Path, model: &LinearActivationModel) -> Result<Self> {
        let mut r = Reader::open(path)?;
        r.expect_kind("linucb")?;
        let name = r.word("name")?;
        let sigma = r.float("sigma")?;
        let lambda = match r.word("lambda")?.as_str() {
            "none" => None,
            v => Some(
                v.parse()
                    .map_err(|_| Error::Format(format!("bad lambda {v:?}")))?,
            ),
        };
        let beta = r.float("beta")?;
        let dim = r.usize("dim")?;
        let m = r.usize("edges")?;
        if dim != model.dim() || m != model.edge_count() {
            return Err(Error::Format(format!(
                "snapshot is {m} edges × {dim} dims, model is {} × {}",
                model.edge_count(),
                model.dim()
            )));
        }
        let rebuild = r.floats("rebuild", 2)?;
        let gram = r.floats("gram", dim * dim)?;
        let gram_inv = r.floats("gram_inv", dim * dim)?;
        let spd = SpdState::from_raw(
            dim,
            gram,
            gram_inv,
            rebuild[0] as usize,
            rebuild[1] as usize,
        )?;
        let mut learner = LinUcb::new(
            name,
            model,
            ResolvedParams {
                sigma,
                lambda,
                beta,
            },
        );
        learner.spd = spd;
        learner.b = r.floats("b", dim)?;
        learner.theta_hat = r.floats("theta_hat", dim)?;
        learner.p_hat = r.floats("p_hat", m)?;
        Ok(learner)
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl Learner for LinUcb {
    fn name(&self) -> &str {
        &self.name
    }

    fn propose(
        &mut self,
        g: &Graph,
        k: usize,
        oracle: &OracleSpec,
        rng: &mut StreamRng,
    ) -> Result<Vec<NodeId>> {
        use rand::Rng;
        oracle.select(g, k, &self.p_hat, rng.gen())
    }

    fn update(&mut self, _g: &Graph, feedback: &CascadeFeedback, _t: usize) -> Result<()> {
        self.observe(feedback)
    }

    fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    fn save_state(&self, path: &Path) -> Result<()> {
        self.save(path)
    }
}
