use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use super::config::{
    CBarMode, ComparatorSpec, CorruptedUsers, ExperimentConfig, GraphSource, InstanceMode,
};
use crate::diffusion::simulate_cascade_coupled;
use crate::environment::{
    gen_model, probs_at, total_budget, CorruptionBudget, CorruptionSchedule, LinearActivationModel,
};
use crate::error::{Error, Result};
use crate::graph::{analyze, gen_erdos_renyi, load_edge_list, Graph, GraphStats, NodeId};
use crate::learner::{build_learner, AlgorithmId, CwParams, LearnerContext, ProblemSize};
use crate::rng::{self, tag as tags};

/// A fully materialised problem: graph, model, corruption and comparator.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub model: LinearActivationModel,
    pub stats: GraphStats,
    pub schedule: CorruptionSchedule,
    /// Scheduled per-user budgets over the horizon.
    pub budget: CorruptionBudget,
    /// The fixed seed set regret is measured against.
    pub comparator: Vec<NodeId>,
    pub size: ProblemSize,
    /// The C̄ handed to the weighted learner.
    pub c_bar: f64,
}

/// One round of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub run_id: usize,
    pub t: usize,
    pub seeds: Vec<NodeId>,
    pub reward: usize,
    pub opt_reward: usize,
    pub inst_regret: f64,
    pub cum_regret: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub algorithm: AlgorithmId,
    pub run_id: usize,
    pub rounds: Vec<RoundRecord>,
    /// Budget recomputed from the probabilities the cascades actually used.
    pub realized_budget: CorruptionBudget,
}

impl RunResult {
    pub fn final_regret(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.cum_regret)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// One instance when shared, otherwise one per run.
    pub instances: Vec<Instance>,
    /// Ordered by algorithm, then run id.
    pub runs: Vec<RunResult>,
}

impl ExperimentResult {
    pub fn instance_for(&self, run_id: usize) -> &Instance {
        match self.config.instance {
            InstanceMode::Shared => &self.instances[0],
            InstanceMode::PerRun => &self.instances[run_id],
        }
    }

    pub fn runs_of(&self, algorithm: AlgorithmId) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter(move |r| r.algorithm == algorithm)
    }
}

impl Instance {
    /// Learner parameters for this instance, with C̄ filled in.
    pub fn learner_params(&self, cfg: &ExperimentConfig) -> CwParams {
        CwParams {
            c_bar: self.c_bar,
            ..cfg.learner_params()
        }
    }

    /// Human-readable `key value` lines describing the resolved instance.
    pub fn summary(&self, cfg: &ExperimentConfig) -> String {
        let params = self.learner_params(cfg);
        let cw = params.resolve_weighted(&self.size);
        let im = params.resolve_unweighted(&self.size);
        let ids = |v: &[NodeId]| {
            v.iter()
                .map(|u| u.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "nodes {}\nedges {}\nmean_prob {}\ntheta_bound {}\ncomparator {}\ncorrupted {}\n\
             max_budget {}\nc_bar {}\ne_star {}\ne_c {}\nn_tilde {}\n\
             cw_lambda {}\ncw_beta {}\nim_beta {}\n",
            self.graph.node_count(),
            self.graph.edge_count(),
            self.model.mean_prob(),
            self.model.theta_bound(),
            ids(&self.comparator),
            ids(self.schedule.corrupted_users()),
            self.budget.max_budget,
            self.c_bar,
            self.stats.e_star,
            self.stats.e_c,
            self.stats.n_tilde,
            cw.lambda.unwrap_or(f64::INFINITY),
            cw.beta,
            im.beta,
        )
    }
}

fn pick_corrupted(cfg: &ExperimentConfig, g: &Graph, salt: u64) -> Result<Vec<NodeId>> {
    match &cfg.corrupted {
        CorruptedUsers::None => Ok(Vec::new()),
        CorruptedUsers::Explicit(ids) => {
            if let Some(&u) = ids.iter().find(|&&u| u >= g.node_count()) {
                return Err(Error::Config(format!(
                    "corrupted user {u} outside the graph's {} nodes",
                    g.node_count()
                )));
            }
            Ok(ids.clone())
        }
        CorruptedUsers::Random { count } => {
            let eligible: Vec<NodeId> = (0..g.node_count())
                .filter(|&u| g.out_degree(u) > 0)
                .collect();
            if *count > eligible.len() {
                return Err(Error::Config(format!(
                    "asked for {count} corrupted users but only {} nodes have out-edges",
                    eligible.len()
                )));
            }
            let mut rng = rng::substream(&[tags::CORRUPTION, cfg.corruption_seed, salt]);
            let mut picked: Vec<NodeId> = index::sample(&mut rng, eligible.len(), *count)
                .into_iter()
                .map(|i| eligible[i])
                .collect();
            picked.sort_unstable();
            Ok(picked)
        }
    }
}

/// Builds the instance for `run_id` (ignored when instances are shared).
pub fn build_instance(cfg: &ExperimentConfig, run_id: usize) -> Result<Instance> {
    let salt = match cfg.instance {
        InstanceMode::Shared => 0,
        InstanceMode::PerRun => run_id as u64 + 1,
    };
    let derive = |base: u64| {
        if salt == 0 {
            base
        } else {
            rng::derive_seed(&[base, salt])
        }
    };

    let graph = match &cfg.graph {
        GraphSource::ErdosRenyi {
            nodes,
            edge_prob,
            seed,
        } => gen_erdos_renyi(*nodes, *edge_prob, derive(*seed))?,
        GraphSource::File { path, node_limit } => load_edge_list(path, *node_limit)?,
    };
    if cfg.budget > graph.node_count() {
        return Err(Error::Config(format!(
            "budget {} exceeds node count {}",
            cfg.budget,
            graph.node_count()
        )));
    }
    if graph.edge_count() == 0 {
        return Err(Error::Config("the graph has no edges".into()));
    }
    let mut model = gen_model(&graph, cfg.dim, derive(cfg.model_seed))?;
    if let Some(target) = cfg.mean_prob {
        model.rescale_to_mean(target)?;
    }
    let stats = analyze(&graph, cfg.budget)?;
    let corrupted = pick_corrupted(cfg, &graph, salt)?;
    let schedule = CorruptionSchedule::new(
        graph.node_count(),
        &corrupted,
        cfg.corruption_strategy,
        cfg.corruption_horizon,
        cfg.corruption_floor,
    )?;
    let budget = total_budget(&model, &schedule, &graph, cfg.horizon);

    let comparator = match &cfg.comparator {
        ComparatorSpec::OracleTrue => cfg.oracle.select(
            &graph,
            cfg.budget,
            &model.true_probs(),
            rng::derive_seed(&[tags::ORACLE, cfg.master_seed, salt]),
        )?,
        ComparatorSpec::Explicit(ids) => {
            let mut ids = ids.clone();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() != cfg.budget || ids.iter().any(|&u| u >= graph.node_count()) {
                return Err(Error::Config(format!(
                    "comparator must list {} distinct nodes below {}",
                    cfg.budget,
                    graph.node_count()
                )));
            }
            ids
        }
    };

    let size = ProblemSize {
        dim: cfg.dim,
        nodes: graph.node_count(),
        horizon: cfg.horizon,
        e_star: stats.e_star,
        e_c: stats.e_c,
        theta_bound: model.theta_bound(),
    };
    let c_bar = match cfg.c_bar {
        CBarMode::Oracle => budget.max_budget,
        CBarMode::Fixed(c) => c,
        CBarMode::SqrtHorizon => (cfg.horizon as f64).sqrt(),
    };

    Ok(Instance {
        graph,
        model,
        stats,
        schedule,
        budget,
        comparator,
        size,
        c_bar,
    })
}

fn uniforms(m: usize, parts: &[u64]) -> Vec<f64> {
    let mut r = rng::substream(parts);
    (0..m).map(|_| r.gen::<f64>()).collect()
}

/// Plays one policy on one instance for the configured horizon.
///
/// Round randomness is keyed by `(master seed, run, t)` only, so different
/// algorithms in the same run face the same cascade coins.
pub fn run_single(
    cfg: &ExperimentConfig,
    inst: &Instance,
    algorithm: AlgorithmId,
    run_id: usize,
) -> Result<RunResult> {
    let g = &inst.graph;
    let m = g.edge_count();
    let ctx = LearnerContext {
        model: &inst.model,
        size: inst.size,
        params: inst.learner_params(cfg),
        epsilon: cfg.epsilon,
        comparator: &inst.comparator,
    };
    let mut learner = build_learner(algorithm, &ctx)?;
    let clean = inst.model.true_probs();
    let mut realized = CorruptionBudget::zero(g.node_count());
    let mut rounds = Vec::with_capacity(cfg.horizon);
    let mut cum = 0.0;
    let run = run_id as u64;
    // Regret is scaled by the oracle's αγ guarantee.
    let scale = cfg.oracle.scale();

    for t in 1..=cfg.horizon {
        let tt = t as u64;
        let mut explore = rng::substream(&[tags::EXPLORE, cfg.master_seed, run, tt]);
        let seeds = learner.propose(g, cfg.budget, &cfg.oracle, &mut explore)?;
        if seeds.len() != cfg.budget {
            return Err(Error::Parameter(format!(
                "{} proposed {} seeds, expected {}",
                learner.name(),
                seeds.len(),
                cfg.budget
            )));
        }

        let corrupted;
        let probs: &[f64] = if inst.schedule.active_at(t) {
            corrupted = probs_at(&inst.model, &inst.schedule, g, t);
            &corrupted
        } else {
            &clean
        };
        let mut levels = vec![0.0; g.node_count()];
        for e in 0..m {
            let gap = (probs[e] - clean[e]).abs();
            let u = g.tail(e);
            if gap > levels[u] {
                levels[u] = gap;
            }
        }
        realized.accumulate(&levels);

        let learner_u = uniforms(m, &[tags::LEARNER_CASCADE, cfg.master_seed, run, tt]);
        let feedback = simulate_cascade_coupled(g, probs, &seeds, &learner_u)?;
        let opt = if cfg.common_random_numbers {
            simulate_cascade_coupled(g, probs, &inst.comparator, &learner_u)?
        } else {
            let comp_u = uniforms(m, &[tags::COMPARATOR_CASCADE, cfg.master_seed, run, tt]);
            simulate_cascade_coupled(g, probs, &inst.comparator, &comp_u)?
        };
        learner.update(g, &feedback, t)?;

        let reward = feedback.activated_count();
        let opt_reward = opt.activated_count();
        let inst_regret = opt_reward as f64 - reward as f64 / scale;
        cum += inst_regret;
        rounds.push(RoundRecord {
            run_id,
            t,
            seeds,
            reward,
            opt_reward,
            inst_regret,
            cum_regret: cum,
        });
    }

    Ok(RunResult {
        algorithm,
        run_id,
        rounds,
        realized_budget: realized,
    })
}

/// Runs every (algorithm, run) pair on `jobs` worker threads. The result does
/// not depend on `jobs`.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let instance_count = match cfg.instance {
        InstanceMode::Shared => 1,
        InstanceMode::PerRun => cfg.repetitions,
    };
    let instances = (0..instance_count)
        .map(|r| build_instance(cfg, r))
        .collect::<Result<Vec<_>>>()?;

    let mut algorithms = cfg.algorithms.clone();
    algorithms.sort();
    let tasks: Vec<(AlgorithmId, usize)> = algorithms
        .iter()
        .flat_map(|&a| (0..cfg.repetitions).map(move |r| (a, r)))
        .collect();
    let pick = |r: usize| match cfg.instance {
        InstanceMode::Shared => &instances[0],
        InstanceMode::PerRun => &instances[r],
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let runs = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(a, r)| run_single(cfg, pick(r), a, r))
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(ExperimentResult {
        config: cfg.clone(),
        instances,
        runs,
    })
}
