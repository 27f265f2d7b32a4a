//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown and repeated
//! keys are errors. [`ExperimentConfig::to_config_string`] writes every key
//! with defaults filled in, and parsing that text gives back the same config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::environment::CorruptionStrategy;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::learner::{AlgorithmId, Setting};
use crate::oracle::{OracleKind, OracleSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    ErdosRenyi {
        nodes: usize,
        edge_prob: f64,
        seed: u64,
    },
    File {
        path: PathBuf,
        node_limit: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorruptedUsers {
    None,
    Explicit(Vec<NodeId>),
    /// `count` users drawn uniformly without replacement among nodes with at
    /// least one out-edge.
    Random {
        count: usize,
    },
}

/// Which corruption budget C̄ the weighted learner is told.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CBarMode {
    /// The true budget `C` of the instance over the horizon.
    Oracle,
    Fixed(f64),
    /// `√T`.
    SqrtHorizon,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComparatorSpec {
    /// The oracle's seed set on the uncorrupted probabilities.
    OracleTrue,
    Explicit(Vec<NodeId>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceMode {
    /// One graph/model for every run; only cascade randomness varies.
    Shared,
    /// Graph and model seeds are re-derived per run.
    PerRun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub dim: usize,
    pub model_seed: u64,
    pub mean_prob: Option<f64>,
    pub budget: usize,
    pub horizon: usize,
    pub repetitions: usize,
    pub master_seed: u64,
    pub algorithms: Vec<AlgorithmId>,
    pub sigma: f64,
    pub lambda: Setting,
    pub beta: Setting,
    pub c_bar: CBarMode,
    pub epsilon: f64,
    pub oracle: OracleSpec,
    pub corrupted: CorruptedUsers,
    pub corruption_seed: u64,
    pub corruption_strategy: CorruptionStrategy,
    pub corruption_horizon: usize,
    pub corruption_floor: f64,
    pub comparator: ComparatorSpec,
    pub common_random_numbers: bool,
    pub instance: InstanceMode,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph: GraphSource::ErdosRenyi {
                nodes: 10,
                edge_prob: 0.3,
                seed: 1,
            },
            dim: 25,
            model_seed: 1,
            mean_prob: None,
            budget: 1,
            horizon: 1000,
            repetitions: 10,
            master_seed: 0,
            algorithms: vec![AlgorithmId::CwImLinUcb, AlgorithmId::ImLinUcb],
            sigma: 1.0,
            lambda: Setting::Auto,
            beta: Setting::Auto,
            c_bar: CBarMode::Oracle,
            epsilon: 0.1,
            oracle: OracleSpec::default(),
            corrupted: CorruptedUsers::None,
            corruption_seed: 0,
            corruption_strategy: CorruptionStrategy::Flip,
            corruption_horizon: 100,
            corruption_floor: 0.05,
            comparator: ComparatorSpec::OracleTrue,
            common_random_numbers: false,
            instance: InstanceMode::Shared,
            output: None,
        }
    }
}

const KEYS: &[&str] = &[
    "graph",
    "nodes",
    "edge_prob",
    "graph_seed",
    "graph_path",
    "node_limit",
    "dim",
    "model_seed",
    "mean_prob",
    "budget",
    "horizon",
    "repetitions",
    "master_seed",
    "algorithms",
    "sigma",
    "lambda",
    "beta",
    "c_bar",
    "epsilon",
    "oracle",
    "oracle_alpha",
    "oracle_gamma",
    "oracle_mc_samples",
    "corrupted",
    "corruption_seed",
    "corruption_strategy",
    "corruption_horizon",
    "corruption_floor",
    "comparator",
    "common_random_numbers",
    "instance",
    "output",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_ids(key: &str, list: &str) -> Result<Vec<NodeId>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        other => Err(Error::Config(format!(
            "{key}: expected true/false, got {other:?}"
        ))),
    }
}

fn join_ids(ids: &[NodeId]) -> String {
    ids.iter()
        .map(|u| u.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        // Relative graph paths are resolved against the config's directory.
        if let GraphSource::File {
            path: graph_path, ..
        } = &mut cfg.graph
        {
            if graph_path.is_relative() {
                if let Some(dir) = path.parent() {
                    *graph_path = dir.join(&*graph_path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", idx + 1))
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key {key:?}",
                    idx + 1
                )));
            }
            if entries
                .insert(key.to_owned(), value.trim().to_owned())
                .is_some()
            {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key:?}",
                    idx + 1
                )));
            }
        }

        let mut cfg = ExperimentConfig::default();
        let get = |k: &str| entries.get(k).map(String::as_str);

        let graph_kind = get("graph").unwrap_or("erdos_renyi");
        cfg.graph = match graph_kind {
            "erdos_renyi" => {
                for k in ["graph_path", "node_limit"] {
                    if get(k).is_some() {
                        return Err(Error::Config(format!("{k} requires graph = file")));
                    }
                }
                GraphSource::ErdosRenyi {
                    nodes: get("nodes")
                        .map(|v| parse_value("nodes", v))
                        .transpose()?
                        .unwrap_or(10),
                    edge_prob: get("edge_prob")
                        .map(|v| parse_value("edge_prob", v))
                        .transpose()?
                        .unwrap_or(0.3),
                    seed: get("graph_seed")
                        .map(|v| parse_value("graph_seed", v))
                        .transpose()?
                        .unwrap_or(1),
                }
            }
            "file" => {
                for k in ["nodes", "edge_prob", "graph_seed"] {
                    if get(k).is_some() {
                        return Err(Error::Config(format!("{k} requires graph = erdos_renyi")));
                    }
                }
                let path = get("graph_path")
                    .ok_or_else(|| Error::Config("graph = file needs graph_path".into()))?;
                let node_limit = match get("node_limit") {
                    None | Some("none") => None,
                    Some(v) => Some(parse_value("node_limit", v)?),
                };
                GraphSource::File {
                    path: PathBuf::from(path),
                    node_limit,
                }
            }
            other => return Err(Error::Config(format!("graph: unknown source {other:?}"))),
        };

        macro_rules! set {
            ($field:expr, $key:literal) => {
                if let Some(v) = get($key) {
                    $field = parse_value($key, v)?;
                }
            };
        }
        set!(cfg.dim, "dim");
        set!(cfg.model_seed, "model_seed");
        cfg.mean_prob = match get("mean_prob") {
            None | Some("none") => None,
            Some(v) => Some(parse_value("mean_prob", v)?),
        };
        set!(cfg.budget, "budget");
        set!(cfg.horizon, "horizon");
        set!(cfg.repetitions, "repetitions");
        set!(cfg.master_seed, "master_seed");
        if let Some(v) = get("algorithms") {
            cfg.algorithms = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?;
        }
        set!(cfg.sigma, "sigma");
        set!(cfg.lambda, "lambda");
        set!(cfg.beta, "beta");
        if let Some(v) = get("c_bar") {
            cfg.c_bar = match v {
                "oracle" => CBarMode::Oracle,
                "sqrt_t" => CBarMode::SqrtHorizon,
                num => CBarMode::Fixed(parse_value("c_bar", num)?),
            };
        }
        set!(cfg.epsilon, "epsilon");
        if let Some(v) = get("oracle") {
            cfg.oracle.kind = v.parse::<OracleKind>()?;
        }
        set!(cfg.oracle.alpha, "oracle_alpha");
        set!(cfg.oracle.gamma, "oracle_gamma");
        set!(cfg.oracle.mc_samples, "oracle_mc_samples");
        if let Some(v) = get("corrupted") {
            cfg.corrupted = if v == "none" {
                CorruptedUsers::None
            } else if let Some(list) = v.strip_prefix("ids:") {
                CorruptedUsers::Explicit(parse_ids("corrupted", list)?)
            } else if let Some(count) = v.strip_prefix("random:") {
                CorruptedUsers::Random {
                    count: parse_value("corrupted", count.trim())?,
                }
            } else {
                return Err(Error::Config(format!(
                    "corrupted: expected none, ids:<list> or random:<count>, got {v:?}"
                )));
            };
        }
        set!(cfg.corruption_seed, "corruption_seed");
        if let Some(v) = get("corruption_strategy") {
            cfg.corruption_strategy = v.parse()?;
        }
        set!(cfg.corruption_horizon, "corruption_horizon");
        set!(cfg.corruption_floor, "corruption_floor");
        if let Some(v) = get("comparator") {
            cfg.comparator = if v == "oracle_true" {
                ComparatorSpec::OracleTrue
            } else if let Some(list) = v.strip_prefix("ids:") {
                ComparatorSpec::Explicit(parse_ids("comparator", list)?)
            } else {
                return Err(Error::Config(format!(
                    "comparator: expected oracle_true or ids:<list>, got {v:?}"
                )));
            };
        }
        if let Some(v) = get("common_random_numbers") {
            cfg.common_random_numbers = parse_bool("common_random_numbers", v)?;
        }
        if let Some(v) = get("instance") {
            cfg.instance = match v {
                "shared" => InstanceMode::Shared,
                "per_run" => InstanceMode::PerRun,
                other => return Err(Error::Config(format!("instance: unknown mode {other:?}"))),
            };
        }
        cfg.output = get("output").map(PathBuf::from);

        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without building the graph.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if let GraphSource::ErdosRenyi {
            nodes, edge_prob, ..
        } = self.graph
        {
            if nodes < 2 {
                return fail(format!("nodes = {nodes}; need at least 2"));
            }
            if !(0.0..=1.0).contains(&edge_prob) {
                return fail(format!("edge_prob = {edge_prob} outside [0, 1]"));
            }
            if self.budget > nodes {
                return fail(format!("budget {} exceeds node count {nodes}", self.budget));
            }
        }
        if self.dim == 0 {
            return fail("dim must be at least 1".into());
        }
        if self.budget == 0 {
            return fail("budget must be at least 1".into());
        }
        if self.horizon == 0 {
            return fail("horizon must be at least 1".into());
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return fail("no algorithms listed".into());
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return fail("algorithms listed more than once".into());
        }
        if let Some(p) = self.mean_prob {
            if !(p > 0.0 && p <= 1.0) {
                return fail(format!("mean_prob = {p} outside (0, 1]"));
            }
        }
        if let CBarMode::Fixed(c) = self.c_bar {
            if !(c >= 0.0) {
                return fail(format!("c_bar = {c} must be ≥ 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return fail(format!("epsilon = {} outside [0, 1]", self.epsilon));
        }
        if !(0.0..=1.0).contains(&self.corruption_floor) {
            return fail(format!(
                "corruption_floor = {} outside [0, 1]",
                self.corruption_floor
            ));
        }
        self.oracle.validate()?;
        self.learner_params().validate()?;
        if let ComparatorSpec::Explicit(ids) = &self.comparator {
            if ids.len() != self.budget {
                return fail(format!(
                    "comparator lists {} nodes but budget is {}",
                    ids.len(),
                    self.budget
                ));
            }
        }
        Ok(())
    }

    pub fn learner_params(&self) -> crate::learner::CwParams {
        crate::learner::CwParams {
            sigma: self.sigma,
            lambda: self.lambda,
            beta: self.beta,
            c_bar: 0.0,
        }
    }

    /// Every key, defaults included, in canonical order.
    pub fn to_config_string(&self) -> String {
        let mut lines: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| lines.push((k.to_owned(), v));
        match &self.graph {
            GraphSource::ErdosRenyi {
                nodes,
                edge_prob,
                seed,
            } => {
                push("graph", "erdos_renyi".into());
                push("nodes", nodes.to_string());
                push("edge_prob", edge_prob.to_string());
                push("graph_seed", seed.to_string());
            }
            GraphSource::File { path, node_limit } => {
                push("graph", "file".into());
                push("graph_path", path.display().to_string());
                push(
                    "node_limit",
                    node_limit.map_or("none".into(), |l| l.to_string()),
                );
            }
        }
        push("dim", self.dim.to_string());
        push("model_seed", self.model_seed.to_string());
        push(
            "mean_prob",
            self.mean_prob.map_or("none".into(), |p| p.to_string()),
        );
        push("budget", self.budget.to_string());
        push("horizon", self.horizon.to_string());
        push("repetitions", self.repetitions.to_string());
        push("master_seed", self.master_seed.to_string());
        push(
            "algorithms",
            self.algorithms
                .iter()
                .map(|a| a.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        push("sigma", self.sigma.to_string());
        push("lambda", self.lambda.to_string());
        push("beta", self.beta.to_string());
        push(
            "c_bar",
            match self.c_bar {
                CBarMode::Oracle => "oracle".into(),
                CBarMode::SqrtHorizon => "sqrt_t".into(),
                CBarMode::Fixed(c) => c.to_string(),
            },
        );
        push("epsilon", self.epsilon.to_string());
        push("oracle", self.oracle.kind.to_string());
        push("oracle_alpha", self.oracle.alpha.to_string());
        push("oracle_gamma", self.oracle.gamma.to_string());
        push("oracle_mc_samples", self.oracle.mc_samples.to_string());
        push(
            "corrupted",
            match &self.corrupted {
                CorruptedUsers::None => "none".into(),
                CorruptedUsers::Explicit(ids) => format!("ids:{}", join_ids(ids)),
                CorruptedUsers::Random { count } => format!("random:{count}"),
            },
        );
        push("corruption_seed", self.corruption_seed.to_string());
        push("corruption_strategy", self.corruption_strategy.to_string());
        push("corruption_horizon", self.corruption_horizon.to_string());
        push("corruption_floor", self.corruption_floor.to_string());
        push(
            "comparator",
            match &self.comparator {
                ComparatorSpec::OracleTrue => "oracle_true".into(),
                ComparatorSpec::Explicit(ids) => format!("ids:{}", join_ids(ids)),
            },
        );
        push(
            "common_random_numbers",
            self.common_random_numbers.to_string(),
        );
        push(
            "instance",
            match self.instance {
                InstanceMode::Shared => "shared".into(),
                InstanceMode::PerRun => "per_run".into(),
            },
        );
        if let Some(out) = &self.output {
            push("output", out.display().to_string());
        }
        lines
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(
            ExperimentConfig::parse("# nothing\n\n").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn resolved_text_round_trips() {
        let text = "\
graph = erdos_renyi
nodes = 50
edge_prob = 0.3
budget = 2
horizon = 5000
algorithms = cw_imlinucb, imlinucb, cucb, eps_greedy
beta = 3.5
c_bar = sqrt_t
corrupted = ids:34,36
corruption_horizon = 200
common_random_numbers = true
mean_prob = 0.0295
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.budget, 2);
        assert_eq!(cfg.beta, Setting::Fixed(3.5));
        assert_eq!(cfg.corrupted, CorruptedUsers::Explicit(vec![34, 36]));
        let again = ExperimentConfig::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(again, cfg);

        let file = ExperimentConfig::parse(
            "graph = file\ngraph_path = fb.txt\nnode_limit = 300\nbudget = 20\ncorrupted = random:20\n",
        )
        .unwrap();
        assert_eq!(
            ExperimentConfig::parse(&file.to_config_string()).unwrap(),
            file
        );
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(ExperimentConfig::parse("colour = red\n").is_err());
        assert!(ExperimentConfig::parse("dim = 3\ndim = 4\n").is_err());
        assert!(ExperimentConfig::parse("dim 3\n").is_err());
    }

    #[test]
    fn rejects_inconsistent_values() {
        for bad in [
            "nodes = 5\nbudget = 6\n",
            "horizon = 0\n",
            "repetitions = 0\n",
            "algorithms = \n",
            "algorithms = cucb,cucb\n",
            "sigma = -1\n",
            "graph = file\n",
            "graph = file\ngraph_path = x\nnodes = 4\n",
            "oracle = greedy_mc\noracle_mc_samples = 5\n",
            "corrupted = some\n",
            "comparator = ids:1,2\n",
            "common_random_numbers = maybe\n",
        ] {
            assert!(ExperimentConfig::parse(bad).is_err(), "accepted {bad:?}");
        }
    }
}
