mod common;

use std::fs;
use std::path::Path;

use cwim::harness::{
    aggregate_dir, build_instance, mean_and_stderr, prepare_out_dir, read_aggregate_csv,
    run_experiment, write_experiment, ExperimentConfig,
};
use cwim::oracle::degree_discount;
use cwim::Graph;

const SMALL: &str = "
nodes = 10
edge_prob = 0.3
graph_seed = 3
dim = 6
model_seed = 3
horizon = 80
repetitions = 3
master_seed = 9
algorithms = cw_imlinucb, imlinucb, cucb, eps_greedy
corrupted = random:1
corruption_horizon = 20
";

fn run_into(cfg: &ExperimentConfig, jobs: usize, dir: &Path) {
    prepare_out_dir(dir, false).unwrap();
    let res = run_experiment(cfg, jobs).unwrap();
    write_experiment(dir, &res).unwrap();
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for e in fs::read_dir(&p).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let cfg = ExperimentConfig::parse(SMALL).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_into(&cfg, 1, &a);
    run_into(&cfg, 3, &b);
    let (ta, tb) = (tree(&a), tree(&b));
    assert!(ta.len() >= 4 * 3 + 5);
    assert_eq!(ta, tb);
}

#[test]
fn reaggregation_matches_written_file() {
    let cfg = ExperimentConfig::parse(SMALL).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    run_into(&cfg, 1, tmp.path());
    let written = read_aggregate_csv(&tmp.path().join("aggregate.csv")).unwrap();
    assert_eq!(aggregate_dir(tmp.path()).unwrap(), written);
    assert_eq!(written.len(), 4 * cfg.horizon);
}

#[test]
fn non_empty_output_needs_force() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("x"), "keep").unwrap();
    assert!(prepare_out_dir(tmp.path(), false).unwrap_err().is_config());
    prepare_out_dir(tmp.path(), true).unwrap();
    assert!(tmp.path().join("x").exists());
}

#[test]
fn replaying_the_comparator_has_zero_mean_regret() {
    let base = "
nodes = 12
edge_prob = 0.3
graph_seed = 4
dim = 6
model_seed = 4
horizon = 200
repetitions = 30
algorithms = replay_comparator
corrupted = none
";
    let cfg = ExperimentConfig::parse(base).unwrap();
    let res = run_experiment(&cfg, 1).unwrap();
    let finals: Vec<f64> = res.runs.iter().map(|r| r.final_regret()).collect();
    let (mean, se) = mean_and_stderr(&finals);
    assert!(se > 0.0);
    assert!(mean.abs() <= 4.0 * se, "mean {mean}, stderr {se}");

    // With shared cascade coins the regret vanishes round by round.
    let cfg = ExperimentConfig::parse(&format!("{base}common_random_numbers = true\n")).unwrap();
    let res = run_experiment(&cfg, 1).unwrap();
    for run in &res.runs {
        assert!(run.rounds.iter().all(|r| r.inst_regret == 0.0));
    }
}

#[test]
fn per_run_instances_differ() {
    let cfg = ExperimentConfig::parse(&format!("{SMALL}instance = per_run\n")).unwrap();
    let a = build_instance(&cfg, 0).unwrap();
    let b = build_instance(&cfg, 1).unwrap();
    assert!(a.graph.edges() != b.graph.edges() || a.model.true_probs() != b.model.true_probs());
    let res = run_experiment(&cfg, 1).unwrap();
    assert_eq!(res.instances.len(), cfg.repetitions);
    let tmp = tempfile::tempdir().unwrap();
    write_experiment(tmp.path(), &res).unwrap();
    assert!(tmp.path().join("graph_002.txt").exists());
    assert!(!tmp.path().join("graph.txt").exists());
}

#[test]
fn config_errors_surface_before_running() {
    for bad in [
        "horizon = 0",
        "budget = 50",
        "algorithms = cw_imlinucb, nope",
        "comparator = ids:1,1",
        "dim = 4\ndim = 5",
        "colour = red",
    ] {
        let text = format!("{SMALL}{bad}\n");
        let err = ExperimentConfig::parse(&text)
            .and_then(|c| run_experiment(&c, 1).map(|_| ()))
            .unwrap_err();
        assert!(err.is_config(), "{bad}: {err}");
    }
}

#[test]
fn comparator_is_the_oracle_on_true_probabilities() {
    let cfg = ExperimentConfig::parse(SMALL).unwrap();
    let inst = build_instance(&cfg, 0).unwrap();
    let want = degree_discount(&inst.graph, cfg.budget, &inst.model.true_probs()).unwrap();
    let mut want = want;
    want.sort_unstable();
    assert_eq!(inst.comparator, want);
}

#[test]
fn degree_discount_edge_cases() {
    // All-zero probabilities leave every node tied: smallest ids win.
    let g = Graph::new(4, vec![(2, 3), (3, 1)]).unwrap();
    let mut got = degree_discount(&g, 2, &[0.0, 0.0]).unwrap();
    got.sort_unstable();
    assert_eq!(got, vec![0, 1]);
    let g = Graph::new(3, vec![]).unwrap();
    assert_eq!(degree_discount(&g, 2, &[]).unwrap(), vec![0, 1]);
    // A certain chain is covered from its source.
    let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
    assert_eq!(degree_discount(&g, 1, &[1.0; 3]).unwrap(), vec![0]);
}
