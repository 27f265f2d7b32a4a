//! On-disk layout of an experiment directory:
//!
//! ```text
//! config.resolved              every key with defaults filled in
//! graph.txt, model.txt         the instance (suffixed `_<run>` per run)
//! instance.txt                 comparator, budgets and resolved λ, β
//! runs/<algorithm>/run_<r>.csv one row per round
//! aggregate.csv                per-round means and standard errors
//! budget.csv                   realized vs scheduled budget per corrupted user
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::aggregate::{aggregate, AggregateRow};
use super::config::InstanceMode;
use super::run::{ExperimentResult, RoundRecord};
use crate::error::{Error, Result};

pub const RUN_HEADER: [&str; 7] = [
    "run_id",
    "t",
    "seeds",
    "reward",
    "opt_reward",
    "inst_regret",
    "cum_regret",
];
pub const AGGREGATE_HEADER: [&str; 6] = [
    "t",
    "algorithm",
    "mean_cum_regret",
    "stderr",
    "mean_reward",
    "reward_stderr",
];

/// Creates `dir`, refusing to reuse a non-empty one unless `force` is set.
pub fn prepare_out_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let non_empty = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .next()
            .is_some();
        if non_empty && !force {
            return Err(Error::Config(format!(
                "{} already exists; pass --force to overwrite",
                dir.display()
            )));
        }
        let runs = dir.join("runs");
        if force && runs.exists() {
            fs::remove_dir_all(&runs).map_err(|e| Error::io(&runs, e))?;
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn run_csv_path(dir: &Path, algorithm: &str, run_id: usize) -> PathBuf {
    dir.join("runs")
        .join(algorithm)
        .join(format!("run_{run_id:03}.csv"))
}

fn join_seeds(seeds: &[usize]) -> String {
    seeds
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_run_csv(path: &Path, rounds: &[RoundRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RUN_HEADER)?;
    for r in rounds {
        w.write_record([
            r.run_id.to_string(),
            r.t.to_string(),
            join_seeds(&r.seeds),
            r.reward.to_string(),
            r.opt_reward.to_string(),
            r.inst_regret.to_string(),
            r.cum_regret.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("bad {name} {s:?}"),
    })
}

pub fn read_run_csv(path: &Path) -> Result<Vec<RoundRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(RUN_HEADER) {
        return Err(Error::Format(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != RUN_HEADER.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("expected {} fields", RUN_HEADER.len()),
            });
        }
        let seeds = rec[2]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| field(path, line, "seed", s))
            .collect::<Result<Vec<usize>>>()?;
        out.push(RoundRecord {
            run_id: field(path, line, "run_id", &rec[0])?,
            t: field(path, line, "t", &rec[1])?,
            seeds,
            reward: field(path, line, "reward", &rec[3])?,
            opt_reward: field(path, line, "opt_reward", &rec[4])?,
            inst_regret: field(path, line, "inst_regret", &rec[5])?,
            cum_regret: field(path, line, "cum_regret", &rec[6])?,
        });
    }
    Ok(out)
}

/// Reads every `runs/<algorithm>/run_*.csv` under `dir`, runs ordered by id.
pub fn read_runs(dir: &Path) -> Result<BTreeMap<String, Vec<Vec<RoundRecord>>>> {
    let runs_dir = dir.join("runs");
    let mut out = BTreeMap::new();
    let entries = fs::read_dir(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(&runs_dir, e))?;
        let algo_dir = entry.path();
        if !algo_dir.is_dir() {
            continue;
        }
        let algorithm = entry.file_name().to_string_lossy().into_owned();
        let mut files: Vec<PathBuf> = fs::read_dir(&algo_dir)
            .map_err(|e| Error::io(&algo_dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        let mut runs = files
            .iter()
            .map(|p| read_run_csv(p))
            .collect::<Result<Vec<_>>>()?;
        runs.sort_by_key(|r| r.first().map_or(0, |x| x.run_id));
        if !runs.is_empty() {
            out.insert(algorithm, runs);
        }
    }
    if out.is_empty() {
        return Err(Error::Format(format!(
            "no run files under {}",
            runs_dir.display()
        )));
    }
    Ok(out)
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.algorithm.clone(),
            r.mean_cum_regret.to_string(),
            r.stderr.to_string(),
            r.mean_reward.to_string(),
            r.reward_stderr.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(AGGREGATE_HEADER) {
        return Err(Error::Format(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != AGGREGATE_HEADER.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("expected {} fields", AGGREGATE_HEADER.len()),
            });
        }
        out.push(AggregateRow {
            t: field(path, line, "t", &rec[0])?,
            algorithm: rec[1].to_owned(),
            mean_cum_regret: field(path, line, "mean_cum_regret", &rec[2])?,
            stderr: field(path, line, "stderr", &rec[3])?,
            mean_reward: field(path, line, "mean_reward", &rec[4])?,
            reward_stderr: field(path, line, "reward_stderr", &rec[5])?,
        });
    }
    Ok(out)
}

/// Recomputes `aggregate.csv` content from the run files in `dir`.
pub fn aggregate_dir(dir: &Path) -> Result<Vec<AggregateRow>> {
    aggregate(&read_runs(dir)?)
}

/// Writes the full experiment directory. `dir` must already exist.
pub fn write_experiment(dir: &Path, result: &ExperimentResult) -> Result<()> {
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write("config.resolved", result.config.to_config_string())?;

    for (i, inst) in result.instances.iter().enumerate() {
        let suffix = match result.config.instance {
            InstanceMode::Shared => String::new(),
            InstanceMode::PerRun => format!("_{i:03}"),
        };
        inst.graph
            .write_edge_list(&dir.join(format!("graph{suffix}.txt")))?;
        inst.model.save(&dir.join(format!("model{suffix}.txt")))?;
        write(
            &format!("instance{suffix}.txt"),
            inst.summary(&result.config),
        )?;
    }

    let mut grouped: BTreeMap<String, Vec<Vec<RoundRecord>>> = BTreeMap::new();
    for run in &result.runs {
        let name = run.algorithm.as_str();
        write_run_csv(&run_csv_path(dir, name, run.run_id), &run.rounds)?;
        grouped
            .entry(name.to_owned())
            .or_default()
            .push(run.rounds.clone());
    }
    write_aggregate_csv(&dir.join("aggregate.csv"), &aggregate(&grouped)?)?;

    let budget_path = dir.join("budget.csv");
    let mut w = csv::Writer::from_path(&budget_path)?;
    w.write_record(["algorithm", "run_id", "user", "realized", "scheduled"])?;
    for run in &result.runs {
        let inst = result.instance_for(run.run_id);
        for &u in inst.schedule.corrupted_users() {
            w.write_record([
                run.algorithm.as_str().to_owned(),
                run.run_id.to_string(),
                u.to_string(),
                run.realized_budget.per_user[u].to_string(),
                inst.budget.per_user[u].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&budget_path, e))
}
