use std::collections::BTreeMap;

use super::run::RoundRecord;
use crate::error::{Error, Result};

/// Cross-run summary of one algorithm at one round.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub t: usize,
    pub algorithm: String,
    pub mean_cum_regret: f64,
    /// Sample standard deviation across runs over `√R`; 0 for a single run.
    pub stderr: f64,
    pub mean_reward: f64,
    pub reward_stderr: f64,
}

/// Mean and standard error of `values`. The values are sorted first so the
/// result does not depend on run order.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    dev.sort_by(f64::total_cmp);
    let sd = (dev.iter().sum::<f64>() / (n - 1.0)).sqrt();
    (mean, sd / n.sqrt())
}

/// Per-round summaries for every algorithm, ordered by algorithm name then
/// `t`. Every run of an algorithm must cover the same rounds `1..=T`.
pub fn aggregate(runs: &BTreeMap<String, Vec<Vec<RoundRecord>>>) -> Result<Vec<AggregateRow>> {
    let mut rows = Vec::new();
    for (algorithm, algo_runs) in runs {
        let Some(first) = algo_runs.first() else {
            return Err(Error::Format(format!("{algorithm}: no runs")));
        };
        let horizon = first.len();
        for run in algo_runs {
            if run.len() != horizon {
                return Err(Error::Format(format!(
                    "{algorithm}: runs have different lengths ({} vs {horizon})",
                    run.len()
                )));
            }
            if let Some((i, r)) = run.iter().enumerate().find(|(i, r)| r.t != i + 1) {
                return Err(Error::Format(format!(
                    "{algorithm}: run {} has round {} at position {}",
                    r.run_id,
                    r.t,
                    i + 1
                )));
            }
        }
        for i in 0..horizon {
            let regrets: Vec<f64> = algo_runs.iter().map(|r| r[i].cum_regret).collect();
            let rewards: Vec<f64> = algo_runs.iter().map(|r| r[i].reward as f64).collect();
            let (mean_cum_regret, stderr) = mean_and_stderr(&regrets);
            let (mean_reward, reward_stderr) = mean_and_stderr(&rewards);
            rows.push(AggregateRow {
                t: i + 1,
                algorithm: algorithm.clone(),
                mean_cum_regret,
                stderr,
                mean_reward,
                reward_stderr,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(id: usize, regrets: &[f64]) -> Vec<RoundRecord> {
        let mut cum = 0.0;
        regrets
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                cum += r;
                RoundRecord {
                    run_id: id,
                    t: i + 1,
                    seeds: vec![0],
                    reward: 3,
                    opt_reward: 3 + r as usize,
                    inst_regret: r,
                    cum_regret: cum,
                }
            })
            .collect()
    }

    #[test]
    fn single_run_has_zero_stderr() {
        assert_eq!(mean_and_stderr(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn known_stderr() {
        // Sample sd of 1..=4 is √(5/3); over √4.
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn run_order_does_not_matter() {
        let a = vec![
            run(0, &[1.0, 0.0, 2.0]),
            run(1, &[0.0, 0.0, 1.0]),
            run(2, &[3.0, 1.0, 0.0]),
        ];
        let mut b = a.clone();
        b.reverse();
        let ra = aggregate(&BTreeMap::from([("x".to_string(), a)])).unwrap();
        let rb = aggregate(&BTreeMap::from([("x".to_string(), b)])).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(ra[2].mean_cum_regret, 8.0 / 3.0);
    }

    #[test]
    fn ragged_runs_rejected() {
        let runs = vec![run(0, &[1.0, 0.0]), run(1, &[1.0])];
        assert!(aggregate(&BTreeMap::from([("x".to_string(), runs)])).is_err());
    }
}
