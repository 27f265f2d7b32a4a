use std::fmt::Write;

use super::aggregate::AggregateRow;
use crate::error::{Error, Result};

/// Plain-text table of each algorithm's final-round regret, best first.
pub fn render_report(rows: &[AggregateRow]) -> Result<String> {
    let mut finals: Vec<&AggregateRow> = Vec::new();
    for row in rows {
        match finals.iter_mut().find(|r| r.algorithm == row.algorithm) {
            Some(slot) if row.t > slot.t => *slot = row,
            Some(_) => {}
            None => finals.push(row),
        }
    }
    if finals.is_empty() {
        return Err(Error::Format("aggregate has no rows".into()));
    }
    finals.sort_by(|a, b| {
        a.mean_cum_regret
            .total_cmp(&b.mean_cum_regret)
            .then_with(|| a.algorithm.cmp(&b.algorithm))
    });

    let width = finals
        .iter()
        .map(|r| r.algorithm.len())
        .max()
        .unwrap_or(0)
        .max(9);
    let mut out = String::new();
    writeln!(
        out,
        "{:<width$}  {:>7}  {:>15}  {:>10}  {:>11}",
        "algorithm", "rounds", "mean_cum_regret", "stderr", "mean_reward"
    )
    .unwrap();
    for r in finals {
        writeln!(
            out,
            "{:<width$}  {:>7}  {:>15.3}  {:>10.3}  {:>11.3}",
            r.algorithm, r.t, r.mean_cum_regret, r.stderr, r.mean_reward
        )
        .unwrap();
    }
    Ok(out)
}
