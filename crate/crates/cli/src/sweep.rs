//! Parallel, resumable sweeps and their JSON summary.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde_json::{json, Value};
use sqrbm_core::datasets::DatasetKind;
use sqrbm_core::trainer::{
    mean_tvd_curves, min_hidden_for_threshold, sweep_jobs, train_one, ModelKind, RunConfig,
    SweepRow,
};

use crate::io::num;
use crate::CliError;

pub type RowKey = (DatasetKind, usize, usize, ModelKind, u64);

/// A run that failed, with the error text.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub key: RowKey,
    pub message: String,
}

/// Runs every `(config, seed)` of `grid` whose key is not in `done` on a pool of `jobs`
/// threads. Returned rows are sorted by key regardless of completion order.
pub fn run_grid(
    grid: &[RunConfig],
    done: &BTreeSet<RowKey>,
    jobs: usize,
) -> Result<(Vec<SweepRow>, Vec<Failure>), CliError> {
    let pending: Vec<(usize, u64)> = sweep_jobs(grid)
        .into_iter()
        .filter(|&(k, seed)| {
            let c = &grid[k];
            !done.contains(&(c.dataset, c.n, c.m, c.model, seed))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<SweepRow, Failure>> = pool.install(|| {
        pending
            .par_iter()
            .map(|&(k, seed)| {
                let c = &grid[k];
                train_one(c, seed)
                    .and_then(|r| SweepRow::from_result(c, &r))
                    .map_err(|e| Failure {
                        key: (c.dataset, c.n, c.m, c.model, seed),
                        message: e.to_string(),
                    })
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(f) => failures.push(f),
        }
    }
    rows.sort_by_key(SweepRow::key);
    failures.sort_by_key(|f| f.key);
    Ok((rows, failures))
}

/// Merges two row sets, keeping the first occurrence of each key, sorted.
pub fn merge_rows(existing: Vec<SweepRow>, fresh: Vec<SweepRow>) -> Vec<SweepRow> {
    let mut seen = BTreeSet::new();
    let mut out: Vec<SweepRow> = existing
        .into_iter()
        .chain(fresh)
        .filter(|r| seen.insert(r.key()))
        .collect();
    out.sort_by_key(SweepRow::key);
    out
}

/// Seed-mean curves, minimum hidden units under the threshold, and the RBM ratios.
pub fn summary(rows: &[SweepRow], threshold: f64) -> Value {
    let curves: Vec<Value> = mean_tvd_curves(rows)
        .into_iter()
        .map(|((dataset, n, model), curve)| {
            let points: Vec<Value> = curve
                .into_iter()
                .map(|(m, mean)| json!({ "m": m, "mean_final_tvd": num(mean) }))
                .collect();
            json!({ "dataset": dataset.name(), "n": n, "model": model.name(), "points": points })
        })
        .collect();
    let table = min_hidden_for_threshold(rows, threshold);
    let min_hidden: Vec<Value> = table
        .evaluated
        .iter()
        .map(|&(dataset, n, model)| {
            json!({
                "dataset": dataset.name(),
                "n": n,
                "model": model.name(),
                "min_hidden": table.get(dataset, n, model),
            })
        })
        .collect();
    let ratios: Vec<Value> = table
        .ratios
        .iter()
        .map(|r| {
            json!({
                "dataset": r.dataset.name(),
                "n": r.n,
                "model": r.model.name(),
                "m_rbm": r.m_rbm,
                "m_model": r.m_model,
                "ratio": r.ratio,
            })
        })
        .collect();
    json!({
        "rows": rows.len(),
        "threshold": threshold,
        "curves": curves,
        "min_hidden": min_hidden,
        "ratios": ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<RunConfig> {
        [1, 2]
            .into_iter()
            .map(|m| RunConfig {
                max_iters: 5,
                seeds: vec![0, 1],
                ..RunConfig::new(ModelKind::SqRbmXz, 3, m, DatasetKind::Parity)
            })
            .collect()
    }

    #[test]
    fn parallel_matches_sequential() {
        let (rows, failures) = run_grid(&grid(), &BTreeSet::new(), 3).unwrap();
        assert!(failures.is_empty());
        assert_eq!(rows, sqrbm_core::trainer::sweep(&grid()).unwrap());
    }

    #[test]
    fn done_keys_are_skipped() {
        let done: BTreeSet<RowKey> = [(DatasetKind::Parity, 3, 1, ModelKind::SqRbmXz, 0)].into();
        let (rows, _) = run_grid(&grid(), &done, 1).unwrap();
        assert_eq!(rows.len(), 3);
        let (all, _) = run_grid(&grid(), &BTreeSet::new(), 1).unwrap();
        assert_eq!(merge_rows(all[..1].to_vec(), rows), all);
    }

    #[test]
    fn summary_reports_absent_thresholds_as_null() {
        let (rows, _) = run_grid(&grid(), &BTreeSet::new(), 1).unwrap();
        let s = summary(&rows, 1e-9);
        assert_eq!(s["min_hidden"][0]["min_hidden"], Value::Null);
        assert_eq!(s["curves"][0]["points"].as_array().unwrap().len(), 2);
    }
}
