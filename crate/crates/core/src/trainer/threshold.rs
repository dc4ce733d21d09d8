use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{ModelKind, SweepRow};
use crate::datasets::DatasetKind;

type CurveKey = (DatasetKind, usize, ModelKind);

/// Seed-mean final TVD per `(dataset, n, model)`, as `(m, mean)` sorted by `m`.
pub fn mean_tvd_curves(rows: &[SweepRow]) -> BTreeMap<CurveKey, Vec<(usize, f64)>> {
    let mut sums: BTreeMap<CurveKey, BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
    for r in rows {
        let slot = sums
            .entry((r.dataset, r.n, r.model))
            .or_default()
            .entry(r.m)
            .or_insert((0.0, 0));
        slot.0 += r.final_tvd;
        slot.1 += 1;
    }
    sums.into_iter()
        .map(|(k, by_m)| {
            let curve = by_m
                .into_iter()
                .map(|(m, (s, c))| (m, s / c as f64))
                .collect();
            (k, curve)
        })
        .collect()
}

/// `m_RBM / m_model` for one dataset and size.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub dataset: DatasetKind,
    pub n: usize,
    pub model: ModelKind,
    pub m_rbm: usize,
    pub m_model: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    pub threshold: f64,
    /// Smallest qualifying `m`; keys without one are absent.
    pub min_hidden: BTreeMap<CurveKey, usize>,
    /// Every key that was evaluated, qualifying or not.
    pub evaluated: Vec<CurveKey>,
    pub ratios: Vec<RatioRow>,
}

impl ThresholdTable {
    pub fn get(&self, dataset: DatasetKind, n: usize, model: ModelKind) -> Option<usize> {
        self.min_hidden.get(&(dataset, n, model)).copied()
    }

    pub fn ratio(&self, dataset: DatasetKind, n: usize, model: ModelKind) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| (r.dataset, r.n, r.model) == (dataset, n, model))
            .map(|r| r.ratio)
    }
}

/// Smallest `m` whose seed-mean final TVD is strictly below `threshold`.
pub fn min_hidden_for_threshold(rows: &[SweepRow], threshold: f64) -> ThresholdTable {
    let curves = mean_tvd_curves(rows);
    let mut min_hidden = BTreeMap::new();
    for (key, curve) in &curves {
        if let Some(&(m, _)) = curve.iter().find(|(_, mean)| *mean < threshold) {
            min_hidden.insert(*key, m);
        }
    }
    let mut ratios = vec![];
    for (&(dataset, n, model), &m_model) in &min_hidden {
        if model == ModelKind::Rbm {
            continue;
        }
        if let Some(&m_rbm) = min_hidden.get(&(dataset, n, ModelKind::Rbm)) {
            ratios.push(RatioRow {
                dataset,
                n,
                model,
                m_rbm,
                m_model,
                ratio: m_rbm as f64 / m_model as f64,
            });
        }
    }
    ThresholdTable {
        threshold,
        min_hidden,
        evaluated: curves.into_keys().collect(),
        ratios,
    }
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties; `None` if either side is constant
/// or fewer than two points are given.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len(), "spearman inputs differ in length");
    if xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let mean = (xs.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / libm::sqrt(sxx * syy))
}
