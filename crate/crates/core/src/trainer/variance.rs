use alloc::vec::Vec;
use core::fmt;

use super::{dataset_seed, ModelKind};
use crate::datasets::parity;
use crate::grad::analytic_gradient;
use crate::model::{init_uniform, Pauli};
use crate::{Error, Result};

/// The tracked parameter `a_1`, `b_1^P` or `w_{1,1}^{Z,P}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamFamily {
    A,
    B,
    W,
}

impl ParamFamily {
    pub const ALL: [ParamFamily; 3] = [ParamFamily::A, ParamFamily::B, ParamFamily::W];

    pub const fn name(self) -> &'static str {
        match self {
            ParamFamily::A => "a",
            ParamFamily::B => "b",
            ParamFamily::W => "w",
        }
    }
}

impl fmt::Display for ParamFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sample variance with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStat {
    pub variance: f64,
    pub std_error: f64,
}

impl SampleStat {
    /// Unbiased variance; the standard error uses the fourth central moment,
    /// `SE² = (μ₄ − σ⁴ (k−3)/(k−1)) / k`.
    pub fn from_samples(xs: &[f64]) -> Self {
        let k = xs.len();
        if k < 2 {
            return Self {
                variance: 0.0,
                std_error: 0.0,
            };
        }
        let kf = k as f64;
        let mean = xs.iter().sum::<f64>() / kf;
        let (mut m2, mut m4) = (0.0, 0.0);
        for x in xs {
            let d = (x - mean) * (x - mean);
            m2 += d;
            m4 += d * d;
        }
        let variance = m2 / (kf - 1.0);
        let mu4 = m4 / kf;
        let se2 = (mu4 - variance * variance * (kf - 3.0) / (kf - 1.0)) / kf;
        Self {
            variance,
            std_error: libm::sqrt(se2.max(0.0)),
        }
    }
}

/// Variances of one tracked family for one `(model, n, m)`, indexed X, Y, Z.
/// `a_1` is a Z field and fills only the Z slot.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRow {
    pub model: ModelKind,
    pub n: usize,
    pub m: usize,
    pub family: ParamFamily,
    pub channels: [Option<SampleStat>; 3],
}

impl VarianceRow {
    pub fn get(&self, op: Pauli) -> Option<SampleStat> {
        op.xyz_index().and_then(|k| self.channels[k])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceStudy {
    pub models: Vec<ModelKind>,
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub draws: usize,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

/// Seed for one draw; distinct across models, sizes and draws.
fn draw_seed(base: u64, model: ModelKind, n: usize, m: usize, draw: usize) -> u64 {
    let mut s = dataset_seed(base ^ model as u64);
    s = dataset_seed(s ^ n as u64);
    s = dataset_seed(s ^ m as u64);
    dataset_seed(s ^ draw as u64)
}

/// Gradient variance of `a_1`, `b_1^P`, `w_{1,1}^{Z,P}` over random initializations,
/// against the parity target. Rows ordered by model, n, m, family.
pub fn gradient_variance_study(study: &VarianceStudy) -> Result<Vec<VarianceRow>> {
    if study.draws == 0 {
        return Err(Error::InvalidConfig("draws must be at least 1".into()));
    }
    if !(study.lo.is_finite() && study.hi.is_finite() && study.lo < study.hi) {
        return Err(Error::InvalidRange {
            lo: study.lo,
            hi: study.hi,
        });
    }
    let mut rows = Vec::new();
    for &model in &study.models {
        for &n in &study.ns {
            let q = parity(n)?;
            for &m in &study.ms {
                let spec = model.spec(n, m)?;
                let ops: Vec<Pauli> = spec.hidden_ops().iter().collect();
                // samples[family][channel] over draws
                let mut a = Vec::with_capacity(study.draws);
                let mut b = vec_of(ops.len(), study.draws);
                let mut w = vec_of(ops.len(), study.draws);
                for draw in 0..study.draws {
                    let seed = draw_seed(study.seed, model, n, m, draw);
                    let params = init_uniform(&spec, seed, study.lo, study.hi)?;
                    let g = analytic_gradient(&spec, &params, &q)?;
                    a.push(g.visible[0]);
                    for (c, ch) in g.channels.iter().enumerate() {
                        b[c].push(ch.bias[0]);
                        w[c].push(ch.weights[0]);
                    }
                }
                let mut a_row = [None; 3];
                a_row[2] = Some(SampleStat::from_samples(&a));
                rows.push(VarianceRow {
                    model,
                    n,
                    m,
                    family: ParamFamily::A,
                    channels: a_row,
                });
                for (family, samples) in [(ParamFamily::B, &b), (ParamFamily::W, &w)] {
                    let mut channels = [None; 3];
                    for (op, xs) in ops.iter().zip(samples) {
                        let k = op
                            .xyz_index()
                            .expect("hidden operators are not the identity");
                        channels[k] = Some(SampleStat::from_samples(xs));
                    }
                    rows.push(VarianceRow {
                        model,
                        n,
                        m,
                        family,
                        channels,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn vec_of(k: usize, cap: usize) -> Vec<Vec<f64>> {
    (0..k).map(|_| Vec::with_capacity(cap)).collect()
}
