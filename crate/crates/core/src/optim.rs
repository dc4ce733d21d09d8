//! AMSGrad without bias correction.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmsGradConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AmsGradConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AmsGradConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && self.lr.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.eps.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::format!(
                "AMSGrad hyperparameters out of range: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmsGradState {
    pub step: u64,
    pub m1: Vec<f64>,
    pub v2: Vec<f64>,
    pub vhat: Vec<f64>,
    pub hyper: AmsGradConfig,
}

impl AmsGradState {
    pub fn new(len: usize, hyper: AmsGradConfig) -> Result<Self> {
        hyper.validate()?;
        Ok(Self {
            step: 0,
            m1: vec![0.0; len],
            v2: vec![0.0; len],
            vhat: vec![0.0; len],
            hyper,
        })
    }

    /// Applies one update to `params` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        for (field, len) in [("params", params.len()), ("grad", grad.len())] {
            if len != self.m1.len() {
                return Err(Error::ShapeMismatch {
                    field: field.into(),
                    expected: self.m1.len(),
                    found: len,
                });
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient".into()));
        }
        let AmsGradConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.hyper;
        for k in 0..params.len() {
            let g = grad[k];
            self.m1[k] = beta1 * self.m1[k] + (1.0 - beta1) * g;
            self.v2[k] = beta2 * self.v2[k] + (1.0 - beta2) * g * g;
            self.vhat[k] = self.vhat[k].max(self.v2[k]);
            params[k] -= lr * self.m1[k] / (libm::sqrt(self.vhat[k]) + eps);
        }
        self.step += 1;
        Ok(())
    }
}
