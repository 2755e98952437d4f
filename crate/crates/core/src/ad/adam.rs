//! Adam optimizer with bias-corrected moment estimates.

use crate::ad::tensor::Tensor;
use crate::error::{Error, Result};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, key: &str, reason: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    key: key.into(),
                    reason: reason.into(),
                })
            }
        };
        check(
            self.learning_rate.is_finite() && self.learning_rate >= 0.0,
            "adam.learning_rate",
            "must be finite and nonnegative",
        )?;
        check(
            (0.0..1.0).contains(&self.beta1),
            "adam.beta1",
            "must lie in [0, 1)",
        )?;
        check(
            (0.0..1.0).contains(&self.beta2),
            "adam.beta2",
            "must lie in [0, 1)",
        )?;
        check(
            self.epsilon > 0.0,
            "adam.epsilon",
            "must be positive",
        )
    }
}

/// Per-parameter first and second moment accumulators plus the step count.
#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl AdamState {
    /// Fresh state with zero moments shaped after the parameter list.
    pub fn new(params: &[Tensor], cfg: AdamConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            step: 0,
            first: params.iter().map(|p| Tensor::zeros(p.shape().to_vec())).collect(),
            second: params.iter().map(|p| Tensor::zeros(p.shape().to_vec())).collect(),
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one update in place. Each parameter moves by
    /// `−lr · m̂ / (√v̂ + ε)` with bias-corrected moments.
    pub fn update(&mut self, params: &mut [Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(Error::Length {
                what: "optimizer parameter list",
                expected: self.first.len(),
                got: params.len().max(grads.len()),
            });
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first) {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(Error::ShapeMismatch {
                    op: "adam_update",
                    lhs: p.shape().to_vec(),
                    rhs: g.shape().to_vec(),
                });
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let c = self.cfg;
        let mc = 1.0 - c.beta1.powi(t);
        let vc = 1.0 - c.beta2.powi(t);
        for i in 0..params.len() {
            let p = params[i].data_mut();
            let g = grads[i].data();
            let m = self.first[i].data_mut();
            let v = self.second[i].data_mut();
            for e in 0..p.len() {
                m[e] = c.beta1 * m[e] + (1.0 - c.beta1) * g[e];
                v[e] = c.beta2 * v[e] + (1.0 - c.beta2) * g[e] * g[e];
                let m_hat = m[e] / mc;
                let v_hat = v[e] / vc;
                p[e] -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
            }
        }
        Ok(())
    }
}
