//! Adam with mask-aware moment state, plus learning-rate schedules.

use crate::error::{Error, Result};
use crate::network::{DenseNetwork, Gradients};
use crate::tensor::Matrix;
use serde::{Deserialize, Serialize};

/// First/second moment estimates for every parameter, shaped like the
/// network they belong to. Moments at masked weight positions are held at
/// exactly zero.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m_weights: Vec<Matrix>,
    pub v_weights: Vec<Matrix>,
    pub m_biases: Vec<Vec<f64>>,
    pub v_biases: Vec<Vec<f64>>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(net: &DenseNetwork, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            m_weights: net
                .layers()
                .iter()
                .map(|l| Matrix::zeros(l.fan_in(), l.fan_out()))
                .collect(),
            v_weights: net
                .layers()
                .iter()
                .map(|l| Matrix::zeros(l.fan_in(), l.fan_out()))
                .collect(),
            m_biases: net.layers().iter().map(|l| vec![0.0; l.fan_out()]).collect(),
            v_biases: net.layers().iter().map(|l| vec![0.0; l.fan_out()]).collect(),
            step_count: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    /// Resets moments at masked weight positions to exactly zero. Called
    /// after pruning so freshly stripped connections carry no stale
    /// momentum; idempotent for positions already pruned.
    pub fn zero_masked(&mut self, net: &DenseNetwork) {
        for (l, layer) in net.layers().iter().enumerate() {
            let mask = layer.mask.as_slice();
            for ((m, v), &keep) in self.m_weights[l]
                .as_mut_slice()
                .iter_mut()
                .zip(self.v_weights[l].as_mut_slice().iter_mut())
                .zip(mask)
            {
                if keep == 0.0 {
                    *m = 0.0;
                    *v = 0.0;
                }
            }
        }
    }
}

/// One Adam step with bias correction and decoupled weight decay.
///
/// Per parameter: `m <- b1*m + (1-b1)*g`, `v <- b2*v + (1-b2)*g^2`,
/// `theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)`. Weight decay is
/// decoupled and applied to the weights after the Adam delta,
/// `theta <- theta * (1 - lr * wd)`; biases are not decayed. Masked weights
/// and their moments are hard-zeroed at the end of the step.
pub fn adam_step(
    net: &mut DenseNetwork,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
) -> Result<()> {
    if lr <= 0.0 {
        return Err(Error::Config(format!("learning rate must be > 0, got {lr}")));
    }
    if !grads.is_finite() {
        return Err(Error::Numeric("non-finite gradient entry".into()));
    }

    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);

    for (l, layer) in net.layers.iter_mut().enumerate() {
        let gw = grads.weights[l].as_slice();
        let mask = layer.mask.as_slice();
        let weights = layer.weights.as_mut_slice();
        let m = state.m_weights[l].as_mut_slice();
        let v = state.v_weights[l].as_mut_slice();
        for i in 0..weights.len() {
            let g = gw[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            weights[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            if weight_decay != 0.0 && mask[i] != 0.0 {
                weights[i] -= lr * weight_decay * weights[i];
            }
            if mask[i] == 0.0 {
                weights[i] = 0.0;
                m[i] = 0.0;
                v[i] = 0.0;
            }
        }

        let gb = &grads.biases[l];
        let mb = &mut state.m_biases[l];
        let vb = &mut state.v_biases[l];
        for j in 0..layer.bias.len() {
            let g = gb[j];
            mb[j] = b1 * mb[j] + (1.0 - b1) * g;
            vb[j] = b2 * vb[j] + (1.0 - b2) * g * g;
            let m_hat = mb[j] / bc1;
            let v_hat = vb[j] / bc2;
            layer.bias[j] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

/// Learning-rate schedule shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Cosine,
    WarmupCosine,
}

/// Epoch-granularity learning-rate schedule.
///
/// Warmup rises linearly to `lr_max` over `warmup_epochs`, then cosine
/// annealing decays to exactly `lr_min` at the final epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub lr_max: f64,
    pub lr_min: f64,
    pub warmup_epochs: usize,
    pub total_epochs: usize,
}

impl ScheduleSpec {
    pub fn constant(lr: f64, total_epochs: usize) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            lr_max: lr,
            lr_min: lr,
            warmup_epochs: 0,
            total_epochs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_epochs == 0 {
            return Err(Error::Config("schedule needs total_epochs >= 1".into()));
        }
        if !(self.lr_max > 0.0) {
            return Err(Error::Config(format!(
                "lr_max must be > 0, got {}",
                self.lr_max
            )));
        }
        if self.lr_min > self.lr_max {
            return Err(Error::Config(format!(
                "lr_min {} exceeds lr_max {}",
                self.lr_min, self.lr_max
            )));
        }
        if self.kind == ScheduleKind::WarmupCosine && self.warmup_epochs >= self.total_epochs {
            return Err(Error::Config(format!(
                "warmup_epochs {} must be < total_epochs {}",
                self.warmup_epochs, self.total_epochs
            )));
        }
        Ok(())
    }

    /// Learning rate for `epoch` in `0..total_epochs`.
    pub fn lr_at(&self, epoch: usize) -> Result<f64> {
        if epoch >= self.total_epochs {
            return Err(Error::Config(format!(
                "epoch {} out of range for a {}-epoch schedule",
                epoch, self.total_epochs
            )));
        }
        if self.kind == ScheduleKind::Constant {
            return Ok(self.lr_max);
        }
        let warmup = if self.kind == ScheduleKind::WarmupCosine {
            self.warmup_epochs
        } else {
            0
        };
        if epoch < warmup {
            return Ok(self.lr_max * (epoch + 1) as f64 / warmup as f64);
        }
        let t = (epoch - warmup) as f64;
        let span = self.total_epochs - warmup - 1;
        if span == 0 {
            return Ok(self.lr_min);
        }
        let cos = (std::f64::consts::PI * t / span as f64).cos();
        Ok(self.lr_min + 0.5 * (self.lr_max - self.lr_min) * (1.0 + cos))
    }
}
