use super::params::ParameterStore;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
    RmsProp,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::RmsProp => "rmsprop",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sgd" => Some(OptimizerKind::Sgd),
            "adam" => Some(OptimizerKind::Adam),
            "rmsprop" => Some(OptimizerKind::RmsProp),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    /// Second-moment decay; also the RMSprop decay rate.
    pub beta2: f64,
    pub eps: f64,
    /// Global gradient-norm clip threshold. `None` disables clipping.
    pub clip_norm: Option<f64>,
    /// Decoupled weight decay coefficient.
    pub l2: f64,
}

impl OptimizerConfig {
    pub fn adam(learning_rate: f64) -> Self {
        Self {
            kind: OptimizerKind::Adam,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip_norm: None,
            l2: 0.0,
        }
    }

    pub fn sgd(learning_rate: f64) -> Self {
        Self {
            kind: OptimizerKind::Sgd,
            ..Self::adam(learning_rate)
        }
    }

    pub fn rmsprop(learning_rate: f64) -> Self {
        Self {
            kind: OptimizerKind::RmsProp,
            beta2: 0.9,
            ..Self::adam(learning_rate)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be nonnegative, got {}",
                self.learning_rate
            )));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) || !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::Config("beta1 and beta2 must lie in (0, 1)".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config("eps must be positive".into()));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return Err(Error::Config("clip_norm must be positive".into()));
            }
        }
        if !(self.l2 >= 0.0) {
            return Err(Error::Config("l2 must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Applies one optimizer update using the gradients accumulated in `store`,
/// then zeroes them. `step_index` is 1-based (Adam bias correction).
///
/// Order: global-norm clipping, decoupled weight decay, then the update rule.
pub fn apply_step(store: &mut ParameterStore, cfg: &OptimizerConfig, step_index: u64) -> Result<()> {
    if step_index == 0 {
        return Err(Error::Contract("optimizer step index is 1-based".into()));
    }
    let scale = match cfg.clip_norm {
        Some(max) => {
            let norm = store.grad_norm();
            if norm > max {
                max / norm
            } else {
                1.0
            }
        }
        None => 1.0,
    };
    let lr = cfg.learning_rate;
    let bc1 = 1.0 - cfg.beta1.powi(step_index.min(i32::MAX as u64) as i32);
    let bc2 = 1.0 - cfg.beta2.powi(step_index.min(i32::MAX as u64) as i32);
    for (_, p) in store.iter_mut() {
        let values = p.value.data_mut();
        let grads = p.grad.data_mut();
        if cfg.l2 > 0.0 {
            let decay = 1.0 - lr * cfg.l2;
            values.iter_mut().for_each(|w| *w *= decay);
        }
        match cfg.kind {
            OptimizerKind::Sgd => {
                for (w, g) in values.iter_mut().zip(grads.iter()) {
                    *w -= lr * g * scale;
                }
            }
            OptimizerKind::Adam => {
                for i in 0..values.len() {
                    let g = grads[i] * scale;
                    p.m[i] = cfg.beta1 * p.m[i] + (1.0 - cfg.beta1) * g;
                    p.v[i] = cfg.beta2 * p.v[i] + (1.0 - cfg.beta2) * g * g;
                    let m_hat = p.m[i] / bc1;
                    let v_hat = p.v[i] / bc2;
                    values[i] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
                }
            }
            OptimizerKind::RmsProp => {
                for i in 0..values.len() {
                    let g = grads[i] * scale;
                    p.v[i] = cfg.beta2 * p.v[i] + (1.0 - cfg.beta2) * g * g;
                    values[i] -= lr * g / (p.v[i].sqrt() + cfg.eps);
                }
            }
        }
        grads.iter_mut().for_each(|g| *g = 0.0);
    }
    Ok(())
}

/// Bias-corrected Adam step; `cfg.kind` is ignored.
pub fn adam_step(store: &mut ParameterStore, cfg: &OptimizerConfig, step_index: u64) -> Result<()> {
    let cfg = OptimizerConfig {
        kind: OptimizerKind::Adam,
        ..cfg.clone()
    };
    apply_step(store, &cfg, step_index)
}

/// An optimizer config together with its running step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimizer {
    pub config: OptimizerConfig,
    steps: u64,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, steps: 0 })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self, store: &mut ParameterStore) -> Result<()> {
        self.steps += 1;
        apply_step(store, &self.config, self.steps)
    }
}
