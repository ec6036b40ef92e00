use crate::discriminator::{preset_desk, DiscDims, KernelSpec};
use crate::error::{Error, Result};
use crate::generator::GenDims;
use crate::numerics::OptimizerConfig;

/// Generator and discriminator architecture.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub vocab: usize,
    pub horizon: usize,
    pub gen_embed: usize,
    pub gen_hidden: usize,
    pub disc_embed: usize,
    pub kernels: Vec<KernelSpec>,
    pub keep_prob: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            vocab: 100,
            horizon: 16,
            gen_embed: 32,
            gen_hidden: 32,
            disc_embed: 16,
            kernels: preset_desk(),
            keep_prob: 0.75,
        }
    }
}

impl ModelConfig {
    pub fn gen_dims(&self) -> GenDims {
        GenDims {
            vocab: self.vocab,
            embed: self.gen_embed,
            hidden: self.gen_hidden,
            horizon: self.horizon,
        }
    }

    pub fn disc_dims(&self) -> DiscDims {
        DiscDims {
            vocab: self.vocab,
            horizon: self.horizon,
            embed: self.disc_embed,
            kernels: self.kernels.clone(),
            keep_prob: self.keep_prob,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gen_dims().validate()?;
        self.disc_dims().validate()
    }
}

/// Knobs of the adversarial loop and the baseline trainers.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub g_steps: usize,
    pub d_steps: usize,
    /// Discriminator epochs per d-step.
    pub k: usize,
    pub rollout_n: usize,
    pub pretrain_gen_epochs: usize,
    /// Stop generator pre-training once the relative improvement over
    /// `plateau_window` epochs drops below `plateau_tol`.
    pub pretrain_plateau: bool,
    pub plateau_window: usize,
    pub plateau_tol: f64,
    /// Fresh negative sets used to pre-train the discriminator.
    pub pretrain_disc_steps: usize,
    /// Epochs per pre-training negative set.
    pub pretrain_disc_epochs: usize,
    pub total_adversarial_rounds: usize,
    pub gen_batch: usize,
    /// Episodes per policy-gradient update.
    pub pg_batch: usize,
    pub disc_batch: usize,
    pub gen_pretrain_opt: OptimizerConfig,
    pub gen_adv_opt: OptimizerConfig,
    pub disc_opt: OptimizerConfig,
    pub eval_every: usize,
    pub eval_samples: usize,
    /// Stop after this many evaluations without improvement.
    pub early_stop_patience: Option<usize>,
    /// Per-epoch decrement of the scheduled-sampling guidance probability.
    pub ss_decay: f64,
    pub bleu_n: usize,
    pub baseline: Option<f64>,
    /// Record elapsed seconds in the metric log (breaks byte-identical reruns).
    pub log_wallclock: bool,
    /// Evaluation points whose checkpoints are kept on disk.
    pub keep_checkpoints: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let disc_opt = OptimizerConfig {
            l2: 0.0,
            ..OptimizerConfig::adam(1e-4)
        };
        Self {
            g_steps: 1,
            d_steps: 1,
            k: 10,
            rollout_n: 16,
            pretrain_gen_epochs: 150,
            pretrain_plateau: true,
            plateau_window: 5,
            plateau_tol: 1e-4,
            pretrain_disc_steps: 10,
            pretrain_disc_epochs: 3,
            total_adversarial_rounds: 30,
            gen_batch: 64,
            pg_batch: 64,
            disc_batch: 64,
            gen_pretrain_opt: OptimizerConfig::adam(1e-2),
            gen_adv_opt: OptimizerConfig::adam(1e-3),
            disc_opt,
            eval_every: 1,
            eval_samples: 5000,
            early_stop_patience: None,
            ss_decay: 0.002,
            bleu_n: 2,
            baseline: None,
            log_wallclock: false,
            keep_checkpoints: 1,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("g_steps", self.g_steps),
            ("d_steps", self.d_steps),
            ("k", self.k),
            ("rollout_n", self.rollout_n),
            ("gen_batch", self.gen_batch),
            ("pg_batch", self.pg_batch),
            ("disc_batch", self.disc_batch),
            ("eval_every", self.eval_every),
            ("eval_samples", self.eval_samples),
            ("bleu_n", self.bleu_n),
            ("plateau_window", self.plateau_window),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.early_stop_patience == Some(0) {
            return Err(Error::Config("early_stop_patience must be at least 1".into()));
        }
        if !(self.ss_decay >= 0.0 && self.ss_decay.is_finite()) {
            return Err(Error::Config("ss_decay must be nonnegative".into()));
        }
        if !(self.plateau_tol >= 0.0) {
            return Err(Error::Config("plateau_tol must be nonnegative".into()));
        }
        if let Some(b) = self.baseline {
            if !b.is_finite() {
                return Err(Error::Config("baseline must be finite".into()));
            }
        }
        for (name, o) in [
            ("gen_pretrain_opt", &self.gen_pretrain_opt),
            ("gen_adv_opt", &self.gen_adv_opt),
            ("disc_opt", &self.disc_opt),
        ] {
            o.validate().map_err(|e| Error::Config(format!("{name}: {e}")))?;
        }
        Ok(())
    }
}
