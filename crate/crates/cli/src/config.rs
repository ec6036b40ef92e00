//! Experiment configuration: a TOML file with one section per component.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use seqgan_core::discriminator::{parse_kernel_specs, preset, KernelSpec};
use seqgan_core::numerics::{OptimizerConfig, OptimizerKind, Rng};
use seqgan_core::training::{Algorithm, ModelConfig, TrainingConfig};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Synthetic,
    Corpus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    pub algorithms: Vec<String>,
    pub out: PathBuf,
    pub model: ModelSection,
    pub training: TrainingSection,
    pub synthetic: SyntheticSection,
    pub corpus: CorpusSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Synthetic,
            seed: 0,
            algorithms: Algorithm::ALL.iter().map(|a| a.name().to_string()).collect(),
            out: PathBuf::from("out"),
            model: ModelSection::default(),
            training: TrainingSection::default(),
            synthetic: SyntheticSection::default(),
            corpus: CorpusSection::default(),
        }
    }
}

/// Discriminator kernels: a preset name or kernel-file path, or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Kernels {
    Named(String),
    List(Vec<KernelEntry>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub window: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// Output vocabulary size; derived from the data in corpus mode.
    pub vocab: usize,
    pub horizon: usize,
    pub gen_embed: usize,
    pub gen_hidden: usize,
    pub disc_embed: usize,
    pub kernels: Kernels,
    pub keep_prob: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let m = ModelConfig::default();
        Self {
            vocab: m.vocab,
            horizon: m.horizon,
            gen_embed: m.gen_embed,
            gen_hidden: m.gen_hidden,
            disc_embed: m.disc_embed,
            kernels: Kernels::Named("desk".into()),
            keep_prob: m.keep_prob,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub kind: String,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip_norm: Option<f64>,
    pub l2: f64,
}

impl From<&OptimizerConfig> for OptimizerSection {
    fn from(o: &OptimizerConfig) -> Self {
        Self {
            kind: o.kind.name().into(),
            learning_rate: o.learning_rate,
            beta1: o.beta1,
            beta2: o.beta2,
            eps: o.eps,
            clip_norm: o.clip_norm,
            l2: o.l2,
        }
    }
}

impl Default for OptimizerSection {
    fn default() -> Self {
        (&OptimizerConfig::adam(1e-3)).into()
    }
}

impl OptimizerSection {
    fn to_core(&self, key: &str) -> Result<OptimizerConfig> {
        let kind = OptimizerKind::parse(&self.kind)
            .ok_or_else(|| CliError::Config(format!("training.{key}.kind: unknown optimizer `{}`", self.kind)))?;
        let o = OptimizerConfig {
            kind,
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            clip_norm: self.clip_norm,
            l2: self.l2,
        };
        o.validate().map_err(|e| CliError::Config(format!("training.{key}: {e}")))?;
        Ok(o)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub g_steps: usize,
    pub d_steps: usize,
    pub k: usize,
    pub rollout_n: usize,
    pub pretrain_gen_epochs: usize,
    pub pretrain_plateau: bool,
    pub plateau_window: usize,
    pub plateau_tol: f64,
    pub pretrain_disc_steps: usize,
    pub pretrain_disc_epochs: usize,
    pub total_adversarial_rounds: usize,
    pub gen_batch: usize,
    pub pg_batch: usize,
    pub disc_batch: usize,
    pub eval_every: usize,
    pub eval_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_stop_patience: Option<usize>,
    pub ss_decay: f64,
    pub bleu_n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
    pub log_wallclock: bool,
    pub keep_checkpoints: usize,
    pub gen_pretrain_opt: OptimizerSection,
    pub gen_adv_opt: OptimizerSection,
    pub disc_opt: OptimizerSection,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainingConfig::default();
        Self {
            g_steps: t.g_steps,
            d_steps: t.d_steps,
            k: t.k,
            rollout_n: t.rollout_n,
            pretrain_gen_epochs: t.pretrain_gen_epochs,
            pretrain_plateau: t.pretrain_plateau,
            plateau_window: t.plateau_window,
            plateau_tol: t.plateau_tol,
            pretrain_disc_steps: t.pretrain_disc_steps,
            pretrain_disc_epochs: t.pretrain_disc_epochs,
            total_adversarial_rounds: t.total_adversarial_rounds,
            gen_batch: t.gen_batch,
            pg_batch: t.pg_batch,
            disc_batch: t.disc_batch,
            eval_every: t.eval_every,
            eval_samples: t.eval_samples,
            early_stop_patience: t.early_stop_patience,
            ss_decay: t.ss_decay,
            bleu_n: t.bleu_n,
            baseline: t.baseline,
            log_wallclock: t.log_wallclock,
            keep_checkpoints: t.keep_checkpoints,
            gen_pretrain_opt: (&t.gen_pretrain_opt).into(),
            gen_adv_opt: (&t.gen_adv_opt).into(),
            disc_opt: (&t.disc_opt).into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSection {
    /// Seed of the oracle and its training sample; defaults to the run seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_seed: Option<u64>,
    pub train_size: usize,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        Self {
            oracle_seed: None,
            train_size: 2000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    /// Where the ingested vocabulary is written, one token per line in id order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vocab: Option<PathBuf>,
    /// Drop lines longer than the horizon instead of truncating them.
    pub drop_long: bool,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub algorithms: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    fn apply_to_table(&self, t: &mut toml::Table) -> Result<()> {
        if let Some(m) = self.mode {
            let name = match m {
                Mode::Synthetic => "synthetic",
                Mode::Corpus => "corpus",
            };
            t.insert("mode".into(), name.into());
        }
        if let Some(a) = &self.algorithms {
            t.insert("algorithms".into(), toml::Value::Array(a.iter().map(|s| s.as_str().into()).collect()));
        }
        if let Some(s) = self.seed {
            t.insert("seed".into(), seed_value(s)?);
        }
        if let Some(o) = &self.out {
            t.insert("out".into(), o.display().to_string().into());
        }
        Ok(())
    }
}

/// Seeds are stored as TOML integers, which are signed 64-bit.
fn seed_value(seed: u64) -> Result<toml::Value> {
    i64::try_from(seed)
        .map(toml::Value::Integer)
        .map_err(|_| CliError::Config(format!("seed {seed} exceeds {}", i64::MAX)))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

fn from_table(t: toml::Table, origin: &str) -> Result<ExperimentConfig> {
    let text = toml::to_string(&t).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    parse_str(&text, origin)
}

/// Parses config text without resolving defaults that depend on other keys.
pub fn parse_str(text: &str, origin: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

/// Reads the optional config file, applies overrides, validates and fills
/// derived defaults.
pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let (text, origin) = match path {
        Some(p) => (read(p)?, p.display().to_string()),
        None => (String::new(), "<defaults>".to_string()),
    };
    // Parse the raw text first so syntax and key errors carry line numbers.
    parse_str(&text, &origin)?;
    let mut table = parse_table(&text, &origin)?;
    overrides.apply_to_table(&mut table)?;
    from_table(table, &origin)?.resolve()
}

/// One resolved config per `[[run]]` table of a grid file. Each entry is
/// merged over the base config; entries without a `seed` get a child seed of
/// the base seed, and every run writes to `<out>/<name>`.
pub fn load_grid(base: Option<&Path>, grid: &Path, overrides: &Overrides) -> Result<Vec<ExperimentConfig>> {
    let base_text = match base {
        Some(p) => read(p)?,
        None => String::new(),
    };
    let base_origin = base.map(|p| p.display().to_string()).unwrap_or_else(|| "<defaults>".into());
    parse_str(&base_text, &base_origin)?;
    let mut base_table = parse_table(&base_text, &base_origin)?;
    overrides.apply_to_table(&mut base_table)?;
    let base_cfg = from_table(base_table.clone(), &base_origin)?;

    let grid_origin = grid.display().to_string();
    let mut grid_table = parse_table(&read(grid)?, &grid_origin)?;
    let runs = match grid_table.remove("run") {
        Some(toml::Value::Array(runs)) if !runs.is_empty() => runs,
        _ => return Err(CliError::Config(format!("{grid_origin}: expected one or more [[run]] tables"))),
    };
    if let Some(key) = grid_table.keys().next() {
        return Err(CliError::Config(format!("{grid_origin}: unknown key `{key}`")));
    }
    let mut seeds = Rng::new(base_cfg.seed).child("grid");
    let mut names = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(runs.len());
    for (i, run) in runs.into_iter().enumerate() {
        let child_seed = seeds.next_u64() >> 1;
        let toml::Value::Table(mut run) = run else {
            return Err(CliError::Config(format!("{grid_origin}: run {i} is not a table")));
        };
        let name = match run.remove("name") {
            Some(toml::Value::String(s)) => s,
            None => format!("run{i:03}"),
            Some(_) => return Err(CliError::Config(format!("{grid_origin}: run {i}: name must be a string"))),
        };
        if !names.insert(name.clone()) {
            return Err(CliError::Config(format!("{grid_origin}: duplicate run name `{name}`")));
        }
        let mut merged = base_table.clone();
        if !run.contains_key("seed") {
            merged.insert("seed".into(), seed_value(child_seed)?);
        }
        merge(&mut merged, run);
        merged.insert("out".into(), base_cfg.out.join(&name).display().to_string().into());
        out.push(from_table(merged, &format!("{grid_origin} run `{name}`"))?.resolve()?);
    }
    Ok(out)
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl ExperimentConfig {
    /// Validates and fills keys whose defaults depend on other keys.
    pub fn resolve(mut self) -> Result<Self> {
        if self.synthetic.oracle_seed.is_none() {
            self.synthetic.oracle_seed = Some(self.seed);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.algorithm_list()?;
        if self.model.horizon == 0 {
            return Err(CliError::Config("model.horizon must be at least 1".into()));
        }
        match self.mode {
            Mode::Synthetic => {
                if self.synthetic.train_size == 0 {
                    return Err(CliError::Config("synthetic.train_size must be at least 1".into()));
                }
            }
            Mode::Corpus => {
                for (key, v) in [
                    ("corpus.train", &self.corpus.train),
                    ("corpus.test", &self.corpus.test),
                    ("corpus.vocab", &self.corpus.vocab),
                ] {
                    if v.is_none() {
                        return Err(CliError::Config(format!("{key} is required in corpus mode")));
                    }
                }
            }
        }
        self.model_config()?.validate().map_err(|e| CliError::Config(format!("model: {e}")))?;
        self.training_config()?.validate().map_err(|e| CliError::Config(format!("training: {e}")))?;
        Ok(())
    }

    pub fn algorithm_list(&self) -> Result<Vec<Algorithm>> {
        if self.algorithms.is_empty() {
            return Err(CliError::Config("algorithms must name at least one algorithm".into()));
        }
        let mut out: Vec<Algorithm> = Vec::new();
        for name in &self.algorithms {
            let a = Algorithm::parse(name).ok_or_else(|| {
                CliError::Config(format!(
                    "algorithms: unknown algorithm `{name}` (expected one of random, mle, ss, pg_bleu, seqgan)"
                ))
            })?;
            if out.contains(&a) {
                return Err(CliError::Config(format!("algorithms: `{name}` listed twice")));
            }
            out.push(a);
        }
        Ok(out)
    }

    pub fn kernels(&self) -> Result<Vec<KernelSpec>> {
        match &self.model.kernels {
            Kernels::List(list) => Ok(list.iter().map(|k| KernelSpec::new(k.window, k.count)).collect()),
            Kernels::Named(name) => {
                if let Some(p) = preset(name) {
                    return Ok(p);
                }
                let text = std::fs::read_to_string(name).map_err(|e| {
                    CliError::Config(format!("model.kernels: `{name}` is neither a preset nor a readable file ({e})"))
                })?;
                parse_kernel_specs(&text).map_err(|e| CliError::Config(format!("model.kernels: {name}: {e}")))
            }
        }
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        let m = &self.model;
        Ok(ModelConfig {
            vocab: m.vocab,
            horizon: m.horizon,
            gen_embed: m.gen_embed,
            gen_hidden: m.gen_hidden,
            disc_embed: m.disc_embed,
            kernels: self.kernels()?,
            keep_prob: m.keep_prob,
        })
    }

    pub fn training_config(&self) -> Result<TrainingConfig> {
        let t = &self.training;
        Ok(TrainingConfig {
            g_steps: t.g_steps,
            d_steps: t.d_steps,
            k: t.k,
            rollout_n: t.rollout_n,
            pretrain_gen_epochs: t.pretrain_gen_epochs,
            pretrain_plateau: t.pretrain_plateau,
            plateau_window: t.plateau_window,
            plateau_tol: t.plateau_tol,
            pretrain_disc_steps: t.pretrain_disc_steps,
            pretrain_disc_epochs: t.pretrain_disc_epochs,
            total_adversarial_rounds: t.total_adversarial_rounds,
            gen_batch: t.gen_batch,
            pg_batch: t.pg_batch,
            disc_batch: t.disc_batch,
            gen_pretrain_opt: t.gen_pretrain_opt.to_core("gen_pretrain_opt")?,
            gen_adv_opt: t.gen_adv_opt.to_core("gen_adv_opt")?,
            disc_opt: t.disc_opt.to_core("disc_opt")?,
            eval_every: t.eval_every,
            eval_samples: t.eval_samples,
            early_stop_patience: t.early_stop_patience,
            ss_decay: t.ss_decay,
            bleu_n: t.bleu_n,
            baseline: t.baseline,
            log_wallclock: t.log_wallclock,
            keep_checkpoints: t.keep_checkpoints,
            seed: self.seed,
        })
    }

    pub fn oracle_seed(&self) -> u64 {
        self.synthetic.oracle_seed.unwrap_or(self.seed)
    }

    /// The resolved config as TOML; parsing it back yields `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
