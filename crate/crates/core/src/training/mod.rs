//! Adversarial training loop and the baseline trainers.

mod config;
mod metrics;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ModelConfig, TrainingConfig};
pub use metrics::{records_to_csv, Algorithm, MetricRecord, CSV_HEADER};

use crate::discriminator::{train_epochs, DiscriminatorModel, LabeledBatch};
use crate::error::{Error, Result};
use crate::generator::{scheduled_omega, scheduled_sampling_epoch, GeneratorModel, Sequence};
use crate::numerics::{checkpoint, Optimizer, ParameterStore, Rng};
use crate::oracle_eval::{
    score_sequences, BleuScorer, EvalReport, OracleModel, SequenceSampler, UniformSampler,
};
use crate::rollout::{policy_gradient_step, PgSettings, RolloutPolicy, SequenceReward};

/// How generated samples are scored.
#[derive(Clone, Copy, Debug)]
pub enum Evaluator<'a> {
    /// Mean negative log-likelihood under a known oracle (lower is better).
    Oracle(&'a OracleModel),
    /// Mean BLEU against reference sequences (higher is better).
    Bleu(&'a BleuScorer),
}

/// Training data plus the evaluation protocol.
#[derive(Clone, Copy, Debug)]
pub struct Task<'a> {
    pub train: &'a [Sequence],
    pub evaluator: Evaluator<'a>,
}

/// Generator state at the end of maximum-likelihood pre-training.
#[derive(Clone, Debug)]
pub struct Pretrained {
    pub generator: GeneratorModel,
    pub optimizer: Optimizer,
    /// Epochs actually run (pre-training may stop early on a plateau).
    pub epochs: usize,
    pub losses: Vec<f64>,
}

/// Discriminator loss before/after each d-step on a fixed monitoring batch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiscMonitor {
    pub checks: usize,
    pub improved: usize,
}

impl DiscMonitor {
    pub fn fraction_improved(&self) -> f64 {
        if self.checks == 0 {
            1.0
        } else {
            self.improved as f64 / self.checks as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub records: Vec<MetricRecord>,
    /// Per-sample scores of the last evaluation.
    pub final_eval: EvalReport,
    pub generator: Option<GeneratorModel>,
    pub discriminator: Option<DiscriminatorModel>,
    pub pretrain_epochs: usize,
    pub disc_monitor: DiscMonitor,
    pub checkpoints: Vec<PathBuf>,
}

impl RunArtifacts {
    pub fn final_mean(&self) -> f64 {
        self.final_eval.mean
    }

    pub fn metrics_csv(&self) -> String {
        records_to_csv(&self.records)
    }
}

/// Fresh negative sets, each as large as the positive set.
pub fn make_negative_sets(
    gen: &GeneratorModel,
    positive_count: usize,
    d_steps: usize,
    rng: &mut Rng,
) -> Vec<Vec<Sequence>> {
    (0..d_steps)
        .map(|_| (0..positive_count).map(|_| gen.sample(rng)).collect())
        .collect()
}

/// Size of the discriminator monitoring batch per class.
const MONITOR_PER_CLASS: usize = 256;

struct EarlyStop {
    patience: Option<usize>,
    best: f64,
    stale: usize,
}

impl EarlyStop {
    fn new(patience: Option<usize>) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            stale: 0,
        }
    }

    /// Feeds a loss-like value; returns true when training should stop.
    fn update(&mut self, value: f64) -> bool {
        if value < self.best {
            self.best = value;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        matches!(self.patience, Some(p) if self.stale >= p)
    }
}

/// Book-keeping shared by every trainer: metric rows, checkpoints, timing.
struct Log<'r> {
    runner: &'r Runner<'r>,
    algorithm: Algorithm,
    records: Vec<MetricRecord>,
    checkpoints: Vec<PathBuf>,
    last_good: Option<PathBuf>,
    start: Instant,
    early: EarlyStop,
    last_eval: Option<EvalReport>,
}

impl<'r> Log<'r> {
    fn new(runner: &'r Runner<'r>, algorithm: Algorithm) -> Self {
        Self {
            runner,
            algorithm,
            records: Vec::new(),
            checkpoints: Vec::new(),
            last_good: None,
            start: Instant::now(),
            early: EarlyStop::new(runner.cfg.early_stop_patience),
            last_eval: None,
        }
    }

    /// Evaluates, records a metric row and writes checkpoints. Returns true
    /// when early stopping triggers.
    fn record(
        &mut self,
        round: usize,
        epoch: usize,
        sampler: &dyn SequenceSampler,
        disc: Option<(&DiscriminatorModel, f64, f64)>,
        models: &[(&str, &ParameterStore)],
    ) -> Result<bool> {
        let report = self.runner.evaluate(sampler, epoch)?;
        let (nll_mean, nll_std, bleu, key) = match self.runner.task.evaluator {
            Evaluator::Oracle(_) => (Some(report.mean), Some(report.std), None, report.mean),
            Evaluator::Bleu(_) => (None, None, Some(report.mean), -report.mean),
        };
        self.records.push(MetricRecord {
            algorithm: self.algorithm,
            round,
            epoch,
            nll_oracle_mean: nll_mean,
            nll_oracle_std: nll_std,
            bleu,
            disc_loss: disc.map(|d| d.1),
            disc_acc: disc.map(|d| d.2),
            wallclock_s: self
                .runner
                .cfg
                .log_wallclock
                .then(|| self.start.elapsed().as_secs_f64()),
            seed: self.runner.cfg.seed,
        });
        log::info!(
            "{} round {round} epoch {epoch}: score {:.4}",
            self.algorithm,
            report.mean
        );
        self.last_eval = Some(report);
        self.save_checkpoints(epoch, models)?;
        Ok(self.early.update(key))
    }

    fn save_checkpoints(&mut self, epoch: usize, models: &[(&str, &ParameterStore)]) -> Result<()> {
        let Some(dir) = &self.runner.checkpoint_dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (label, store) in models {
            let path = dir.join(format!("{}-{label}-e{epoch:05}.ckpt", self.algorithm));
            checkpoint::save(store, &path)?;
            written.push(path);
        }
        self.last_good = written.first().cloned();
        self.checkpoints.extend(written);
        let keep = self.runner.cfg.keep_checkpoints.max(1) * models.len();
        while self.checkpoints.len() > keep {
            let old = self.checkpoints.remove(0);
            let _ = std::fs::remove_file(old);
        }
        Ok(())
    }

    /// Attaches the last good checkpoint to a divergence error.
    fn tag(&self, err: Error) -> Error {
        match err {
            Error::Diverged { stage, .. } => Error::Diverged {
                stage,
                last_good_checkpoint: self.last_good.as_ref().map(|p| p.display().to_string()),
            },
            other => other,
        }
    }

    fn finish(
        self,
        generator: Option<GeneratorModel>,
        discriminator: Option<DiscriminatorModel>,
        pretrain_epochs: usize,
        disc_monitor: DiscMonitor,
    ) -> RunArtifacts {
        RunArtifacts {
            algorithm: self.algorithm,
            seed: self.runner.cfg.seed,
            records: self.records,
            final_eval: self.last_eval.expect("every run records at least one evaluation"),
            generator,
            discriminator,
            pretrain_epochs,
            disc_monitor,
            checkpoints: self.checkpoints,
        }
    }
}

/// Runs trainers for one configuration, task and seed.
pub struct Runner<'a> {
    pub cfg: TrainingConfig,
    pub models: ModelConfig,
    pub task: Task<'a>,
    pub checkpoint_dir: Option<PathBuf>,
}

impl<'a> Runner<'a> {
    pub fn new(cfg: TrainingConfig, models: ModelConfig, task: Task<'a>) -> Result<Self> {
        cfg.validate()?;
        models.validate()?;
        if task.train.is_empty() {
            return Err(Error::Empty("training set"));
        }
        for s in task.train {
            s.validate(crate::generator::Vocab::new(models.vocab)?, models.horizon)?;
        }
        Ok(Self {
            cfg,
            models,
            task,
            checkpoint_dir: None,
        })
    }

    pub fn with_checkpoints(mut self, dir: impl AsRef<Path>) -> Self {
        self.checkpoint_dir = Some(dir.as_ref().to_path_buf());
        self
    }

    fn root(&self) -> Rng {
        Rng::new(self.cfg.seed)
    }

    /// Scores `eval_samples` draws; the sampling stream depends only on the
    /// seed and `epoch`, so trainers evaluated at the same epoch share it.
    pub fn evaluate(&self, sampler: &dyn SequenceSampler, epoch: usize) -> Result<EvalReport> {
        let mut rng = self.root().child_indexed("eval", epoch as u64);
        let seqs: Vec<Sequence> = (0..self.cfg.eval_samples).map(|_| sampler.sample(&mut rng)).collect();
        match self.task.evaluator {
            Evaluator::Oracle(oracle) => score_sequences(oracle, &seqs),
            Evaluator::Bleu(scorer) => EvalReport::from_scores(seqs.iter().map(|s| scorer.score(s)).collect()),
        }
    }

    fn initial_generator(&self) -> Result<GeneratorModel> {
        GeneratorModel::new(self.models.gen_dims(), &mut self.root().child("generator-init"))
    }

    /// Maximum-likelihood pre-training of the generator for up to
    /// `pretrain_gen_epochs`; stops early on a loss plateau if enabled.
    pub fn pretrain(&self) -> Result<Pretrained> {
        let mut gen = self.initial_generator()?;
        let mut opt = Optimizer::new(self.cfg.gen_pretrain_opt.clone())?;
        let mut rng = self.root().child("pretrain-gen");
        let mut losses = Vec::new();
        let w = self.cfg.plateau_window;
        for _ in 0..self.cfg.pretrain_gen_epochs {
            let loss = scheduled_sampling_epoch(
                &mut gen,
                self.task.train,
                &mut opt,
                1.0,
                self.cfg.gen_batch,
                &mut rng,
            )?;
            losses.push(loss);
            if self.cfg.pretrain_plateau && losses.len() > w {
                let old = losses[losses.len() - 1 - w];
                if (old - loss) / old.abs().max(f64::MIN_POSITIVE) < self.cfg.plateau_tol {
                    log::info!("generator pre-training plateaued after {} epochs", losses.len());
                    break;
                }
            }
        }
        Ok(Pretrained {
            generator: gen,
            optimizer: opt,
            epochs: losses.len(),
            losses,
        })
    }

    /// Algorithm 1, pre-training included.
    pub fn run_seqgan(&self) -> Result<RunArtifacts> {
        let pre = self.pretrain()?;
        self.run_seqgan_from(&pre)
    }

    /// Algorithm 1 starting from an already pre-trained generator.
    pub fn run_seqgan_from(&self, pre: &Pretrained) -> Result<RunArtifacts> {
        let mut log = Log::new(self, Algorithm::SeqGan);
        let cfg = &self.cfg;
        let root = self.root();
        let mut gen = pre.generator.clone();
        let mut rollout = RolloutPolicy::new(&gen);
        let mut disc = DiscriminatorModel::new(self.models.disc_dims(), &mut root.child("discriminator-init"))?;
        let mut disc_opt = Optimizer::new(cfg.disc_opt.clone())?;
        let mut d_rng = root.child("discriminator");
        let mut mon_rng = root.child("monitor");
        let positives = self.task.train;
        let mon_pos = &positives[..positives.len().min(MONITOR_PER_CLASS)];

        for _ in 0..cfg.pretrain_disc_steps {
            let negatives = make_negative_sets(&gen, positives.len(), 1, &mut d_rng).remove(0);
            train_epochs(
                &mut disc,
                positives,
                &negatives,
                cfg.pretrain_disc_epochs,
                &mut disc_opt,
                cfg.disc_batch,
                &mut d_rng,
            )
            .map_err(|e| log.tag(e))?;
        }
        let monitor_batch = |gen: &GeneratorModel, rng: &mut Rng| {
            let neg: Vec<Sequence> = (0..mon_pos.len()).map(|_| gen.sample(rng)).collect();
            LabeledBatch::balanced(mon_pos, &neg)
        };
        let batch = monitor_batch(&gen, &mut mon_rng);
        let disc_stats = (disc.loss(&batch)?, disc.accuracy(&batch)?);
        let mut stop = log.record(
            0,
            pre.epochs,
            &gen,
            Some((&disc, disc_stats.0, disc_stats.1)),
            &[("gen", gen.params()), ("disc", disc.params())],
        )?;

        gen.params_mut().reset_moments();
        let mut adv_opt = Optimizer::new(cfg.gen_adv_opt.clone())?;
        let mut g_rng = root.child("adversarial");
        let settings = PgSettings {
            batch_size: cfg.pg_batch,
            rollouts: cfg.rollout_n,
            baseline: cfg.baseline,
        };
        let mut monitor = DiscMonitor::default();
        for round in 1..=cfg.total_adversarial_rounds {
            if stop {
                break;
            }
            for _ in 0..cfg.g_steps {
                policy_gradient_step(&mut gen, &rollout, &disc, settings, &mut adv_opt, &mut g_rng)
                    .map_err(|e| log.tag(e))?;
            }
            let batch = monitor_batch(&gen, &mut mon_rng);
            let before = disc.loss(&batch)?;
            for negatives in make_negative_sets(&gen, positives.len(), cfg.d_steps, &mut d_rng) {
                train_epochs(
                    &mut disc,
                    positives,
                    &negatives,
                    cfg.k,
                    &mut disc_opt,
                    cfg.disc_batch,
                    &mut d_rng,
                )
                .map_err(|e| log.tag(e))?;
            }
            let after = disc.loss(&batch)?;
            monitor.checks += 1;
            if after <= before {
                monitor.improved += 1;
            }
            rollout.sync(&gen)?;
            if round % cfg.eval_every == 0 || round == cfg.total_adversarial_rounds {
                let acc = disc.accuracy(&batch)?;
                stop = log.record(
                    round,
                    pre.epochs + round,
                    &gen,
                    Some((&disc, after, acc)),
                    &[("gen", gen.params()), ("disc", disc.params())],
                )?;
            }
        }
        if monitor.fraction_improved() < 0.9 {
            log::warn!(
                "discriminator loss decreased in only {}/{} d-step rounds",
                monitor.improved,
                monitor.checks
            );
        }
        Ok(log.finish(Some(gen), Some(disc), pre.epochs, monitor))
    }

    /// Maximum-likelihood training: pre-training, then one epoch per round.
    pub fn run_mle(&self) -> Result<RunArtifacts> {
        let pre = self.pretrain()?;
        self.run_mle_from(&pre)
    }

    pub fn run_mle_from(&self, pre: &Pretrained) -> Result<RunArtifacts> {
        self.continue_guided(Algorithm::Mle, pre, |_| 1.0)
    }

    /// Maximum-likelihood pre-training, then one scheduled-sampling epoch per
    /// round with guidance `max(0, 1 - decay * e)`, `e` counting epochs since
    /// pre-training ended.
    pub fn run_scheduled_sampling(&self) -> Result<RunArtifacts> {
        let pre = self.pretrain()?;
        self.run_scheduled_sampling_from(&pre)
    }

    pub fn run_scheduled_sampling_from(&self, pre: &Pretrained) -> Result<RunArtifacts> {
        let decay = self.cfg.ss_decay;
        let start = pre.epochs;
        self.continue_guided(Algorithm::ScheduledSampling, pre, move |e| scheduled_omega(e - start, decay))
    }

    fn continue_guided(&self, algorithm: Algorithm, pre: &Pretrained, omega: impl Fn(usize) -> f64) -> Result<RunArtifacts> {
        let mut log = Log::new(self, algorithm);
        let mut gen = pre.generator.clone();
        let mut opt = pre.optimizer.clone();
        let mut rng = self.root().child("guided");
        let mut stop = log.record(0, pre.epochs, &gen, None, &[("gen", gen.params())])?;
        for round in 1..=self.cfg.total_adversarial_rounds {
            if stop {
                break;
            }
            let epoch = pre.epochs + round;
            scheduled_sampling_epoch(
                &mut gen,
                self.task.train,
                &mut opt,
                omega(epoch - 1),
                self.cfg.gen_batch,
                &mut rng,
            )
            .map_err(|e| log.tag(e))?;
            if round % self.cfg.eval_every == 0 || round == self.cfg.total_adversarial_rounds {
                stop = log.record(round, epoch, &gen, None, &[("gen", gen.params())])?;
            }
        }
        Ok(log.finish(Some(gen), None, pre.epochs, DiscMonitor::default()))
    }

    /// Uniform random tokens; no training.
    pub fn run_random_baseline(&self) -> Result<RunArtifacts> {
        let mut log = Log::new(self, Algorithm::Random);
        let sampler = UniformSampler {
            vocab: self.models.vocab,
            horizon: self.models.horizon,
        };
        log.record(0, 0, &sampler, None, &[])?;
        Ok(log.finish(None, None, 0, DiscMonitor::default()))
    }

    /// The policy-gradient loop with BLEU against the training set as reward.
    pub fn run_pg_bleu(&self) -> Result<RunArtifacts> {
        let pre = self.pretrain()?;
        self.run_pg_bleu_from(&pre)
    }

    pub fn run_pg_bleu_from(&self, pre: &Pretrained) -> Result<RunArtifacts> {
        let scorer = BleuScorer::new(self.task.train, self.cfg.bleu_n)?;
        self.run_reward_loop(Algorithm::PgBleu, pre, &scorer)
    }

    fn run_reward_loop(&self, algorithm: Algorithm, pre: &Pretrained, reward: &dyn SequenceReward) -> Result<RunArtifacts> {
        let mut log = Log::new(self, algorithm);
        let cfg = &self.cfg;
        let mut gen = pre.generator.clone();
        let mut rollout = RolloutPolicy::new(&gen);
        let mut stop = log.record(0, pre.epochs, &gen, None, &[("gen", gen.params())])?;
        gen.params_mut().reset_moments();
        let mut opt = Optimizer::new(cfg.gen_adv_opt.clone())?;
        let mut rng = self.root().child("adversarial");
        let settings = PgSettings {
            batch_size: cfg.pg_batch,
            rollouts: cfg.rollout_n,
            baseline: cfg.baseline,
        };
        for round in 1..=cfg.total_adversarial_rounds {
            if stop {
                break;
            }
            for _ in 0..cfg.g_steps {
                policy_gradient_step(&mut gen, &rollout, reward, settings, &mut opt, &mut rng)
                    .map_err(|e| log.tag(e))?;
            }
            rollout.sync(&gen)?;
            if round % cfg.eval_every == 0 || round == cfg.total_adversarial_rounds {
                stop = log.record(round, pre.epochs + round, &gen, None, &[("gen", gen.params())])?;
            }
        }
        Ok(log.finish(Some(gen), None, pre.epochs, DiscMonitor::default()))
    }

    pub fn run(&self, algorithm: Algorithm) -> Result<RunArtifacts> {
        match algorithm {
            Algorithm::Random => self.run_random_baseline(),
            Algorithm::Mle => self.run_mle(),
            Algorithm::ScheduledSampling => self.run_scheduled_sampling(),
            Algorithm::PgBleu => self.run_pg_bleu(),
            Algorithm::SeqGan => self.run_seqgan(),
        }
    }

    /// Runs several algorithms, sharing one maximum-likelihood pre-training
    /// among those that start from it.
    pub fn run_many(&self, algorithms: &[Algorithm]) -> Result<Vec<RunArtifacts>> {
        let needs_pre = algorithms
            .iter()
            .any(|a| !matches!(a, Algorithm::Random));
        let pre = if needs_pre { Some(self.pretrain()?) } else { None };
        algorithms
            .iter()
            .map(|&a| match (a, &pre) {
                (Algorithm::Mle, Some(p)) => self.run_mle_from(p),
                (Algorithm::ScheduledSampling, Some(p)) => self.run_scheduled_sampling_from(p),
                (Algorithm::PgBleu, Some(p)) => self.run_pg_bleu_from(p),
                (Algorithm::SeqGan, Some(p)) => self.run_seqgan_from(p),
                _ => self.run(a),
            })
            .collect()
    }
}

pub fn run_seqgan(cfg: &TrainingConfig, models: &ModelConfig, task: Task<'_>) -> Result<RunArtifacts> {
    Runner::new(cfg.clone(), models.clone(), task)?.run_seqgan()
}

pub fn run_mle(cfg: &TrainingConfig, models: &ModelConfig, task: Task<'_>) -> Result<RunArtifacts> {
    Runner::new(cfg.clone(), models.clone(), task)?.run_mle()
}

pub fn run_scheduled_sampling(cfg: &TrainingConfig, models: &ModelConfig, task: Task<'_>) -> Result<RunArtifacts> {
    Runner::new(cfg.clone(), models.clone(), task)?.run_scheduled_sampling()
}

pub fn run_random_baseline(cfg: &TrainingConfig, models: &ModelConfig, task: Task<'_>) -> Result<RunArtifacts> {
    Runner::new(cfg.clone(), models.clone(), task)?.run_random_baseline()
}

pub fn run_pg_bleu(cfg: &TrainingConfig, models: &ModelConfig, task: Task<'_>) -> Result<RunArtifacts> {
    Runner::new(cfg.clone(), models.clone(), task)?.run_pg_bleu()
}

/// One SeqGAN run per generator pre-training budget, on shared data and seed.
pub fn pretrain_ablation(
    cfg: &TrainingConfig,
    models: &ModelConfig,
    task: Task<'_>,
    pretrain_epochs_list: &[usize],
) -> Result<Vec<RunArtifacts>> {
    if pretrain_epochs_list.is_empty() {
        return Err(Error::Empty("pre-training budgets"));
    }
    pretrain_epochs_list
        .iter()
        .map(|&epochs| {
            let cfg = TrainingConfig {
                pretrain_gen_epochs: epochs,
                ..cfg.clone()
            };
            run_seqgan(&cfg, models, task)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discriminator::KernelSpec;
    use crate::generator::GenDims;
    use crate::oracle_eval::{generate_training_set, make_oracle};

    fn tiny() -> (TrainingConfig, ModelConfig, OracleModel, Vec<Sequence>) {
        let models = ModelConfig {
            vocab: 6,
            horizon: 5,
            gen_embed: 4,
            gen_hidden: 6,
            disc_embed: 4,
            kernels: vec![KernelSpec::new(1, 3), KernelSpec::new(2, 3)],
            keep_prob: 0.75,
        };
        let cfg = TrainingConfig {
            rollout_n: 2,
            pretrain_gen_epochs: 4,
            pretrain_disc_steps: 1,
            pretrain_disc_epochs: 1,
            total_adversarial_rounds: 3,
            gen_batch: 8,
            pg_batch: 4,
            disc_batch: 8,
            eval_samples: 50,
            k: 2,
            seed: 3,
            ..TrainingConfig::default()
        };
        let oracle = make_oracle(11, models.gen_dims()).unwrap();
        let data = generate_training_set(&oracle, 24, &mut Rng::new(5));
        (cfg, models, oracle, data)
    }

    #[test]
    fn seqgan_log_shape_and_determinism() {
        let (cfg, models, oracle, data) = tiny();
        let task = Task {
            train: &data,
            evaluator: Evaluator::Oracle(&oracle),
        };
        let a = run_seqgan(&cfg, &models, task).unwrap();
        let b = run_seqgan(&cfg, &models, task).unwrap();
        assert_eq!(a.metrics_csv(), b.metrics_csv());
        assert_eq!(a.records.len(), 4);
        for w in a.records.windows(2) {
            assert!(w[1].epoch > w[0].epoch);
        }
        assert!(a.records.iter().all(|r| r.algorithm == Algorithm::SeqGan && r.disc_loss.is_some()));
        assert_eq!(a.disc_monitor.checks, 3);
    }

    #[test]
    fn zero_rounds_match_mle() {
        let (cfg, models, oracle, data) = tiny();
        let cfg = TrainingConfig {
            total_adversarial_rounds: 0,
            ..cfg
        };
        let task = Task {
            train: &data,
            evaluator: Evaluator::Oracle(&oracle),
        };
        let s = run_seqgan(&cfg, &models, task).unwrap();
        let m = run_mle(&cfg, &models, task).unwrap();
        let values = |r: &RunArtifacts| {
            r.generator.as_ref().unwrap().params().iter().map(|(_, p)| p.value.clone()).collect::<Vec<_>>()
        };
        assert_eq!(values(&s), values(&m));
        assert_eq!(s.final_eval, m.final_eval);
        assert_eq!(s.records[0].nll_oracle_mean, m.records[0].nll_oracle_mean);
    }

    #[test]
    fn ss_without_decay_is_mle() {
        let (cfg, models, oracle, data) = tiny();
        let cfg = TrainingConfig { ss_decay: 0.0, ..cfg };
        let task = Task {
            train: &data,
            evaluator: Evaluator::Oracle(&oracle),
        };
        let ss = run_scheduled_sampling(&cfg, &models, task).unwrap();
        let mle = run_mle(&cfg, &models, task).unwrap();
        assert_eq!(ss.generator, mle.generator);
        let strip = |r: &RunArtifacts| r.records.iter().map(|x| (x.epoch, x.nll_oracle_mean)).collect::<Vec<_>>();
        assert_eq!(strip(&ss), strip(&mle));
    }

    #[test]
    fn ss_curriculum_starts_after_pretraining() {
        let (cfg, models, oracle, data) = tiny();
        let task = Task {
            train: &data,
            evaluator: Evaluator::Oracle(&oracle),
        };
        let after = |rounds: usize| {
            let cfg = TrainingConfig {
                ss_decay: 0.2,
                total_adversarial_rounds: rounds,
                ..cfg.clone()
            };
            let runner = Runner::new(cfg, models.clone(), task).unwrap();
            let pre = runner.pretrain().unwrap();
            let ss = runner.run_scheduled_sampling_from(&pre).unwrap();
            let mle = runner.run_mle_from(&pre).unwrap();
            assert_eq!(ss.pretrain_epochs, mle.pretrain_epochs);
            ss.generator == mle.generator
        };
        // Guidance is 1 in the first round after pre-training.
        assert!(after(1));
        assert!(!after(2));
    }

    #[test]
    fn negative_sets() {
        let g = GeneratorModel::new(
            GenDims {
                vocab: 5,
                embed: 3,
                hidden: 3,
                horizon: 6,
            },
            &mut Rng::new(0),
        )
        .unwrap();
        let sets = make_negative_sets(&g, 100, 5, &mut Rng::new(1));
        assert_eq!(sets.len(), 5);
        assert!(sets.iter().all(|s| s.len() == 100));
        for i in 0..5 {
            for j in i + 1..5 {
                assert_ne!(sets[i], sets[j]);
            }
        }
        assert_eq!(sets, make_negative_sets(&g, 100, 5, &mut Rng::new(1)));
    }

    #[test]
    fn pretrain_prefix_shared_across_budgets() {
        let (cfg, models, oracle, data) = tiny();
        let cfg = TrainingConfig {
            pretrain_plateau: false,
            ..cfg
        };
        let task = Task {
            train: &data,
            evaluator: Evaluator::Oracle(&oracle),
        };
        let short = Runner::new(TrainingConfig { pretrain_gen_epochs: 2, ..cfg.clone() }, models.clone(), task)
            .unwrap()
            .pretrain()
            .unwrap();
        let long = Runner::new(cfg.clone(), models.clone(), task).unwrap().pretrain().unwrap();
        assert_eq!(short.losses[..], long.losses[..2]);
        let runs = pretrain_ablation(&cfg, &models, task, &[1, 3]).unwrap();
        assert_eq!(runs[0].pretrain_epochs, 1);
        assert_eq!(runs[1].pretrain_epochs, 3);
        assert!(pretrain_ablation(&cfg, &models, task, &[]).is_err());
    }

    #[test]
    fn random_and_bleu_runs() {
        let (cfg, models, oracle, data) = tiny();
        let task = Task {
            train: &data,
            evaluator: Evaluator::Oracle(&oracle),
        };
        let r = run_random_baseline(&cfg, &models, task).unwrap();
        assert_eq!(r.records.len(), 1);
        let p = run_pg_bleu(&cfg, &models, task).unwrap();
        assert_eq!(p.records.len(), 4);
        assert!(p.records.iter().all(|r| r.disc_loss.is_none()));

        let scorer = BleuScorer::new(&data, 2).unwrap();
        let task = Task {
            train: &data,
            evaluator: Evaluator::Bleu(&scorer),
        };
        let m = run_mle(&cfg, &models, task).unwrap();
        assert!(m.records.iter().all(|r| r.bleu.is_some() && r.nll_oracle_mean.is_none()));
    }

    #[test]
    fn early_stop_and_checkpoints() {
        let (cfg, models, oracle, data) = tiny();
        let dir = std::env::temp_dir().join(format!("seqgan-train-test-{}", std::process::id()));
        let cfg = TrainingConfig {
            early_stop_patience: Some(1),
            total_adversarial_rounds: 20,
            gen_adv_opt: crate::numerics::OptimizerConfig::adam(0.0),
            keep_checkpoints: 2,
            ..cfg
        };
        let task = Task {
            train: &data,
            evaluator: Evaluator::Oracle(&oracle),
        };
        let runner = Runner::new(cfg, models, task).unwrap().with_checkpoints(&dir);
        let r = runner.run_pg_bleu().unwrap();
        assert!(r.records.len() < 21);
        assert_eq!(r.checkpoints.len(), 2);
        assert!(r.checkpoints.iter().all(|p| p.exists()));
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn invalid_config_rejected() {
        let (cfg, models, oracle, data) = tiny();
        let task = Task {
            train: &data,
            evaluator: Evaluator::Oracle(&oracle),
        };
        assert!(Runner::new(TrainingConfig { k: 0, ..cfg.clone() }, models.clone(), task).is_err());
        let empty: Vec<Sequence> = Vec::new();
        let task = Task {
            train: &empty,
            evaluator: Evaluator::Oracle(&oracle),
        };
        assert!(Runner::new(cfg, models, task).is_err());
    }
}
