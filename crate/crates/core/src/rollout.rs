//! Monte Carlo search with a frozen roll-out policy, action-value estimates
//! and the REINFORCE update of the generator.

use rayon::prelude::*;

use crate::discriminator::{DiscCache, DiscriminatorModel};
use crate::error::{Error, Result};
use crate::generator::{GenDims, GeneratorModel, GradBuffer, Scratch, Sequence, Tape};
use crate::numerics::{Optimizer, Rng};
use crate::oracle_eval::BleuScorer;

/// Terminal reward of a complete sequence.
pub trait SequenceReward: Sync {
    fn reward(&self, seq: &Sequence) -> f64;
}

impl SequenceReward for DiscriminatorModel {
    fn reward(&self, seq: &Sequence) -> f64 {
        let mut cache = DiscCache::default();
        self.probability_with(seq, &mut cache)
    }
}

impl SequenceReward for BleuScorer {
    fn reward(&self, seq: &Sequence) -> f64 {
        self.score(seq)
    }
}

/// The same reward for every sequence.
#[derive(Clone, Copy, Debug)]
pub struct ConstantReward(pub f64);

impl SequenceReward for ConstantReward {
    fn reward(&self, _: &Sequence) -> f64 {
        self.0
    }
}

/// Adapts a closure.
pub struct FnReward<F>(pub F);

impl<F: Fn(&Sequence) -> f64 + Sync> SequenceReward for FnReward<F> {
    fn reward(&self, seq: &Sequence) -> f64 {
        (self.0)(seq)
    }
}

/// Frozen snapshot of the generator used to complete partial sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutPolicy {
    model: GeneratorModel,
}

impl RolloutPolicy {
    pub fn new(gen: &GeneratorModel) -> Self {
        Self { model: gen.clone() }
    }

    pub fn model(&self) -> &GeneratorModel {
        &self.model
    }

    pub fn dims(&self) -> GenDims {
        self.model.dims()
    }

    /// Replaces the snapshot with a deep copy of `gen`.
    pub fn sync(&mut self, gen: &GeneratorModel) -> Result<()> {
        if gen.dims() != self.model.dims() {
            return Err(Error::Shape(format!(
                "roll-out dims {:?} != generator dims {:?}",
                self.model.dims(),
                gen.dims()
            )));
        }
        self.model.params_mut().copy_values_from(gen.params())
    }
}

/// `N` completions of `prefix`, each sharing it exactly.
pub fn mc_search(prefix: &[usize], policy: &RolloutPolicy, n: usize, rng: &mut Rng) -> Result<Vec<Sequence>> {
    let horizon = policy.dims().horizon;
    if prefix.is_empty() {
        return Err(Error::Contract("roll-out prefix must be non-empty".into()));
    }
    if prefix.len() > horizon {
        return Err(Error::Horizon {
            step: prefix.len(),
            horizon,
        });
    }
    if n == 0 {
        return Err(Error::Contract("roll-out count must be at least 1".into()));
    }
    let vocab = policy.model.vocab();
    if let Some(&token) = prefix.iter().find(|&&t| !vocab.contains(t)) {
        return Err(Error::Vocab {
            token,
            size: vocab.size(),
        });
    }
    if prefix.len() == horizon {
        return Ok(vec![Sequence(prefix.to_vec()); n]);
    }
    let mut scratch = Scratch::new(&policy.dims());
    let state = policy.model.replay(prefix, &mut scratch)?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut st = state.clone();
        let mut sc = scratch.clone();
        let mut tokens = prefix.to_vec();
        policy.model.complete(&mut st, &mut tokens, &mut sc, rng);
        out.push(Sequence(tokens));
    }
    Ok(out)
}

/// Per-timestep action values `q_1..q_T` for one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct QEstimate {
    pub q: Vec<f64>,
    pub rollouts: usize,
}

/// `q_t` is the mean reward of `n` roll-outs of `seq[..t]` for `t < T`, and
/// `q_T` is the reward of `seq` itself.
pub fn estimate_q(
    seq: &Sequence,
    rollout: &RolloutPolicy,
    reward: &dyn SequenceReward,
    n: usize,
    rng: &mut Rng,
) -> Result<QEstimate> {
    if n == 0 {
        return Err(Error::Contract("roll-out count must be at least 1".into()));
    }
    let dims = rollout.dims();
    seq.validate(rollout.model.vocab(), dims.horizon)?;
    let horizon = dims.horizon;
    let toks = seq.tokens();
    let model = &rollout.model;
    let mut q = Vec::with_capacity(horizon);
    let mut scratch = Scratch::new(&dims);
    let mut state = model.replay(&[], &mut scratch)?;
    let mut buf = Vec::with_capacity(horizon);
    for t in 1..horizon {
        // Prefix state for y_1..y_t, reused across the n roll-outs.
        model.advance(&mut state, toks[t - 1], &mut scratch);
        let mut total = 0.0;
        for _ in 0..n {
            let mut st = state.clone();
            let mut sc = scratch.clone();
            buf.clear();
            buf.extend_from_slice(&toks[..t]);
            model.complete(&mut st, &mut buf, &mut sc, rng);
            let completed = Sequence(std::mem::take(&mut buf));
            total += reward.reward(&completed);
            buf = completed.0;
        }
        q.push(total / n as f64);
    }
    q.push(reward.reward(seq));
    Ok(QEstimate { q, rollouts: n })
}

/// Accumulates the gradient of `-scale * sum_t (q_t - baseline) * log G(y_t | y_<t)`
/// into `grads`, so a descent step ascends the expected reward.
pub fn accumulate_reinforce(
    gen: &GeneratorModel,
    seq: &Sequence,
    q: &[f64],
    baseline: f64,
    scale: f64,
    grads: &mut GradBuffer,
    tape: &mut Tape,
) {
    let toks = seq.tokens();
    gen.forward_tape(toks.len(), tape, |t, _| toks[t]);
    let weights: Vec<f64> = q.iter().map(|&v| (v - baseline) * scale).collect();
    gen.backward_tape(tape, toks, &weights, grads);
}

/// Settings for one policy-gradient update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PgSettings {
    pub batch_size: usize,
    pub rollouts: usize,
    /// Constant subtracted from every `q_t`; `None` uses the raw estimator.
    pub baseline: Option<f64>,
}

/// Samples `batch_size` episodes from `gen`, scores every prefix by Monte
/// Carlo roll-outs of `rollout` under `reward`, and applies one optimizer step
/// along the REINFORCE gradient. Returns the mean `q` over the batch.
///
/// Each episode draws from its own labelled child stream of a single fork
/// of `rng`, so the result does not depend on thread scheduling.
pub fn policy_gradient_step(
    gen: &mut GeneratorModel,
    rollout: &RolloutPolicy,
    reward: &dyn SequenceReward,
    settings: PgSettings,
    opt: &mut Optimizer,
    rng: &mut Rng,
) -> Result<f64> {
    if settings.batch_size == 0 {
        return Err(Error::Contract("policy-gradient batch size must be at least 1".into()));
    }
    let base = rng.fork();
    let sampler: &GeneratorModel = gen;
    let episodes: Vec<(Sequence, QEstimate)> = (0..settings.batch_size)
        .into_par_iter()
        .map(|e| {
            let mut r = base.child_indexed("episode", e as u64);
            let seq = sampler.sample(&mut r);
            let q = estimate_q(&seq, rollout, reward, settings.rollouts, &mut r)?;
            Ok((seq, q))
        })
        .collect::<Result<_>>()?;
    let mut grads = GradBuffer::for_store(gen.params());
    let mut tape = Tape::new(&gen.dims());
    let scale = 1.0 / settings.batch_size as f64;
    let baseline = settings.baseline.unwrap_or(0.0);
    let mut q_sum = 0.0;
    let mut q_count = 0usize;
    for (seq, q) in &episodes {
        accumulate_reinforce(gen, seq, &q.q, baseline, scale, &mut grads, &mut tape);
        q_sum += q.q.iter().sum::<f64>();
        q_count += q.q.len();
    }
    if grads.bufs.iter().flatten().any(|g| !g.is_finite()) {
        return Err(Error::Diverged {
            stage: "policy-gradient update".into(),
            last_good_checkpoint: None,
        });
    }
    grads.add_into(gen.params_mut());
    opt.step(gen.params_mut())?;
    gen.params().validate_finite().map_err(|_| Error::Diverged {
        stage: "policy-gradient update".into(),
        last_good_checkpoint: None,
    })?;
    Ok(q_sum / q_count as f64)
}
