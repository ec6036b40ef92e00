//! LSTM policy over a token vocabulary: embedding, LSTM recurrence, softmax
//! output, sampling, exact log-likelihood and backpropagation through time.
//!
//! Output tokens are `0..vocab`. The start symbol is input-only: it has its
//! own embedding row (index `vocab`) and no output logit, so it can never be
//! sampled.

use crate::error::{Error, Result};
use crate::numerics::ops::{affine, axpy, matvec_t_acc, outer_acc, sigmoid, softmax_in_place};
use crate::numerics::{Optimizer, ParamId, ParameterStore, Rng, Tensor};

/// Probabilities are floored here before taking logs.
pub const PROB_FLOOR: f64 = 1e-300;

/// Output vocabulary of a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Vocab {
    size: usize,
}

impl Vocab {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Config("vocabulary must be non-empty".into()));
        }
        Ok(Self { size })
    }

    pub fn size(self) -> usize {
        self.size
    }

    /// Input id of the start symbol.
    pub fn start_token(self) -> usize {
        self.size
    }

    pub fn contains(self, token: usize) -> bool {
        token < self.size
    }
}

/// Fixed-length token sequence; one RL episode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence(pub Vec<usize>);

impl Sequence {
    pub fn new(tokens: Vec<usize>) -> Self {
        Self(tokens)
    }

    pub fn tokens(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, vocab: Vocab, horizon: usize) -> Result<()> {
        if self.0.len() != horizon {
            return Err(Error::Shape(format!(
                "sequence length {} != horizon {horizon}",
                self.0.len()
            )));
        }
        match self.0.iter().find(|&&t| !vocab.contains(t)) {
            Some(&token) => Err(Error::Vocab {
                token,
                size: vocab.size(),
            }),
            None => Ok(()),
        }
    }

    /// Space-separated decimal ids.
    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        parts.join(" ")
    }

    pub fn parse_line(line: &str) -> std::result::Result<Self, std::num::ParseIntError> {
        line.split_ascii_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Sequence)
    }
}

/// Writes sequences one per line.
pub fn format_sequences(seqs: &[Sequence]) -> String {
    let mut out = String::new();
    for s in seqs {
        out.push_str(&s.to_line());
        out.push('\n');
    }
    out
}

pub fn parse_sequences(text: &str) -> Result<Vec<Sequence>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            Sequence::parse_line(l).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenDims {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
    pub horizon: usize,
}

impl GenDims {
    pub fn validate(&self) -> Result<()> {
        if self.vocab == 0 || self.embed == 0 || self.hidden == 0 || self.horizon == 0 {
            return Err(Error::Config(format!("generator dims must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Recurrent state after consuming `t` inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct GenState {
    pub h: Vec<f64>,
    pub s: Vec<f64>,
    pub t: usize,
}

impl GenState {
    pub fn initial(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            s: vec![0.0; hidden],
            t: 0,
        }
    }
}

const GATE_NAMES: [&str; 4] = ["f", "i", "o", "s"];
const FORGET: usize = 0;
const INPUT: usize = 1;
const OUTPUT: usize = 2;
const CANDIDATE: usize = 3;

#[derive(Clone, Debug, PartialEq)]
struct GenIds {
    embedding: ParamId,
    w: [ParamId; 4],
    b: [ParamId; 4],
    v: ParamId,
    c: ParamId,
}

/// The generator policy: embedding, LSTM cell and softmax output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorModel {
    dims: GenDims,
    params: ParameterStore,
    ids: GenIds,
}

/// Reusable buffers for one forward step.
#[derive(Clone, Debug)]
pub struct Scratch {
    z: Vec<f64>,
    pre: Vec<f64>,
    probs: Vec<f64>,
}

impl Scratch {
    pub fn new(dims: &GenDims) -> Self {
        Self {
            z: vec![0.0; dims.hidden + dims.embed],
            pre: vec![0.0; 4 * dims.hidden],
            probs: vec![0.0; dims.vocab],
        }
    }

    /// Distribution produced by the most recent step.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Per-step activations recorded for backpropagation through time.
#[derive(Clone, Debug)]
pub struct Tape {
    len: usize,
    inputs: Vec<usize>,
    z: Vec<f64>,
    gates: Vec<f64>,
    s: Vec<f64>,
    tanh_s: Vec<f64>,
    h: Vec<f64>,
    probs: Vec<f64>,
}

impl Tape {
    pub fn new(dims: &GenDims) -> Self {
        let (t, h, k, v) = (dims.horizon, dims.hidden, dims.embed, dims.vocab);
        Self {
            len: 0,
            inputs: vec![0; t],
            z: vec![0.0; t * (h + k)],
            gates: vec![0.0; t * 4 * h],
            s: vec![0.0; t * h],
            tanh_s: vec![0.0; t * h],
            h: vec![0.0; t * h],
            probs: vec![0.0; t * v],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs[..self.len]
    }

    pub fn probs_at(&self, t: usize, vocab: usize) -> &[f64] {
        &self.probs[t * vocab..(t + 1) * vocab]
    }
}

/// Gradient accumulator laid out like a model's parameter store.
#[derive(Clone, Debug, PartialEq)]
pub struct GradBuffer {
    pub bufs: Vec<Vec<f64>>,
}

impl GradBuffer {
    pub fn for_store(store: &ParameterStore) -> Self {
        Self {
            bufs: store.iter().map(|(_, p)| vec![0.0; p.value.len()]).collect(),
        }
    }

    pub fn zero(&mut self) {
        self.bufs.iter_mut().for_each(|b| b.fill(0.0));
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.bufs[id.index()]
    }

    pub fn add_into(&self, store: &mut ParameterStore) {
        let ids: Vec<ParamId> = store.iter().map(|(n, _)| store.id(n).unwrap()).collect();
        for (id, buf) in ids.into_iter().zip(&self.bufs) {
            axpy(1.0, buf, store.grad_mut(id));
        }
    }

    pub fn to_tensors(&self, store: &ParameterStore) -> Vec<Tensor> {
        store
            .iter()
            .zip(&self.bufs)
            .map(|((_, p), b)| Tensor::new(p.value.shape().to_vec(), b.clone()).unwrap())
            .collect()
    }
}

impl GeneratorModel {
    /// All-zero parameters: uniform output distribution at every step.
    pub fn zeros(dims: GenDims) -> Result<Self> {
        dims.validate()?;
        let (v, k, h) = (dims.vocab, dims.embed, dims.hidden);
        let mut params = ParameterStore::new();
        let embedding = params.add("embedding", Tensor::zeros(&[v + 1, k]))?;
        let mut w = [embedding; 4];
        let mut b = [embedding; 4];
        for (g, name) in GATE_NAMES.iter().enumerate() {
            w[g] = params.add(&format!("lstm.w_{name}"), Tensor::zeros(&[h, h + k]))?;
        }
        for (g, name) in GATE_NAMES.iter().enumerate() {
            b[g] = params.add(&format!("lstm.b_{name}"), Tensor::zeros(&[h]))?;
        }
        let vo = params.add("out.v", Tensor::zeros(&[v, h]))?;
        let c = params.add("out.c", Tensor::zeros(&[v]))?;
        Ok(Self {
            dims,
            params,
            ids: GenIds {
                embedding,
                w,
                b,
                v: vo,
                c,
            },
        })
    }

    /// Trainable initialisation: uniform(-0.05, 0.05), forget-gate bias 1.
    pub fn new(dims: GenDims, rng: &mut Rng) -> Result<Self> {
        let mut m = Self::zeros(dims)?;
        for (_, p) in m.params.iter_mut() {
            for v in p.value.data_mut() {
                *v = rng.uniform_range(-0.05, 0.05);
            }
        }
        let bf = m.ids.b[FORGET];
        m.params.value_mut(bf).fill(1.0);
        Ok(m)
    }

    /// Every parameter drawn i.i.d. from N(0, 1).
    pub fn standard_normal(dims: GenDims, rng: &mut Rng) -> Result<Self> {
        let mut m = Self::zeros(dims)?;
        for (_, p) in m.params.iter_mut() {
            for v in p.value.data_mut() {
                *v = rng.normal();
            }
        }
        Ok(m)
    }

    /// Rebuilds a model from a parameter store (e.g. a loaded checkpoint).
    pub fn from_store(dims: GenDims, store: &ParameterStore) -> Result<Self> {
        let mut m = Self::zeros(dims)?;
        m.params.copy_values_from(store)?;
        m.params.validate_finite()?;
        Ok(m)
    }

    pub fn dims(&self) -> GenDims {
        self.dims
    }

    pub fn vocab(&self) -> Vocab {
        Vocab { size: self.dims.vocab }
    }

    pub fn params(&self) -> &ParameterStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParameterStore {
        &mut self.params
    }

    pub fn param_id(&self, name: &str) -> Option<ParamId> {
        self.params.id(name)
    }

    fn check_input(&self, token: usize) -> Result<()> {
        if token > self.dims.vocab {
            return Err(Error::Vocab {
                token,
                size: self.dims.vocab + 1,
            });
        }
        Ok(())
    }

    /// One LSTM step on raw buffers; `h`/`s` are updated in place and the
    /// output distribution lands in `scratch.probs`. Returns the gate
    /// activations in `scratch.pre` (f, i, o, candidate).
    #[inline]
    fn cell(&self, h: &mut [f64], s: &mut [f64], input: usize, scratch: &mut Scratch) {
        let (hd, k) = (self.dims.hidden, self.dims.embed);
        let emb = self.params.value(self.ids.embedding);
        scratch.z[..hd].copy_from_slice(h);
        scratch.z[hd..].copy_from_slice(&emb[input * k..(input + 1) * k]);
        for g in 0..4 {
            affine(
                self.params.value(self.ids.w[g]),
                self.params.value(self.ids.b[g]),
                &scratch.z,
                &mut scratch.pre[g * hd..(g + 1) * hd],
            );
        }
        let pre = &mut scratch.pre;
        for j in 0..hd {
            let f = sigmoid(pre[j]);
            let i = sigmoid(pre[hd + j]);
            let o = sigmoid(pre[2 * hd + j]);
            let g = pre[3 * hd + j].tanh();
            pre[j] = f;
            pre[hd + j] = i;
            pre[2 * hd + j] = o;
            pre[3 * hd + j] = g;
            s[j] = f * s[j] + i * g;
            h[j] = o * s[j].tanh();
        }
        affine(
            self.params.value(self.ids.v),
            self.params.value(self.ids.c),
            h,
            &mut scratch.probs,
        );
        softmax_in_place(&mut scratch.probs);
    }

    /// Consumes `input` from `state`, returning the next state and the
    /// distribution over the following token.
    pub fn step(&self, state: &GenState, input: usize) -> Result<(GenState, Vec<f64>)> {
        if state.t >= self.dims.horizon {
            return Err(Error::Horizon {
                step: state.t,
                horizon: self.dims.horizon,
            });
        }
        self.check_input(input)?;
        let mut next = state.clone();
        let mut scratch = Scratch::new(&self.dims);
        self.cell(&mut next.h, &mut next.s, input, &mut scratch);
        next.t += 1;
        Ok((next, scratch.probs))
    }

    /// In-place variant of [`step`](Self::step) for hot loops; the
    /// distribution is left in `scratch`. Horizon and vocab are not checked.
    #[inline]
    pub fn advance(&self, state: &mut GenState, input: usize, scratch: &mut Scratch) {
        self.cell(&mut state.h, &mut state.s, input, scratch);
        state.t += 1;
    }

    /// State after feeding the start symbol and then every token of `prefix`;
    /// `scratch.probs` then holds the distribution of the next token.
    pub fn replay(&self, prefix: &[usize], scratch: &mut Scratch) -> Result<GenState> {
        if prefix.len() >= self.dims.horizon {
            return Err(Error::Horizon {
                step: prefix.len(),
                horizon: self.dims.horizon,
            });
        }
        let mut state = GenState::initial(self.dims.hidden);
        self.advance(&mut state, self.vocab().start_token(), scratch);
        for &tok in prefix {
            if !self.vocab().contains(tok) {
                return Err(Error::Vocab {
                    token: tok,
                    size: self.dims.vocab,
                });
            }
            self.advance(&mut state, tok, scratch);
        }
        Ok(state)
    }

    /// Extends `tokens` to the full horizon by sampling, starting from a state
    /// whose next-token distribution is in `scratch.probs`.
    pub fn complete(&self, state: &mut GenState, tokens: &mut Vec<usize>, scratch: &mut Scratch, rng: &mut Rng) {
        while tokens.len() < self.dims.horizon {
            let y = rng.categorical(&scratch.probs);
            tokens.push(y);
            if tokens.len() < self.dims.horizon {
                self.advance(state, y, scratch);
            }
        }
    }

    /// Draws one sequence from the policy.
    pub fn sample(&self, rng: &mut Rng) -> Sequence {
        let mut scratch = Scratch::new(&self.dims);
        let mut tokens = Vec::with_capacity(self.dims.horizon);
        let mut state = self
            .replay(&[], &mut scratch)
            .expect("empty prefix is always within horizon");
        self.complete(&mut state, &mut tokens, &mut scratch, rng);
        Sequence(tokens)
    }

    /// Draws one sequence and returns the distribution used at each step.
    pub fn sample_sequence(&self, rng: &mut Rng) -> (Sequence, Vec<Vec<f64>>) {
        let mut scratch = Scratch::new(&self.dims);
        let mut state = GenState::initial(self.dims.hidden);
        let mut tokens = Vec::with_capacity(self.dims.horizon);
        let mut dists = Vec::with_capacity(self.dims.horizon);
        let mut input = self.vocab().start_token();
        for _ in 0..self.dims.horizon {
            self.advance(&mut state, input, &mut scratch);
            let y = rng.categorical(&scratch.probs);
            dists.push(scratch.probs.clone());
            tokens.push(y);
            input = y;
        }
        (Sequence(tokens), dists)
    }

    /// `log G(y_t | y_<t)` for every position, teacher-forced.
    pub fn token_log_probs(&self, seq: &Sequence) -> Result<Vec<f64>> {
        seq.validate(self.vocab(), self.dims.horizon)?;
        let mut scratch = Scratch::new(&self.dims);
        let mut state = GenState::initial(self.dims.hidden);
        let mut input = self.vocab().start_token();
        let mut out = Vec::with_capacity(seq.len());
        for &y in seq.tokens() {
            self.advance(&mut state, input, &mut scratch);
            out.push(scratch.probs[y].max(PROB_FLOOR).ln());
            input = y;
        }
        Ok(out)
    }

    /// `sum_t log G(y_t | y_<t)`.
    pub fn log_likelihood(&self, seq: &Sequence) -> Result<f64> {
        Ok(self.token_log_probs(seq)?.iter().sum())
    }

    /// Runs the forward pass, recording activations. Step `t` consumes the
    /// start symbol when `t == 0` and `next_input(t - 1, probs)` otherwise,
    /// where `probs` is the distribution produced at step `t - 1`.
    pub fn forward_tape(
        &self,
        len: usize,
        tape: &mut Tape,
        mut next_input: impl FnMut(usize, &[f64]) -> usize,
    ) {
        let (hd, k, v) = (self.dims.hidden, self.dims.embed, self.dims.vocab);
        debug_assert!(len <= self.dims.horizon);
        let mut scratch = Scratch::new(&self.dims);
        let mut h = vec![0.0; hd];
        let mut s = vec![0.0; hd];
        let mut input = self.vocab().start_token();
        for t in 0..len {
            if t > 0 {
                input = next_input(t - 1, &tape.probs[(t - 1) * v..t * v]);
            }
            self.cell(&mut h, &mut s, input, &mut scratch);
            tape.inputs[t] = input;
            tape.z[t * (hd + k)..(t + 1) * (hd + k)].copy_from_slice(&scratch.z);
            tape.gates[t * 4 * hd..(t + 1) * 4 * hd].copy_from_slice(&scratch.pre);
            tape.s[t * hd..(t + 1) * hd].copy_from_slice(&s);
            for j in 0..hd {
                tape.tanh_s[t * hd + j] = s[j].tanh();
            }
            tape.h[t * hd..(t + 1) * hd].copy_from_slice(&h);
            tape.probs[t * v..(t + 1) * v].copy_from_slice(&scratch.probs);
        }
        tape.len = len;
    }

    /// Backpropagates `L = sum_t weights[t] * -log p_t(targets[t])` through a
    /// recorded tape into `grads`, returning `L`.
    pub fn backward_tape(&self, tape: &Tape, targets: &[usize], weights: &[f64], grads: &mut GradBuffer) -> f64 {
        let (hd, k, v) = (self.dims.hidden, self.dims.embed, self.dims.vocab);
        let len = tape.len;
        debug_assert_eq!(targets.len(), len);
        debug_assert_eq!(weights.len(), len);
        let zl = hd + k;
        let mut dh_next = vec![0.0; hd];
        let mut ds_next = vec![0.0; hd];
        let mut dlogits = vec![0.0; v];
        let mut da = vec![0.0; 4 * hd];
        let mut dz = vec![0.0; zl];
        let mut loss = 0.0;
        let ids = &self.ids;
        for t in (0..len).rev() {
            let probs = &tape.probs[t * v..(t + 1) * v];
            let h = &tape.h[t * hd..(t + 1) * hd];
            let w = weights[t];
            let y = targets[t];
            let mut dh = std::mem::take(&mut dh_next);
            if w != 0.0 {
                loss += -w * probs[y].max(PROB_FLOOR).ln();
                for (d, &p) in dlogits.iter_mut().zip(probs) {
                    *d = w * p;
                }
                dlogits[y] -= w;
                outer_acc(grads.get_mut(ids.v), &dlogits, h);
                axpy(1.0, &dlogits, grads.get_mut(ids.c));
                matvec_t_acc(self.params.value(ids.v), &dlogits, &mut dh);
            }
            let gates = &tape.gates[t * 4 * hd..(t + 1) * 4 * hd];
            let tanh_s = &tape.tanh_s[t * hd..(t + 1) * hd];
            for j in 0..hd {
                let f = gates[FORGET * hd + j];
                let i = gates[INPUT * hd + j];
                let o = gates[OUTPUT * hd + j];
                let g = gates[CANDIDATE * hd + j];
                let ts = tanh_s[j];
                let s_prev = if t > 0 { tape.s[(t - 1) * hd + j] } else { 0.0 };
                let ds = dh[j] * o * (1.0 - ts * ts) + ds_next[j];
                da[OUTPUT * hd + j] = dh[j] * ts * o * (1.0 - o);
                da[FORGET * hd + j] = ds * s_prev * f * (1.0 - f);
                da[INPUT * hd + j] = ds * g * i * (1.0 - i);
                da[CANDIDATE * hd + j] = ds * i * (1.0 - g * g);
                ds_next[j] = ds * f;
            }
            let z = &tape.z[t * zl..(t + 1) * zl];
            dz.fill(0.0);
            for g in 0..4 {
                let dag = &da[g * hd..(g + 1) * hd];
                outer_acc(grads.get_mut(ids.w[g]), dag, z);
                axpy(1.0, dag, grads.get_mut(ids.b[g]));
                matvec_t_acc(self.params.value(ids.w[g]), dag, &mut dz);
            }
            let x = tape.inputs[t];
            axpy(1.0, &dz[hd..], &mut grads.get_mut(ids.embedding)[x * k..(x + 1) * k]);
            dh.copy_from_slice(&dz[..hd]);
            dh_next = dh;
        }
        loss
    }

    /// Mean sequence NLL of `batch` under teacher forcing, with its gradient
    /// accumulated into the store's gradient buffers.
    pub fn nll_loss_and_grad(&mut self, batch: &[Sequence]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let mut grads = GradBuffer::for_store(&self.params);
        let mut tape = Tape::new(&self.dims);
        let weights = vec![1.0 / batch.len() as f64; self.dims.horizon];
        let mut loss = 0.0;
        for seq in batch {
            seq.validate(self.vocab(), self.dims.horizon)?;
            let toks = seq.tokens();
            self.forward_tape(toks.len(), &mut tape, |t, _| toks[t]);
            loss += self.backward_tape(&tape, toks, &weights, &mut grads);
        }
        grads.add_into(&mut self.params);
        Ok(loss)
    }
}

fn check_finite(loss: f64, model: &GeneratorModel, stage: &str) -> Result<()> {
    if loss.is_finite() && model.params.validate_finite().is_ok() {
        Ok(())
    } else {
        Err(Error::Diverged {
            stage: stage.to_string(),
            last_good_checkpoint: None,
        })
    }
}

/// One shuffled pass of maximum-likelihood training. Returns the mean
/// per-sequence NLL measured before each minibatch update.
pub fn mle_train_epoch(
    model: &mut GeneratorModel,
    dataset: &[Sequence],
    opt: &mut Optimizer,
    batch: usize,
    rng: &mut Rng,
) -> Result<f64> {
    scheduled_sampling_epoch(model, dataset, opt, 1.0, batch, rng)
}

/// One shuffled pass where each fed input is the ground-truth previous token
/// with probability `omega`, otherwise a token sampled from the model's own
/// distribution at that step. Targets are always the ground truth.
pub fn scheduled_sampling_epoch(
    model: &mut GeneratorModel,
    dataset: &[Sequence],
    opt: &mut Optimizer,
    omega: f64,
    batch: usize,
    rng: &mut Rng,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::Config(format!("omega must lie in [0, 1], got {omega}")));
    }
    if dataset.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if batch == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    for seq in dataset {
        seq.validate(model.vocab(), model.dims.horizon)?;
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    rng.shuffle(&mut order);
    let mut grads = GradBuffer::for_store(&model.params);
    let mut tape = Tape::new(&model.dims);
    let horizon = model.dims.horizon;
    let mut total = 0.0;
    for chunk in order.chunks(batch) {
        grads.zero();
        let weights = vec![1.0 / chunk.len() as f64; horizon];
        let mut batch_loss = 0.0;
        for &idx in chunk {
            let toks = dataset[idx].tokens();
            if omega >= 1.0 {
                model.forward_tape(horizon, &mut tape, |t, _| toks[t]);
            } else {
                model.forward_tape(horizon, &mut tape, |t, probs| {
                    if omega > 0.0 && rng.bernoulli(omega) {
                        toks[t]
                    } else {
                        rng.categorical(probs)
                    }
                });
            }
            batch_loss += model.backward_tape(&tape, toks, &weights, &mut grads);
        }
        check_finite(batch_loss, model, "generator maximum-likelihood training")?;
        total += batch_loss * chunk.len() as f64;
        grads.add_into(&mut model.params);
        opt.step(&mut model.params)?;
    }
    Ok(total / dataset.len() as f64)
}

/// Linear curriculum: `max(0, 1 - decay * epoch)`.
pub fn scheduled_omega(epoch: usize, decay: f64) -> f64 {
    (1.0 - decay * epoch as f64).max(0.0)
}
