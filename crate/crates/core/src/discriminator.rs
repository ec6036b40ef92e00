//! Convolutional sequence classifier: embedding concatenation, multi-width
//! convolutions with max-over-time pooling, one highway layer and a sigmoid
//! output giving the probability that a sequence is real.

use crate::error::{Error, Result};
use crate::generator::Sequence;
use crate::numerics::ops::{affine, axpy, dot, matvec_t_acc, outer_acc, sigmoid, softplus};
use crate::numerics::{Optimizer, ParamId, ParameterStore, Rng, Tensor};
use crate::generator::GradBuffer;

/// `count` convolution kernels of width `window`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelSpec {
    pub window: usize,
    pub count: usize,
}

impl KernelSpec {
    pub const fn new(window: usize, count: usize) -> Self {
        Self { window, count }
    }
}

fn table(pairs: &[(usize, usize)]) -> Vec<KernelSpec> {
    pairs.iter().map(|&(w, c)| KernelSpec::new(w, c)).collect()
}

/// Kernel layout used for length-20 sequences.
pub fn preset_t20() -> Vec<KernelSpec> {
    table(&[
        (1, 100),
        (2, 200),
        (3, 200),
        (4, 200),
        (5, 200),
        (6, 100),
        (7, 100),
        (8, 100),
        (9, 100),
        (10, 100),
        (15, 160),
        (20, 160),
    ])
}

/// Kernel layout used for length-32 sequences.
pub fn preset_t32() -> Vec<KernelSpec> {
    table(&[
        (1, 100),
        (2, 200),
        (3, 200),
        (4, 200),
        (5, 200),
        (6, 100),
        (7, 100),
        (8, 100),
        (9, 100),
        (10, 100),
        (16, 160),
        (24, 160),
        (32, 160),
    ])
}

/// Small layout for desk-scale runs: windows 1 to 5, 25 kernels each.
pub fn preset_desk() -> Vec<KernelSpec> {
    (1..=5).map(|w| KernelSpec::new(w, 25)).collect()
}

/// Looks up a shipped preset by name (`t20`, `t32`, `desk`).
pub fn preset(name: &str) -> Option<Vec<KernelSpec>> {
    match name {
        "t20" => Some(preset_t20()),
        "t32" => Some(preset_t32()),
        "desk" => Some(preset_desk()),
        _ => None,
    }
}

/// Parses `window,count` lines; blank lines and `#` comments are skipped.
pub fn parse_kernel_specs(text: &str) -> Result<Vec<KernelSpec>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let (w, c) = line
            .split_once(',')
            .ok_or_else(|| err(format!("expected `window,count`, got {line:?}")))?;
        let window = w.trim().parse().map_err(|e| err(format!("bad window: {e}")))?;
        let count = c.trim().parse().map_err(|e| err(format!("bad count: {e}")))?;
        out.push(KernelSpec { window, count });
    }
    Ok(out)
}

pub fn format_kernel_specs(specs: &[KernelSpec]) -> String {
    specs.iter().map(|k| format!("{},{}\n", k.window, k.count)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscDims {
    pub vocab: usize,
    pub horizon: usize,
    pub embed: usize,
    pub kernels: Vec<KernelSpec>,
    /// Dropout keep-probability on pooled features during training.
    pub keep_prob: f64,
}

impl DiscDims {
    pub fn validate(&self) -> Result<()> {
        if self.vocab == 0 || self.horizon == 0 || self.embed == 0 {
            return Err(Error::Config("discriminator dims must be positive".into()));
        }
        if self.kernels.is_empty() {
            return Err(Error::Config("discriminator needs at least one kernel".into()));
        }
        for k in &self.kernels {
            if k.window == 0 || k.count == 0 || k.window > self.horizon {
                return Err(Error::Config(format!(
                    "kernel window {} count {} invalid for horizon {}",
                    k.window, k.count, self.horizon
                )));
            }
        }
        let mut windows: Vec<usize> = self.kernels.iter().map(|k| k.window).collect();
        windows.sort_unstable();
        windows.dedup();
        if windows.len() != self.kernels.len() {
            return Err(Error::Config("kernel windows must be distinct".into()));
        }
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return Err(Error::Config(format!("keep_prob must lie in (0, 1], got {}", self.keep_prob)));
        }
        Ok(())
    }

    /// Pooled-feature width, the sum of kernel counts.
    pub fn features(&self) -> usize {
        self.kernels.iter().map(|k| k.count).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
struct DiscIds {
    embedding: ParamId,
    conv_w: Vec<ParamId>,
    conv_b: Vec<ParamId>,
    w_t: ParamId,
    b_t: ParamId,
    w_h: ParamId,
    b_h: ParamId,
    out_w: ParamId,
    out_b: ParamId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminatorModel {
    dims: DiscDims,
    params: ParameterStore,
    ids: DiscIds,
}

/// Activations from one forward pass, kept for the backward pass.
#[derive(Clone, Debug, Default)]
pub struct DiscCache {
    emb: Vec<f64>,
    /// Position of the max pre-activation per feature.
    argmax: Vec<usize>,
    /// Max pre-activation per feature (pooled value is its ReLU).
    pooled_pre: Vec<f64>,
    /// Inverted-dropout multiplier per feature (empty when dropout is off).
    mask: Vec<f64>,
    x: Vec<f64>,
    tau: Vec<f64>,
    h_pre: Vec<f64>,
    highway: Vec<f64>,
    pub logit: f64,
    pub prob: f64,
}

impl DiscriminatorModel {
    pub fn zeros(dims: DiscDims) -> Result<Self> {
        dims.validate()?;
        let f = dims.features();
        let mut params = ParameterStore::new();
        let embedding = params.add("embedding", Tensor::zeros(&[dims.vocab, dims.embed]))?;
        let mut conv_w = Vec::new();
        let mut conv_b = Vec::new();
        for k in &dims.kernels {
            conv_w.push(params.add(
                &format!("conv{}.w", k.window),
                Tensor::zeros(&[k.count, k.window * dims.embed]),
            )?);
            conv_b.push(params.add(&format!("conv{}.b", k.window), Tensor::zeros(&[k.count]))?);
        }
        let w_t = params.add("highway.w_t", Tensor::zeros(&[f, f]))?;
        let b_t = params.add("highway.b_t", Tensor::zeros(&[f]))?;
        let w_h = params.add("highway.w_h", Tensor::zeros(&[f, f]))?;
        let b_h = params.add("highway.b_h", Tensor::zeros(&[f]))?;
        let out_w = params.add("out.w", Tensor::zeros(&[1, f]))?;
        let out_b = params.add("out.b", Tensor::zeros(&[1]))?;
        Ok(Self {
            dims,
            params,
            ids: DiscIds {
                embedding,
                conv_w,
                conv_b,
                w_t,
                b_t,
                w_h,
                b_h,
                out_w,
                out_b,
            },
        })
    }

    /// Trainable initialisation: N(0, 0.1²) weights, zero biases except the
    /// highway transform gate, which starts biased towards carrying.
    pub fn new(dims: DiscDims, rng: &mut Rng) -> Result<Self> {
        let mut m = Self::zeros(dims)?;
        let weights: Vec<ParamId> = std::iter::once(m.ids.embedding)
            .chain(m.ids.conv_w.iter().copied())
            .chain([m.ids.w_t, m.ids.w_h, m.ids.out_w])
            .collect();
        for id in weights {
            for v in m.params.value_mut(id) {
                *v = 0.1 * rng.normal();
            }
        }
        let bt = m.ids.b_t;
        m.params.value_mut(bt).fill(-2.0);
        Ok(m)
    }

    pub fn from_store(dims: DiscDims, store: &ParameterStore) -> Result<Self> {
        let mut m = Self::zeros(dims)?;
        m.params.copy_values_from(store)?;
        m.params.validate_finite()?;
        Ok(m)
    }

    pub fn dims(&self) -> &DiscDims {
        &self.dims
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

    fn check(&self, seq: &Sequence) -> Result<()> {
        if seq.len() != self.dims.horizon {
            return Err(Error::Shape(format!(
                "sequence length {} != horizon {}",
                seq.len(),
                self.dims.horizon
            )));
        }
        match seq.tokens().iter().find(|&&t| t >= self.dims.vocab) {
            Some(&token) => Err(Error::Vocab {
                token,
                size: self.dims.vocab,
            }),
            None => Ok(()),
        }
    }

    /// Row `t` is the embedding of token `y_t`; returned as a `T x k_d` tensor.
    pub fn embed_concat(&self, seq: &Sequence) -> Result<Tensor> {
        self.check(seq)?;
        let mut out = Vec::new();
        self.fill_embedding(seq, &mut out);
        Tensor::new(vec![self.dims.horizon, self.dims.embed], out)
    }

    fn fill_embedding(&self, seq: &Sequence, out: &mut Vec<f64>) {
        let k = self.dims.embed;
        let emb = self.params.value(self.ids.embedding);
        out.clear();
        for &tok in seq.tokens() {
            out.extend_from_slice(&emb[tok * k..(tok + 1) * k]);
        }
    }

    /// Max-over-time pre-activations for every kernel.
    fn pool(&self, emb: &[f64], argmax: &mut Vec<usize>, pooled_pre: &mut Vec<f64>) {
        let (t_len, k) = (self.dims.horizon, self.dims.embed);
        argmax.clear();
        pooled_pre.clear();
        for (g, spec) in self.dims.kernels.iter().enumerate() {
            let w = self.params.value(self.ids.conv_w[g]);
            let b = self.params.value(self.ids.conv_b[g]);
            let span = spec.window * k;
            for f in 0..spec.count {
                let row = &w[f * span..(f + 1) * span];
                let mut best = f64::NEG_INFINITY;
                let mut best_i = 0;
                for i in 0..=(t_len - spec.window) {
                    let a = dot(row, &emb[i * k..i * k + span]);
                    if a > best {
                        best = a;
                        best_i = i;
                    }
                }
                argmax.push(best_i);
                pooled_pre.push(best + b[f]);
            }
        }
    }

    /// Forward pass. When `dropout` is given, pooled features are masked with
    /// keep-probability `keep_prob` and rescaled by its inverse.
    pub fn forward(&self, seq: &Sequence, dropout: Option<&mut Rng>) -> Result<DiscCache> {
        self.check(seq)?;
        let mut c = DiscCache::default();
        self.forward_into(seq, dropout, &mut c);
        Ok(c)
    }

    fn forward_into(&self, seq: &Sequence, dropout: Option<&mut Rng>, c: &mut DiscCache) {
        let f = self.dims.features();
        self.fill_embedding(seq, &mut c.emb);
        self.pool(&c.emb, &mut c.argmax, &mut c.pooled_pre);
        c.x.clear();
        c.x.extend(c.pooled_pre.iter().map(|&a| a.max(0.0)));
        c.mask.clear();
        if let Some(rng) = dropout {
            let keep = self.dims.keep_prob;
            for x in c.x.iter_mut() {
                let m = if rng.bernoulli(keep) { 1.0 / keep } else { 0.0 };
                c.mask.push(m);
                *x *= m;
            }
        }
        c.tau.resize(f, 0.0);
        c.h_pre.resize(f, 0.0);
        c.highway.resize(f, 0.0);
        affine(
            self.params.value(self.ids.w_t),
            self.params.value(self.ids.b_t),
            &c.x,
            &mut c.tau,
        );
        c.tau.iter_mut().for_each(|v| *v = sigmoid(*v));
        affine(
            self.params.value(self.ids.w_h),
            self.params.value(self.ids.b_h),
            &c.x,
            &mut c.h_pre,
        );
        for j in 0..f {
            let hj = c.h_pre[j].max(0.0);
            c.highway[j] = c.tau[j] * hj + (1.0 - c.tau[j]) * c.x[j];
        }
        c.logit = self.params.value(self.ids.out_b)[0]
            + dot(self.params.value(self.ids.out_w), &c.highway);
        c.prob = sigmoid(c.logit);
    }

    /// `D(Y)` with dropout off.
    pub fn probability(&self, seq: &Sequence) -> Result<f64> {
        self.check(seq)?;
        let mut c = DiscCache::default();
        self.forward_into(seq, None, &mut c);
        Ok(c.prob)
    }

    /// Dropout-off probability reusing `cache` buffers; the sequence must
    /// already be valid.
    pub fn probability_with(&self, seq: &Sequence, cache: &mut DiscCache) -> f64 {
        self.forward_into(seq, None, cache);
        cache.prob
    }

    /// Accumulates `d loss / d logit = dlogit` back through a cached pass.
    fn backward(&self, seq: &Sequence, c: &DiscCache, dlogit: f64, grads: &mut GradBuffer) {
        let f = self.dims.features();
        let k = self.dims.embed;
        let ids = &self.ids;
        outer_acc(grads.get_mut(ids.out_w), &[dlogit], &c.highway);
        grads.get_mut(ids.out_b)[0] += dlogit;
        let out_w = self.params.value(ids.out_w);
        let mut dx = vec![0.0; f];
        let mut da_t = vec![0.0; f];
        let mut da_h = vec![0.0; f];
        for j in 0..f {
            let dc = dlogit * out_w[j];
            let hj = c.h_pre[j].max(0.0);
            let tau = c.tau[j];
            da_t[j] = dc * (hj - c.x[j]) * tau * (1.0 - tau);
            da_h[j] = if c.h_pre[j] > 0.0 { dc * tau } else { 0.0 };
            dx[j] = dc * (1.0 - tau);
        }
        outer_acc(grads.get_mut(ids.w_t), &da_t, &c.x);
        axpy(1.0, &da_t, grads.get_mut(ids.b_t));
        matvec_t_acc(self.params.value(ids.w_t), &da_t, &mut dx);
        outer_acc(grads.get_mut(ids.w_h), &da_h, &c.x);
        axpy(1.0, &da_h, grads.get_mut(ids.b_h));
        matvec_t_acc(self.params.value(ids.w_h), &da_h, &mut dx);
        if !c.mask.is_empty() {
            for (d, m) in dx.iter_mut().zip(&c.mask) {
                *d *= m;
            }
        }
        let mut d_emb = vec![0.0; c.emb.len()];
        let mut feat = 0;
        for (g, spec) in self.dims.kernels.iter().enumerate() {
            let span = spec.window * k;
            let w = self.params.value(ids.conv_w[g]);
            for fi in 0..spec.count {
                let d = dx[feat];
                if d != 0.0 && c.pooled_pre[feat] > 0.0 {
                    let at = c.argmax[feat] * k;
                    axpy(d, &c.emb[at..at + span], &mut grads.get_mut(ids.conv_w[g])[fi * span..(fi + 1) * span]);
                    grads.get_mut(ids.conv_b[g])[fi] += d;
                    axpy(d, &w[fi * span..(fi + 1) * span], &mut d_emb[at..at + span]);
                }
                feat += 1;
            }
        }
        let g_emb = grads.get_mut(ids.embedding);
        for (t, &tok) in seq.tokens().iter().enumerate() {
            axpy(1.0, &d_emb[t * k..(t + 1) * k], &mut g_emb[tok * k..(tok + 1) * k]);
        }
    }

    /// Mean binary cross-entropy over a labelled batch (label 1 = real),
    /// accumulating its gradient into `grads`.
    fn batch_loss_grad(
        &self,
        seqs: &[&Sequence],
        labels: &[f64],
        mut dropout: Option<&mut Rng>,
        grads: &mut GradBuffer,
    ) -> f64 {
        let n = seqs.len() as f64;
        let mut cache = DiscCache::default();
        let mut loss = 0.0;
        for (seq, &y) in seqs.iter().zip(labels) {
            self.forward_into(seq, dropout.as_deref_mut(), &mut cache);
            loss += softplus(cache.logit) - y * cache.logit;
            self.backward(seq, &cache, (cache.prob - y) / n, grads);
        }
        loss / n
    }

    /// Mean cross-entropy of `batch` with dropout off; the gradient is added
    /// to the store's gradient buffers.
    pub fn loss_and_grad(&mut self, batch: &LabeledBatch) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Empty("discriminator batch"));
        }
        for s in &batch.sequences {
            self.check(s)?;
        }
        let mut grads = GradBuffer::for_store(&self.params);
        let seqs: Vec<&Sequence> = batch.sequences.iter().collect();
        let labels: Vec<f64> = batch.labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
        let loss = self.batch_loss_grad(&seqs, &labels, None, &mut grads);
        grads.add_into(&mut self.params);
        Ok(loss)
    }

    /// Mean cross-entropy with dropout off and no gradient.
    pub fn loss(&self, batch: &LabeledBatch) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Empty("discriminator batch"));
        }
        let mut cache = DiscCache::default();
        let mut total = 0.0;
        for (s, &l) in batch.sequences.iter().zip(&batch.labels) {
            self.check(s)?;
            self.forward_into(s, None, &mut cache);
            total += softplus(cache.logit) - if l { cache.logit } else { 0.0 };
        }
        Ok(total / batch.len() as f64)
    }

    /// Fraction classified correctly at threshold 0.5.
    pub fn accuracy(&self, batch: &LabeledBatch) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Empty("discriminator batch"));
        }
        let mut cache = DiscCache::default();
        let mut correct = 0usize;
        for (s, &l) in batch.sequences.iter().zip(&batch.labels) {
            self.check(s)?;
            self.forward_into(s, None, &mut cache);
            if (cache.prob > 0.5) == l {
                correct += 1;
            }
        }
        Ok(correct as f64 / batch.len() as f64)
    }
}

/// Sequences with binary labels (`true` = real data).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledBatch {
    pub sequences: Vec<Sequence>,
    pub labels: Vec<bool>,
}

impl LabeledBatch {
    pub fn new(sequences: Vec<Sequence>, labels: Vec<bool>) -> Result<Self> {
        if sequences.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} sequences but {} labels",
                sequences.len(),
                labels.len()
            )));
        }
        Ok(Self { sequences, labels })
    }

    pub fn balanced(positives: &[Sequence], negatives: &[Sequence]) -> Self {
        let mut sequences = positives.to_vec();
        sequences.extend_from_slice(negatives);
        let mut labels = vec![true; positives.len()];
        labels.resize(positives.len() + negatives.len(), false);
        Self { sequences, labels }
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

/// `k` shuffled minibatch passes over positives (label 1) and negatives
/// (label 0) with dropout on. Returns the last epoch's mean loss.
pub fn train_epochs(
    model: &mut DiscriminatorModel,
    positives: &[Sequence],
    negatives: &[Sequence],
    k: usize,
    opt: &mut Optimizer,
    batch: usize,
    rng: &mut Rng,
) -> Result<f64> {
    if positives.is_empty() {
        return Err(Error::Empty("positive examples"));
    }
    if negatives.is_empty() {
        return Err(Error::Empty("negative examples"));
    }
    if batch == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    for s in positives.iter().chain(negatives) {
        model.check(s)?;
    }
    let items: Vec<(&Sequence, f64)> = positives
        .iter()
        .map(|s| (s, 1.0))
        .chain(negatives.iter().map(|s| (s, 0.0)))
        .collect();
    let mut order: Vec<usize> = (0..items.len()).collect();
    let mut grads = GradBuffer::for_store(&model.params);
    let mut last = f64::NAN;
    for _ in 0..k {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            grads.zero();
            let seqs: Vec<&Sequence> = chunk.iter().map(|&i| items[i].0).collect();
            let labels: Vec<f64> = chunk.iter().map(|&i| items[i].1).collect();
            let loss = model.batch_loss_grad(&seqs, &labels, Some(rng), &mut grads);
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    stage: "discriminator training".into(),
                    last_good_checkpoint: None,
                });
            }
            total += loss * chunk.len() as f64;
            grads.add_into(&mut model.params);
            opt.step(&mut model.params)?;
        }
        last = total / items.len() as f64;
    }
    Ok(last)
}
