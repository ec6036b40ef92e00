//! Brute-force oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use seqgan_core::discriminator::{DiscDims, DiscriminatorModel, KernelSpec};
use seqgan_core::generator::{GenDims, GeneratorModel, GradBuffer, Sequence, Tape};
use seqgan_core::numerics::{Rng, Tensor};
use seqgan_core::rollout::SequenceReward;

/// Every sequence of length `horizon` over `vocab` tokens, in lexicographic order.
pub fn all_sequences(vocab: usize, horizon: usize) -> Vec<Sequence> {
    let total = vocab.pow(horizon as u32);
    (0..total)
        .map(|mut code| {
            let mut toks = vec![0; horizon];
            for t in (0..horizon).rev() {
                toks[t] = code % vocab;
                code /= vocab;
            }
            Sequence(toks)
        })
        .collect()
}

/// A generator with well-spread token distributions.
pub fn tiny_generator(vocab: usize, horizon: usize, seed: u64) -> GeneratorModel {
    let dims = GenDims {
        vocab,
        embed: 3,
        hidden: 4,
        horizon,
    };
    let mut g = GeneratorModel::standard_normal(dims, &mut Rng::new(seed)).unwrap();
    for (_, p) in g.params_mut().iter_mut() {
        for v in p.value.data_mut() {
            *v *= 0.7;
        }
    }
    g
}

/// A fixed random discriminator whose scores spread over (0, 1).
pub fn tiny_discriminator(vocab: usize, horizon: usize, seed: u64) -> DiscriminatorModel {
    let kernels = (1..=horizon.min(2)).map(|w| KernelSpec::new(w, 3)).collect();
    let dims = DiscDims {
        vocab,
        horizon,
        embed: 3,
        kernels,
        keep_prob: 1.0,
    };
    let mut d = DiscriminatorModel::new(dims, &mut Rng::new(seed)).unwrap();
    for (_, p) in d.params_mut().iter_mut() {
        for v in p.value.data_mut() {
            *v *= 15.0;
        }
    }
    d
}

pub fn probability(g: &GeneratorModel, seq: &Sequence) -> f64 {
    g.log_likelihood(seq).unwrap().exp()
}

/// `J = sum_Y P(Y) D(Y)` by enumeration.
pub fn objective(g: &GeneratorModel, reward: &dyn SequenceReward) -> f64 {
    let dims = g.dims();
    all_sequences(dims.vocab, dims.horizon)
        .iter()
        .map(|y| probability(g, y) * reward.reward(y))
        .sum()
}

/// Exact action value `Q(Y_{1:t})` and the variance of the reward of one
/// roll-out from the length-`t` prefix, by enumeration.
pub fn exact_q(g: &GeneratorModel, prefix: &[usize], reward: &dyn SequenceReward) -> (f64, f64) {
    let dims = g.dims();
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for y in all_sequences(dims.vocab, dims.horizon) {
        if &y.tokens()[..prefix.len()] == prefix {
            let p = probability(g, &y);
            let r = reward.reward(&y);
            m0 += p;
            m1 += p * r;
            m2 += p * r * r;
        }
    }
    let mean = m1 / m0;
    (mean, m2 / m0 - mean * mean)
}

/// The policy gradient as a sum over every prefix `Y_{1:t}` of
/// `P(Y_{1:t}) Q(Y_{1:t}) grad log G(y_t | Y_{1:t-1})`, with `Q` and the
/// prefix probabilities enumerated exactly.
pub fn exact_policy_gradient(g: &GeneratorModel, reward: &dyn SequenceReward) -> Vec<Tensor> {
    let dims = g.dims();
    let full = all_sequences(dims.vocab, dims.horizon);
    let joint: Vec<f64> = full.iter().map(|y| probability(g, y) * reward.reward(y)).collect();
    let mut grads = GradBuffer::for_store(g.params());
    let mut tape = Tape::new(&dims);
    for t in 1..=dims.horizon {
        for prefix in all_sequences(dims.vocab, t) {
            let p = prefix.tokens();
            // P(Y_{1:t}) Q(Y_{1:t}) = sum over completions of P(Y) D(Y).
            let pq: f64 = full
                .iter()
                .zip(&joint)
                .filter(|(y, _)| &y.tokens()[..t] == p)
                .map(|(_, j)| j)
                .sum();
            g.forward_tape(t, &mut tape, |s, _| p[s]);
            let mut weights = vec![0.0; t];
            weights[t - 1] = -pq;
            g.backward_tape(&tape, p, &weights, &mut grads);
        }
    }
    grads.to_tensors(g.params())
}

pub fn flatten(ts: &[Tensor]) -> Vec<f64> {
    ts.iter().flat_map(|t| t.data().iter().copied()).collect()
}

/// Componentwise mean and standard error of the sampled-action REINFORCE
/// estimator `sum_t q_t grad log G(y_t | Y_{1:t-1})` over `episodes` draws,
/// with `q_t` from `n` Monte Carlo roll-outs.
pub fn episode_mean_and_se(
    g: &GeneratorModel,
    reward: &dyn SequenceReward,
    episodes: usize,
    n: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    use seqgan_core::rollout::{accumulate_reinforce, estimate_q, RolloutPolicy};
    let policy = RolloutPolicy::new(g);
    let mut rng = Rng::new(seed);
    let mut grads = GradBuffer::for_store(g.params());
    let mut tape = Tape::new(&g.dims());
    let size = g.params().num_scalars();
    let mut sum = vec![0.0; size];
    let mut sum_sq = vec![0.0; size];
    for _ in 0..episodes {
        let y = g.sample(&mut rng);
        let q = estimate_q(&y, &policy, reward, n, &mut rng).unwrap();
        grads.zero();
        accumulate_reinforce(g, &y, &q.q, 0.0, -1.0, &mut grads, &mut tape);
        for (i, v) in grads.bufs.iter().flatten().enumerate() {
            sum[i] += v;
            sum_sq[i] += v * v;
        }
    }
    let m = episodes as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let se = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, mu)| ((sq / m - mu * mu).max(0.0) * m / (m - 1.0) / m).sqrt())
        .collect();
    (mean, se)
}

/// Fraction of components with `|mean - target| <= k * se`.
pub fn fraction_within(mean: &[f64], se: &[f64], target: &[f64], k: f64) -> f64 {
    let hits = mean
        .iter()
        .zip(se)
        .zip(target)
        .filter(|((m, s), t)| (*m - *t).abs() <= k * *s + 1e-12)
        .count();
    hits as f64 / mean.len() as f64
}

/// `max |a - n| / max |n|` over all components.
pub fn norm_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic.iter().zip(numeric).map(|(a, n)| (a - n).abs()).fold(0.0, f64::max);
    let scale = numeric.iter().map(|n| n.abs()).fold(0.0, f64::max);
    diff / scale
}

/// Random generator dims and a 2-sequence batch from `seed`; returns the max
/// relative error of the teacher-forced NLL gradient against central
/// differences with step `1e-5`.
pub fn generator_gradcheck(seed: u64) -> f64 {
    use seqgan_core::numerics::{finite_diff_grad, max_relative_error};
    let mut rng = Rng::new(seed);
    let dims = GenDims {
        vocab: 2 + rng.below(5),
        embed: 1 + rng.below(4),
        hidden: 1 + rng.below(5),
        horizon: 1 + rng.below(5),
    };
    let mut g = GeneratorModel::new(dims, &mut rng).unwrap();
    for (_, p) in g.params_mut().iter_mut() {
        for v in p.value.data_mut() {
            *v = rng.uniform_range(-0.8, 0.8);
        }
    }
    let batch: Vec<Sequence> = (0..2)
        .map(|_| Sequence((0..dims.horizon).map(|_| rng.below(dims.vocab)).collect()))
        .collect();
    g.params_mut().zero_grads();
    g.nll_loss_and_grad(&batch).unwrap();
    let analytic = g.params().grads();
    let numeric = finite_diff_grad(
        |st| {
            let m = GeneratorModel::from_store(dims, st).unwrap();
            -batch.iter().map(|s| m.log_likelihood(s).unwrap()).sum::<f64>() / batch.len() as f64
        },
        g.params_mut(),
        1e-5,
    )
    .unwrap();
    max_relative_error(&analytic, &numeric, 1e-6)
}

/// As [`generator_gradcheck`] for the discriminator cross-entropy on a
/// balanced 4-sequence batch, dropout off.
pub fn discriminator_gradcheck(seed: u64) -> f64 {
    use seqgan_core::discriminator::LabeledBatch;
    use seqgan_core::numerics::{finite_diff_grad, max_relative_error};
    let mut rng = Rng::new(seed ^ 0x5eed);
    let vocab = 2 + rng.below(5);
    let horizon = 2 + rng.below(5);
    let mut windows: Vec<usize> = (1..=horizon).collect();
    rng.shuffle(&mut windows);
    let kernels = windows[..1 + rng.below(horizon.min(3))]
        .iter()
        .map(|&w| KernelSpec::new(w, 1 + rng.below(3)))
        .collect();
    let dims = DiscDims {
        vocab,
        horizon,
        embed: 1 + rng.below(4),
        kernels,
        keep_prob: 1.0,
    };
    let mut d = DiscriminatorModel::new(dims.clone(), &mut rng).unwrap();
    for (_, p) in d.params_mut().iter_mut() {
        for v in p.value.data_mut() {
            *v = rng.uniform_range(-0.8, 0.8);
        }
    }
    let seqs: Vec<Sequence> = (0..4)
        .map(|_| Sequence((0..horizon).map(|_| rng.below(vocab)).collect()))
        .collect();
    let batch = LabeledBatch::new(seqs, vec![true, false, true, false]).unwrap();
    d.params_mut().zero_grads();
    d.loss_and_grad(&batch).unwrap();
    let analytic = d.params().grads();
    let numeric = finite_diff_grad(
        |st| DiscriminatorModel::from_store(dims.clone(), st).unwrap().loss(&batch).unwrap(),
        d.params_mut(),
        1e-5,
    )
    .unwrap();
    max_relative_error(&analytic, &numeric, 1e-6)
}

fn count_at(tokens: &[usize], gram: &[usize]) -> usize {
    let n = gram.len();
    if tokens.len() < n {
        return 0;
    }
    (0..=tokens.len() - n).filter(|&i| &tokens[i..i + n] == gram).count()
}

/// BLEU-n by direct n-gram scanning: each distinct candidate n-gram is
/// counted by a linear scan of the candidate and of every reference, with
/// the same smoothing and brevity-penalty conventions as the library.
pub fn brute_force_bleu(candidate: &[usize], references: &[Vec<usize>], n: usize) -> f64 {
    let mut log_sum = 0.0;
    let mut first_matches = 0;
    let mut first_total = 0;
    for order in 1..=n {
        let mut total = 0;
        let mut matched = 0;
        if candidate.len() >= order {
            for i in 0..=candidate.len() - order {
                let gram = &candidate[i..i + order];
                total += 1;
                // Count each distinct n-gram once, at its first occurrence.
                if count_at(&candidate[..i + order - 1], gram) > 0 {
                    continue;
                }
                let in_candidate = count_at(candidate, gram);
                let best_ref = references.iter().map(|r| count_at(r, gram)).max().unwrap_or(0);
                matched += in_candidate.min(best_ref);
            }
        }
        if order == 1 {
            first_matches = matched;
            first_total = total;
        }
        let p = if matched == 0 {
            1.0 / (total as f64 + 1.0)
        } else {
            matched as f64 / total as f64
        };
        log_sum += p.ln();
    }
    if first_total == 0 || first_matches == 0 {
        return 0.0;
    }
    let c = candidate.len();
    let mut r = references[0].len();
    for reference in references {
        let l = reference.len();
        let (dl, dr) = (l.abs_diff(c), r.abs_diff(c));
        if dl < dr || (dl == dr && l < r) {
            r = l;
        }
    }
    let bp = if c >= r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    bp * (log_sum / n as f64).exp()
}

/// Random (candidate, references, n) with lengths 0..=9 over a small alphabet.
pub fn random_bleu_case(rng: &mut Rng) -> (Vec<usize>, Vec<Vec<usize>>, usize) {
    let alphabet = 2 + rng.below(5);
    let seq = |rng: &mut Rng| (0..rng.below(10)).map(|_| rng.below(alphabet)).collect::<Vec<_>>();
    let cand = seq(rng);
    let refs = (0..1 + rng.below(4)).map(|_| seq(rng)).collect();
    (cand, refs, 1 + rng.below(4))
}
