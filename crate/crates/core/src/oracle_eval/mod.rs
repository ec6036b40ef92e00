//! Synthetic ground truth and evaluation: the frozen oracle LSTM,
//! NLL under the oracle, BLEU and Welch's t-test.

mod bleu;
mod stats;

use std::fmt::Write as _;

use rayon::prelude::*;

pub use bleu::{bleu, BleuScorer};
pub use stats::{mean_var, welch, welch_t_test, WelchResult};

use crate::error::{Error, Result};
use crate::generator::{GenDims, GeneratorModel, Sequence};
use crate::numerics::Rng;

/// Anything that can draw complete sequences.
pub trait SequenceSampler: Sync {
    fn sample(&self, rng: &mut Rng) -> Sequence;
}

impl SequenceSampler for GeneratorModel {
    fn sample(&self, rng: &mut Rng) -> Sequence {
        GeneratorModel::sample(self, rng)
    }
}

/// Independent uniform tokens at every position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformSampler {
    pub vocab: usize,
    pub horizon: usize,
}

impl SequenceSampler for UniformSampler {
    fn sample(&self, rng: &mut Rng) -> Sequence {
        Sequence((0..self.horizon).map(|_| rng.below(self.vocab)).collect())
    }
}

/// A generator with standard-normal parameters, frozen after creation.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleModel {
    model: GeneratorModel,
}

impl OracleModel {
    /// Wraps an existing model as an oracle (e.g. a zero-parameter one).
    pub fn from_model(model: GeneratorModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &GeneratorModel {
        &self.model
    }

    pub fn dims(&self) -> GenDims {
        self.model.dims()
    }

    /// `-log G_oracle(Y)`, teacher-forcing `seq` through the oracle.
    pub fn nll(&self, seq: &Sequence) -> Result<f64> {
        Ok(-self.model.log_likelihood(seq)?)
    }
}

/// Oracle parameters drawn i.i.d. N(0, 1) from the `oracle-init` stream of `seed`.
pub fn make_oracle(seed: u64, dims: GenDims) -> Result<OracleModel> {
    let mut rng = Rng::new(seed).child("oracle-init");
    Ok(OracleModel {
        model: GeneratorModel::standard_normal(dims, &mut rng)?,
    })
}

pub fn generate_training_set(oracle: &OracleModel, count: usize, rng: &mut Rng) -> Vec<Sequence> {
    (0..count).map(|_| oracle.model.sample(rng)).collect()
}

/// Per-sample oracle NLL scores with summary statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub scores: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    pub count: usize,
    pub p_value: Option<f64>,
}

impl EvalReport {
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::Empty("evaluation scores"));
        }
        let (mean, var) = mean_var(&scores);
        Ok(Self {
            count: scores.len(),
            scores,
            mean,
            std: var.sqrt(),
            p_value: None,
        })
    }

    /// Sets `p_value` from Welch's t-test against `other`.
    pub fn compare(&mut self, other: &EvalReport) -> Result<f64> {
        let p = welch_t_test(&self.scores, &other.scores)?;
        self.p_value = Some(p);
        Ok(p)
    }

    /// One row per sample, then a summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,index,nll_oracle,mean,std,count,p_value\n");
        for (i, s) in self.scores.iter().enumerate() {
            let _ = writeln!(out, "sample,{i},{s:?},,,,");
        }
        let p = self.p_value.map(|p| format!("{p:?}")).unwrap_or_default();
        let _ = writeln!(out, "summary,,,{:?},{:?},{},{p}", self.mean, self.std, self.count);
        out
    }
}

/// Oracle NLL of pre-drawn sequences.
pub fn score_sequences(oracle: &OracleModel, seqs: &[Sequence]) -> Result<EvalReport> {
    let scores = seqs
        .par_iter()
        .map(|s| oracle.nll(s))
        .collect::<Result<Vec<f64>>>()?;
    EvalReport::from_scores(scores)
}

/// Draws `sample_count` sequences from `generator` and scores them under the oracle.
pub fn nll_oracle(
    oracle: &OracleModel,
    generator: &dyn SequenceSampler,
    sample_count: usize,
    rng: &mut Rng,
) -> Result<EvalReport> {
    if sample_count == 0 {
        return Err(Error::Empty("evaluation samples"));
    }
    let seqs: Vec<Sequence> = (0..sample_count).map(|_| generator.sample(rng)).collect();
    score_sequences(oracle, &seqs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(vocab: usize, horizon: usize) -> GenDims {
        GenDims {
            vocab,
            embed: 4,
            hidden: 5,
            horizon,
        }
    }

    #[test]
    fn oracle_is_seeded() {
        let a = make_oracle(3, dims(10, 5)).unwrap();
        let b = make_oracle(3, dims(10, 5)).unwrap();
        let c = make_oracle(4, dims(10, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn oracle_parameters_look_standard_normal() {
        let o = make_oracle(7, GenDims { vocab: 100, embed: 32, hidden: 32, horizon: 16 }).unwrap();
        let all: Vec<f64> = o.model().params().iter().flat_map(|(_, p)| p.value.data().to_vec()).collect();
        assert!(all.len() >= 10_000);
        let (m, v) = mean_var(&all);
        assert!(m.abs() < 4.0 / (all.len() as f64).sqrt(), "mean {m}");
        assert!((v - 1.0).abs() < 0.1, "variance {v}");
    }

    #[test]
    fn uniform_oracle_nll() {
        let o = OracleModel::from_model(GeneratorModel::zeros(dims(10, 20)).unwrap());
        let r = nll_oracle(&o, o.model(), 50, &mut Rng::new(0)).unwrap();
        let expected = 20.0 * 10f64.ln();
        assert!(r.scores.iter().all(|s| (s - expected).abs() < 1e-10));
        assert!((r.mean - 46.0517).abs() < 1e-4);
    }

    #[test]
    fn precomputed_sequences_score_identically() {
        let o = make_oracle(1, dims(6, 5)).unwrap();
        let g = GeneratorModel::new(dims(6, 5), &mut Rng::new(2)).unwrap();
        let r1 = nll_oracle(&o, &g, 40, &mut Rng::new(5)).unwrap();
        let mut rng = Rng::new(5);
        let seqs: Vec<Sequence> = (0..40).map(|_| g.sample(&mut rng)).collect();
        let r2 = score_sequences(&o, &seqs).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn training_set_reproducible() {
        let o = make_oracle(1, dims(6, 5)).unwrap();
        let a = generate_training_set(&o, 30, &mut Rng::new(8));
        let b = generate_training_set(&o, 30, &mut Rng::new(8));
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.len() == 5));
    }

    #[test]
    fn report_csv() {
        let mut r = EvalReport::from_scores(vec![1.0, 3.0]).unwrap();
        let other = EvalReport::from_scores(vec![2.0, 5.0, 4.0]).unwrap();
        r.compare(&other).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "sample,0,1.0,,,,");
        assert!(lines[3].starts_with("summary,,,2.0,1.4142135623730951,2,"));
        assert!(EvalReport::from_scores(vec![]).is_err());
    }
}
