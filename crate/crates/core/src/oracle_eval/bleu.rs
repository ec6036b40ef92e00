//! BLEU-n over token-id sequences.
//!
//! Modified n-gram precision clips each candidate n-gram count by its
//! maximum count in any single reference. When an order above 1 has no
//! matches, its precision becomes `1 / (candidate n-grams + 1)` (add-one
//! smoothing); a zero unigram precision gives a score of 0.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::generator::Sequence;

type Counts = HashMap<Vec<usize>, usize>;

fn ngram_counts(tokens: &[usize], n: usize) -> Counts {
    let mut c = Counts::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *c.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    c
}

/// Combines per-order clipped matches and totals with the brevity penalty.
pub(crate) fn combine(matches: &[usize], totals: &[usize], cand_len: usize, ref_len: usize) -> f64 {
    if totals[0] == 0 || matches[0] == 0 {
        return 0.0;
    }
    let n = matches.len();
    let mut log_sum = 0.0;
    for (&m, &c) in matches.iter().zip(totals) {
        let p = if m == 0 {
            1.0 / (c as f64 + 1.0)
        } else {
            m as f64 / c as f64
        };
        log_sum += p.ln();
    }
    let bp = if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    bp * (log_sum / n as f64).exp()
}

/// Reference length closest to `cand_len`, preferring the shorter on ties.
pub(crate) fn closest_ref_len(lengths: impl IntoIterator<Item = usize>, cand_len: usize) -> usize {
    lengths
        .into_iter()
        .min_by_key(|&l| (l.abs_diff(cand_len), l))
        .unwrap_or(0)
}

/// BLEU scorer with reference n-gram statistics precomputed once.
#[derive(Clone, Debug)]
pub struct BleuScorer {
    n: usize,
    /// Per order: n-gram -> max count in any single reference.
    max_counts: Vec<Counts>,
    ref_lengths: Vec<usize>,
}

impl BleuScorer {
    pub fn new(references: &[Sequence], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("BLEU order must be at least 1".into()));
        }
        if references.is_empty() {
            return Err(Error::Empty("BLEU references"));
        }
        let mut max_counts = vec![Counts::new(); n];
        for r in references {
            for (order, slot) in max_counts.iter_mut().enumerate() {
                for (gram, c) in ngram_counts(r.tokens(), order + 1) {
                    let e = slot.entry(gram).or_insert(0);
                    *e = (*e).max(c);
                }
            }
        }
        let mut ref_lengths: Vec<usize> = references.iter().map(Sequence::len).collect();
        ref_lengths.sort_unstable();
        ref_lengths.dedup();
        Ok(Self {
            n,
            max_counts,
            ref_lengths,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn score(&self, candidate: &Sequence) -> f64 {
        let toks = candidate.tokens();
        let mut matches = vec![0; self.n];
        let mut totals = vec![0; self.n];
        for order in 0..self.n {
            let counts = ngram_counts(toks, order + 1);
            for (gram, c) in counts {
                totals[order] += c;
                matches[order] += c.min(self.max_counts[order].get(&gram).copied().unwrap_or(0));
            }
        }
        let ref_len = closest_ref_len(self.ref_lengths.iter().copied(), toks.len());
        combine(&matches, &totals, toks.len(), ref_len)
    }

    /// Mean score over candidates.
    pub fn mean_score(&self, candidates: &[Sequence]) -> f64 {
        if candidates.is_empty() {
            return 0.0;
        }
        candidates.iter().map(|c| self.score(c)).sum::<f64>() / candidates.len() as f64
    }
}

pub fn bleu(candidate: &Sequence, references: &[Sequence], n: usize) -> Result<f64> {
    Ok(BleuScorer::new(references, n)?.score(candidate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &[usize]) -> Sequence {
        Sequence(t.to_vec())
    }

    #[test]
    fn hand_counted_bigram() {
        let b = bleu(&s(&[0, 1, 2, 3]), &[s(&[0, 1, 2, 4])], 2).unwrap();
        assert!((b - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((b - 0.7071).abs() < 1e-4);
    }

    #[test]
    fn identity_and_disjoint() {
        let x = s(&[3, 1, 4, 1, 5, 9]);
        for n in 1..=6 {
            assert_eq!(bleu(&x, &[x.clone()], n).unwrap(), 1.0);
        }
        assert_eq!(bleu(&s(&[0, 1, 2]), &[s(&[3, 4, 5]), s(&[6, 6, 6])], 2).unwrap(), 0.0);
    }

    #[test]
    fn clipping_uses_max_single_reference_count() {
        // Candidate "a a a a": unigram matches clipped to 2 (from the
        // second reference), not 1 + 2.
        let b = bleu(&s(&[0, 0, 0, 0]), &[s(&[0, 1, 2, 3]), s(&[0, 0, 4, 5])], 1).unwrap();
        assert!((b - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_bigram_matches_are_smoothed() {
        // p1 = 1, no bigram matches among 2 candidate bigrams -> p2 = 1/3.
        let b = bleu(&s(&[0, 1, 2]), &[s(&[2, 1, 0])], 2).unwrap();
        assert!((b - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn brevity_penalty() {
        let b = bleu(&s(&[0, 1]), &[s(&[0, 1, 2, 3])], 1).unwrap();
        assert!((b - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn duplicate_reference_invariance() {
        let refs = vec![s(&[0, 1, 2, 3]), s(&[1, 1, 2, 0])];
        let mut dup = refs.clone();
        dup.push(refs[1].clone());
        let c = s(&[1, 2, 3, 3]);
        assert_eq!(bleu(&c, &refs, 3).unwrap(), bleu(&c, &dup, 3).unwrap());
    }

    #[test]
    fn errors() {
        assert!(bleu(&s(&[0]), &[], 2).is_err());
        assert!(bleu(&s(&[0]), &[s(&[0])], 0).is_err());
    }
}
