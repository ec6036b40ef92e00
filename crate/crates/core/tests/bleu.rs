mod common;

use proptest::prelude::*;
use seqgan_core::generator::Sequence;
use seqgan_core::numerics::Rng;
use seqgan_core::oracle_eval::bleu;

fn library(cand: &[usize], refs: &[Vec<usize>], n: usize) -> f64 {
    let refs: Vec<Sequence> = refs.iter().cloned().map(Sequence).collect();
    bleu(&Sequence(cand.to_vec()), &refs, n).unwrap()
}

proptest! {
    #[test]
    fn agrees_with_brute_force(seed in any::<u64>()) {
        let (cand, refs, n) = common::random_bleu_case(&mut Rng::new(seed));
        prop_assert_eq!(library(&cand, &refs, n), common::brute_force_bleu(&cand, &refs, n));
    }

    #[test]
    fn bounded(seed in any::<u64>()) {
        let (cand, refs, n) = common::random_bleu_case(&mut Rng::new(seed));
        let b = library(&cand, &refs, n);
        prop_assert!((0.0..=1.0).contains(&b));
    }
}

#[test]
fn brute_force_hand_values() {
    let b = common::brute_force_bleu(&[0, 1, 2, 3], &[vec![0, 1, 2, 4]], 2);
    assert!((b - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(common::brute_force_bleu(&[1, 2, 3], &[vec![1, 2, 3]], 3), 1.0);
    assert_eq!(common::brute_force_bleu(&[1, 2], &[vec![3, 4]], 2), 0.0);
    // Clipping: "the the the" against one "the".
    let b = common::brute_force_bleu(&[7, 7, 7], &[vec![7, 8, 9]], 1);
    assert!((b - 1.0 / 3.0).abs() < 1e-15);
}
