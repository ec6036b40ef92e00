mod common;

use common::*;
use seqgan_core::numerics::{finite_diff_grad, Rng};
use seqgan_core::generator::GeneratorModel;
use seqgan_core::rollout::{estimate_q, ConstantReward, RolloutPolicy, SequenceReward};

const INSTANCES: [(usize, usize); 2] = [(3, 2), (2, 4)];

#[test]
fn enumeration_helpers() {
    let all = all_sequences(3, 2);
    assert_eq!(all.len(), 9);
    assert_eq!(all[5].tokens(), &[1, 2]);
    let g = tiny_generator(2, 4, 1);
    let total: f64 = all_sequences(2, 4).iter().map(|y| probability(&g, y)).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn exact_gradient_matches_finite_differences_of_objective() {
    for (seed, (vocab, horizon)) in INSTANCES.into_iter().enumerate() {
        let g = tiny_generator(vocab, horizon, 10 + seed as u64);
        let d = tiny_discriminator(vocab, horizon, 20 + seed as u64);
        let analytic = flatten(&exact_policy_gradient(&g, &d));
        let dims = g.dims();
        let mut store = g.params().clone();
        let numeric = flatten(
            &finite_diff_grad(
                |s| objective(&GeneratorModel::from_store(dims, s).unwrap(), &d),
                &mut store,
                1e-5,
            )
            .unwrap(),
        );
        let err = norm_relative_error(&analytic, &numeric);
        assert!(err < 1e-6, "|Y|={vocab} T={horizon}: rel err {err}");
    }
}

#[test]
fn sampled_estimator_mean_matches_exact_gradient() {
    for (seed, (vocab, horizon)) in INSTANCES.into_iter().enumerate() {
        let g = tiny_generator(vocab, horizon, 10 + seed as u64);
        let d = tiny_discriminator(vocab, horizon, 20 + seed as u64);
        let exact = flatten(&exact_policy_gradient(&g, &d));
        let (mean, se) = episode_mean_and_se(&g, &d, 200_000, 4, 30 + seed as u64);
        let frac = fraction_within(&mean, &se, &exact, 3.0);
        assert!(frac >= 0.99, "|Y|={vocab} T={horizon}: {frac}");
    }
}

#[test]
fn constant_reward_gradient_has_zero_mean() {
    let g = tiny_generator(3, 2, 4);
    let (mean, se) = episode_mean_and_se(&g, &ConstantReward(1.0), 20_000, 2, 5);
    assert!(fraction_within(&mean, &se, &vec![0.0; mean.len()], 4.0) == 1.0);
}

#[test]
fn q_estimates_match_enumeration() {
    for (seed, (vocab, horizon)) in INSTANCES.into_iter().enumerate() {
        let g = tiny_generator(vocab, horizon, 10 + seed as u64);
        let d = tiny_discriminator(vocab, horizon, 20 + seed as u64);
        let policy = RolloutPolicy::new(&g);
        let y = g.sample(&mut Rng::new(1));
        let n = 100_000;
        let est = estimate_q(&y, &policy, &d, n, &mut Rng::new(2)).unwrap();
        assert_eq!(est.q[horizon - 1], d.reward(&y));
        for t in 1..horizon {
            let (exact, var) = exact_q(&g, &y.tokens()[..t], &d);
            let sd = (var / n as f64).sqrt();
            assert!((est.q[t - 1] - exact).abs() < 3.0 * sd, "t={t}: {} vs {exact}", est.q[t - 1]);
        }
    }
}

#[test]
fn tiny_discriminator_spreads_rewards() {
    let d = tiny_discriminator(2, 4, 21);
    let r: Vec<f64> = all_sequences(2, 4).iter().map(|y| d.reward(y)).collect();
    let lo = r.iter().cloned().fold(1.0, f64::min);
    let hi = r.iter().cloned().fold(0.0, f64::max);
    assert!(hi - lo > 0.3, "{lo} {hi}");
}
