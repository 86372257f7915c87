mod common;

use replicalab::lowerbound::*;
use replicalab::problems::{BernoulliProduct, BitCount, Sign};
use replicalab::replicable::{SqEstimateConfig, SqEstimator};
use replicalab::{Error, SeedKey};
use statrs::distribution::{Binomial, DiscreteCDF};

fn adv() -> AdversaryDist {
    AdversaryDist::new(0.1).unwrap()
}

/// Exact single-round disagreement of the deterministic sign tester:
/// `2q(1−q)` with `q = Pr[Bin(m, θ) ≥ m/2]`, averaged over the mixture.
fn exact_divergence(m: u64, tau: f64) -> f64 {
    let need = m.div_ceil(2);
    let d = |th: f64| {
        let q = if need == 0 { 1.0 } else { Binomial::new(th, m).unwrap().sf(need - 1) };
        2.0 * q * (1.0 - q)
    };
    let uniform = common::simpson(d, 0.5 - tau, 0.5 + tau, 2000) / (2.0 * tau);
    (d(0.5 - tau) + d(0.5 + tau) + uniform) / 3.0
}

#[test]
fn m1_matches_enumeration() {
    let oracle = exact_divergence(1, 0.1);
    assert!((oracle - sign_test_m1_divergence(&adv())).abs() < 1e-9);
    let d = measure_round_divergence(&SignTester, 1, &adv(), 100_000, &SeedKey::from_u64(1)).unwrap();
    let hw = d.estimate.half_width();
    assert!((d.estimate.hat - oracle).abs() <= 3.0 * hw, "{} vs {oracle}", d.estimate.hat);
}

#[test]
fn divergence_shape() {
    let key = SeedKey::from_u64(2);
    let ps: Vec<f64> = [100u64, 1000, 10_000]
        .iter()
        .map(|&m| measure_round_divergence(&SignTester, m as usize, &adv(), 100_000, &key.child("m", m)).unwrap().estimate.hat)
        .collect();
    assert!(ps[0] > ps[1] && ps[1] > ps[2], "{ps:?}");
    let scaled: Vec<f64> = ps.iter().zip([100.0f64, 1000.0, 10_000.0]).map(|(p, m)| p * 0.1 * m.sqrt()).collect();
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo <= 2.0, "{scaled:?}");
}

#[test]
fn too_few_trials_rejected() {
    assert!(matches!(
        measure_round_divergence(&SignTester, 10, &adv(), 999, &SeedKey::from_u64(0)),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn transcripts_are_pure() {
    let key = SeedKey::from_u64(3);
    let a = run_adaptive_game(&SignTester, 5, 40, &adv(), &key).unwrap();
    assert_eq!(a, run_adaptive_game(&SignTester, 5, 40, &adv(), &key).unwrap());
    assert_eq!(a.rounds.len(), 5);
    assert!(a.rounds.iter().all(|r| (0.4..=0.6).contains(&r.theta)));
    assert_eq!(a.replicated(), a.rounds.iter().all(|r| r.outputs[0] == r.outputs[1]));
}

#[test]
fn phantom_matches_run_two() {
    let key = SeedKey::from_u64(4);
    let k = 3;
    let (mut run2, mut phantom) = (vec![[0u64; 2]; k], vec![[0u64; 2]; k]);
    for g in 0..10_000 {
        let t = run_adaptive_game(&SignTester, k, 100, &adv(), &key.child("game", g)).unwrap();
        for (i, r) in t.rounds.iter().enumerate() {
            run2[i][(r.outputs[1] == Sign::Plus) as usize] += 1;
            phantom[i][(r.outputs[2] == Sign::Plus) as usize] += 1;
        }
    }
    for i in 0..k {
        let p = common::two_sample_p(&run2[i], &phantom[i]);
        assert!(p > 0.001, "round {i}: p = {p}");
    }
}

#[test]
fn raw_and_counted_bits_agree_in_law() {
    // Same algorithm over raw bits and over counts: disagreement rates match.
    let a = measure_round_divergence(&SignTester, 50, &adv(), 20_000, &SeedKey::from_u64(5)).unwrap();
    let raw = Historyless(replicalab::replicable::SignTest::<replicalab::problems::SampleSet<bool>>::new(50));
    let b = measure_round_divergence(&raw, 50, &adv(), 20_000, &SeedKey::from_u64(6)).unwrap();
    let tol = 3.0 * (a.estimate.half_width() + b.estimate.half_width());
    assert!((a.estimate.hat - b.estimate.hat).abs() <= tol);
}

#[test]
fn single_round_budget_reproduced() {
    // The smallest m with exact disagreement ≤ 0.1.
    let exact = (1..).find(|&m| exact_divergence(m, 0.1) <= 0.1).unwrap() as f64;
    let cfg = ScalingConfig { games_per_probe: 50_000, ..Default::default() };
    let table = scaling_experiment(&SignTester, &[1], &adv(), &cfg, &SeedKey::from_u64(7)).unwrap();
    let got = table.rows[0].m_min as f64;
    assert!((got / exact - 1.0).abs() <= 0.25, "{got} vs {exact}");
    assert!(table.exponent.is_nan());
}

#[test]
fn scaling_table_is_monotone() {
    let cfg = ScalingConfig { games_per_probe: 10_000, ..Default::default() };
    let t = scaling_experiment(&SignTester, &[1, 2, 4], &adv(), &cfg, &SeedKey::from_u64(8)).unwrap();
    assert!(t.rows.windows(2).all(|w| w[0].m_min <= w[1].m_min), "{:?}", t.rows);
    assert!(t.exponent > 1.0);
    let again = scaling_experiment(&SignTester, &[1, 2, 4], &adv(), &cfg, &SeedKey::from_u64(8)).unwrap();
    assert_eq!(t, again);
}

#[test]
fn exhausted_ceiling_is_a_scale_error() {
    let cfg = ScalingConfig { games_per_probe: 2000, m_max: 50, ..Default::default() };
    match scaling_experiment(&SignTester, &[1, 4], &adv(), &cfg, &SeedKey::from_u64(9)) {
        Err(Error::Scale(msg)) => assert!(msg.contains("k = 1")),
        other => panic!("{other:?}"),
    }
    assert!(scaling_experiment(&SignTester, &[2, 1], &adv(), &cfg, &SeedKey::from_u64(9)).is_err());
}

#[test]
fn naive_single_coordinate() {
    let sq = SqEstimator::<BitCount>::new(SqEstimateConfig::new(0.2, 0.1, 0.1, 1.0).unwrap());
    let coins = BernoulliProduct::uniform(1, 0.5).unwrap();
    let r = naive_tightness_experiment(&sq, &coins, 5000, &SeedKey::from_u64(10)).unwrap();
    assert_eq!(r.p0, r.joint.hat);
    assert!(naive_tightness_experiment(&sq, &coins, 999, &SeedKey::from_u64(10)).is_err());
}

#[test]
fn naive_joint_follows_independence() {
    let sq = SqEstimator::<BitCount>::new(SqEstimateConfig::new(0.2, 0.1, 0.1, 1.0).unwrap());
    let coins = BernoulliProduct::uniform(5, 0.5).unwrap();
    let r = naive_tightness_experiment(&sq, &coins, 20_000, &SeedKey::from_u64(11)).unwrap();
    assert!((r.joint.hat - r.independent).abs() <= 0.02, "{r:?}");
    assert!(r.joint.hat >= r.bound - 3.0 * r.joint.half_width());
}
