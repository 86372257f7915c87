use replicalab::meter::{estimate_both, estimate_failure, estimate_replicability, DEFAULT_LEVEL};
use replicalab::problems::{
    Bernoulli, BitCount, FiniteDistribution, GroundTruth, Histogram, PerArm, SampleSource, StatProblem, Summarized,
};
use replicalab::replicable::*;
use replicalab::SeedKey;

fn masses() -> FiniteDistribution<u32> {
    FiniteDistribution::new(vec![0, 1, 2], vec![0.5, 0.3, 0.2]).unwrap()
}

#[test]
fn sq_contract_on_a_fair_coin() {
    let cfg = SqEstimateConfig::with_default_c(0.1, 0.1, 0.05).unwrap();
    let alg = SqEstimator::<BitCount>::new(cfg);
    let src = Summarized(Bernoulli::new(0.5).unwrap());
    let r = estimate_both(
        &alg,
        &StatProblem::MeanEstimation { alpha: 0.1 },
        &GroundTruth::Mean(0.5),
        &src,
        cfg.n,
        10_000,
        &SeedKey::from_u64(31),
        DEFAULT_LEVEL,
    )
    .unwrap();
    assert!(r.rho.unwrap().upper_within(0.1, 3.0), "{r:?}");
    assert!(r.beta.unwrap().upper_within(0.05, 3.0), "{r:?}");
}

#[test]
fn sq_meter_agrees_with_a_doubled_rerun() {
    let cfg = SqEstimateConfig::with_default_c(0.1, 0.1, 0.05).unwrap();
    let alg = SqEstimator::<BitCount>::new(cfg);
    let src = Summarized(Bernoulli::new(0.3).unwrap());
    let a = estimate_replicability(&alg, &src, cfg.n, 4000, &SeedKey::from_u64(32), DEFAULT_LEVEL).unwrap();
    let b = estimate_replicability(&alg, &src, cfg.n, 8000, &SeedKey::from_u64(33), DEFAULT_LEVEL).unwrap();
    let (a, b) = (a.rho.unwrap(), b.rho.unwrap());
    assert!(a.upper_within(0.1, 3.0) && b.upper_within(0.1, 3.0));
    // Two independent estimates of the same rate overlap.
    assert!(a.lo <= b.hi && b.lo <= a.hi, "{a:?} {b:?}");
}

#[test]
fn sign_test_disagreement_in_the_critical_window() {
    // θ uniform on (0.4, 0.6): disagreement scales like 1/(τ√m).
    let root = SeedKey::from_u64(34);
    let m = 10_000;
    let trials = 20_000u64;
    let mut d = 0u64;
    for t in 0..trials {
        let k = root.child("t", t);
        let theta = 0.4 + 0.2 * k.stream().next_f64();
        let src = Summarized(Bernoulli::new(theta).unwrap());
        let a = replicable_sign_test(&src.draw(m, &k.child("s", 1)).unwrap(), &k).unwrap();
        let b = replicable_sign_test(&src.draw(m, &k.child("s", 2)).unwrap(), &k).unwrap();
        d += (a != b) as u64;
    }
    let c = d as f64 / trials as f64 * 0.1 * (m as f64).sqrt();
    assert!(c > 0.05 && c < 0.5, "fitted constant {c}");
}

#[test]
fn heavy_hitters_on_three_masses() {
    let cfg = HeavyHittersConfig::new(0.4, 0.1, 0.2, 0.05, DEFAULT_HH_C).unwrap();
    let alg = ReplicableHeavyHitters::<Histogram>::new(cfg);
    let src = Summarized(masses());
    let truth = GroundTruth::Masses(vec![(0, 0.5), (1, 0.3), (2, 0.2)]);
    let key = SeedKey::from_u64(35);
    let r = estimate_both(&alg, &StatProblem::HeavyHitters { nu: 0.4, eps: 0.1 }, &truth, &src, cfg.n, 10_000, &key, DEFAULT_LEVEL).unwrap();
    assert!(r.beta.unwrap().upper_within(0.05, 3.0), "{r:?}");
    assert!(r.rho.unwrap().upper_within(0.2, 3.0), "{r:?}");
    for t in 0..1000 {
        let out = alg.run(&src.draw(cfg.n, &key.child("x", t)).unwrap(), &key.child("r", t)).unwrap();
        assert!(out.contains(&0) && !out.contains(&2), "{out:?}");
    }
}

#[test]
fn heavy_hitters_empty_when_everything_is_light() {
    let cfg = HeavyHittersConfig::new(0.4, 0.1, 0.2, 0.05, DEFAULT_HH_C).unwrap();
    let alg = ReplicableHeavyHitters::<Histogram>::new(cfg);
    let light = FiniteDistribution::new((0..5).collect(), vec![0.2; 5]).unwrap();
    let truth = GroundTruth::Masses((0..5).map(|e| (e, 0.2)).collect());
    let r = estimate_failure(
        &alg,
        &StatProblem::HeavyHitters { nu: 0.4, eps: 0.1 },
        &truth,
        &Summarized(light),
        cfg.n,
        5000,
        &SeedKey::from_u64(36),
        DEFAULT_LEVEL,
    )
    .unwrap();
    assert!(r.beta.unwrap().upper_within(0.05, 3.0), "{r:?}");
}

#[test]
fn best_arm_with_a_clear_winner() {
    let cfg = BestArmConfig::with_default_scale(2, 0.2, 0.1, 0.05).unwrap();
    let alg = ReplicableBestArm::<BitCount>::new(cfg);
    let arms = PerArm { arms: vec![Summarized(Bernoulli::new(0.9).unwrap()), Summarized(Bernoulli::new(0.1).unwrap())] };
    let r = estimate_both(
        &alg,
        &StatProblem::BestArm { alpha: 0.2 },
        &GroundTruth::ArmMeans(vec![0.9, 0.1]),
        &arms,
        cfg.n,
        10_000,
        &SeedKey::from_u64(37),
        DEFAULT_LEVEL,
    )
    .unwrap();
    assert!(r.beta.unwrap().upper_within(0.05, 3.0), "{r:?}");
}

#[test]
fn best_arm_with_identical_arms_is_replicable() {
    let cfg = BestArmConfig::with_default_scale(3, 0.2, 0.1, 0.05).unwrap();
    let alg = ReplicableBestArm::<BitCount>::new(cfg);
    let arms = PerArm { arms: vec![Summarized(Bernoulli::new(0.5).unwrap()); 3] };
    let r = estimate_replicability(&alg, &arms, cfg.n, 10_000, &SeedKey::from_u64(38), DEFAULT_LEVEL).unwrap();
    assert!(r.rho.unwrap().upper_within(0.1, 3.0), "{r:?}");
}

#[test]
fn fixed_grid_is_replicable_at_its_budget() {
    let cfg = FixedGridConfig::new(5, 0.2, 0.05, DEFAULT_SQ_C).unwrap();
    let alg = FixedGridSq::<BitCount>::new(cfg);
    let src = Summarized(Bernoulli::new(0.37).unwrap());
    let r = estimate_both(
        &alg,
        &StatProblem::MeanEstimation { alpha: cfg.spacing() },
        &GroundTruth::Mean(0.37),
        &src,
        cfg.n,
        10_000,
        &SeedKey::from_u64(39),
        DEFAULT_LEVEL,
    )
    .unwrap();
    assert!(r.rho.unwrap().upper_within(0.2, 3.0), "{r:?}");
    assert!(r.beta.unwrap().upper_within(0.05, 3.0), "{r:?}");
}

#[test]
fn algorithms_are_pure() {
    let key = SeedKey::from_u64(40);
    let hh = HeavyHittersConfig::new(0.4, 0.1, 0.2, 0.05, DEFAULT_HH_C).unwrap();
    let h = Summarized(masses()).draw(hh.n, &key).unwrap();
    assert_eq!(replicable_heavy_hitters(&h, &hh, &key).unwrap(), replicable_heavy_hitters(&h, &hh, &key).unwrap());
    let ba = BestArmConfig::with_default_scale(2, 0.2, 0.1, 0.05).unwrap();
    let arms = vec![BitCount::new(10, ba.n as u64).unwrap(), BitCount::new(20, ba.n as u64).unwrap()];
    assert_eq!(replicable_best_arm(&arms, &ba, &key).unwrap(), replicable_best_arm(&arms, &ba, &key).unwrap());
}
