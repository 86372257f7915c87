mod common;

use replicalab::meter::{count_parallel, estimate_both, estimate_replicability, Estimate, DEFAULT_LEVEL};
use replicalab::problems::{
    tv_distance, Bernoulli, BitCount, ElementId, FiniteDistribution, GridPoint, GroundTruth, Histogram, SampleSet,
    SampleSource, StatProblem, Summarized, ThreeParts,
};
use replicalab::replicable::{
    FirstSample, FixedGridConfig, FixedGridSq, IndicatorQuery, ReplicableAlgorithm, SqEstimateConfig, SqEstimator,
    DEFAULT_SQ_C,
};
use replicalab::transforms::*;
use replicalab::SeedKey;

fn rate(trials: u64, f: impl Fn(&SeedKey) -> bool + Sync + Send, key: &SeedKey) -> Estimate {
    let [c] = count_parallel(trials, |t| Ok([f(&key.child("t", t)) as u64])).unwrap();
    Estimate::new(c, trials, DEFAULT_LEVEL).unwrap()
}

#[test]
fn mean_tester_rejects_a_far_candidate() {
    let (alpha, beta) = (0.1, 0.05);
    let n = (200.0 * (1.0f64 / beta).ln()).ceil() as usize;
    let src = Summarized(Bernoulli::new(0.4).unwrap());
    let e = rate(10_000, |k| !mean_tester(0.4 + 2.0 * alpha, &src.draw(n, k).unwrap(), alpha).unwrap().accepted(), &SeedKey::from_u64(51));
    assert!(e.hat >= 1.0 - beta - 3.0 * e.half_width(), "{e:?}");
}

#[test]
fn rate_tester_two_sided() {
    let (alpha, beta) = (0.05, 0.05);
    let t = BernoulliRateTester::<BitCount>::new(alpha, beta).unwrap();
    let key = SeedKey::from_u64(52);
    let high = Summarized(Bernoulli::new(2.0 * alpha).unwrap());
    let low = Summarized(Bernoulli::new(alpha).unwrap());
    let acc = rate(10_000, |k| t.test(&(), &high.draw(t.n, k).unwrap()).unwrap().accepted(), &key.child("hi", 0));
    let rej = rate(10_000, |k| !t.test(&(), &low.draw(t.n, k).unwrap()).unwrap().accepted(), &key.child("lo", 0));
    for e in [acc, rej] {
        assert!(e.hat >= 1.0 - beta - 3.0 * e.half_width(), "{e:?}");
    }
}

fn three_masses() -> (FiniteDistribution<ElementId>, GroundTruth) {
    (
        FiniteDistribution::new(vec![0, 1, 2], vec![0.5, 0.3, 0.2]).unwrap(),
        GroundTruth::Masses(vec![(0, 0.5), (1, 0.3), (2, 0.2)]),
    )
}

#[test]
fn heavy_hitters_tester_on_three_masses() {
    let cfg = HhTestConfig::new(0.4, 0.1, 0.05, HH_ESTIMATE_C).unwrap();
    let t = HeavyHittersTester::<Histogram>::new(cfg);
    let (d, truth) = three_masses();
    let src = ThreeParts { source: Summarized(d), sizes: [cfg.n_list, cfg.n_discover, cfg.n_estimate] };
    let n = t.sample_complexity();
    let key = SeedKey::from_u64(53);
    // {0} solves the (ν − ε/4, ε/2) problem; {0, 2} and {} fail the (ν, ε) one.
    assert!(replicalab::problems::is_valid(&StatProblem::HeavyHitters { nu: 0.375, eps: 0.05 }, &truth, &vec![0].into()).unwrap());
    let acc = rate(2000, |k| t.test(&vec![0], &src.draw(n, k).unwrap()).unwrap().accepted(), &key.child("good", 0));
    assert!(acc.hat >= 1.0 - 0.05 - 3.0 * acc.half_width(), "{acc:?}");
    for bad in [vec![0, 2], vec![]] {
        assert!(!replicalab::problems::is_valid(&StatProblem::HeavyHitters { nu: 0.4, eps: 0.1 }, &truth, &bad.clone().into()).unwrap());
        let rej = rate(2000, |k| !t.test(&bad, &src.draw(n, k).unwrap()).unwrap().accepted(), &key.child("bad", bad.len() as u64));
        assert!(rej.hat >= 1.0 - 0.05 - 3.0 * rej.half_width(), "{bad:?}: {rej:?}");
    }
}

#[test]
fn heavy_hitters_tester_and_fallback_when_all_light() {
    let cfg = HhTestConfig::new(0.4, 0.1, 0.05, HH_ESTIMATE_C).unwrap();
    let t = HeavyHittersTester::<Histogram>::new(cfg);
    let fb = HeavyHittersFallback::<Histogram>::new(cfg);
    let light = FiniteDistribution::new((0..5).collect(), vec![0.2; 5]).unwrap();
    let src3 = ThreeParts { source: Summarized(light.clone()), sizes: [cfg.n_list, cfg.n_discover, cfg.n_estimate] };
    let key = SeedKey::from_u64(54);
    let acc = rate(2000, |k| t.test(&vec![], &src3.draw(t.sample_complexity(), k).unwrap()).unwrap().accepted(), &key.child("t", 0));
    assert!(acc.hat >= 0.95 - 3.0 * acc.half_width(), "{acc:?}");
    let src = Summarized(light);
    let empty = rate(
        2000,
        |k| fb.solve(&(src.draw(cfg.n_discover, &k.child("a", 0)).unwrap(), src.draw(cfg.n_estimate, &k.child("b", 0)).unwrap())).unwrap().is_empty(),
        &key.child("f", 0),
    );
    assert!(empty.hat >= 0.95 - 3.0 * empty.half_width(), "{empty:?}");
}

#[test]
fn nonreplicable_heavy_hitters_is_valid() {
    let cfg = HhTestConfig::new(0.4, 0.1, 0.05, HH_ESTIMATE_C).unwrap();
    let fb = HeavyHittersFallback::<Histogram>::new(cfg);
    let (d, truth) = three_masses();
    let src = Summarized(d);
    let problem = StatProblem::HeavyHitters { nu: 0.4, eps: 0.1 };
    let ok = rate(
        2000,
        |k| {
            let out = fb.solve(&(src.draw(cfg.n_discover, &k.child("a", 0)).unwrap(), src.draw(cfg.n_estimate, &k.child("b", 0)).unwrap())).unwrap();
            replicalab::problems::is_valid(&problem, &truth, &out.into()).unwrap()
        },
        &SeedKey::from_u64(55),
    );
    assert!(ok.hat >= 0.95 - 3.0 * ok.half_width(), "{ok:?}");
    let raw = SampleSet::new(vec![0u32, 0, 1, 0, 2, 0]);
    assert_eq!(nonreplicable_heavy_hitters(&(raw.clone(), raw), &cfg).unwrap(), vec![0]);
}

#[test]
fn best_arm_tester_two_sided() {
    let (alpha, beta) = (0.1, 0.05);
    let t = BestArmTester::<BitCount>::new(2, alpha, beta).unwrap();
    let arm = |p: f64| Summarized(Bernoulli::new(p).unwrap());
    let key = SeedKey::from_u64(56);
    let draw = |a: f64, b: f64, k: &SeedKey| vec![arm(a).draw(t.n, &k.child("a", 0)).unwrap(), arm(b).draw(t.n, &k.child("b", 0)).unwrap()];
    let rej = rate(5000, |k| !t.test(&1, &draw(0.7, 0.5, k)).unwrap().accepted(), &key.child("gap2", 0));
    let acc = rate(5000, |k| t.test(&1, &draw(0.7, 0.6, k)).unwrap().accepted(), &key.child("gap1", 0));
    for e in [rej, acc] {
        assert!(e.hat >= 1.0 - beta - 3.0 * e.half_width(), "{e:?}");
    }
}

#[test]
fn boosted_sq_end_to_end() {
    let alg = boosted_sq::<BitCount>(0.2, 0.1, 1e-3, DEFAULT_SQ_C).unwrap();
    let src = ThreeParts { source: Summarized(Bernoulli::new(0.5).unwrap()), sizes: alg.part_sizes() };
    let r = estimate_both(
        &alg,
        &StatProblem::MeanEstimation { alpha: 0.1 },
        &GroundTruth::Mean(0.5),
        &src,
        alg.sample_complexity(),
        20_000,
        &SeedKey::from_u64(57),
        DEFAULT_LEVEL,
    )
    .unwrap();
    assert!(r.beta.unwrap().upper_within(1e-3, 3.0), "{r:?}");
    assert!(r.rho.unwrap().upper_within(0.2, 3.0), "{r:?}");
}

#[test]
fn boosting_replicates_when_bases_agree_and_testers_accept() {
    let alg = boosted_sq::<BitCount>(0.2, 0.1, 1e-3, DEFAULT_SQ_C).unwrap();
    let src = ThreeParts { source: Summarized(Bernoulli::new(0.5).unwrap()), sizes: alg.part_sizes() };
    let root = SeedKey::from_u64(58);
    for t in 0..500 {
        let k = root.child("t", t);
        let (a, b) = (src.draw(alg.sample_complexity(), &k.child("s", 1)).unwrap(), src.draw(alg.sample_complexity(), &k.child("s", 2)).unwrap());
        let (ua, ub) = (alg.replicable.run(&a.0, &k).unwrap(), alg.replicable.run(&b.0, &k).unwrap());
        if ua == ub && alg.tester.test(&ua, &a.1).unwrap().accepted() && alg.tester.test(&ub, &b.1).unwrap().accepted() {
            assert_eq!(alg.run(&a, &k).unwrap(), alg.run(&b, &k).unwrap());
        }
    }
}

fn sq_f64(rho: f64) -> SqEstimator<SampleSet<f64>> {
    SqEstimator::new(SqEstimateConfig::new(rho, 0.2, 0.1, DEFAULT_SQ_C).unwrap())
}

#[test]
fn order_invariance_is_pointwise() {
    let root = SeedKey::from_u64(59);
    let first = FirstSample::<f64>::new(20);
    for t in 0..1000u64 {
        let k = root.child("t", t);
        let mut s = k.child("s", 0).stream();
        let items: Vec<f64> = (0..20).map(|_| s.next_f64()).collect();
        let tau = replicalab::seed::random_permutation(&k.child("tau", 0), 20).unwrap();
        let permuted = SampleSet::new(tau.iter().map(|&i| items[i]).collect());
        let items = SampleSet::new(items);
        let key = k.child("key", 0);
        assert_eq!(order_invariant_wrap(&first, &items, &key).unwrap(), order_invariant_wrap(&first, &permuted, &key).unwrap());
    }
}

#[test]
fn order_invariant_sq_is_replicable() {
    let alg = OrderInvariant(sq_f64(0.2));
    let n = alg.sample_complexity();
    let r = estimate_replicability(&alg, &replicalab::problems::UniformUnit, n, 3000, &SeedKey::from_u64(60), DEFAULT_LEVEL).unwrap();
    assert!(r.rho.unwrap().upper_within(0.4, 3.0), "{r:?}");
}

fn grid_on_label_zero(points: u32, n: usize) -> IndicatorQuery<FixedGridSq<BitCount>, ElementId> {
    IndicatorQuery { target: 0, alg: FixedGridSq::new(FixedGridConfig::with_n(points, n).unwrap()) }
}

#[test]
fn label_invariance_keeps_rho() {
    let cfg = FixedGridConfig::new(5, 0.2, 0.1, DEFAULT_SQ_C).unwrap();
    let alg = LabelInvariant { alg: grid_on_label_zero(5, cfg.n), domain: vec![0u32, 1, 2] };
    let (d, _) = three_masses();
    let r = estimate_replicability(&alg, &d, cfg.n, 3000, &SeedKey::from_u64(61), DEFAULT_LEVEL).unwrap();
    assert!(r.rho.unwrap().upper_within(0.2, 3.0), "{r:?}");
}

#[test]
fn label_invariance_in_distribution() {
    let alg = grid_on_label_zero(5, 500);
    let domain = vec![0u32, 1, 2];
    let (d, _) = three_masses();
    let s = d.draw(500, &SeedKey::from_u64(62)).unwrap();
    let sigma = [2u32, 0, 1];
    let relabeled = s.map(|&x| sigma[x as usize]);
    let root = SeedKey::from_u64(63);
    let hist = |data: &SampleSet<u32>, tag: &'static str| {
        let mut h = [0u64; 5];
        for t in 0..20_000 {
            h[label_invariant_wrap(&alg, &domain, data, &root.child(tag, t)).unwrap().index as usize] += 1;
        }
        h
    };
    let p = common::two_sample_p(&hist(&s, "a"), &hist(&relabeled, "b"));
    assert!(p > 0.001, "p = {p}");
    // The exact law is identical for both inputs.
    let (da, exact_a) = label_invariant_distribution(&alg, &domain, &s, 0, &root).unwrap();
    let (db, exact_b) = label_invariant_distribution(&alg, &domain, &relabeled, 0, &root).unwrap();
    assert!(exact_a && exact_b);
    assert_eq!(da, db);
}

#[test]
fn pointwise_label_invariance_within_two_rho() {
    let cfg = FixedGridConfig::new(5, 0.2, 0.1, DEFAULT_SQ_C).unwrap();
    let alg = PointwiseLabelInvariant {
        alg: grid_on_label_zero(5, cfg.n),
        domain: vec![0u32, 1, 2],
        inner_keys: DEFAULT_ORACLE_KEYS,
        oracle_key: SeedKey::from_u64(64),
    };
    let (d, _) = three_masses();
    let r = estimate_replicability(&alg, &d, cfg.n, 3000, &SeedKey::from_u64(65), DEFAULT_LEVEL).unwrap();
    assert!(r.rho.unwrap().upper_within(0.4, 3.0), "{r:?}");
    // Relabeled samples give the same output at every key.
    let s = d.draw(cfg.n, &SeedKey::from_u64(66)).unwrap();
    let relabeled = s.map(|&x| [1u32, 2, 0][x as usize]);
    for t in 0..200 {
        let k = SeedKey::from_u64(67).child("k", t);
        assert_eq!(alg.run(&s, &k).unwrap(), alg.run(&relabeled, &k).unwrap());
    }
}

#[test]
fn sufficient_statistic_wrap() {
    let cfg = SqEstimateConfig::new(0.2, 0.2, 0.1, DEFAULT_SQ_C).unwrap();
    let wrapped = SuffStatWrapped { alg: SqEstimator::<SampleSet<bool>>::new(cfg), stat: BernoulliSum };
    let coin = Bernoulli::new(0.35).unwrap();
    let r = estimate_replicability(&wrapped, &coin, cfg.n, 3000, &SeedKey::from_u64(68), DEFAULT_LEVEL).unwrap();
    assert!(r.rho.unwrap().upper_within(0.4, 3.0), "{r:?}");
    // Output depends on the count only.
    let root = SeedKey::from_u64(69);
    for t in 0..200 {
        let k = root.child("t", t);
        let s = coin.draw(cfg.n, &k.child("s", 0)).unwrap();
        let mut shuffled = s.items().to_vec();
        shuffled.reverse();
        assert_eq!(wrapped.run(&s, &k).unwrap(), wrapped.run(&SampleSet::new(shuffled), &k).unwrap());
    }
}

#[test]
fn sufficient_statistic_wrap_preserves_the_output_law() {
    let alg = FixedGridSq::<SampleSet<bool>>::new(FixedGridConfig::with_n(5, 40).unwrap());
    let coin = Bernoulli::new(0.35).unwrap();
    let root = SeedKey::from_u64(70);
    let trials = 100_000u64;
    let hist = |wrap: bool| {
        let mut h = [0u64; 5];
        for t in 0..trials {
            let k = root.child(if wrap { "w" } else { "p" }, t);
            let s = coin.draw(40, &k.child("s", 0)).unwrap();
            let g: GridPoint = if wrap { suff_stat_wrap(&alg, &BernoulliSum, &s, &k).unwrap() } else { alg.run(&s, &k).unwrap() };
            h[g.index as usize] += 1;
        }
        FiniteDistribution::new((0..5).collect::<Vec<u32>>(), h.iter().map(|&c| c as f64 / trials as f64).collect()).unwrap()
    };
    let tv = tv_distance(&hist(true), &hist(false)).unwrap();
    assert!(tv <= 0.02, "tv = {tv}");
}
