mod common;

use replicalab::correlated::{correlated_index, correlated_sample, disagreement_bound};
use replicalab::meter::{count_parallel, Estimate, DEFAULT_LEVEL};
use replicalab::problems::{tv_distance, FiniteDistribution};
use replicalab::SeedKey;

fn random_dist(size: usize, key: &SeedKey) -> FiniteDistribution<usize> {
    let mut s = key.stream();
    let w: Vec<f64> = (0..size).map(|_| s.next_open01()).collect();
    let z: f64 = w.iter().sum();
    FiniteDistribution::new((0..size).collect(), w.iter().map(|x| x / z).collect()).unwrap()
}

#[test]
fn marginals_match_at_one_million_keys() {
    let root = SeedKey::from_u64(21);
    for (case, size) in [2usize, 5, 8].into_iter().enumerate() {
        let p = random_dist(size, &root.child("dist", case as u64));
        let keys = root.child("keys", case as u64);
        let n = 1_000_000u64;
        let mut counts = vec![0u64; size];
        for t in 0..n {
            counts[correlated_index(&p, &keys.child("k", t)).unwrap()] += 1;
        }
        let expected: Vec<f64> = p.probs().iter().map(|q| q * n as f64).collect();
        let pv = common::chi_square_p(&counts, &expected);
        assert!(pv > 0.001, "support {size}: p = {pv}");
    }
}

#[test]
fn random_pairs_respect_the_ceiling() {
    let root = SeedKey::from_u64(22);
    for pair in 0..10u64 {
        let size = 2 + (pair as usize % 7);
        let p = random_dist(size, &root.child("p", pair));
        let q = random_dist(size, &root.child("q", pair));
        let bound = disagreement_bound(tv_distance(&p, &q).unwrap()).unwrap();
        let keys = root.child("keys", pair);
        let trials = 20_000;
        let [d] = count_parallel(trials, |t| {
            let k = keys.child("k", t);
            Ok([(correlated_index(&p, &k)? != correlated_index(&q, &k)?) as u64])
        })
        .unwrap();
        let e = Estimate::new(d, trials, DEFAULT_LEVEL).unwrap();
        assert!(e.upper_within(bound, 3.0), "pair {pair}: {e:?} vs {bound}");
    }
}

#[test]
fn deterministic_and_generic_over_rationals() {
    use num_rational::Ratio;
    let p = FiniteDistribution::new(vec!['a', 'b', 'c'], vec![Ratio::new(1i64, 2), Ratio::new(1, 3), Ratio::new(1, 6)]).unwrap();
    let root = SeedKey::from_u64(23);
    let mut counts = [0u64; 3];
    for t in 0..60_000 {
        let k = root.child("k", t);
        let y = correlated_sample(&p, &k).unwrap();
        assert_eq!(y, correlated_sample(&p, &k).unwrap());
        counts[(y as u8 - b'a') as usize] += 1;
    }
    assert!(common::chi_square_p(&counts, &[30_000.0, 20_000.0, 10_000.0]) > 0.001, "{counts:?}");
}
