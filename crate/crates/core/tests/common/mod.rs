#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Goodness-of-fit p-value; bins with zero expectation must be empty.
pub fn chi_square_p(observed: &[u64], expected: &[f64]) -> f64 {
    let mut stat = 0.0;
    let mut bins = 0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e == 0.0 {
            assert_eq!(o, 0, "observation in a zero-mass bin");
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        bins += 1;
    }
    ChiSquared::new((bins - 1) as f64).unwrap().sf(stat)
}

/// Homogeneity p-value for two count vectors over the same categories.
pub fn two_sample_p(a: &[u64], b: &[u64]) -> f64 {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut stat = 0.0;
    let mut cats = 0;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cats += 1;
        for (obs, n) in [(x, na), (y, nb)] {
            let e = col * n / (na + nb);
            stat += (obs as f64 - e).powi(2) / e;
        }
    }
    ChiSquared::new((cats - 1) as f64).unwrap().sf(stat)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
