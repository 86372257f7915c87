//! Parameter calculus for composing perfectly generalizing algorithms.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::scalar::Real;

/// Absolute constants of the composition bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants<T> {
    /// Scale of the per-round privacy budgets.
    pub c: T,
    /// Ceiling on each `ε_i` and on `δ_i/ε_i²`.
    pub c1: T,
    pub c2: T,
    /// Ceiling on `ε*`.
    pub c3: T,
    pub c4: T,
}

impl<T: Real> Default for Constants<T> {
    fn default() -> Self {
        Self { c: T::lit(0.1), c1: T::lit(0.01), c2: T::lit(6.0), c3: T::lit(0.5), c4: T::lit(5.0) }
    }
}

/// A `(γ, ε, δ)` perfect-generalization guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgParams<T> {
    pub gamma: T,
    pub epsilon: T,
    pub delta: T,
}

impl<T: Real> PgParams<T> {
    pub fn new(gamma: T, epsilon: T, delta: T) -> Result<Self> {
        let unit = |x: T| x > T::zero() && x < T::one();
        if !(unit(gamma) && unit(epsilon) && unit(delta)) {
            return Err(param(format!("PG parameters must lie in (0, 1): γ = {gamma:?}, ε = {epsilon:?}, δ = {delta:?}")));
        }
        Ok(Self { gamma, epsilon, delta })
    }

    /// Replicability obtained by correlated sampling: `4(γ + 2ε + δ)`.
    pub fn replicability(&self) -> T {
        T::lit(4.0) * (self.gamma + T::lit(2.0) * self.epsilon + self.delta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionParams<T> {
    pub eps_i: Vec<T>,
    pub delta_i: Vec<T>,
    pub delta_prime: T,
    pub eps_star: T,
    pub delta_star: T,
    pub gamma_star: T,
    /// `(Σn_j/ρ²)·ln³(k/(ρβ₀))`.
    pub n_bound: T,
    /// `k·√β₀·ln(k/(ρβ₀))`.
    pub beta_bound: T,
    /// Conditions of the composition bounds that these numbers violate.
    /// With the default constants most of them are violated; the values
    /// are still the formulas' outputs.
    pub unmet_preconditions: Vec<String>,
}

fn open_unit<T: Real>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(param(format!("{name} = {x:?} must lie in (0, 1)")))
    }
}

/// `(ε*, δ*)` of the simplified adaptive composition bound, without
/// precondition checks.
pub fn pg_compose_simple_unchecked<T: Real>(eps: &[T], delta: &[T], delta_prime: T, c2: T, c4: T) -> (T, T) {
    let sum_sq = eps.iter().fold(T::zero(), |a, &e| a + e * e);
    let eps_star = c2 * ((T::one() / delta_prime).ln() * sum_sq).sqrt() + c2 * sum_sq;
    let k = T::from_usize(eps.len()).expect("k fits the scalar type");
    let ratio = eps.iter().zip(delta).fold(T::zero(), |a, (&e, &d)| a + d / e);
    let delta_star = c4 * ((k * delta_prime + ratio) / eps_star).sqrt();
    (eps_star, delta_star)
}

fn simple_violations<T: Real>(eps: &[T], delta: &[T], eps_star: T, consts: &Constants<T>) -> Vec<String> {
    let mut v = Vec::new();
    for (i, (&e, &d)) in eps.iter().zip(delta).enumerate() {
        if e > consts.c1 {
            v.push(format!("eps[{i}] = {e:?} exceeds c1 = {:?}", consts.c1));
        }
        if d / (e * e) > consts.c1 {
            v.push(format!("delta[{i}]/eps[{i}]^2 = {:?} exceeds c1 = {:?}", d / (e * e), consts.c1));
        }
    }
    if eps_star > consts.c3 {
        v.push(format!("eps_star = {eps_star:?} exceeds c3 = {:?}", consts.c3));
    }
    v
}

/// Simplified adaptive composition:
/// `ε* = c₂(√(ln(1/δ′)·Σε_i²) + Σε_i²)`,
/// `δ* = c₄·√((kδ′ + Σδ_i/ε_i)/ε*)`.
pub fn pg_compose_simple<T: Real>(eps: &[T], delta: &[T], delta_prime: T, consts: &Constants<T>) -> Result<(T, T)> {
    if eps.is_empty() || eps.len() != delta.len() {
        return Err(param("eps and delta must be nonempty and of equal length"));
    }
    open_unit("delta_prime", delta_prime)?;
    if eps.iter().any(|&e| !(e > T::zero())) || delta.iter().any(|&d| !(d >= T::zero())) {
        return Err(param("every eps must be positive and every delta non-negative"));
    }
    let (eps_star, delta_star) = pg_compose_simple_unchecked(eps, delta, delta_prime, consts.c2, consts.c4);
    let v = simple_violations(eps, delta, eps_star, consts);
    if !v.is_empty() {
        return Err(param(v.join("; ")));
    }
    Ok((eps_star, delta_star))
}

/// Per-round budgets without the `k ≥ 2` requirement; the formulas are
/// well defined for a single round too.
pub(crate) fn budgets<T: Real>(n_list: &[u64], rho: T, beta0: T, c: T) -> Result<(Vec<T>, T)> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(param("n_list must be nonempty with positive sizes"));
    }
    open_unit("rho", rho)?;
    open_unit("beta0", beta0)?;
    open_unit("c", c)?;
    let k = T::from_usize(n_list.len()).expect("k fits the scalar type");
    let total = T::from_u64(n_list.iter().sum()).expect("n fits the scalar type");
    let log_term = (k / (rho * beta0)).ln();
    let eps = n_list
        .iter()
        .map(|&n| {
            let share = T::from_u64(n).expect("n fits the scalar type") / total + T::one() / k;
            c * rho * (share / log_term).sqrt()
        })
        .collect();
    Ok((eps, log_term))
}

/// Parameters of the replicable composition theorem for round sizes
/// `n_list`: `ε_i = cρ·√((n_i/Σn_j + 1/k)/ln(k/(ρβ₀)))`, `δ_i = β₀ε_i¹⁰`,
/// `δ′ = β₀·Σε_i¹⁰/k`, and `(ε*, δ*)` from the simplified bound.
pub fn theorem1_params<T: Real>(n_list: &[u64], rho: T, beta0: T, consts: &Constants<T>) -> Result<CompositionParams<T>> {
    if n_list.len() < 2 {
        return Err(param(format!("composition needs k ≥ 2 rounds, got {}", n_list.len())));
    }
    params_for(n_list, rho, beta0, consts)
}

pub(crate) fn params_for<T: Real>(n_list: &[u64], rho: T, beta0: T, consts: &Constants<T>) -> Result<CompositionParams<T>> {
    let (eps_i, log_term) = budgets(n_list, rho, beta0, consts.c)?;
    let k = T::from_usize(n_list.len()).expect("k fits the scalar type");
    let delta_i: Vec<T> = eps_i.iter().map(|&e| beta0 * e.powi(10)).collect();
    let delta_prime = delta_i.iter().fold(T::zero(), |a, &d| a + d) / k;
    let (eps_star, delta_star) = pg_compose_simple_unchecked(&eps_i, &delta_i, delta_prime, consts.c2, consts.c4);
    let total = T::from_u64(n_list.iter().sum()).expect("n fits the scalar type");
    let n_bound = total / (rho * rho) * log_term.powi(3);
    let beta_bound = k * beta0.sqrt() * log_term;

    let mut unmet = simple_violations(&eps_i, &delta_i, eps_star, consts);
    let forty = T::lit(40.0);
    if eps_star > rho / forty {
        unmet.push(format!("eps_star = {eps_star:?} exceeds rho/40 = {:?}", rho / forty));
    }
    if delta_star > rho.powi(4) / forty {
        unmet.push(format!("delta_star = {delta_star:?} exceeds rho^4/40 = {:?}", rho.powi(4) / forty));
    }
    if delta_prime > T::one() / (T::lit(2.0) * k) {
        unmet.push(format!("delta_prime = {delta_prime:?} exceeds 1/(2k)"));
    }
    Ok(CompositionParams {
        eps_i,
        delta_i,
        delta_prime,
        eps_star,
        delta_star,
        gamma_star: delta_star,
        n_bound,
        beta_bound,
        unmet_preconditions: unmet,
    })
}

/// Output of the heterogeneous adaptive composition recurrences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HetComposition<T> {
    pub eps_k: T,
    pub delta_k: T,
    pub eps_star: T,
    pub delta_star: T,
    pub gamma_star: T,
    /// `ε^(j)` for `j = 1..=k`.
    pub eps_path: Vec<T>,
    /// `δ^(j)` for `j = 1..=k`.
    pub delta_path: Vec<T>,
}

/// The heterogeneous composition recurrences:
/// `δ̂ = 2δ/(1−e^{−ε})`,
/// `ψ = δ(2e^ε+1) + 2δ²(2e^{2ε}/(e^ε−1)+1)²`,
/// `ε^(j) = 2√(2·ln(1/δ′)·Σ_{ℓ≤j}ε_ℓ²) + Σ_{ℓ≤j}(ψ_ℓ + 2ε_ℓ(e^{2ε_ℓ}/(1−δ̂_ℓ) − 1))`,
/// `δ^(j) = jδ′ + Σ_{ℓ≤j}δ̂_ℓ + Σ_{ℓ≤j}e^{ε^(ℓ−1)}γ_ℓ`,
/// `ε* = 3ε^(k)`, `δ* = γ* = 5√(δ^(k)/min(ε^(k), 1))`.
pub fn pg_compose_het_params<T: Real>(eps: &[T], delta: &[T], gamma: &[T], delta_prime: T) -> Result<HetComposition<T>> {
    let k = eps.len();
    if k == 0 || delta.len() != k || gamma.len() != k {
        return Err(param("eps, delta and gamma must be nonempty and of equal length"));
    }
    if !(delta_prime > T::zero() && delta_prime < T::lit(0.5)) {
        return Err(param(format!("delta_prime = {delta_prime:?} must lie in (0, 1/2)")));
    }
    let fifty = T::lit(50.0);
    for l in 0..k {
        if !(eps[l] > T::zero() && eps[l] <= T::one()) {
            return Err(param(format!("eps[{l}] = {:?} must lie in (0, 1]", eps[l])));
        }
        if !(delta[l] > T::zero() && delta[l] <= eps[l] / fifty) {
            return Err(param(format!("delta[{l}] = {:?} must lie in (0, eps[{l}]/50]", delta[l])));
        }
        if !(gamma[l] > T::zero() && gamma[l] < T::one()) {
            return Err(param(format!("gamma[{l}] = {:?} must lie in (0, 1)", gamma[l])));
        }
    }
    let two = T::lit(2.0);
    let log_inv = (T::one() / delta_prime).ln();
    let (mut sum_sq, mut sum_lin, mut sum_hat, mut sum_gamma) = (T::zero(), T::zero(), T::zero(), T::zero());
    let mut eps_prev = T::zero();
    let mut eps_path = Vec::with_capacity(k);
    let mut delta_path = Vec::with_capacity(k);
    for l in 0..k {
        let (e, d) = (eps[l], delta[l]);
        let em1 = e.exp_m1();
        let hat = two * d / -(-e).exp_m1();
        let inner = two * (two * e).exp() / em1 + T::one();
        let psi = d * (two * e.exp() + T::one()) + two * d * d * inner * inner;
        // e^{2ε}/(1−δ̂) − 1, rewritten to avoid cancellation.
        let growth = ((two * e).exp_m1() + hat) / (T::one() - hat);
        sum_sq = sum_sq + e * e;
        sum_lin = sum_lin + psi + two * e * growth;
        sum_hat = sum_hat + hat;
        sum_gamma = sum_gamma + eps_prev.exp() * gamma[l];
        let eps_j = two * (two * log_inv * sum_sq).sqrt() + sum_lin;
        let j = T::from_usize(l + 1).expect("k fits the scalar type");
        eps_path.push(eps_j);
        delta_path.push(j * delta_prime + sum_hat + sum_gamma);
        eps_prev = eps_j;
    }
    let eps_k = eps_prev;
    let delta_k = *delta_path.last().expect("k ≥ 1");
    let delta_star = T::lit(5.0) * (delta_k / eps_k.min(T::one())).sqrt();
    Ok(HetComposition {
        eps_k,
        delta_k,
        eps_star: T::lit(3.0) * eps_k,
        delta_star,
        gamma_star: delta_star,
        eps_path,
        delta_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_round_identity() {
        let p = theorem1_params(&[100, 100], 0.5f64, 0.01, &Constants::default()).unwrap();
        let s: f64 = p.eps_i.iter().map(|e| e * e).sum();
        let want = 2.0 * 0.01 * 0.25 / 400f64.ln();
        assert!((s - want).abs() / want < 1e-12, "{s} vs {want}");
        assert!((s - 8.345e-4).abs() < 1e-7);
        assert_eq!(p.eps_i[0], p.eps_i[1]);
        assert_eq!(p.gamma_star, p.delta_star);
        assert!(!p.unmet_preconditions.is_empty());
    }

    #[test]
    fn f32_agrees_with_f64() {
        let a = theorem1_params(&[10, 30, 60], 0.3f32, 0.05, &Constants::default()).unwrap();
        let b = theorem1_params(&[10, 30, 60], 0.3f64, 0.05, &Constants::default()).unwrap();
        for (x, y) in a.eps_i.iter().zip(&b.eps_i) {
            assert!(((*x as f64) - y).abs() / y < 1e-5);
        }
    }

    #[test]
    fn parameter_errors() {
        let c = Constants::default();
        assert!(theorem1_params(&[100], 0.5f64, 0.01, &c).is_err());
        assert!(theorem1_params(&[100, 100], 1.5f64, 0.01, &c).is_err());
        assert!(theorem1_params(&[100, 100], 0.5f64, 0.0, &c).is_err());
        assert!(theorem1_params(&[100, 100], 0.5f64, 0.1, &Constants { c: 1.0, ..c }).is_err());
    }

    #[test]
    fn simple_single_round() {
        let c = Constants { c1: 1.0, c3: 100.0, ..Constants::default() };
        let e = 0.01f64;
        let (es, _) = pg_compose_simple(&[e], &[1e-9], (-1.0f64).exp(), &c).unwrap();
        assert!((es - 6.0 * (e + e * e)).abs() < 1e-15);
        assert!(pg_compose_simple(&[0.5], &[1e-9], 0.1, &Constants::default()).is_err());
    }

    #[test]
    fn sqrt_k_growth() {
        let c = Constants { c1: 1.0, c3: 1e9, ..Constants::default() };
        let eps_star = |k: usize| pg_compose_simple(&vec![1e-4; k], &vec![0.0; k], 1e-6, &c).unwrap().0;
        for k in [4, 16, 64] {
            let r = eps_star(4 * k) / eps_star(k);
            assert!((1.9..=2.1).contains(&r), "k = {k}: ratio {r}");
        }
    }

    #[test]
    fn het_closed_forms() {
        let h = pg_compose_het_params(&[2f64.ln()], &[0.01], &[0.1], 0.1).unwrap();
        // δ̂ = 0.02/(1 − ½) = 0.04, so δ^(1) = 0.1 + 0.04 + e⁰·0.1.
        assert!((h.delta_k - 0.24).abs() < 1e-15);
        let e = 0.05f64;
        let t = pg_compose_het_params(&[e; 3], &[1e-30; 3], &[1e-4; 3], 1e-3).unwrap();
        let lim = 2.0 * (2.0 * 1000f64.ln() * 3.0 * e * e).sqrt() + 3.0 * 2.0 * e * (2.0 * e).exp_m1();
        assert!((t.eps_k - lim).abs() < 1e-20 + 1e-15 * lim);
        assert!(pg_compose_het_params(&[0.1], &[0.01], &[0.1], 0.1).is_err());
        assert!(pg_compose_het_params(&[0.1], &[0.001], &[0.1], 0.6).is_err());
    }

    proptest! {
        #[test]
        fn identity_holds(ns in prop::collection::vec(1u64..1_000_000, 2..20), rho in 0.01f64..0.99, beta0 in 1e-6f64..0.99, c in 0.001f64..0.99) {
            let p = theorem1_params(&ns, rho, beta0, &Constants { c, ..Constants::default() }).unwrap();
            let s: f64 = p.eps_i.iter().map(|e| e * e).sum();
            let want = 2.0 * c * c * rho * rho / (ns.len() as f64 / (rho * beta0)).ln();
            prop_assert!((s - want).abs() / want < 1e-9);
        }

        #[test]
        fn common_scaling_leaves_eps_unchanged(ns in prop::collection::vec(1u64..10_000, 2..10), f in 2u64..100) {
            let c = Constants::default();
            let a = theorem1_params(&ns, 0.3f64, 0.01, &c).unwrap();
            let scaled: Vec<u64> = ns.iter().map(|n| n * f).collect();
            let b = theorem1_params(&scaled, 0.3f64, 0.01, &c).unwrap();
            for (x, y) in a.eps_i.iter().zip(&b.eps_i) {
                prop_assert!((x - y).abs() <= 1e-15 * x);
            }
        }

        #[test]
        fn het_paths_are_monotone(
            eps in prop::collection::vec(0.001f64..1.0, 1..8),
            frac in 0.001f64..1.0,
            gamma in 1e-6f64..0.5,
            dp in 1e-6f64..0.49,
        ) {
            let delta: Vec<f64> = eps.iter().map(|e| e / 50.0 * frac).collect();
            let h = pg_compose_het_params(&eps, &delta, &vec![gamma; eps.len()], dp).unwrap();
            prop_assert!(h.eps_path.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(h.delta_path.windows(2).all(|w| w[0] <= w[1]));
        }

        // δ̂ and the second ψ term shrink as ε grows, so only ε* is
        // monotone in ε; every output is monotone in δ and γ.
        #[test]
        fn het_monotone_in_each_input(
            eps in prop::collection::vec(0.01f64..0.5, 1..6),
            which in 0usize..6,
            bump in 1.0001f64..1.5,
        ) {
            let k = eps.len();
            let i = which % k;
            let delta: Vec<f64> = eps.iter().map(|e| e / 200.0).collect();
            let gamma = vec![1e-3; k];
            let base = pg_compose_het_params(&eps, &delta, &gamma, 1e-3).unwrap();
            let mut e2 = eps.clone();
            e2[i] = (e2[i] * bump).min(1.0);
            let up = pg_compose_het_params(&e2, &delta, &gamma, 1e-3).unwrap();
            prop_assert!(up.eps_star >= base.eps_star);
            let mut d2 = delta.clone();
            d2[i] *= bump;
            let up = pg_compose_het_params(&eps, &d2, &gamma, 1e-3).unwrap();
            prop_assert!(up.eps_star >= base.eps_star && up.delta_k >= base.delta_k && up.delta_star >= base.delta_star);
            let mut g2 = gamma.clone();
            g2[i] *= bump;
            let up = pg_compose_het_params(&eps, &delta, &g2, 1e-3).unwrap();
            prop_assert!(up.eps_star == base.eps_star && up.delta_k >= base.delta_k && up.delta_star >= base.delta_star);
        }

        #[test]
        fn delta_side_can_fall_as_eps_grows(e in 0.01f64..0.5) {
            let a = pg_compose_het_params(&[e], &[e / 100.0], &[1e-3], 1e-3).unwrap();
            let b = pg_compose_het_params(&[e * 1.2], &[e / 100.0], &[1e-3], 1e-3).unwrap();
            prop_assert!(b.delta_k < a.delta_k);
        }

        #[test]
        fn simple_monotone(eps in prop::collection::vec(1e-4f64..0.01, 1..10), which in 0usize..10, bump in 1.0f64..1.5) {
            let c = Constants { c1: 1.0, c3: 1e9, ..Constants::default() };
            let d = vec![1e-12; eps.len()];
            let (a, _) = pg_compose_simple(&eps, &d, 1e-3, &c).unwrap();
            let mut e2 = eps.clone();
            let i = which % eps.len();
            e2[i] *= bump;
            let (b, _) = pg_compose_simple(&e2, &d, 1e-3, &c).unwrap();
            prop_assert!(b >= a);
        }
    }
}
