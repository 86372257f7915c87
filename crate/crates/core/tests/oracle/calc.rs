//! Extended-precision reference evaluation of the composition calculators.
//! Shares no code with the library: every step is done in 320-bit floats.

use astro_float::{BigFloat, Consts, RoundingMode};

const P: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Oracle {
    cc: Consts,
}

/// `(ε^(k), δ^(k), ε*, δ*, γ*)` rounded to f64.
#[derive(Debug, Clone, Copy)]
pub struct HetTuple {
    pub eps_k: f64,
    pub delta_k: f64,
    pub eps_star: f64,
    pub delta_star: f64,
    pub gamma_star: f64,
}

impl HetTuple {
    pub fn fields(&self) -> [f64; 5] {
        [self.eps_k, self.delta_k, self.eps_star, self.delta_star, self.gamma_star]
    }
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, P)
}

fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().expect("finite value")
}

impl Oracle {
    pub fn new() -> Self {
        Self { cc: Consts::new().expect("constants cache") }
    }

    fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(P, RM, &mut self.cc)
    }

    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(P, RM, &mut self.cc)
    }

    pub fn het(&mut self, eps: &[f64], delta: &[f64], gamma: &[f64], delta_prime: f64) -> HetTuple {
        let one = big(1.0);
        let two = big(2.0);
        let dp = big(delta_prime);
        let log_inv = self.ln(&one.div(&dp, P, RM));
        let mut sum_sq = big(0.0);
        let mut sum_lin = big(0.0);
        let mut delta_acc = big(0.0);
        let mut eps_prev = big(0.0);
        for l in 0..eps.len() {
            let e = big(eps[l]);
            let d = big(delta[l]);
            let g = big(gamma[l]);
            let ee = self.exp(&e);
            let e2e = self.exp(&two.mul(&e, P, RM));
            let e_neg = self.exp(&e.neg());
            let hat = two.mul(&d, P, RM).div(&one.sub(&e_neg, P, RM), P, RM);
            let inner = two.mul(&e2e, P, RM).div(&ee.sub(&one, P, RM), P, RM).add(&one, P, RM);
            let psi = d
                .mul(&two.mul(&ee, P, RM).add(&one, P, RM), P, RM)
                .add(&two.mul(&d, P, RM).mul(&d, P, RM).mul(&inner, P, RM).mul(&inner, P, RM), P, RM);
            let growth = e2e.div(&one.sub(&hat, P, RM), P, RM).sub(&one, P, RM);
            sum_sq = sum_sq.add(&e.mul(&e, P, RM), P, RM);
            sum_lin = sum_lin.add(&psi, P, RM).add(&two.mul(&e, P, RM).mul(&growth, P, RM), P, RM);
            let carry = self.exp(&eps_prev).mul(&g, P, RM);
            delta_acc = delta_acc.add(&dp, P, RM).add(&hat, P, RM).add(&carry, P, RM);
            let root = two.mul(&log_inv, P, RM).mul(&sum_sq, P, RM).sqrt(P, RM);
            eps_prev = two.mul(&root, P, RM).add(&sum_lin, P, RM);
        }
        let floor = eps_prev.min(&one);
        let dstar = big(5.0).mul(&delta_acc.div(&floor, P, RM).sqrt(P, RM), P, RM);
        HetTuple {
            eps_k: to_f64(&eps_prev),
            delta_k: to_f64(&delta_acc),
            eps_star: to_f64(&big(3.0).mul(&eps_prev, P, RM)),
            delta_star: to_f64(&dstar),
            gamma_star: to_f64(&dstar),
        }
    }

    /// `2c²ρ²/ln(k/(ρβ₀))`.
    pub fn budget_sum_sq(&mut self, k: usize, rho: f64, beta0: f64, c: f64) -> f64 {
        let (r, b, c) = (big(rho), big(beta0), big(c));
        let kk = BigFloat::from_u64(k as u64, P);
        let log_term = self.ln(&kk.div(&r.mul(&b, P, RM), P, RM));
        let num = big(2.0).mul(&c, P, RM).mul(&c, P, RM).mul(&r, P, RM).mul(&r, P, RM);
        to_f64(&num.div(&log_term, P, RM))
    }
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}
