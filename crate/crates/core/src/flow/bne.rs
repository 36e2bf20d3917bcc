//! Bayesian equilibrium of the flow game.
//!
//! Each user `i` of type `l` sets the derivative of its interim utility to
//! zero, which is linear in the others' expected rates:
//!
//! `(1 + tau_l) d_i(l) + tau_l sum_{j != i} sum_k P_k d_j(k) = mu tau_l`.
//!
//! Stacking users gives `A d = b` with `A = I (x) D + J (x) E`, where
//! `E = tau P` (rank one), `D = Lambda - E`, `Lambda = diag(1 + tau)` and
//! `J` is the all-ones `n x n` matrix. Its inverse is `I (x) B - J (x) C`
//! with `B = D^-1` and `C = (Lambda + (n-1) E)^-1 E B`; both factors are
//! rank-one updates of `Lambda^-1` and are written out in closed form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::Scenario;

const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct BneSystem {
    pub n: usize,
    pub m: usize,
    pub mu: f64,
    pub tau: DVector<f64>,
    pub p: DVector<f64>,
    /// Diagonal of `Lambda`.
    pub lambda: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub block_b: DMatrix<f64>,
    pub block_c: DMatrix<f64>,
    /// `1 / (sum_l P_l tau_l / (1 + tau_l) - 1)`.
    pub beta_mat: f64,
}

pub fn bne_build(scenario: &Scenario) -> BneSystem {
    let n = scenario.n();
    let m = scenario.m();
    let mu = scenario.mu();
    let tau = DVector::from_column_slice(scenario.types().values());
    let p = DVector::from_column_slice(scenario.types().probs());
    let lambda = tau.map(|t| 1.0 + t);

    let mut a = DMatrix::zeros(n * m, n * m);
    let mut b = DVector::zeros(n * m);
    for i in 0..n {
        for l in 0..m {
            let row = i * m + l;
            a[(row, row)] = lambda[l];
            b[row] = mu * tau[l];
            for j in (0..n).filter(|&j| j != i) {
                for k in 0..m {
                    a[(row, j * m + k)] = tau[l] * p[k];
                }
            }
        }
    }

    // u = Lambda^-1 tau, w = P Lambda^-1, s = P Lambda^-1 tau
    let u = tau.component_div(&lambda);
    let w = p.component_div(&lambda);
    let s = p.dot(&u);
    let beta_mat = 1.0 / (s - 1.0);
    let lambda_inv = DMatrix::from_diagonal(&lambda.map(|x| 1.0 / x));
    let uw = &u * w.transpose();
    let block_b = &lambda_inv - beta_mat * &uw;
    let kappa = (n as f64 - 1.0) / (1.0 + (n as f64 - 1.0) * s);
    let left = &lambda_inv - kappa * &uw;
    let e = &tau * p.transpose();
    let block_c = left * e * &block_b;

    BneSystem { n, m, mu, tau, p, lambda, a, b, block_b, block_c, beta_mat }
}

impl BneSystem {
    /// `A^-1` assembled from the closed-form blocks.
    pub fn inverse(&self) -> DMatrix<f64> {
        let (n, m) = (self.n, self.m);
        let mut inv = DMatrix::zeros(n * m, n * m);
        for i in 0..n {
            for j in 0..n {
                let mut blk = -self.block_c.clone();
                if i == j {
                    blk += &self.block_b;
                }
                inv.view_mut((i * m, j * m), (m, m)).copy_from(&blk);
            }
        }
        inv
    }

    /// Ratio of extreme singular values of `A`.
    pub fn condition_number(&self) -> f64 {
        let sv = self.a.clone().svd(false, false).singular_values;
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// First-order-condition residual of each type for per-type rates `d`.
    pub fn foc_residuals(&self, d: &[f64]) -> Vec<f64> {
        let mean: f64 = self.p.iter().zip(d).map(|(p, x)| p * x).sum();
        let others = (self.n as f64 - 1.0) * mean;
        (0..self.m)
            .map(|l| {
                let t = self.tau[l];
                (1.0 + t) * d[l] + t * others - self.mu * t
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BneSolution {
    /// Equilibrium rate of each type, from a generic LU solve.
    pub rates: Vec<f64>,
    /// The same rates through the assembled closed-form inverse.
    pub rates_from_inverse: Vec<f64>,
    pub condition: f64,
    pub foc_residuals: Vec<f64>,
}

pub fn bne_solve(scenario: &Scenario) -> Result<BneSolution> {
    let sys = bne_build(scenario);
    let condition = sys.condition_number();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularSystem { condition });
    }
    let x = sys
        .a
        .clone()
        .lu()
        .solve(&sys.b)
        .ok_or(Error::SingularSystem { condition })?;
    let y = sys.inverse() * &sys.b;
    let m = sys.m;
    let rates: Vec<f64> = x.iter().take(m).copied().collect();
    let rates_from_inverse: Vec<f64> = y.iter().take(m).copied().collect();
    for (l, &r) in rates.iter().enumerate() {
        if !(r > 0.0 && r < sys.mu) {
            return Err(Error::NonInteriorBne { type_value: sys.tau[l], rate: r });
        }
    }
    let foc_residuals = sys.foc_residuals(&rates);
    Ok(BneSolution { rates, rates_from_inverse, condition, foc_residuals })
}
