//! Report-independent mechanism.
//!
//! Ignoring reports, the manager picks one rate per user to minimize
//! `f(d) = -ln(mu - sum d) - sum_i ln sum_l P_l d_i^(tau_l / n)`, the
//! negative log of its expected utility. The problem is convex whenever
//! the highest type is at most `n`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::flow::power;
use crate::game::{Scenario, SymmetricRule};
use crate::intervention::{deviation_grid, design_rule, AffineRule, DesignMode, DEVIATION_TOL};

use super::direct::DirectMechanism;

const EDGE: f64 = 1e-9;

fn check_interior(scenario: &Scenario, d: &[f64]) -> Result<()> {
    let total: f64 = d.iter().sum();
    if d.iter().any(|&x| !(x > 0.0)) || !(total < scenario.mu()) {
        return Err(Error::InteriorPointRequired);
    }
    Ok(())
}

/// `(sum P x^a, sum P a x^(a-1), sum P a (a-1) x^(a-2))` with `a = tau / n`.
fn moments(scenario: &Scenario, x: f64) -> (f64, f64, f64) {
    let n = scenario.n() as f64;
    let types = scenario.types();
    let mut out = (0.0, 0.0, 0.0);
    for (t, p) in types.values().iter().zip(types.probs()) {
        let a = t / n;
        let xa = x.powf(a);
        out.0 += p * xa;
        out.1 += p * a * xa / x;
        out.2 += p * a * (a - 1.0) * xa / (x * x);
    }
    out
}

pub fn apriori_objective(scenario: &Scenario, d: &[f64]) -> Result<f64> {
    check_interior(scenario, d)?;
    let residual = scenario.mu() - d.iter().sum::<f64>();
    Ok(-residual.ln() - d.iter().map(|&x| moments(scenario, x).0.ln()).sum::<f64>())
}

pub fn apriori_gradient(scenario: &Scenario, d: &[f64]) -> Result<Vec<f64>> {
    check_interior(scenario, d)?;
    let inv = 1.0 / (scenario.mu() - d.iter().sum::<f64>());
    Ok(d.iter()
        .map(|&x| {
            let (s0, s1, _) = moments(scenario, x);
            inv - s1 / s0
        })
        .collect())
}

/// Hessian: `beta = 1/(mu - sum d)^2` everywhere plus
/// `-(s2 s0 - s1^2)/s0^2` on the diagonal.
pub fn apriori_hessian(scenario: &Scenario, d: &[f64]) -> Result<DMatrix<f64>> {
    check_interior(scenario, d)?;
    let r = scenario.mu() - d.iter().sum::<f64>();
    let beta = 1.0 / (r * r);
    let mut h = DMatrix::from_element(d.len(), d.len(), beta);
    for (i, &x) in d.iter().enumerate() {
        let (s0, s1, s2) = moments(scenario, x);
        h[(i, i)] = beta - (s2 * s0 - s1 * s1) / (s0 * s0);
    }
    Ok(h)
}

/// Euclidean projection onto `{lo <= d_i <= hi, sum d <= cap}`.
pub fn project_feasible(d: &[f64], lo: f64, hi: f64, cap: f64) -> Vec<f64> {
    let clamped: Vec<f64> = d.iter().map(|x| x.clamp(lo, hi)).collect();
    if clamped.iter().sum::<f64>() <= cap {
        return clamped;
    }
    let shifted = |theta: f64| -> f64 { d.iter().map(|x| (x - theta).clamp(lo, hi)).sum() };
    let mut a = 0.0;
    let mut b = d.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) - lo;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if shifted(mid) > cap {
            a = mid;
        } else {
            b = mid;
        }
    }
    d.iter().map(|x| (x - b).clamp(lo, hi)).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct PgdOptions {
    pub max_iterations: usize,
    pub step_tol: f64,
    pub kkt_tol: f64,
}

impl Default for PgdOptions {
    fn default() -> Self {
        Self { max_iterations: 100_000, step_tol: 1e-12, kkt_tol: 1e-8 }
    }
}

struct Pgd {
    d: Vec<f64>,
    value: f64,
    kkt: f64,
    iterations: usize,
}

fn bounds(scenario: &Scenario) -> (f64, f64, f64) {
    let mu = scenario.mu();
    (EDGE, mu - EDGE, mu - EDGE)
}

fn kkt_residual(scenario: &Scenario, d: &[f64], g: &[f64]) -> f64 {
    let (lo, hi, cap) = bounds(scenario);
    let step: Vec<f64> = d.iter().zip(g).map(|(x, gi)| x - gi).collect();
    let p = project_feasible(&step, lo, hi, cap);
    d.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

fn pgd(scenario: &Scenario, opts: PgdOptions) -> Result<Pgd> {
    let n = scenario.n();
    let (lo, hi, cap) = bounds(scenario);
    let mut d = vec![scenario.mu() / (2.0 * n as f64); n];
    let mut value = apriori_objective(scenario, &d)?;
    let mut alpha = 1.0;
    let mut iterations = 0;
    loop {
        let g = apriori_gradient(scenario, &d)?;
        let kkt = kkt_residual(scenario, &d, &g);
        if kkt < opts.kkt_tol || iterations >= opts.max_iterations {
            return Ok(Pgd { d, value, kkt, iterations });
        }
        iterations += 1;
        alpha *= 2.0;
        let (next, next_value) = loop {
            let trial: Vec<f64> = d.iter().zip(&g).map(|(x, gi)| x - alpha * gi).collect();
            let y = project_feasible(&trial, lo, hi, cap);
            let decrease: f64 = g.iter().zip(y.iter().zip(&d)).map(|(gi, (a, b))| gi * (a - b)).sum();
            let fy = apriori_objective(scenario, &y)?;
            // allow for rounding in the objective once the decrease is tiny
            let noise = 4.0 * f64::EPSILON * value.abs().max(1.0);
            if fy <= value + 1e-4 * decrease + noise || alpha < 1e-30 {
                break (y, fy);
            }
            alpha *= 0.5;
        };
        let step = next.iter().zip(&d).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        d = next;
        value = next_value;
        if step < opts.step_tol {
            let g = apriori_gradient(scenario, &d)?;
            let kkt = kkt_residual(scenario, &d, &g);
            return Ok(Pgd { d, value, kkt, iterations });
        }
    }
}

/// Golden-section minimum of the objective along `d = x * 1`.
pub fn golden_section(scenario: &Scenario) -> Result<(f64, f64)> {
    let n = scenario.n();
    let phi = |x: f64| apriori_objective(scenario, &vec![x; n]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (EDGE, (scenario.mu() - EDGE) / n as f64);
    let mut c = b - ratio * (b - a);
    let mut e = a + ratio * (b - a);
    let (mut fc, mut fe) = (phi(c)?, phi(e)?);
    while b - a > 1e-14 * b.max(1.0) {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - ratio * (b - a);
            fc = phi(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + ratio * (b - a);
            fe = phi(e)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, phi(x)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct BayesianCheck {
    pub type_value: f64,
    /// Best expected gain of a unilateral deviation for this type.
    pub worst_gain: f64,
    pub worst_action: f64,
}

/// Deviation scan for a report-independent rule: with everyone else at
/// the target, can any type gain by playing another rate?
pub fn bayesian_sustain(
    scenario: &Scenario,
    rule: &AffineRule,
    grid_points: usize,
) -> Vec<BayesianCheck> {
    let mu = scenario.mu();
    let target = rule.target[0];
    let others: f64 = rule.target.iter().skip(1).sum();
    let grid = deviation_grid(mu, grid_points, &[target]);
    scenario
        .types()
        .values()
        .iter()
        .map(|&t| {
            let base = power(target, t, mu - others - target);
            let (worst_action, worst_gain) = grid
                .iter()
                .map(|&x| (x, power(x, t, mu - others - x - rule.intervene_unilateral(0, x)) - base))
                .fold((target, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
            BayesianCheck { type_value: t, worst_gain, worst_action }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct AprioriReport {
    pub rate: f64,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// The highest type is at most `n`, so the objective is convex.
    pub certified: bool,
    pub bayesian_sustain: bool,
    pub bayesian: Vec<BayesianCheck>,
}

pub fn apriori_solve(
    scenario: &Scenario,
    budget: f64,
    grid_points: usize,
) -> Result<(DirectMechanism, AprioriReport)> {
    apriori_solve_with(scenario, budget, grid_points, PgdOptions::default())
}

fn apriori_solve_with(
    scenario: &Scenario,
    budget: f64,
    grid_points: usize,
    opts: PgdOptions,
) -> Result<(DirectMechanism, AprioriReport)> {
    let n = scenario.n();
    let sol = pgd(scenario, opts)?;
    // Equal rates by symmetry; average out rounding noise across users.
    let rate = sol.d.iter().sum::<f64>() / n as f64;
    let target = vec![rate; n];
    let rule = design_rule(scenario, &target, DesignMode::Bayesian, budget)?;
    let bayesian = bayesian_sustain(scenario, &rule, grid_points);
    let suggested = SymmetricRule::constant(scenario, rate);
    let rules = vec![rule; suggested.profiles().len()];
    let mech = DirectMechanism::new(scenario.clone(), suggested, rules, true)?;
    let report = AprioriReport {
        rate,
        objective: sol.value,
        kkt_residual: sol.kkt,
        iterations: sol.iterations,
        certified: scenario.types().highest() <= n as f64,
        bayesian_sustain: bayesian.iter().all(|b| b.worst_gain <= DEVIATION_TOL),
        bayesian,
    };
    Ok((mech, report))
}

/// Smallest Hessian eigenvalue at each point.
pub fn hessian_min_eigenvalues(scenario: &Scenario, points: &[Vec<f64>], exec: Execution) -> Vec<f64> {
    exec.map(points, |d| {
        apriori_hessian(scenario, d)
            .map(|h| h.symmetric_eigenvalues().min())
            .unwrap_or(f64::NAN)
    })
}
