//! Affine intervention rules.
//!
//! The device watches aggregate excess over a target and injects
//! `clamp(sum_i c_i (d_i - target_i), 0, d0_max)` units of traffic. A user
//! exceeding its target by `x` therefore loses `(1 + c_i) x` of residual
//! capacity until the clamp saturates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{nash_equilibrium, optimal_profile, FlowUtility};
use crate::game::Scenario;

const COND_TOL: f64 = 1e-12;
/// Slopes are set this far above their lower bound.
pub const SLOPE_MARGIN: f64 = 1e-9;
/// Largest utility gain a deviation may have and still count as no gain.
pub const DEVIATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineRule {
    pub c: Vec<f64>,
    pub target: Vec<f64>,
    pub d0_max: f64,
}

impl AffineRule {
    pub fn new(c: Vec<f64>, target: Vec<f64>, d0_max: f64) -> Result<Self> {
        let rule = Self { c, target, d0_max };
        rule.validate()?;
        Ok(rule)
    }

    /// Rule that never intervenes.
    pub fn inactive(target: Vec<f64>) -> Self {
        Self { c: vec![0.0; target.len()], target, d0_max: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.target.len() {
            return Err(Error::InvalidAction(format!(
                "{} slopes for {} targets",
                self.c.len(),
                self.target.len()
            )));
        }
        let bad = |x: &f64| !x.is_finite() || *x < 0.0;
        if self.c.iter().any(bad) || self.target.iter().any(bad) || bad(&self.d0_max) {
            return Err(Error::InvalidAction(
                "slopes, targets and d0_max must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Intervention level for action profile `d`.
    pub fn intervene(&self, d: &[f64]) -> f64 {
        let excess: f64 = self
            .c
            .iter()
            .zip(d.iter().zip(&self.target))
            .map(|(c, (x, t))| c * (x - t))
            .sum();
        excess.clamp(0.0, self.d0_max)
    }

    /// Intervention when user `i` plays `x` and everyone else is on target.
    pub fn intervene_unilateral(&self, i: usize, x: f64) -> f64 {
        (self.c[i] * (x - self.target[i])).clamp(0.0, self.d0_max)
    }
}

/// Utility of user `i` once the rule has reacted to `d`.
pub fn utility_under_rule(
    scenario: &Scenario,
    rule: &AffineRule,
    d: &[f64],
    t: &[f64],
    i: usize,
) -> Result<f64> {
    FlowUtility::new(scenario.mu()).user_utility(rule.intervene(d), d, t[i], i)
}

/// Smallest admissible slope and device rate for user `i` of type `t_i`.
fn bounds(mu: f64, target: &[f64], i: usize, t_i: f64, c_i: f64) -> Result<(f64, f64)> {
    let d_i = target[i];
    if d_i <= 0.0 {
        return Err(Error::DegenerateTarget { user: i });
    }
    let residual = mu - target.iter().sum::<f64>();
    let gap = t_i * residual - d_i;
    let c_needed = gap / d_i;
    let d0_needed = c_i * gap / (1.0 + t_i * (1.0 + c_i));
    Ok((c_needed, d0_needed))
}

/// Closed-form test that `rule` makes its target a zero-intervention
/// equilibrium of the complete-information game at types `t`.
pub fn sustain_conditions(scenario: &Scenario, rule: &AffineRule, t: &[f64]) -> Result<bool> {
    let n = t.len();
    if rule.target.len() != n || rule.c.len() != n {
        return Err(Error::InvalidAction("rule and type vector sizes differ".into()));
    }
    let mu = scenario.mu();
    let ne = nash_equilibrium(scenario, t);
    let mut ok = true;
    for i in 0..n {
        let (c_needed, d0_needed) = bounds(mu, &rule.target, i, t[i], rule.c[i])?;
        let tol = COND_TOL * (1.0 + c_needed.abs());
        ok &= rule.target[i] <= ne[i] * (1.0 + COND_TOL) + COND_TOL;
        ok &= rule.c[i] >= c_needed - tol;
        ok &= rule.d0_max >= d0_needed - COND_TOL * (1.0 + d0_needed.abs());
    }
    Ok(ok)
}

/// How [`design_rule`] chooses its constants.
#[derive(Debug, Clone, Copy)]
pub enum DesignMode<'a> {
    /// Target is `d*(types)`; slopes `n - 1`, device rate `mu / (1 + tau_1)`.
    Optimal { types: &'a [f64] },
    /// Target must lie below the equilibrium of every listed type vector;
    /// slopes use the highest type, device rate is the whole budget.
    General { profiles: &'a [Vec<f64>] },
    /// Slopes and device rate as in `General`, without the per-profile
    /// equilibrium check; the caller verifies sustainment in expectation.
    Bayesian,
}

/// Builds an affine rule sustaining `target` under `mode`, using at most
/// `budget` of device rate.
pub fn design_rule(
    scenario: &Scenario,
    target: &[f64],
    mode: DesignMode<'_>,
    budget: f64,
) -> Result<AffineRule> {
    let n = target.len();
    let mu = scenario.mu();
    if let Some(user) = target.iter().position(|&x| x <= 0.0) {
        return Err(Error::DegenerateTarget { user });
    }
    match mode {
        DesignMode::Optimal { types } => {
            let opt = optimal_profile(scenario, types);
            let off = target
                .iter()
                .zip(&opt)
                .any(|(a, b)| (a - b).abs() > 1e-9 * b.max(1.0));
            if off {
                return Err(Error::UnsustainableTarget(
                    "optimal mode needs the target to be the optimum of the given types".into(),
                ));
            }
            let needed = mu / (1.0 + scenario.types().lowest());
            if budget < needed {
                return Err(Error::InsufficientBudget { needed, available: budget });
            }
            let c = vec![n as f64 - 1.0 + SLOPE_MARGIN; n];
            AffineRule::new(c, target.to_vec(), needed)
        }
        DesignMode::General { profiles } => {
            for t in profiles {
                let ne = nash_equilibrium(scenario, t);
                if let Some(i) = (0..n).find(|&i| target[i] > ne[i] * (1.0 + COND_TOL)) {
                    return Err(Error::UnsustainableTarget(format!(
                        "target {} of user {i} exceeds its equilibrium rate {}",
                        target[i], ne[i]
                    )));
                }
            }
            type_free_rule(scenario, target, budget)
        }
        DesignMode::Bayesian => type_free_rule(scenario, target, budget),
    }
}

fn type_free_rule(scenario: &Scenario, target: &[f64], budget: f64) -> Result<AffineRule> {
    let mu = scenario.mu();
    let top = scenario.types().highest();
    let mut c = Vec::with_capacity(target.len());
    let mut needed: f64 = 0.0;
    for i in 0..target.len() {
        let (c_needed, _) = bounds(mu, target, i, top, 0.0)?;
        let ci = c_needed.max(0.0) + SLOPE_MARGIN;
        let (_, d0) = bounds(mu, target, i, top, ci)?;
        needed = needed.max(d0);
        c.push(ci);
    }
    if budget < needed {
        return Err(Error::InsufficientBudget { needed, available: budget });
    }
    AffineRule::new(c, target.to_vec(), budget)
}

/// Uniform grid on `[0, hi]` with `points` nodes, plus nodes ten times
/// denser within `hi / 100` of each focus point, plus the focus points.
pub fn deviation_grid(hi: f64, points: usize, focus: &[f64]) -> Vec<f64> {
    let points = points.max(2);
    let h = hi / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|k| hi * k as f64 / (points - 1) as f64).collect();
    let fine = h / 10.0;
    let band = hi / 100.0;
    for &f in focus {
        let lo = (f - band).max(0.0);
        let up = (f + band).min(hi);
        let steps = ((up - lo) / fine).ceil() as usize;
        grid.extend((0..=steps).map(|k| (lo + k as f64 * fine).min(up)));
        grid.push(f.clamp(0.0, hi));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub user: usize,
    pub action: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SustainCheck {
    pub sustained: bool,
    /// Most profitable unilateral deviation found, if it gains anything.
    pub worst: Option<Deviation>,
}

/// Exhaustive unilateral-deviation scan around the rule's target.
pub fn verify_sustain_numeric(
    scenario: &Scenario,
    rule: &AffineRule,
    t: &[f64],
    grid_points: usize,
) -> SustainCheck {
    let u = FlowUtility::new(scenario.mu());
    let mu = scenario.mu();
    let d = &rule.target;
    let total: f64 = d.iter().sum();
    let mut worst: Option<Deviation> = None;
    for i in 0..d.len() {
        let others = total - d[i];
        let base = u.user_utility(rule.intervene(d), d, t[i], i).unwrap_or(f64::NAN);
        for x in deviation_grid(mu, grid_points, &[d[i]]) {
            let f = rule.intervene_unilateral(i, x);
            let gain = crate::flow::power(x, t[i], mu - others - x - f) - base;
            if worst.is_none_or(|w| gain > w.gain) {
                worst = Some(Deviation { user: i, action: x, gain });
            }
        }
    }
    let sustained = worst.is_none_or(|w| w.gain <= DEVIATION_TOL) && rule.intervene(d) == 0.0;
    SustainCheck { sustained, worst: worst.filter(|w| w.gain > 0.0) }
}
