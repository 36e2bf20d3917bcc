use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{
    bne_solve, max_efficiency_value, nash_rule, optimal_rule, per_type_metrics, FlowUtility,
    TypeMetrics,
};
use crate::game::{expected_manager_value, Scenario, SymmetricRule, TypeSpace};
use crate::intervention::AffineRule;
use crate::mechanism::{
    algorithm_converge, apriori_solve, check_incentive_compatible_with, manager_value_of,
    max_efficiency_mechanism, DirectMechanism,
};

use super::config::{ExperimentConfig, Scheme};

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_low: Option<f64>,
    pub scheme: Scheme,
    #[serde(rename = "V0")]
    pub v0: f64,
    pub thr_low: f64,
    pub thr_high: f64,
    pub delay_low: Option<f64>,
    pub delay_high: Option<f64>,
    pub stable: bool,
    /// Oracle verdict for mechanism schemes; absent for plain profiles.
    pub ic: Option<bool>,
    #[serde(skip)]
    pub runtime: Duration,
}

/// Outcome of one scheme on one scenario.
pub struct SchemeResult {
    pub v0: f64,
    pub metrics: Vec<TypeMetrics>,
    pub ic: Option<bool>,
}

fn mechanism_result(mech: &DirectMechanism, cfg: &ExperimentConfig) -> Result<SchemeResult> {
    let report = check_incentive_compatible_with(mech, cfg.grid_points, cfg.execution);
    Ok(SchemeResult {
        v0: manager_value_of(mech)?,
        metrics: per_type_metrics(mech.scenario(), mech.suggested()),
        ic: Some(report.is_ic()),
    })
}

fn profile_result(scenario: &Scenario, rule: &SymmetricRule) -> SchemeResult {
    SchemeResult {
        v0: expected_manager_value(scenario, rule, &FlowUtility::new(scenario.mu())),
        metrics: per_type_metrics(scenario, rule),
        ic: None,
    }
}

pub fn evaluate_scheme(scenario: &Scenario, scheme: Scheme, cfg: &ExperimentConfig) -> Result<SchemeResult> {
    let budget = cfg.budget();
    match scheme {
        Scheme::Compliant => {
            let mut r = profile_result(scenario, &optimal_rule(scenario));
            r.v0 = max_efficiency_value(scenario);
            Ok(r)
        }
        Scheme::Ne => {
            let rule = nash_rule(scenario);
            let rules = (0..rule.profiles().len()).map(|p| AffineRule::inactive(rule.actions(p))).collect();
            mechanism_result(&DirectMechanism::new(scenario.clone(), rule, rules, false)?, cfg)
        }
        Scheme::Bne => {
            let rates = bne_solve(scenario)?.rates;
            Ok(profile_result(scenario, &SymmetricRule::from_fn(scenario, |_| rates.clone())))
        }
        Scheme::InterventionComplete => mechanism_result(&max_efficiency_mechanism(scenario, budget)?, cfg),
        Scheme::Algorithm => {
            let (mech, _) = algorithm_converge(scenario, cfg.epsilon(), cfg.variant, budget)?;
            mechanism_result(&mech, cfg)
        }
        Scheme::Apriori => {
            let (mech, _) = apriori_solve(scenario, budget, cfg.grid_points)?;
            mechanism_result(&mech, cfg)
        }
    }
}

fn row(scenario: &Scenario, scheme: Scheme, cfg: &ExperimentConfig) -> Result<SweepRow> {
    let start = Instant::now();
    let r = evaluate_scheme(scenario, scheme, cfg)?;
    let (low, high) = (&r.metrics[0], &r.metrics[r.metrics.len() - 1]);
    Ok(SweepRow {
        n: None,
        p_low: None,
        scheme,
        v0: r.v0,
        thr_low: low.throughput,
        thr_high: high.throughput,
        delay_low: low.delay.value(),
        delay_high: high.delay.value(),
        stable: r.metrics.iter().all(|m| m.stable),
        ic: r.ic,
        runtime: start.elapsed(),
    })
}

/// One row per `(n, scheme)`, ordered by `n` then scheme.
pub fn sweep_users(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let schemes = cfg.schemes();
    let points: Vec<(usize, Scheme)> =
        cfg.users().into_iter().flat_map(|n| schemes.iter().map(move |&s| (n, s))).collect();
    cfg.execution
        .map(&points, |&(n, scheme)| {
            let mut r = row(&cfg.scenario(n)?, scheme, cfg)?;
            r.n = Some(n);
            Ok(r)
        })
        .into_iter()
        .collect()
}

/// Prior with `P(tau_1) = p` and the rest of the mass split in the
/// configured proportions.
fn shifted_prior(cfg: &ExperimentConfig, p: f64) -> Result<TypeSpace> {
    let base = cfg.type_space()?;
    let m = base.len();
    if m < 2 {
        return Err(Error::Config("probability sweep needs at least two types".into()));
    }
    let rest: f64 = base.probs()[1..].iter().sum();
    let mut probs = vec![p];
    for &q in &base.probs()[1..] {
        probs.push(if rest > 0.0 { (1.0 - p) * q / rest } else { (1.0 - p) / (m - 1) as f64 });
    }
    let total: f64 = probs.iter().sum();
    probs[m - 1] += 1.0 - total;
    TypeSpace::new(base.values().to_vec(), probs)
}

pub fn probability_grid(step: f64) -> Vec<f64> {
    let k = (1.0 / step).round() as usize;
    (0..=k).map(|j| ((j as f64 * step).min(1.0) * 1e12).round() / 1e12).collect()
}

/// Rows over `P(tau_1)` in `0, step, ..., 1` at `n_fixed` users.
pub fn sweep_probability(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let schemes = cfg.schemes();
    let points: Vec<(f64, Scheme)> = probability_grid(cfg.p_step)
        .into_iter()
        .flat_map(|p| schemes.iter().map(move |&s| (p, s)))
        .collect();
    cfg.execution
        .map(&points, |&(p, scheme)| {
            let scenario = Scenario::new(cfg.n_fixed, shifted_prior(cfg, p)?, cfg.mu)?;
            let mut r = row(&scenario, scheme, cfg)?;
            r.p_low = Some(p);
            Ok(r)
        })
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricRow {
    pub n: usize,
    pub scheme: Scheme,
    #[serde(rename = "type")]
    pub type_value: f64,
    pub throughput: f64,
    pub delay: Option<f64>,
    pub stable: bool,
}

/// Per-type throughput and delay for every `(n, scheme)`.
pub fn metrics(cfg: &ExperimentConfig) -> Result<Vec<MetricRow>> {
    cfg.validate()?;
    let schemes = cfg.schemes();
    let points: Vec<(usize, Scheme)> =
        cfg.users().into_iter().flat_map(|n| schemes.iter().map(move |&s| (n, s))).collect();
    let nested: Vec<Result<Vec<MetricRow>>> = cfg.execution.map(&points, |&(n, scheme)| {
        let scenario = cfg.scenario(n)?;
        let rule = match scheme {
            Scheme::Compliant | Scheme::InterventionComplete => optimal_rule(&scenario),
            Scheme::Ne => nash_rule(&scenario),
            Scheme::Bne => {
                let rates = bne_solve(&scenario)?.rates;
                SymmetricRule::from_fn(&scenario, |_| rates.clone())
            }
            Scheme::Algorithm => {
                algorithm_converge(&scenario, cfg.epsilon(), cfg.variant, cfg.budget())?
                    .0
                    .suggested()
                    .clone()
            }
            Scheme::Apriori => {
                apriori_solve(&scenario, cfg.budget(), cfg.grid_points)?.0.suggested().clone()
            }
        };
        Ok(per_type_metrics(&scenario, &rule)
            .into_iter()
            .map(|m| MetricRow {
                n,
                scheme,
                type_value: m.type_value,
                throughput: m.throughput,
                delay: m.delay.value(),
                stable: m.stable,
            })
            .collect())
    });
    let mut out = Vec::new();
    for rows in nested {
        out.extend(rows?);
    }
    Ok(out)
}
