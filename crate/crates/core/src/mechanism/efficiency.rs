use serde::Serialize;

use crate::error::Result;
use crate::flow::optimal_rule;
use crate::game::profiles::canonical_vector;
use crate::game::{ProfileSpace, Scenario, TypeCounts};
use crate::intervention::{design_rule, DesignMode};

use super::direct::DirectMechanism;
use super::ic::misreport_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Misreport {
    pub own_type: f64,
    pub reported_type: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruthfulReport {
    pub truthful: bool,
    pub violations: Vec<Misreport>,
}

/// Exact check that nobody gains by misreporting when the device suggests
/// `d*` of the reported profile and never intervenes.
pub fn truthful_at_optimum(scenario: &Scenario) -> TruthfulReport {
    let w = misreport_matrix(scenario, &optimal_rule(scenario));
    let types = scenario.types();
    let mut violations = Vec::new();
    for (s, row) in w.iter().enumerate() {
        for (l, &v) in row.iter().enumerate() {
            let gain = v - row[s];
            if l != s && gain > 1e-12 * row[s].abs().max(1.0) {
                violations.push(Misreport {
                    own_type: types.value(s),
                    reported_type: types.value(l),
                    gain,
                });
            }
        }
    }
    TruthfulReport { truthful: violations.is_empty(), violations }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthfulnessTerm {
    pub lower: f64,
    pub upper: f64,
    /// Multiset of the other users' types.
    pub others: TypeCounts,
    pub value: f64,
}

/// Sufficient-condition terms
/// `((a + tau_{k+1}) / (a + tau_k))^(tau_k + 1) (tau_k / tau_{k+1})^tau_k`
/// with `a = n + sum_{j != i} t_j`, over consecutive type pairs and all
/// multisets of the other users.
pub fn truthfulness_terms(scenario: &Scenario) -> Vec<TruthfulnessTerm> {
    let types = scenario.types();
    let others = ProfileSpace::new(scenario.n() - 1, types);
    let n = scenario.n() as f64;
    let mut out = Vec::new();
    for k in 0..types.len().saturating_sub(1) {
        let (lo, hi) = (types.value(k), types.value(k + 1));
        for o in 0..others.len() {
            let counts = others.counts(o);
            let a = n + canonical_vector(counts).iter().map(|&j| types.value(j)).sum::<f64>();
            let value = ((a + hi) / (a + lo)).powf(lo + 1.0) * (lo / hi).powf(lo);
            out.push(TruthfulnessTerm { lower: lo, upper: hi, others: counts.to_vec(), value });
        }
    }
    out
}

pub fn max_efficiency_condition(scenario: &Scenario) -> bool {
    truthfulness_terms(scenario).iter().all(|t| t.value >= 1.0 - 1e-12)
}

/// Suggests `d*` of the reported profile, each backed by the slope-`(n-1)`
/// rule.
pub fn max_efficiency_mechanism(scenario: &Scenario, budget: f64) -> Result<DirectMechanism> {
    let suggested = optimal_rule(scenario);
    let space = suggested.profiles();
    let rules = (0..space.len())
        .map(|p| {
            let types: Vec<f64> = canonical_vector(space.counts(p))
                .into_iter()
                .map(|k| scenario.types().value(k))
                .collect();
            design_rule(scenario, &suggested.actions(p), DesignMode::Optimal { types: &types }, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    DirectMechanism::new(scenario.clone(), suggested, rules, false)
}
