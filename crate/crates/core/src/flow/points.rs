use crate::game::{expected_manager_value, Scenario, SymmetricRule};

use super::utility::FlowUtility;

/// Proportionally fair optimum `d_i = t_i mu / (n + sum t)`.
pub fn optimal_profile(scenario: &Scenario, t: &[f64]) -> Vec<f64> {
    let s: f64 = t.iter().sum();
    let denom = t.len() as f64 + s;
    t.iter().map(|ti| ti * scenario.mu() / denom).collect()
}

/// Rate maximizing `d^t (mu - others - d)` over `[0, mu]`.
pub fn best_response(scenario: &Scenario, d_minus_i: &[f64], t_i: f64) -> f64 {
    let mu = scenario.mu();
    let others: f64 = d_minus_i.iter().sum();
    (t_i * (mu - others) / (1.0 + t_i)).clamp(0.0, mu)
}

/// Unique complete-information equilibrium `d_i = t_i mu / (1 + sum t)`.
pub fn nash_equilibrium(scenario: &Scenario, t: &[f64]) -> Vec<f64> {
    let s: f64 = t.iter().sum();
    t.iter().map(|ti| ti * scenario.mu() / (1.0 + s)).collect()
}

fn profile_sum(scenario: &Scenario, counts: &[usize]) -> f64 {
    counts
        .iter()
        .zip(scenario.types().values())
        .map(|(&c, t)| c as f64 * t)
        .sum()
}

/// `d*(t)` on every profile.
pub fn optimal_rule(scenario: &Scenario) -> SymmetricRule {
    let mu = scenario.mu();
    let n = scenario.n() as f64;
    SymmetricRule::from_fn(scenario, |c| {
        let s = profile_sum(scenario, c);
        scenario.types().values().iter().map(|t| t * mu / (n + s)).collect()
    })
}

/// Complete-information equilibrium on every profile.
pub fn nash_rule(scenario: &Scenario) -> SymmetricRule {
    let mu = scenario.mu();
    SymmetricRule::from_fn(scenario, |c| {
        let s = profile_sum(scenario, c);
        scenario.types().values().iter().map(|t| t * mu / (1.0 + s)).collect()
    })
}

/// Manager's expected utility with compliant users playing `d*(t)`.
pub fn max_efficiency_value(scenario: &Scenario) -> f64 {
    expected_manager_value(scenario, &optimal_rule(scenario), &FlowUtility::new(scenario.mu()))
}
