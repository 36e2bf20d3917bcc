use crate::game::profiles::{canonical_vector, Profiles};
use crate::game::rule::SymmetricRule;
use crate::game::types::Scenario;
use crate::error::Result;

/// Per-user and manager payoffs on explicit action and type vectors.
pub trait UtilityModel {
    fn user(&self, i: usize, actions: &[f64], types: &[f64]) -> f64;
    fn manager(&self, actions: &[f64], types: &[f64]) -> f64;
}

fn type_vector(scenario: &Scenario, counts: &[usize]) -> Vec<f64> {
    canonical_vector(counts)
        .into_iter()
        .map(|k| scenario.types().value(k))
        .collect()
}

/// Interim expected utility of a user holding `own_type` when everyone
/// follows `rule`. Users are exchangeable, so any user of that type
/// stands in for all of them.
pub fn expected_user_value<U: UtilityModel + ?Sized>(
    scenario: &Scenario,
    own_type: f64,
    rule: &SymmetricRule,
    utility: &U,
) -> Result<f64> {
    let k = scenario.types().index_of(own_type)?;
    let profiles = Profiles::new(scenario);
    let cond = profiles.conditional();
    let mut total = 0.0;
    for o in 0..cond.len() {
        let p = cond.join(o, k);
        let counts = profiles.full().counts(p);
        let slot = rule.slot(p, k).expect("own type is present");
        let u = utility.user(slot, &rule.actions(p), &type_vector(scenario, counts));
        total += cond.prob(o) * u;
    }
    Ok(total)
}

pub fn expected_manager_value<U: UtilityModel + ?Sized>(
    scenario: &Scenario,
    rule: &SymmetricRule,
    utility: &U,
) -> f64 {
    let space = rule.profiles();
    (0..space.len())
        .filter(|&p| space.prob(p) > 0.0)
        .map(|p| {
            let types = type_vector(scenario, space.counts(p));
            space.prob(p) * utility.manager(&rule.actions(p), &types)
        })
        .sum()
}
