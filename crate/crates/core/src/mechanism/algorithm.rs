//! Iterative search for an incentive-compatible suggestion.
//!
//! Start from `d*` on every profile. While some type prefers to report
//! another type, raise suggestions by `epsilon`, never above the
//! complete-information equilibrium, and re-attach a sustaining rule.
//! The flow variant raises the mimicked type's suggestion; the general
//! variant raises the honest type's suggestion, and when that is already
//! capped raises every user's suggestion on profiles containing it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{nash_rule, optimal_rule, FlowUtility};
use crate::game::profiles::canonical_vector;
use crate::game::{expected_manager_value, Profiles, Scenario, SymmetricRule};
use crate::intervention::{design_rule, AffineRule, DesignMode};

use super::direct::DirectMechanism;
use super::ic::misreport_matrix;

/// Misreport gains up to this size count as ties and are ignored.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Flow,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Converged,
    /// A misreport is still profitable but no suggestion can move.
    Stalled { diagnostic: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Largest misreport gain seen at the start of the iteration.
    pub worst_gain: f64,
    pub manager_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    pub iterations: usize,
    pub records: Vec<IterationRecord>,
    pub status: Status,
}

fn profile_types(scenario: &Scenario, rule: &SymmetricRule, p: usize) -> Vec<f64> {
    canonical_vector(rule.profiles().counts(p))
        .into_iter()
        .map(|k| scenario.types().value(k))
        .collect()
}

fn sustaining_rules(scenario: &Scenario, rule: &SymmetricRule, budget: f64) -> Result<Vec<AffineRule>> {
    (0..rule.profiles().len())
        .map(|p| {
            let types = [profile_types(scenario, rule, p)];
            design_rule(scenario, &rule.actions(p), DesignMode::General { profiles: &types }, budget)
        })
        .collect()
}

/// Raises type `k`'s suggestion on every profile joined from the others'
/// multisets; returns whether anything moved.
fn raise_type(
    rule: &mut SymmetricRule,
    cap: &SymmetricRule,
    profiles: &Profiles,
    k: usize,
    eps: f64,
) -> bool {
    let cond = profiles.conditional();
    let mut moved = false;
    for o in 0..cond.len() {
        let p = cond.join(o, k);
        let (r, c) = (rule.rate(p, k), cap.rate(p, k));
        if r < c {
            moved = true;
            rule.set_rate(p, k, (r + eps).min(c));
        }
    }
    moved
}

fn raise_all(
    rule: &mut SymmetricRule,
    cap: &SymmetricRule,
    profiles: &Profiles,
    k: usize,
    eps: f64,
) -> bool {
    let cond = profiles.conditional();
    let mut moved = false;
    for o in 0..cond.len() {
        let p = cond.join(o, k);
        for j in 0..cap.rates(p).len() {
            let (r, c) = (rule.rate(p, j), cap.rate(p, j));
            if profiles.full().counts(p)[j] > 0 && r < c {
                moved = true;
                rule.set_rate(p, j, (r + eps).min(c));
            }
        }
    }
    moved
}

pub fn algorithm_converge(
    scenario: &Scenario,
    epsilon: f64,
    variant: Variant,
    budget: f64,
) -> Result<(DirectMechanism, Trace)> {
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    if budget < scenario.mu() {
        return Err(Error::InsufficientBudget { needed: scenario.mu(), available: budget });
    }
    let profiles = Profiles::new(scenario);
    let cap = nash_rule(scenario);
    let mut rule = optimal_rule(scenario);
    let mut rules = sustaining_rules(scenario, &rule, budget)?;
    let u = FlowUtility::new(scenario.mu());
    let m = scenario.m();

    // Every productive iteration moves some coordinate by epsilon or onto
    // its cap, which bounds the number of iterations.
    let space = profiles.full();
    let slack: f64 = (0..space.len())
        .flat_map(|p| (0..m).map(move |k| (p, k)))
        .map(|(p, k)| ((cap.rate(p, k) - rule.rate(p, k)) / epsilon).ceil() + 1.0)
        .sum();
    let limit = slack as usize + 2;

    let mut records = Vec::new();
    let mut iteration = 0;
    let status = loop {
        iteration += 1;
        let w = misreport_matrix(scenario, &rule);
        let worst_gain = (0..m)
            .flat_map(|s| (0..m).map(move |l| (s, l)))
            .map(|(s, l)| w[s][l] - w[s][s])
            .fold(0.0, f64::max);
        records.push(IterationRecord {
            iteration,
            worst_gain,
            manager_value: expected_manager_value(scenario, &rule, &u),
        });

        let mut violated = false;
        let mut moved = false;
        for s in 0..m {
            for l in 0..m {
                let w = misreport_matrix(scenario, &rule);
                if w[s][l] - w[s][s] <= TIE_TOL {
                    continue;
                }
                violated = true;
                moved |= match variant {
                    Variant::Flow => raise_type(&mut rule, &cap, &profiles, l, epsilon),
                    Variant::General => {
                        raise_type(&mut rule, &cap, &profiles, s, epsilon)
                            || raise_all(&mut rule, &cap, &profiles, s, epsilon)
                    }
                };
            }
        }
        if !violated {
            break Status::Converged;
        }
        if moved {
            rules = sustaining_rules(scenario, &rule, budget)?;
        } else {
            break Status::Stalled {
                diagnostic: format!(
                    "misreport gain {worst_gain:e} remains with every adjustable suggestion at its equilibrium cap"
                ),
            };
        }
        if iteration >= limit {
            break Status::Stalled { diagnostic: format!("iteration limit {limit} reached") };
        }
    };
    let mech = DirectMechanism::new(scenario.clone(), rule, rules, false)?;
    Ok((mech, Trace { iterations: iteration, records, status }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::TypeSpace;
    use crate::mechanism::manager_value_of;

    fn sc(n: usize) -> Scenario {
        Scenario::new(n, TypeSpace::uniform(vec![0.1, 1.0]).unwrap(), 5.0).unwrap()
    }

    #[test]
    fn two_users_stop_at_once() {
        let (mech, trace) = algorithm_converge(&sc(2), 0.005, Variant::Flow, 5.0).unwrap();
        assert_eq!(trace.iterations, 1);
        assert_eq!(trace.status, Status::Converged);
        let opt = optimal_rule(&sc(2));
        for p in 0..opt.profiles().len() {
            assert_eq!(mech.suggested().rates(p), opt.rates(p));
        }
    }

    #[test]
    fn suggestions_stay_between_optimum_and_equilibrium() {
        for variant in [Variant::Flow, Variant::General] {
            let s = sc(6);
            let (mech, trace) = algorithm_converge(&s, 0.005, variant, 5.0).unwrap();
            assert_eq!(trace.status, Status::Converged);
            let (lo, hi) = (optimal_rule(&s), nash_rule(&s));
            let r = mech.suggested();
            for p in 0..r.profiles().len() {
                for k in 0..2 {
                    assert!(r.rate(p, k) >= lo.rate(p, k) && r.rate(p, k) <= hi.rate(p, k));
                }
            }
            let w = misreport_matrix(&s, r);
            assert!(w[0][1] - w[0][0] <= TIE_TOL && w[1][0] - w[1][1] <= TIE_TOL);
            assert!(manager_value_of(&mech).is_ok());
        }
    }

    #[test]
    fn coarser_steps_take_no_longer() {
        let s = sc(5);
        let fine = algorithm_converge(&s, 0.005, Variant::Flow, 5.0).unwrap().1.iterations;
        let coarse = algorithm_converge(&s, 0.05, Variant::Flow, 5.0).unwrap().1.iterations;
        assert!(coarse <= fine);
    }

    #[test]
    fn rejects_small_budget() {
        assert!(algorithm_converge(&sc(3), 0.005, Variant::Flow, 1.0).is_err());
        assert!(algorithm_converge(&sc(3), 0.0, Variant::Flow, 5.0).is_err());
    }
}
