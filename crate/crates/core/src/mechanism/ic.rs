//! Honesty and obedience checks for symmetric direct mechanisms.
//!
//! A representative user of true type `s` reports `l`. The profile seen by
//! the device is the others' multiset plus one `l`; the user then either
//! obeys its suggestion or plays some fixed rate `x`, with the device
//! reacting through that profile's rule while everyone else obeys.

use serde::Serialize;

use crate::error::Result;
use crate::exec::Execution;
use crate::flow::power;
use crate::game::{Profiles, Scenario, SymmetricRule};
use crate::intervention::deviation_grid;

use super::direct::DirectMechanism;

/// Margins above `-IC_TOL` count as satisfied.
pub const IC_TOL: f64 = 1e-6;

/// Data needed to evaluate the representative user at one joined profile.
struct Slot {
    prob: f64,
    rate: f64,
    others_load: f64,
    /// Intervention contributed by the other users' excess over target.
    others_excess: f64,
    slope: f64,
    target: f64,
    d0_max: f64,
}

impl Slot {
    fn value(&self, x: f64, t: f64, mu: f64) -> f64 {
        let f = (self.others_excess + self.slope * (x - self.target)).clamp(0.0, self.d0_max);
        power(x, t, mu - self.others_load - x - f)
    }
}

fn slots(mech: &DirectMechanism, profiles: &Profiles, l: usize) -> Vec<Slot> {
    let cond = profiles.conditional();
    let rule = mech.suggested();
    (0..cond.len())
        .map(|o| {
            let p = cond.join(o, l);
            let slot = rule.slot(p, l).expect("reported type is present");
            let actions = rule.actions(p);
            let aff = mech.rule(p);
            let others_excess = (0..actions.len())
                .filter(|&j| j != slot)
                .map(|j| aff.c[j] * (actions[j] - aff.target[j]))
                .sum();
            Slot {
                prob: cond.prob(o),
                rate: rule.rate(p, l),
                others_load: rule.load(p) - rule.rate(p, l),
                others_excess,
                slope: aff.c[slot],
                target: aff.target[slot],
                d0_max: aff.d0_max,
            }
        })
        .collect()
}

fn obey_value(slots: &[Slot], t: f64, mu: f64) -> f64 {
    slots.iter().map(|s| s.prob * s.value(s.rate, t, mu)).sum()
}

fn deviate_value(slots: &[Slot], x: f64, t: f64, mu: f64) -> f64 {
    slots.iter().map(|s| s.prob * s.value(x, t, mu)).sum()
}

/// Expected utility of a user of type `own_type` that reports
/// `reported_type` and follows the suggestion.
pub fn misreport_value(mech: &DirectMechanism, own_type: f64, reported_type: f64) -> Result<f64> {
    let sc = mech.scenario();
    let s = sc.types().index_of(own_type)?;
    let l = sc.types().index_of(reported_type)?;
    let profiles = Profiles::new(sc);
    Ok(obey_value(&slots(mech, &profiles, l), sc.types().value(s), sc.mu()))
}

/// `W[s][l]` for a suggestion without any intervention.
pub fn misreport_matrix(scenario: &Scenario, suggested: &SymmetricRule) -> Vec<Vec<f64>> {
    let profiles = Profiles::new(scenario);
    let cond = profiles.conditional();
    let mu = scenario.mu();
    let m = scenario.m();
    (0..m)
        .map(|s| {
            let t = scenario.types().value(s);
            (0..m)
                .map(|l| {
                    (0..cond.len())
                        .map(|o| {
                            let p = cond.join(o, l);
                            let r = suggested.rate(p, l);
                            cond.prob(o) * power(r, t, mu - suggested.load(p))
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub own_type: f64,
    pub reported_type: f64,
    /// `None` when the user obeys after misreporting.
    pub action: Option<f64>,
    pub gain: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IcReport {
    /// No type gains by misreporting and then obeying.
    pub honest_ok: bool,
    /// No type gains by deviating from its suggestion after any report.
    pub obedient_ok: bool,
    /// No type gains by deviating after reporting truthfully.
    pub truthful_obedience_ok: bool,
    pub worst_violation: Option<Violation>,
    /// `W(s, s)` minus the best value reachable after reporting `l`.
    pub margins: Vec<Vec<f64>>,
    /// `W(s, s) - W(s, l)`.
    pub honest_margins: Vec<Vec<f64>>,
    /// `W(s, s)` minus the best gridded deviation after reporting `l`.
    pub deviation_margins: Vec<Vec<f64>>,
}

impl IcReport {
    pub fn is_ic(&self) -> bool {
        self.honest_ok && self.obedient_ok
    }
}

pub fn check_incentive_compatible(mech: &DirectMechanism, grid_points: usize) -> IcReport {
    check_incentive_compatible_with(mech, grid_points, Execution::default())
}

pub fn check_incentive_compatible_with(
    mech: &DirectMechanism,
    grid_points: usize,
    exec: Execution,
) -> IcReport {
    let sc = mech.scenario();
    let m = sc.m();
    let mu = sc.mu();
    let profiles = Profiles::new(sc);
    let by_report: Vec<Vec<Slot>> = (0..m).map(|l| slots(mech, &profiles, l)).collect();
    let grids: Vec<Vec<f64>> = by_report
        .iter()
        .map(|sl| {
            let mut focus: Vec<f64> = sl.iter().map(|s| s.rate).collect();
            focus.sort_by(f64::total_cmp);
            focus.dedup();
            deviation_grid(mu, grid_points, &focus)
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|s| (0..m).map(move |l| (s, l))).collect();
    // (obey value, best deviation value, best deviation action) per pair
    let evaluated: Vec<(f64, f64, f64)> = pairs
        .iter()
        .map(|&(s, l)| {
            let t = sc.types().value(s);
            let obey = obey_value(&by_report[l], t, mu);
            let values = exec.map(&grids[l], |&x| deviate_value(&by_report[l], x, t, mu));
            let (best_x, best) = grids[l]
                .iter()
                .zip(&values)
                .fold((0.0, f64::NEG_INFINITY), |acc, (&x, &v)| if v > acc.1 { (x, v) } else { acc });
            (obey, best, best_x)
        })
        .collect();

    let mut margins = vec![vec![0.0; m]; m];
    let mut honest_margins = vec![vec![0.0; m]; m];
    let mut deviation_margins = vec![vec![0.0; m]; m];
    let mut worst: Option<Violation> = None;
    for (&(s, l), &(obey, best, best_x)) in pairs.iter().zip(&evaluated) {
        let honest = evaluated[s * m + s].0;
        honest_margins[s][l] = honest - obey;
        deviation_margins[s][l] = honest - best;
        margins[s][l] = honest - obey.max(best);
        let (gain, action) = if best > obey { (best - honest, Some(best_x)) } else { (obey - honest, None) };
        if worst.is_none_or(|w| gain > w.gain) {
            worst = Some(Violation {
                own_type: sc.types().value(s),
                reported_type: sc.types().value(l),
                action,
                gain,
            });
        }
    }
    let all_ok = |mat: &Vec<Vec<f64>>| mat.iter().flatten().all(|&x| x >= -IC_TOL);
    let truthful_obedience_ok = (0..m).all(|s| deviation_margins[s][s] >= -IC_TOL);
    IcReport {
        honest_ok: all_ok(&honest_margins),
        obedient_ok: all_ok(&deviation_margins),
        truthful_obedience_ok,
        worst_violation: worst.filter(|w| w.gain > IC_TOL),
        margins,
        honest_margins,
        deviation_margins,
    }
}
