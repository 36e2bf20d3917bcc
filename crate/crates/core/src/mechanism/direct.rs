use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowUtility;
use crate::game::profiles::canonical_vector;
use crate::game::{Scenario, SymmetricRule, TypeSpace};
use crate::intervention::AffineRule;

const MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DirectMechanism {
    scenario: Scenario,
    suggested: SymmetricRule,
    /// One rule per profile, indexed like `suggested.profiles()`, with
    /// users in canonical order.
    rules: Vec<AffineRule>,
    apriori: bool,
}

#[derive(Serialize, Deserialize)]
struct MechanismDoc {
    types: Vec<f64>,
    probs: Vec<f64>,
    n: usize,
    mu: f64,
    profiles: Vec<ProfileDoc>,
    apriori: bool,
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    counts: Vec<usize>,
    suggested: Vec<f64>,
    rule: AffineRule,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedMechanism(msg.into())
}

impl DirectMechanism {
    pub fn new(
        scenario: Scenario,
        suggested: SymmetricRule,
        rules: Vec<AffineRule>,
        apriori: bool,
    ) -> Result<Self> {
        let mech = Self { scenario, suggested, rules, apriori };
        mech.validate()?;
        Ok(mech)
    }

    /// Structural checks: one rule per profile, rules symmetric within a
    /// type and centred on the suggestion, and report independence when
    /// the mechanism is a-priori.
    pub fn validate(&self) -> Result<()> {
        let space = self.suggested.profiles();
        let n = self.scenario.n();
        if space.users() != n || self.suggested.rates(0).len() != self.scenario.m() {
            return Err(malformed("suggestion does not match the scenario"));
        }
        if self.rules.len() != space.len() {
            return Err(malformed(format!(
                "{} rules for {} profiles",
                self.rules.len(),
                space.len()
            )));
        }
        for (p, rule) in self.rules.iter().enumerate() {
            rule.validate().map_err(|e| malformed(e.to_string()))?;
            if rule.c.len() != n {
                return Err(malformed(format!("profile {p}: rule has {} users", rule.c.len())));
            }
            let actions = self.suggested.actions(p);
            if actions.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > self.scenario.mu()) {
                return Err(malformed(format!("profile {p}: suggestion outside [0, mu]")));
            }
            let off = actions
                .iter()
                .zip(&rule.target)
                .any(|(a, t)| (a - t).abs() > MATCH_TOL * a.max(1.0));
            if off {
                return Err(malformed(format!("profile {p}: rule target differs from suggestion")));
            }
            let types = canonical_vector(space.counts(p));
            for w in 1..n {
                if types[w] == types[w - 1] && rule.c[w] != rule.c[w - 1] {
                    return Err(Error::AsymmetricRule { first: w - 1, second: w });
                }
            }
        }
        if self.apriori {
            let first = self.suggested.rate(0, 0);
            for p in 0..space.len() {
                let varies = space
                    .counts(p)
                    .iter()
                    .enumerate()
                    .any(|(k, &c)| c > 0 && self.suggested.rate(p, k) != first);
                if varies || self.rules[p].c != self.rules[0].c
                    || self.rules[p].d0_max != self.rules[0].d0_max
                {
                    return Err(malformed("a-priori mechanism depends on reports"));
                }
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn suggested(&self) -> &SymmetricRule {
        &self.suggested
    }

    pub fn rules(&self) -> &[AffineRule] {
        &self.rules
    }

    pub fn rule(&self, profile: usize) -> &AffineRule {
        &self.rules[profile]
    }

    pub fn is_apriori(&self) -> bool {
        self.apriori
    }

    pub fn to_json(&self) -> Result<String> {
        let space = self.suggested.profiles();
        let doc = MechanismDoc {
            types: self.scenario.types().values().to_vec(),
            probs: self.scenario.types().probs().to_vec(),
            n: self.scenario.n(),
            mu: self.scenario.mu(),
            profiles: (0..space.len())
                .map(|p| ProfileDoc {
                    counts: space.counts(p).to_vec(),
                    suggested: self.suggested.actions(p),
                    rule: self.rules[p].clone(),
                })
                .collect(),
            apriori: self.apriori,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MechanismDoc =
            serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        let types = TypeSpace::new(doc.types, doc.probs).map_err(|e| malformed(e.to_string()))?;
        let scenario = Scenario::new(doc.n, types, doc.mu).map_err(|e| malformed(e.to_string()))?;
        let m = scenario.m();
        let mut entries: Vec<Option<ProfileDoc>> = Vec::new();
        let probe = SymmetricRule::constant(&scenario, 0.0);
        let space = probe.profiles();
        entries.resize_with(space.len(), || None);
        for entry in doc.profiles {
            let p = space
                .index_of(&entry.counts)
                .ok_or_else(|| malformed(format!("unknown profile {:?}", entry.counts)))?;
            if entry.suggested.len() != scenario.n() {
                return Err(malformed(format!("profile {:?}: wrong action count", entry.counts)));
            }
            if entries[p].replace(entry).is_some() {
                return Err(malformed("duplicate profile"));
            }
        }
        if entries.iter().any(Option::is_none) {
            return Err(malformed("missing profiles"));
        }
        let entries: Vec<ProfileDoc> = entries.into_iter().flatten().collect();
        let mut asymmetric = None;
        let suggested = SymmetricRule::from_fn(&scenario, |counts| {
            let p = space.index_of(counts).expect("enumerated");
            let types = canonical_vector(counts);
            let actions = &entries[p].suggested;
            let mut r = vec![0.0; m];
            for (slot, &k) in types.iter().enumerate() {
                if slot > 0 && types[slot - 1] == k && actions[slot] != actions[slot - 1] {
                    asymmetric.get_or_insert(Error::AsymmetricRule { first: slot - 1, second: slot });
                }
                r[k] = actions[slot];
            }
            r
        });
        if let Some(e) = asymmetric {
            return Err(e);
        }
        let rules = entries.into_iter().map(|e| e.rule).collect();
        Self::new(scenario, suggested, rules, doc.apriori)
    }
}

/// Manager's expected utility under honest and obedient play. Errors if any
/// rule intervenes on the suggested profile.
pub fn manager_value_of(mech: &DirectMechanism) -> Result<f64> {
    let u = FlowUtility::new(mech.scenario.mu());
    let space = mech.suggested.profiles();
    let mut total = 0.0;
    for p in 0..space.len() {
        let actions = mech.suggested.actions(p);
        let level = mech.rules[p].intervene(&actions);
        if level != 0.0 {
            return Err(Error::OnPathIntervention { profile: p, level });
        }
        if space.prob(p) == 0.0 {
            continue;
        }
        let types: Vec<f64> = canonical_vector(space.counts(p))
            .into_iter()
            .map(|k| mech.scenario.types().value(k))
            .collect();
        total += space.prob(p) * u.manager_utility(0.0, &actions, &types);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{max_efficiency_value, nash_rule};
    use crate::mechanism::max_efficiency_mechanism;

    fn sc(n: usize) -> Scenario {
        Scenario::new(n, TypeSpace::uniform(vec![0.1, 1.0]).unwrap(), 5.0).unwrap()
    }

    #[test]
    fn json_round_trip_is_bit_stable() {
        let mech = max_efficiency_mechanism(&sc(3), 5.0).unwrap();
        let text = mech.to_json().unwrap();
        let back = DirectMechanism::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap(), text);
        for p in 0..mech.rules().len() {
            assert_eq!(back.rule(p), mech.rule(p));
            for (a, b) in back.suggested().actions(p).iter().zip(mech.suggested().actions(p)) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(DirectMechanism::from_json("{").is_err());
        let text = max_efficiency_mechanism(&sc(2), 5.0).unwrap().to_json().unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["profiles"].as_array_mut().unwrap().pop();
        assert!(DirectMechanism::from_json(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["profiles"][0]["suggested"][0] = serde_json::json!(0.5);
        assert!(DirectMechanism::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn manager_values() {
        let s = sc(4);
        let me = max_efficiency_mechanism(&s, 5.0).unwrap();
        assert_eq!(manager_value_of(&me).unwrap(), max_efficiency_value(&s));

        let ne = nash_rule(&s);
        let rules = (0..ne.profiles().len())
            .map(|p| AffineRule::inactive(ne.actions(p)))
            .collect();
        let mech = DirectMechanism::new(s.clone(), ne.clone(), rules, false).unwrap();
        let u = FlowUtility::new(5.0);
        let v = crate::game::expected_manager_value(&s, &ne, &u);
        assert!((manager_value_of(&mech).unwrap() - v).abs() < 1e-15);
    }

    #[test]
    fn on_path_intervention_is_an_error() {
        let s = sc(2);
        let ne = nash_rule(&s);
        let rules = (0..ne.profiles().len())
            .map(|p| {
                let target: Vec<f64> = ne.actions(p);
                AffineRule::new(vec![1.0; 2], target, 5.0).unwrap()
            })
            .collect();
        let mut mech = DirectMechanism::new(s, ne, rules, false).unwrap();
        mech.rules[0].target[0] *= 0.5;
        assert!(matches!(manager_value_of(&mech), Err(Error::OnPathIntervention { .. })));
    }
}
