use serde::{Serialize, Serializer};

use crate::game::{Profiles, Scenario, SymmetricRule};

/// Expected queueing delay, or a flag that some profile overloads the server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delay {
    Finite(f64),
    Unbounded,
}

impl Delay {
    pub fn value(self) -> Option<f64> {
        match self {
            Delay::Finite(x) => Some(x),
            Delay::Unbounded => None,
        }
    }
}

impl Serialize for Delay {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeMetrics {
    pub type_value: f64,
    pub throughput: f64,
    pub delay: Delay,
    pub stable: bool,
}

/// Throughput `E[d_i | t_i]` and M/M/1 delay `E[1/(mu - load) | t_i]`.
pub fn per_type_metrics(scenario: &Scenario, rule: &SymmetricRule) -> Vec<TypeMetrics> {
    let profiles = Profiles::new(scenario);
    let cond = profiles.conditional();
    let mu = scenario.mu();
    (0..scenario.m())
        .map(|k| {
            let mut throughput = 0.0;
            let mut delay = 0.0;
            let mut stable = true;
            for o in 0..cond.len() {
                let q = cond.prob(o);
                if q == 0.0 {
                    continue;
                }
                let p = cond.join(o, k);
                let load = rule.load(p);
                throughput += q * rule.rate(p, k);
                if load >= mu {
                    stable = false;
                } else {
                    delay += q / (mu - load);
                }
            }
            TypeMetrics {
                type_value: scenario.types().value(k),
                throughput,
                delay: if stable { Delay::Finite(delay) } else { Delay::Unbounded },
                stable,
            }
        })
        .collect()
}
