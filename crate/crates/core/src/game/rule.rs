use crate::error::{Error, Result};
use crate::game::profiles::{canonical_vector, counts_of, first_slot, ProfileSpace};
use crate::game::types::Scenario;

/// Action rule that gives every user of the same type the same rate.
///
/// Stored as `rates[profile][type]`; entries for types absent from a
/// profile are unused and kept at 0.
#[derive(Debug, Clone)]
pub struct SymmetricRule {
    space: ProfileSpace,
    rates: Vec<Vec<f64>>,
}

impl SymmetricRule {
    /// Builds a rule from per-type rates of each multiset.
    pub fn from_fn<F>(scenario: &Scenario, mut f: F) -> Self
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        let space = ProfileSpace::new(scenario.n(), scenario.types());
        let m = scenario.m();
        let rates = (0..space.len())
            .map(|p| {
                let counts = space.counts(p);
                let mut r = f(counts);
                assert_eq!(r.len(), m, "rule must return one rate per type");
                for (k, &c) in counts.iter().enumerate() {
                    if c == 0 {
                        r[k] = 0.0;
                    }
                }
                r
            })
            .collect();
        Self { space, rates }
    }

    /// Same rate for every type on every profile.
    pub fn constant(scenario: &Scenario, rate: f64) -> Self {
        Self::from_fn(scenario, |_| vec![rate; scenario.m()])
    }

    /// Builds a rule from a function on explicit type-index vectors.
    /// The function is probed on the canonical and reversed vectors of
    /// each multiset; users sharing a type must get the same rate.
    pub fn from_vector_fn<F>(scenario: &Scenario, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        let space = ProfileSpace::new(scenario.n(), scenario.types());
        let m = scenario.m();
        let mut rates = Vec::with_capacity(space.len());
        for p in 0..space.len() {
            let v = canonical_vector(space.counts(p));
            let mut r = vec![0.0; m];
            let mut seen = vec![None::<(usize, f64)>; m];
            let rev: Vec<usize> = v.iter().rev().copied().collect();
            for probe in [&v, &rev] {
                let actions = f(probe);
                if actions.len() != v.len() {
                    return Err(Error::InvalidAction(format!(
                        "expected {} actions, got {}",
                        v.len(),
                        actions.len()
                    )));
                }
                for (slot, (&k, &a)) in probe.iter().zip(&actions).enumerate() {
                    match seen[k] {
                        None => {
                            seen[k] = Some((slot, a));
                            r[k] = a;
                        }
                        Some((first, b)) if b != a => {
                            return Err(Error::AsymmetricRule { first, second: slot });
                        }
                        _ => {}
                    }
                }
            }
            rates.push(r);
        }
        Ok(Self { space, rates })
    }

    pub fn profiles(&self) -> &ProfileSpace {
        &self.space
    }

    pub fn rate(&self, profile: usize, k: usize) -> f64 {
        self.rates[profile][k]
    }

    pub fn rates(&self, profile: usize) -> &[f64] {
        &self.rates[profile]
    }

    pub fn set_rate(&mut self, profile: usize, k: usize, rate: f64) {
        if self.space.counts(profile)[k] > 0 {
            self.rates[profile][k] = rate;
        }
    }

    /// Action vector in canonical user order (users sorted by type).
    pub fn actions(&self, profile: usize) -> Vec<f64> {
        canonical_vector(self.space.counts(profile))
            .into_iter()
            .map(|k| self.rates[profile][k])
            .collect()
    }

    /// Actions for an arbitrary type-index vector.
    pub fn actions_for(&self, vector: &[usize]) -> Vec<f64> {
        let counts = counts_of(vector, self.rates.first().map_or(0, Vec::len));
        let p = self.space.index_of(&counts).expect("vector has the rule's size");
        vector.iter().map(|&k| self.rates[p][k]).collect()
    }

    /// Aggregate load `sum_i d_i` at a profile.
    pub fn load(&self, profile: usize) -> f64 {
        self.space
            .counts(profile)
            .iter()
            .zip(&self.rates[profile])
            .map(|(&c, &r)| c as f64 * r)
            .sum()
    }

    /// Canonical slot of the representative user of type `k`.
    pub fn slot(&self, profile: usize, k: usize) -> Option<usize> {
        first_slot(self.space.counts(profile), k)
    }
}
