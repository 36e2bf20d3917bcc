//! Type-profile enumeration.
//!
//! Types are i.i.d. and every utility in the crate is symmetric, so a type
//! profile is identified by its multiset (how many users hold each type).
//! A multiset with counts `c` has probability `n!/prod(c_k!) * prod(p_k^c_k)`.
//! The explicit `m^n` vector enumeration is kept for cross-checking.

use std::collections::HashMap;

use crate::error::Result;
use crate::game::types::{Scenario, TypeSpace};

/// Count of users per type index.
pub type TypeCounts = Vec<usize>;

/// Expands counts to the canonical (sorted) vector of type indices.
pub fn canonical_vector(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat_n(k, c))
        .collect()
}

/// Counts of a vector of type indices.
pub fn counts_of(vector: &[usize], m: usize) -> TypeCounts {
    let mut counts = vec![0; m];
    for &k in vector {
        counts[k] += 1;
    }
    counts
}

/// Position of the first user holding type `k` in the canonical vector.
pub fn first_slot(counts: &[usize], k: usize) -> Option<usize> {
    if counts[k] == 0 {
        None
    } else {
        Some(counts[..k].iter().sum())
    }
}

pub fn multinomial(counts: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut w = 1.0;
    for &c in counts {
        for j in 1..=c {
            total += 1;
            w = w * total as f64 / j as f64;
        }
    }
    w
}

pub fn multiset_probability(counts: &[usize], probs: &[f64]) -> f64 {
    let weight = multinomial(counts);
    counts
        .iter()
        .zip(probs)
        .fold(weight, |acc, (&c, &p)| acc * p.powi(c as i32))
}

fn compositions(n: usize, m: usize) -> Vec<TypeCounts> {
    fn rec(left: usize, k: usize, m: usize, cur: &mut TypeCounts, out: &mut Vec<TypeCounts>) {
        if k + 1 == m {
            cur[k] = left;
            out.push(cur.clone());
            return;
        }
        for c in (0..=left).rev() {
            cur[k] = c;
            rec(left - c, k + 1, m, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; m];
    rec(n, 0, m, &mut cur, &mut out);
    out
}

/// All multisets of `n` users over `m` types with their prior probabilities.
#[derive(Debug, Clone)]
pub struct ProfileSpace {
    users: usize,
    profiles: Vec<TypeCounts>,
    probs: Vec<f64>,
    index: HashMap<TypeCounts, usize>,
}

impl ProfileSpace {
    pub fn new(users: usize, types: &TypeSpace) -> Self {
        let profiles = compositions(users, types.len());
        let probs = profiles
            .iter()
            .map(|c| multiset_probability(c, types.probs()))
            .collect();
        let index = profiles
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Self { users, profiles, probs, index }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn counts(&self, idx: usize) -> &[usize] {
        &self.profiles[idx]
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    pub fn index_of(&self, counts: &[usize]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.profiles.iter().map(Vec::as_slice).zip(self.probs.iter().copied())
    }
}

/// Profiles of the other `n - 1` users, joined back to full profiles for
/// a representative user of each type.
#[derive(Debug, Clone)]
pub struct ConditionalSpace {
    others: ProfileSpace,
    /// `join[o][k]`: full-profile index when the representative holds type `k`.
    join: Vec<Vec<usize>>,
}

impl ConditionalSpace {
    pub fn new(full: &ProfileSpace, types: &TypeSpace) -> Self {
        let m = types.len();
        let others = ProfileSpace::new(full.users() - 1, types);
        let join = (0..others.len())
            .map(|o| {
                (0..m)
                    .map(|k| {
                        let mut c = others.counts(o).to_vec();
                        c[k] += 1;
                        full.index_of(&c).expect("joined profile is enumerated")
                    })
                    .collect()
            })
            .collect();
        Self { others, join }
    }

    pub fn others(&self) -> &ProfileSpace {
        &self.others
    }

    pub fn len(&self) -> usize {
        self.others.len()
    }

    pub fn is_empty(&self) -> bool {
        self.others.is_empty()
    }

    pub fn prob(&self, o: usize) -> f64 {
        self.others.prob(o)
    }

    pub fn join(&self, o: usize, k: usize) -> usize {
        self.join[o][k]
    }
}

/// Full and conditional profile spaces for one scenario.
#[derive(Debug, Clone)]
pub struct Profiles {
    full: ProfileSpace,
    conditional: ConditionalSpace,
}

impl Profiles {
    pub fn new(scenario: &Scenario) -> Self {
        let full = ProfileSpace::new(scenario.n(), scenario.types());
        let conditional = ConditionalSpace::new(&full, scenario.types());
        Self { full, conditional }
    }

    pub fn full(&self) -> &ProfileSpace {
        &self.full
    }

    pub fn conditional(&self) -> &ConditionalSpace {
        &self.conditional
    }
}

/// Multisets of the full profile with probabilities.
pub fn enumerate_profiles(scenario: &Scenario) -> Vec<(TypeCounts, f64)> {
    let space = ProfileSpace::new(scenario.n(), scenario.types());
    space.iter().map(|(c, p)| (c.to_vec(), p)).collect()
}

/// Distribution of the other users' multiset given one user's type. Under
/// the i.i.d. prior it does not depend on `own_type`, which is only validated.
pub fn conditional_profiles(scenario: &Scenario, own_type: f64) -> Result<Vec<(TypeCounts, f64)>> {
    scenario.types().index_of(own_type)?;
    let space = ProfileSpace::new(scenario.n() - 1, scenario.types());
    Ok(space.iter().map(|(c, p)| (c.to_vec(), p)).collect())
}

/// Every explicit type vector of `users` users with its probability.
/// Exponential in `users`; meant for cross-checks at small sizes.
pub fn vector_profiles(users: usize, types: &TypeSpace) -> Vec<(Vec<usize>, f64)> {
    let m = types.len();
    let total = m.pow(users as u32);
    (0..total)
        .map(|mut code| {
            let mut v = Vec::with_capacity(users);
            let mut p = 1.0;
            for _ in 0..users {
                let k = code % m;
                code /= m;
                v.push(k);
                p *= types.prob(k);
            }
            (v, p)
        })
        .collect()
}
