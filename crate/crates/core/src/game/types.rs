use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROB_SUM_TOL: f64 = 1e-12;

/// Finite ordered type set shared by all users, with an i.i.d. prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTypeSpace", into = "RawTypeSpace")]
pub struct TypeSpace {
    values: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTypeSpace {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawTypeSpace> for TypeSpace {
    type Error = Error;
    fn try_from(raw: RawTypeSpace) -> Result<Self> {
        TypeSpace::new(raw.values, raw.probs)
    }
}

impl From<TypeSpace> for RawTypeSpace {
    fn from(ts: TypeSpace) -> Self {
        RawTypeSpace { values: ts.values, probs: ts.probs }
    }
}

impl TypeSpace {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidTypeSpace("at least one type is required".into()));
        }
        if values.len() != probs.len() {
            return Err(Error::InvalidTypeSpace(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidTypeSpace("type values must be finite and positive".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTypeSpace("type values must be strictly increasing".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidTypeSpace("probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidTypeSpace(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { values, probs })
    }

    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let m = values.len().max(1);
        let probs = vec![1.0 / m as f64; values.len()];
        Self::new(values, probs)
    }

    /// Single-type space with probability one.
    pub fn degenerate(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![1.0])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs[k]
    }

    pub fn lowest(&self) -> f64 {
        self.values[0]
    }

    pub fn highest(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn index_of(&self, value: f64) -> Result<usize> {
        self.values
            .iter()
            .position(|v| (v - value).abs() <= 1e-12 * v.abs().max(1.0))
            .ok_or(Error::UnknownType(value))
    }

    /// Largest gap between consecutive types.
    pub fn bin_size(&self) -> Result<f64> {
        if self.values.len() < 2 {
            return Err(Error::DegenerateTypeSet);
        }
        Ok(self
            .values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// `n` users sharing a server of rate `mu`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    n: usize,
    type_space: TypeSpace,
    mu: f64,
}

impl Scenario {
    pub fn new(n: usize, type_space: TypeSpace, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidScenario("at least one user is required".into()));
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidScenario(format!("service rate must be positive, got {mu}")));
        }
        Ok(Self { n, type_space, mu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn types(&self) -> &TypeSpace {
        &self.type_space
    }

    pub fn m(&self) -> usize {
        self.type_space.len()
    }

    pub fn with_users(&self, n: usize) -> Result<Self> {
        Self::new(n, self.type_space.clone(), self.mu)
    }
}

/// Largest gap between consecutive types.
pub fn bin_size(type_space: &TypeSpace) -> Result<f64> {
    type_space.bin_size()
}
