use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::game::{Scenario, TypeSpace};
use crate::mechanism::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Compliant,
    Ne,
    Bne,
    InterventionComplete,
    Algorithm,
    Apriori,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Compliant,
        Scheme::Ne,
        Scheme::Bne,
        Scheme::InterventionComplete,
        Scheme::Algorithm,
        Scheme::Apriori,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Compliant => "compliant",
            Scheme::Ne => "ne",
            Scheme::Bne => "bne",
            Scheme::InterventionComplete => "intervention-complete",
            Scheme::Algorithm => "algorithm",
            Scheme::Apriori => "apriori",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mu: f64,
    pub types: Vec<f64>,
    /// Uniform when absent.
    pub probs: Option<Vec<f64>>,
    pub n_range: [usize; 2],
    /// Algorithm step; `mu / 1000` when absent.
    pub epsilon: Option<f64>,
    pub grid_points: usize,
    /// Device rate budget; `mu` when absent.
    pub d0_max: Option<f64>,
    pub schemes: Vec<Scheme>,
    pub variant: Variant,
    pub seed: u64,
    /// User count for the probability sweep.
    pub n_fixed: usize,
    pub p_step: f64,
    /// User count for single-scenario commands.
    pub n: usize,
    pub execution: Execution,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mu: 5.0,
            types: vec![0.1, 1.0],
            probs: None,
            n_range: [2, 16],
            epsilon: None,
            grid_points: 2001,
            d0_max: None,
            schemes: Scheme::ALL.to_vec(),
            variant: Variant::Flow,
            seed: 0,
            n_fixed: 4,
            p_step: 0.05,
            n: 2,
            execution: Execution::default(),
            out: None,
            plot: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        self.type_space().map_err(|e| Error::Config(e.to_string()))?;
        let [lo, hi] = self.n_range;
        if lo == 0 || lo > hi {
            return bad(format!("n_range must satisfy 1 <= lo <= hi, got [{lo}, {hi}]"));
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        if !(self.epsilon() > 0.0 && self.epsilon().is_finite()) {
            return bad("epsilon must be positive".into());
        }
        if self.grid_points < 1000 {
            return bad(format!("grid_points must be at least 1000, got {}", self.grid_points));
        }
        if !(self.budget() >= 0.0 && self.budget().is_finite()) {
            return bad("d0_max must be nonnegative".into());
        }
        if self.n_fixed == 0 || self.n == 0 {
            return bad("user counts must be positive".into());
        }
        if !(self.p_step > 0.0 && self.p_step <= 1.0) {
            return bad("p_step must lie in (0, 1]".into());
        }
        Ok(())
    }

    pub fn type_space(&self) -> Result<TypeSpace> {
        match &self.probs {
            Some(p) => TypeSpace::new(self.types.clone(), p.clone()),
            None => TypeSpace::uniform(self.types.clone()),
        }
    }

    pub fn scenario(&self, n: usize) -> Result<Scenario> {
        Scenario::new(n, self.type_space()?, self.mu)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(self.mu / 1000.0)
    }

    pub fn budget(&self) -> f64 {
        self.d0_max.unwrap_or(self.mu)
    }

    pub fn users(&self) -> Vec<usize> {
        (self.n_range[0]..=self.n_range[1]).collect()
    }

    /// Schemes in canonical order without duplicates.
    pub fn schemes(&self) -> Vec<Scheme> {
        let mut s = self.schemes.clone();
        s.sort();
        s.dedup();
        s
    }
}
