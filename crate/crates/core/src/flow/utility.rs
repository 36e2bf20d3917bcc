use crate::error::{Error, Result};
use crate::game::UtilityModel;

/// Power utilities `d_i^t_i (mu - load)` with an optional intervention load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowUtility {
    pub mu: f64,
}

impl FlowUtility {
    pub fn new(mu: f64) -> Self {
        Self { mu }
    }

    /// Utility of user `i`; negative when the server is overloaded.
    pub fn user_utility(&self, d0: f64, d: &[f64], t_i: f64, i: usize) -> Result<f64> {
        if d[i] < 0.0 {
            return Err(Error::InvalidAction(format!("negative rate {} for user {i}", d[i])));
        }
        if !(t_i > 0.0) {
            return Err(Error::InvalidAction(format!("type must be positive, got {t_i}")));
        }
        let load: f64 = d.iter().sum::<f64>() + d0;
        Ok(power(d[i], t_i, self.mu - load))
    }

    /// `(mu - load)^+` times the geometric mean of `d_i^t_i`.
    pub fn manager_utility(&self, d0: f64, d: &[f64], t: &[f64]) -> f64 {
        let residual = self.mu - d.iter().sum::<f64>() - d0;
        if residual <= 0.0 {
            return 0.0;
        }
        let n = d.len() as f64;
        d.iter()
            .zip(t)
            .fold(residual, |acc, (&x, &ti)| acc * x.powf(ti / n))
    }
}

/// `x^t * residual`, exactly zero at `x = 0`.
pub fn power(x: f64, t: f64, residual: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(t) * residual
    }
}

impl UtilityModel for FlowUtility {
    fn user(&self, i: usize, actions: &[f64], types: &[f64]) -> f64 {
        let load: f64 = actions.iter().sum();
        power(actions[i], types[i], self.mu - load)
    }

    fn manager(&self, actions: &[f64], types: &[f64]) -> f64 {
        self.manager_utility(0.0, actions, types)
    }
}
