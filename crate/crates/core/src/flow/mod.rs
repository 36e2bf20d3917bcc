//! M/M/1 flow-control game: power utilities and benchmark operating points.

mod bne;
mod metrics;
mod points;
mod utility;

pub use bne::{bne_build, bne_solve, BneSolution, BneSystem};
pub use metrics::{per_type_metrics, Delay, TypeMetrics};
pub use points::{
    best_response, max_efficiency_value, nash_equilibrium, nash_rule, optimal_profile,
    optimal_rule,
};
pub use utility::{power, FlowUtility};
