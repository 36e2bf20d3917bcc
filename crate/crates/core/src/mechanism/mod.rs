//! Direct mechanisms: users report types, the device suggests rates and
//! commits to an affine rule per reported profile.

mod algorithm;
mod apriori;
mod direct;
mod efficiency;
mod ic;

pub use algorithm::{algorithm_converge, IterationRecord, Status, Trace, Variant};
pub use apriori::{
    apriori_gradient, apriori_hessian, apriori_objective, apriori_solve, bayesian_sustain,
    golden_section, hessian_min_eigenvalues, project_feasible, AprioriReport, BayesianCheck, PgdOptions,
};
pub use direct::{manager_value_of, DirectMechanism};
pub use efficiency::{
    max_efficiency_condition, max_efficiency_mechanism, truthfulness_terms, truthful_at_optimum,
    Misreport, TruthfulnessTerm, TruthfulReport,
};
pub use ic::{
    check_incentive_compatible, check_incentive_compatible_with, misreport_matrix,
    misreport_value, IcReport, Violation, IC_TOL,
};
