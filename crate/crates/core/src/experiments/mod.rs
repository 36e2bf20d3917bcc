//! Sweeps over user counts and priors, per-type metrics, and the property
//! suite behind the `verify` command.

mod config;
mod output;
mod sweep;
mod verify;

pub use config::{ExperimentConfig, Scheme};
pub use output::{plot_svg, write_csv, write_json, write_metrics_csv, SweepKind};
pub use sweep::{evaluate_scheme, metrics, sweep_probability, sweep_users, MetricRow, SweepRow};
pub use verify::{verify, Check, Outcome};
