//! Intervention-based coordination for flow-control games with private types.
//!
//! Users share an M/M/1 server of rate `mu`. Each user picks a transmission
//! rate and values `d^t * (mu - load)`, where the type `t` is private. A
//! manager that cannot observe types asks users to report them, suggests
//! rates, and backs each suggestion with an affine intervention rule that
//! injects traffic when users exceed their targets.

pub mod error;
pub mod exec;
pub mod experiments;
pub mod flow;
pub mod game;
pub mod intervention;
pub mod mechanism;

pub use error::{Error, Result};
pub use exec::Execution;
pub use game::{Scenario, SymmetricRule, TypeSpace};
