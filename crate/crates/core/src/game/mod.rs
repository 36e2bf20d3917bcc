//! Types, priors, profile enumeration and expected values.

pub mod profiles;
pub mod rule;
pub mod types;
pub mod value;

pub use profiles::{
    conditional_profiles, enumerate_profiles, ConditionalSpace, ProfileSpace, Profiles, TypeCounts,
};
pub use rule::SymmetricRule;
pub use types::{bin_size, Scenario, TypeSpace};
pub use value::{expected_manager_value, expected_user_value, UtilityModel};
