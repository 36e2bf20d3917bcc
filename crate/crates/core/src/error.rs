use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid type space: {0}")]
    InvalidTypeSpace(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("type value {0} is not in the type space")]
    UnknownType(f64),

    #[error("degenerate type set: bin size needs at least two types")]
    DegenerateTypeSet,

    #[error("asymmetric action rule: users {first} and {second} share a type but get different rates")]
    AsymmetricRule { first: usize, second: usize },

    #[error("invalid action profile: {0}")]
    InvalidAction(String),

    #[error("degenerate prior/type configuration: BNE system is singular (condition number {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("BNE rate {rate} for type {type_value} is not interior to (0, mu)")]
    NonInteriorBne { type_value: f64, rate: f64 },

    #[error("degenerate target: user {user} has a zero target rate")]
    DegenerateTarget { user: usize },

    #[error("unsustainable target: {0}")]
    UnsustainableTarget(String),

    #[error("insufficient intervention budget: need {needed}, have {available}")]
    InsufficientBudget { needed: f64, available: f64 },

    #[error("interior point required: rates must be positive with total below mu")]
    InteriorPointRequired,

    #[error("nonzero on-path intervention {level} at profile {profile}")]
    OnPathIntervention { profile: usize, level: f64 },

    #[error("malformed mechanism document: {0}")]
    MalformedMechanism(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
