use thiserror::Error;

pub type Result<T, E = CoolingError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoolingError {
    #[error("{name} = {value} is out of domain ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("truncation n_max = {required} exceeds the hard cap {cap}")]
    Capacity { required: u64, cap: usize },

    #[error("population distribution has zero total mass")]
    UndefinedState,

    #[error("coefficient table covers n <= {table} but the distribution extends to n = {state}")]
    TableTooShort { table: usize, state: usize },

    #[error("unknown protocol variant `{0}`")]
    UnknownVariant(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("eigen-solve failed for excitation block n = {n}: {dump}")]
    EigenFailure { n: usize, dump: String },
}

impl CoolingError {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        CoolingError::Domain {
            name,
            value,
            reason,
        }
    }
}
