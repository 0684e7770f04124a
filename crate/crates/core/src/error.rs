use thiserror::Error;

/// Errors raised by the simulator and its policies.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("position {position} m is outside the road [0, {total_length})")]
    PositionOutOfRange { position: f64, total_length: f64 },

    #[error("invalid road layout: {0}")]
    InvalidLayout(String),

    #[error("infeasible action: {0}")]
    InfeasibleAction(String),

    #[error("state space of {states} states exceeds the budget of {budget}")]
    StateBudgetExceeded { states: usize, budget: usize },

    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
