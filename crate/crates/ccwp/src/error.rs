//! Error types shared by the equipment models and the scalar solver.

use thiserror::Error;

/// Errors produced while stepping equipment models.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    /// A parameter failed validation (non-physical or out of range).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// An input violates a feasibility constraint; the message names the
    /// constraint and the offending values.
    #[error("infeasible input: {0}")]
    Infeasible(String),

    /// The scalar solver evaluated a non-finite objective value.
    #[error("solver failure at x = {x}: {reason}")]
    Solver { x: f64, reason: String },
}

impl ModelError {
    pub fn invalid_param(msg: impl Into<String>) -> Self {
        ModelError::InvalidParam(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        ModelError::Infeasible(msg.into())
    }
}
