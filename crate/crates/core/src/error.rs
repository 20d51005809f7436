use thiserror::Error;

/// Errors raised by the design computations.
///
/// Validation failures carry the name of the offending field so that front
/// ends can point at it directly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("invalid {field}: {message}")]
    InvalidInput { field: String, message: String },

    #[error("budget cannot cover cluster size {m}: one cluster costs {cluster_cost} > budget {budget}")]
    Unaffordable { m: u32, cluster_cost: f64, budget: f64 },

    #[error("infeasible design space: {0}")]
    Configuration(String),

    #[error("degenerate design: {0}")]
    Degenerate(String),
}

impl DesignError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        DesignError::InvalidInput {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Field path of a validation failure, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            DesignError::InvalidInput { field, .. } => Some(field),
            _ => None,
        }
    }

    /// True for errors caused by a numerically degenerate input rather than a
    /// malformed one.
    pub fn is_numerical(&self) -> bool {
        matches!(self, DesignError::Degenerate(_))
    }
}

pub type Result<T, E = DesignError> = std::result::Result<T, E>;
