use thiserror::Error;

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    /// A parameter is outside the domain of the model.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("improvement is undefined when checkpoint throughput is zero")]
    UndefinedImprovement,

    /// The spare-count predicate cannot reach `1 - epsilon` even with every
    /// machine held as a spare.
    #[error("no feasible spare count under the {method} method for N={machines}, epsilon={epsilon:e} (best success {best:.6e})")]
    NoFeasibleSpares {
        method: &'static str,
        machines: u64,
        epsilon: f64,
        best: f64,
    },

    #[error("invalid preset file: {0}")]
    Preset(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("cannot parse duration `{0}`: expected <number>[m|h|d|w|mo|y]")]
    Duration(String),
}

impl ModelError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ModelError::Domain(msg.into())
    }

    /// True for errors caused by the model itself being unsatisfiable rather
    /// than by bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, ModelError::NoFeasibleSpares { .. })
    }
}

/// Returns a domain error unless `value` is finite and strictly positive.
pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::domain(format!(
            "{name} must be > 0, got {value}"
        )))
    }
}

pub(crate) fn ensure_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::domain(format!(
            "{name} must be >= 0, got {value}"
        )))
    }
}

pub(crate) fn ensure_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::domain(format!(
            "{name} must lie in [0, 1], got {value}"
        )))
    }
}
