use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HedgehogError {
    #[error("reduced temperature t = {t} exceeds 9/8: no nematic state exists")]
    NoNematicState { t: f64 },

    #[error("{operation} requires t < 1 (nematic global minimizer), got t = {t}")]
    NotNematicGlobal { operation: &'static str, t: f64 },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integration diverged at r = {r}")]
    Divergence { r: f64, upward: bool },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("no sign change of h(R; a) - h+ for a in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("profiles are sampled on different grids")]
    GridMismatch,
}

impl HedgehogError {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        HedgehogError::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T> = std::result::Result<T, HedgehogError>;
