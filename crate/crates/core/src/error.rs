use thiserror::Error;

pub type Result<T, E = PhysicsError> = std::result::Result<T, E>;

/// Failures of the physical model itself: bad arguments or parameter
/// regimes where a formula stops making sense.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gap closure: deflection {deflection_m:.4e} m reaches the rest gap {gap_m:.4e} m")]
    GapClosure { deflection_m: f64, gap_m: f64 },

    #[error("parameter regime: {0}")]
    ParameterRegime(String),

    #[error("dispersive breakdown: {which} = {value:.6e} rad/s is zero")]
    DispersiveBreakdown { which: &'static str, value: f64 },
}

impl PhysicsError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        PhysicsError::InvalidArgument(msg.into())
    }
}
