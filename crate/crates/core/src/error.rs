use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or state violates a domain invariant.
    #[error("{0}")]
    Domain(String),

    /// The packet width collapsed during integration.
    #[error("integrator failure at t = {t}: width a = {width} is not positive")]
    IntegratorFailure { t: f64, width: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The evolved density reached the periodic boundary.
    #[error("packet too close to the domain edge at t = {t}: edge density ratio {ratio:e}")]
    EdgeProximity { t: f64, ratio: f64 },

    /// The region above the phase-extraction floor is not a single interval.
    #[error("density mask split into disconnected regions at t = {t}")]
    MaskDisconnected { t: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
