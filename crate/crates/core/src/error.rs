use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid annulus: need 0 < r_inner < r_outer, got ({r_inner}, {r_outer})")]
    InvalidAnnulus { r_inner: f64, r_outer: f64 },

    #[error("radius {rho} lies outside [{r_inner}, {r_outer}]")]
    OutOfDomain { rho: f64, r_inner: f64, r_outer: f64 },

    #[error("point at rho = {rho} is not strictly inside ({r_inner}, {r_outer})")]
    NotInterior { rho: f64, r_inner: f64, r_outer: f64 },

    #[error("point at rho = {rho} is closer than {margin} to a wall")]
    InsufficientMargin { rho: f64, margin: f64 },

    #[error("angle undefined on the cylinder axis")]
    OnAxis,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("{0} did not converge")]
    NonConvergence(String),

    #[error("singular system at row {row}")]
    SingularSystem { row: usize },

    #[error("field support exceeds the truncation |z| <= {z_halfwidth} (|v| = {magnitude} on the cap)")]
    SupportExceedsTruncation { z_halfwidth: f64, magnitude: f64 },
}

impl Error {
    /// Errors caused by the caller's inputs rather than by a numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidAnnulus { .. }
                | Error::OutOfDomain { .. }
                | Error::NotInterior { .. }
                | Error::InsufficientMargin { .. }
                | Error::OnAxis
                | Error::InvalidParameter(_)
                | Error::Config(_)
                | Error::SupportExceedsTruncation { .. }
        )
    }
}
