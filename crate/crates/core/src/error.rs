use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method did not reach its tolerance.
    #[error("no convergence in {what} after {iterations} iterations (bracket [{lo:e}, {hi:e}], residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        lo: f64,
        hi: f64,
        residual: f64,
    },

    /// A = 0 with M0^2 >= 1/alpha: no bounded shock exists, mass concentrates on the piston.
    #[error("concentration regime: M0^2 = {m0_sq} >= sup f = {threshold}; use the measure-solution limit")]
    ConcentrationRegime { m0_sq: f64, threshold: f64 },

    /// Second-family certificate hit the equality case sqrt(2)/M0 - sqrt(2) - sqrt(A) = 0.
    #[error("degenerate second-family discriminant {discriminant:e}")]
    Degenerate { discriminant: f64 },

    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
