//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("evaluation point {0} is a branch point")]
    BranchPoint(f64),
    #[error("point {0} lies on a branch cut and needs a side tag")]
    SideRequired(f64),
    #[error("gamma function pole at {0}")]
    Pole(f64),
    #[error("accuracy could not be certified: {0}")]
    Accuracy(String),
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("truncation radius invalid: {0}")]
    Truncation(String),
    #[error("step-size control failed: {0}")]
    Stiffness(String),
    #[error("scattering coefficient a is numerically zero at k = {0}")]
    ZeroDivisor(String),
    #[error("operation not defined in region {0}")]
    Region(String),
    #[error("xi = {0} lies inside the boundary margin")]
    BoundaryRegion(f64),
    #[error("degenerate model: {0}")]
    Degenerate(&'static str),
    #[error("zeta = {0} lies on a jump ray")]
    Ray(String),
    #[error("extrapolation disagreement {0:e}")]
    Extrapolation(f64),
    #[error("winding jump in continuous log tracking at s = {0}")]
    BranchAmbiguity(f64),
    #[error("grid does not resolve the transition: {0}")]
    Resolution(String),
    #[error("solution blew up at t = {0}")]
    Blowup(f64),
    #[error("time step violates the stability bound: {0}")]
    Stability(String),
    #[error("probe window violates the causal buffer: {0}")]
    Window(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
