use thiserror::Error;

/// Failure modes surfaced by mesh construction, operator assembly and the
/// spectral diagnostics. Programmer errors (mismatched lengths, out-of-range
/// indices) panic instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least 2 elements per direction, got {0}")]
    TooFewElements(usize),
    #[error("displacement degree q_u must be at least 1")]
    ZeroDisplacementDegree,
    #[error("flux penalties must be nonnegative: beta={beta}, tau={tau}")]
    NegativePenalty { beta: f64, tau: f64 },
    #[error("boundary weights gamma={gamma}, kappa={kappa} must be nonnegative and not both zero")]
    InvalidBoundaryWeights { gamma: f64, kappa: f64 },
    #[error("wave speed must be positive, got c^2 = {c2} at ({x}, {y})")]
    NonpositiveWaveSpeed { c2: f64, x: f64, y: f64 },
    #[error("mesh periodicity and boundary conditions disagree (periodic mesh = {periodic}, boundary conditions given = {bcs_given})")]
    BoundaryMismatch { periodic: bool, bcs_given: bool },
    #[error("boundary layer m = {m} swallows every element; set allow_global_substep to accept")]
    DegenerateBoundaryLayer { m: usize },
    #[error("dense matrix of dimension {dim} exceeds the safety limit {limit}")]
    DenseSizeGuard { dim: usize, limit: usize },
    #[error("dense eigenvalue computation failed to converge")]
    EigenFailure,
}
