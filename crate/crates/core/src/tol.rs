//! Default tolerances, all in `f64`; convert with [`crate::Scalar::lit`].

/// Hermiticity and positivity checks on algebra elements and densities.
pub const POSITIVITY: f64 = 1e-10;
/// Total trace of a density.
pub const TRACE: f64 = 1e-10;
/// Relative spectral cutoff for supports and Gelfand ideals.
pub const SUPPORT: f64 = 1e-9;
/// Minimum eigenvalue guaranteed by faithful random states.
pub const FAITHFUL_FLOOR: f64 = 1e-3;
/// Unitality `phi(1) = 1` and Kraus completeness.
pub const UNITALITY: f64 = 1e-10;
/// Choi matrix positivity, scaled by the Choi trace.
pub const CHOI: f64 = 1e-9;
/// State preservation `rho(phi(b)) = sigma(b)`.
pub const STATE_PRESERVATION: f64 = 1e-9;
/// Squared GNS seminorm allowed for images of Gelfand-ideal elements.
pub const WELL_DEFINED: f64 = 1e-8;
/// Slack on the operator norm of induced GNS maps.
pub const CONTRACTION: f64 = 1e-9;
/// Relative spectral cutoff for GNS spaces of model states in pullbacks. Tail bins of
/// discretized densities carry Fisher information well above `SUPPORT * p_max`.
pub const MODEL_SUPPORT: f64 = 1e-13;
/// Residual of the Riesz system defining a score vector.
pub const RIESZ_RESIDUAL: f64 = 1e-8;
/// Default central finite-difference step.
pub const FD_STEP: f64 = 1e-5;
