//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the elliptic kernel, the chain reduction and the
/// closed-form evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The modular discriminant g2^3 - 27 g3^2 vanishes (relative to the
    /// invariants' scale); the period lattice collapses and the Weierstrass
    /// functions degenerate to trigonometric/rational limits.
    #[error("degenerate lattice: |discriminant| = {disc_abs:.3e} <= threshold {threshold:.3e}")]
    DegenerateLattice { disc_abs: f64, threshold: f64 },

    /// Argument too close to a lattice point (a pole of p, p', zeta).
    #[error("argument within {dist:.3e} of a lattice point")]
    PoleProximity { dist: f64 },

    /// sigma(z) overflows double precision for large |z|.
    #[error("sigma overflow: quasi-period exponent {exponent:.1} exceeds f64 range")]
    RangeOverflow { exponent: f64 },

    /// An iterative solve (p inversion, shift fit, AGM) did not converge.
    #[error("{what} did not converge within {iterations} iterations")]
    ConvergenceFailure { what: &'static str, iterations: usize },

    /// The periodic chain has even period; the linear system for the
    /// individual derivatives is singular.
    #[error("chain period must be odd, got {n}")]
    EvenPeriod { n: usize },

    /// Initial state already exceeds the blow-up threshold.
    #[error("initial state exceeds blow-up threshold {threshold:.3e}")]
    ImmediateBlowup { threshold: f64 },

    /// Reconstruction of (sigma2, sigma3) divides by C - sigma1.
    #[error("singular reconstruction: |C - sigma1| = {denom:.3e}")]
    SingularReconstruction { denom: f64 },

    /// Initial data (sigma1, sigma1') does not lie on the quartic curve.
    #[error("initial data off the quartic curve: residual {residual:.3e}")]
    OffCurveInitialData { residual: f64 },

    /// Real initial data produced a solution with a non-real value on the
    /// real axis; nu and x0 are jointly inconsistent.
    #[error("realness violation: |Im sigma1| = {max_im:.3e} on the real axis")]
    RealnessViolation { max_im: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
