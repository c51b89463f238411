//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failure modes of the solver, the Fock laboratory and the correlator engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The couplings violate the stability inequalities.
    #[error("unstable couplings: {0}")]
    UnstableCouplings(String),
    /// A positivity or ordering constraint on velocities or lengths fails.
    #[error("bad geometry: {0}")]
    BadGeometry(String),
    /// The requested Fock truncation exceeds the memory guard.
    #[error("truncation too large: 2^{bits} basis states exceed the 2^24 guard")]
    TruncationTooLarge { bits: u32 },
    /// A momentum lies outside the truncated mode window.
    #[error("mode out of window: {0}")]
    ModeOutOfWindow(String),
    /// An identity name is not part of the supported suite.
    #[error("unknown identity: {0}")]
    UnknownIdentity(String),
    /// A numeric argument is outside its admissible range.
    #[error("bad argument: {0}")]
    BadArgument(String),
    /// The boson zero mode p = 0 was passed where p != 0 is required.
    #[error("zero mode: p = 0 is handled analytically")]
    ZeroMode,
    /// The two branches of C(p) are (numerically) degenerate.
    #[error("degenerate branches: W = {w:e} is below 1e-8 vF^2")]
    DegenerateBranches { w: f64 },
    /// The momentum grid does not cover all modes below the energy cap.
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    /// A regulator is non-positive or non-finite.
    #[error("bad regulator: {0}")]
    BadRegulator(f64),
    /// The truncated mode sum cannot reach the requested tolerance.
    #[error("tail too large: bound {bound:e} exceeds tolerance {tolerance:e}")]
    TailTooLarge { bound: f64, tolerance: f64 },
    /// The Klein charge selection rule fails for the given insertion word.
    #[error("charge selection violated")]
    SelectionViolated,
    /// A Cauchy configuration has a vanishing sine.
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),
    /// Operators carrying different length scalings were added together.
    #[error("incompatible operator scaling: {0}")]
    IncompatibleScale(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
