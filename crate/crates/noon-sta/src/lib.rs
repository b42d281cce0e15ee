//! Simulator and pulse-synthesis toolkit for deterministic NOON-state
//! generation in a two-cavity circuit-QED register.
//!
//! The crate is organized bottom-up:
//!
//! * [`hilbert`]  - composite qutrit/cavity basis, embeddings, fidelities
//! * [`linalg`]   - dense complex matrix exponential and Hermitian eigensolver
//! * [`pulse`]    - analytic pulse shapes and their derivatives
//! * [`sta`]      - counterdiabatic amplitudes and the realizable two-tone frame
//! * [`stage`]    - time-dependent stage Hamiltonians on the composite space
//! * [`dynamics`] - adaptive Schroedinger integrator plus an independent oracle
//! * [`protocol`] - full NOON(N) stage plans for both register topologies
//! * [`sweep`]    - pulse-parameter landscape scans (parallel or sequential)
//! * [`tcq`]      - tunable-coupling-qubit spectrum and dressed-coupling maps
//! * [`emit`]     - deterministic CSV/JSON-fragment formatting helpers
//!
//! All frequencies inside the crate are angular, in rad/ns; all times are in
//! ns. Conversion from laboratory MHz happens at the interface layer only.

pub mod dynamics;
pub mod emit;
pub mod hilbert;
pub mod linalg;
pub mod protocol;
pub mod pulse;
pub mod sta;
pub mod stage;
pub mod sweep;
pub mod tcq;

pub use num_complex::Complex64 as C64;

/// Crate-wide error type. Variants carry enough context to be surfaced
/// directly as machine-readable diagnostics by a front end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid level '{level}' for topology {topology}: {reason}")]
    LevelNotAvailable {
        level: String,
        topology: String,
        reason: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("counterdiabatic amplitude undefined at t = {t}: coupling and detuning both vanish")]
    CdSingularity { t: f64 },

    #[error("frame angle undefined at t = {t}: rotated coupling vanishes")]
    FrameSingularity { t: f64 },

    #[error("mixing angle undefined: coupling and detuning both zero")]
    MixingAngleUndefined,

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("norm drift {drift:.3e} exceeds 1e-6 at t = {t}; integration is not trustworthy")]
    NormDrift { t: f64, drift: f64 },

    #[error("top Fock level of cavity {cavity} reached population {population:.3e} (guard {guard:.1e}); raise the cutoff")]
    CutoffReached {
        cavity: char,
        population: f64,
        guard: f64,
    },

    #[error("eigenbranch tracking failed at t = {t}: best overlap {overlap:.3} is too ambiguous")]
    DegenerateBranch { t: f64, overlap: f64 },

    #[error("degenerate bare detuning: the mixing angle branch is undefined when the adjusted splitting vanishes")]
    DegenerateDetuning,

    #[error("nonphysical device parameter: {0}")]
    NonphysicalParameter(String),
}

impl Error {
    /// Short machine-readable code, stable across message wording changes.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::BasisMismatch(_) => "basis-mismatch",
            Error::LevelNotAvailable { .. } => "level-not-available",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::CdSingularity { .. } => "cd-singularity",
            Error::FrameSingularity { .. } => "frame-singularity",
            Error::MixingAngleUndefined => "mixing-angle-undefined",
            Error::IntegrationFailure(_) => "integration-failure",
            Error::StepUnderflow { .. } => "step-underflow",
            Error::NormDrift { .. } => "norm-drift",
            Error::CutoffReached { .. } => "cutoff-reached",
            Error::DegenerateBranch { .. } => "degenerate-branch",
            Error::DegenerateDetuning => "degenerate-detuning",
            Error::NonphysicalParameter(_) => "nonphysical-parameter",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// 2*pi, spelled once.
pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Laboratory frequency in MHz to internal angular rad/ns.
#[inline]
pub fn angular_from_mhz(f_mhz: f64) -> f64 {
    TWO_PI * f_mhz * 1e-3
}
