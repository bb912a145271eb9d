//! Error types for the builder, sampling, and counting layers.

use thiserror::Error;

/// Errors from the exact/analytic magnetic layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MagneticError {
    #[error("matrix is not antisymmetric: |B[{i}][{j}] + B[{j}][{i}]| = {defect:e} exceeds tolerance {tol:e}")]
    NotAntisymmetric {
        i: usize,
        j: usize,
        defect: f64,
        tol: f64,
    },
    #[error("Landau ladder undefined for zero magnetic field (m = 0); use the free-density branch")]
    ZeroField,
    #[error("ladder enumeration up to cap {cap} needs more than the budget of {budget} lattice points")]
    CapTooLarge { cap: f64, budget: u64 },
    #[error("energy {energy} is not below the essential-spectrum floor {floor}")]
    AboveEssentialFloor { energy: f64, floor: f64 },
}

/// Errors from operator construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("window side {l} is not an integer multiple of spacing {h} (or fewer than 2 cells)")]
    BadWindow { l: f64, h: f64 },
    #[error("flux per plaquette b·h² = {flux} exceeds 0.5; refine the grid")]
    FluxTooLarge { flux: f64 },
    #[error("no bound state below the essential-spectrum floor {floor}")]
    NoBoundState { floor: f64 },
    #[error("operator dimension {required} exceeds the budget of {allowed}")]
    BudgetExceeded { required: usize, allowed: usize },
    #[error("translation {xi:?} is not an integer number of grid cells at spacing {h}")]
    UnalignedTranslation { xi: Vec<f64>, h: f64 },
    #[error("eigensolver failed: {message}")]
    SolverFailure { message: String },
}

/// Errors from disorder sampling and lattice sums.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisorderError {
    #[error("halo radius {halo} leaves a lattice tail of {tail:e}, above the tolerance {tol:e}")]
    HaloTooSmall { halo: i64, tail: f64, tol: f64 },
}

/// Errors from eigenvalue counting and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountingError {
    #[error("LDLᴴ factorization broke down at energy {energy} (pivot {pivot:e} in column {column}); retries at {tried:?} also failed")]
    FactorizationBreakdown {
        energy: f64,
        pivot: f64,
        column: usize,
        tried: Vec<f64>,
    },
    #[error("energy {energy} is not below the essential-spectrum floor {floor}")]
    AboveEssentialFloor { energy: f64, floor: f64 },
    #[error("operator dimension {required} exceeds the budget of {allowed}")]
    BudgetExceeded { required: usize, allowed: usize },
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Errors from the sandwich and fitting layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{name} = {value} outside the admissible interval ({lo}, {hi})")]
    BadParameters {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("spectral hypothesis violated: {message}")]
    HypothesisViolated { message: String },
    #[error("only {usable} usable points after masking; at least {needed} required")]
    TooFewPoints { usable: usize, needed: usize },
    #[error("no usable points in the fit window: every value is outside (0, 1)")]
    DegenerateWindow,
}
