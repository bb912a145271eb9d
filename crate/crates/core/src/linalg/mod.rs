//! Dense, banded, and tridiagonal Hermitian eigenvalue machinery.
//!
//! Everything the estimators need reduces to two primitives:
//!
//! - **inertia**: the number of eigenvalues of `H - E·I` below zero, read off
//!   the pivot signs of an LDLᴴ factorization (Sylvester's law), and
//! - **full spectra** of small matrices, via Householder tridiagonalization
//!   followed by Sturm bisection.
//!
//! The two routes are algorithmically independent and are cross-checked
//! against each other in the counting layer.

mod band;
mod dense;
mod tridiag;

pub use band::{Band, BandScalar, HermBand, LdlBreakdown, SymBand};
pub use dense::{dense_herm_eigenvalues, dense_sym_eigenvalues};
pub use tridiag::TriDiag;

use num_complex::Complex64;

/// A Hermitian operator in whichever storage the builder produced.
#[derive(Clone, Debug)]
pub enum HermitianOp {
    /// Real symmetric tridiagonal (1D grid operators).
    TriReal(TriDiag),
    /// Real symmetric banded (zero-field grids, real potentials).
    BandReal(SymBand),
    /// Complex Hermitian banded (Peierls phases present).
    BandComplex(HermBand),
}

impl HermitianOp {
    pub fn dim(&self) -> usize {
        match self {
            HermitianOp::TriReal(t) => t.dim(),
            HermitianOp::BandReal(b) => b.dim(),
            HermitianOp::BandComplex(b) => b.dim(),
        }
    }

    /// Row-sum (infinity) norm; the scale for tie and breakdown tolerances.
    pub fn inf_norm(&self) -> f64 {
        match self {
            HermitianOp::TriReal(t) => t.inf_norm(),
            HermitianOp::BandReal(b) => b.inf_norm(),
            HermitianOp::BandComplex(b) => b.inf_norm(),
        }
    }

    /// Number of eigenvalues strictly below `e`, via Sturm/LDLᴴ pivot counting.
    ///
    /// Tridiagonal matrices never fail (tiny pivots are clamped, the
    /// classical Sturm convention); banded factorizations report breakdown
    /// so the caller can retry at a perturbed shift.
    pub fn count_below_raw(&self, e: f64, pivot_tol: f64) -> Result<usize, LdlBreakdown> {
        match self {
            HermitianOp::TriReal(t) => Ok(t.sturm_count(e)),
            HermitianOp::BandReal(b) => b.ldl_inertia(e, pivot_tol),
            HermitianOp::BandComplex(b) => b.ldl_inertia(e, pivot_tol),
        }
    }

    /// Full spectrum by the dense route (tridiagonalize + bisection).
    ///
    /// Complex Hermitian input is embedded as the doubled real symmetric
    /// matrix [[X, -Y], [Y, X]]; each eigenvalue appears twice and the
    /// duplicates are stripped after sorting.
    pub fn dense_eigenvalues(&self) -> Vec<f64> {
        match self {
            HermitianOp::TriReal(t) => t.eigenvalues(),
            HermitianOp::BandReal(b) => dense_sym_eigenvalues(&b.to_dense(), b.dim()),
            HermitianOp::BandComplex(b) => dense_herm_eigenvalues(&b.to_dense(), b.dim()),
        }
    }

    /// Entries of the lower triangle in coordinate-list form
    /// `(row, col, re, im)`, suitable for external verification.
    pub fn coo_entries(&self) -> Vec<(usize, usize, f64, f64)> {
        match self {
            HermitianOp::TriReal(t) => t.coo_entries(),
            HermitianOp::BandReal(b) => b
                .lower_entries()
                .map(|(i, j, v)| (i, j, v, 0.0))
                .collect(),
            HermitianOp::BandComplex(b) => b
                .lower_entries()
                .map(|(i, j, v)| (i, j, v.re, v.im))
                .collect(),
        }
    }

    /// Lower-triangle entry (i >= j) as a complex number.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        assert!(i >= j, "entry() addresses the lower triangle");
        match self {
            HermitianOp::TriReal(t) => Complex64::new(t.entry(i, j), 0.0),
            HermitianOp::BandReal(b) => Complex64::new(b.get(i, j), 0.0),
            HermitianOp::BandComplex(b) => b.get(i, j),
        }
    }
}
