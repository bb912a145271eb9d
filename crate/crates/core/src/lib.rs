//! Finite-volume spectral laboratory for random surface Hamiltonians.
//!
//! Builds Dirichlet discretizations of operators of the form
//!
//! ```text
//!   H_ω = H_⊥ ⊗ I + I ⊗ H_∥ + V_ω
//! ```
//!
//! where `H_⊥` is a (possibly magnetic) Schrödinger operator on a transverse
//! cube, `H_∥` is a 1D operator with bound states below its essential
//! spectrum, and `V_ω` is an alloy-type random surface potential. On top of
//! the discretizations it provides:
//!
//! - the exact free integrated density of states with Landau-level structure,
//!   its convolution with the `H_∥` eigenvalue counting measure, and the
//!   high-energy (Karamata) coefficients (`magnetic`);
//! - seeded, shift-covariant alloy disorder and the reduced scalar potentials
//!   obtained by averaging against bound states (`disorder`);
//! - eigenvalue-counting estimators of the integrated density of surface
//!   states and of reduced-operator densities, with ensemble statistics
//!   (`counting`);
//! - two-sided sandwich checks, plateau checks, and Lifshits-tail exponent
//!   fits (`analysis`).
//!
//! All estimators are deterministic functions of their configuration and
//! seeds; realizations are keyed by counter-based hashing so that lattice
//! translations act exactly on the disorder.

pub mod analysis;
pub mod counting;
pub mod disorder;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod linalg;
pub mod magnetic;
pub mod selftest;
pub mod special;

pub use error::{AnalysisError, BuildError, CountingError, DisorderError, MagneticError};
