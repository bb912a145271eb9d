//! Finite-difference Dirichlet discretizations.
//!
//! The transverse operator `(i∇ + A)² - β` is discretized with
//! nearest-neighbor differences and midpoint-rule Peierls phases in the
//! symmetric gauge `A_j(x) = -½ Σ_k B_{jk} x_k`. For a hop from `x` to
//! `x + h e_j` the link phase is
//!
//! ```text
//!   φ_j(x) = h · A_j(x + ½h e_j) = -(h/2) Σ_k B_{jk} x_k
//! ```
//!
//! (the midpoint shift only moves the j-th coordinate and `B_jj = 0`).
//! The matrix has diagonal `2d/h² - β` and hopping `-e^{±iφ}/h²`; this
//! choice makes the discrete magnetic translations an exact symmetry, which
//! the gauge-covariance tests rely on.
//!
//! The longitudinal operator is a 1D tridiagonal discretization of
//! `-d²/dy² + u(y)` on a Dirichlet box, with a single-site `-α/h` diagonal
//! term standing in for a `-α δ(y)` well.

use crate::error::BuildError;
use crate::grid::LatticeWindow;
use crate::linalg::{Band, BandScalar, HermBand, HermitianOp, SymBand, TriDiag};
use crate::magnetic::MagneticStructure;
use num_complex::Complex64;

/// Default cap on assembled operator dimensions.
pub const DEFAULT_DIMENSION_BUDGET: usize = 200_000;

/// Transverse Dirichlet operator on a lattice window, in canonical field
/// coordinates (block `a` couples axes `2a` and `2a+1`).
#[derive(Clone, Debug)]
pub struct TransverseOperator {
    window: LatticeWindow,
    field: MagneticStructure,
    op: HermitianOp,
}

impl TransverseOperator {
    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    pub fn field(&self) -> &MagneticStructure {
        &self.field
    }

    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Largest flux per plaquette, `max_j b_j h²`.
    pub fn flux_per_plaquette(&self) -> f64 {
        let h = self.window.spacing();
        self.field.b().first().copied().unwrap_or(0.0) * h * h
    }
}

/// Peierls phase for a hop from `x` along `axis`: `-(h/2) Σ_k B_{axis,k} x_k`.
fn hop_phase(field: &MagneticStructure, x: &[f64], axis: usize, h: f64) -> f64 {
    let a = axis / 2;
    if a >= field.m() {
        return 0.0; // kernel axis
    }
    let b = field.b()[a];
    if axis % 2 == 0 {
        // B[2a][2a+1] = b
        -(h / 2.0) * b * x[axis + 1]
    } else {
        // B[2a+1][2a] = -b
        (h / 2.0) * b * x[axis - 1]
    }
}

/// Build the transverse operator. The field must be in canonical block
/// coordinates; the window is axis-aligned to that frame.
pub fn build_transverse(
    window: &LatticeWindow,
    field: &MagneticStructure,
) -> Result<TransverseOperator, BuildError> {
    let d = window.dim();
    assert_eq!(field.dim(), d, "field dimension must match the window");
    let h = window.spacing();
    let flux = field.b().first().copied().unwrap_or(0.0) * h * h;
    if flux > 0.5 {
        return Err(BuildError::FluxTooLarge { flux });
    }
    if flux > 0.1 {
        log::warn!("flux per plaquette {flux:.4} above 0.1; discretization error is large");
    }
    let n = window.points_per_axis();
    let n_g = window.interior_count();
    let inv_h2 = 1.0 / (h * h);
    let diag = 2.0 * d as f64 * inv_h2 - field.beta();

    // Strides of each axis in the flattened row-major index.
    let mut strides = vec![1usize; d];
    for axis in (0..d.saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * n;
    }

    let op = if field.m() == 0 && d == 1 {
        HermitianOp::TriReal(TriDiag::new(vec![diag; n_g], vec![-inv_h2; n_g - 1]))
    } else if field.m() == 0 {
        let mut band = SymBand::zeros(n_g, strides[0]);
        fill_hops(&mut band, window, field, &strides, |_phi| -inv_h2);
        for g in 0..n_g {
            band.set(g, g, diag);
        }
        HermitianOp::BandReal(band)
    } else {
        let mut band = HermBand::zeros(n_g, strides[0]);
        fill_hops(&mut band, window, field, &strides, |phi| {
            // Lower-triangle entry (x+h e_a, x) = -exp(+i φ_a(x))/h².
            -Complex64::from_polar(inv_h2, phi)
        });
        for g in 0..n_g {
            band.set(g, g, Complex64::new(diag, 0.0));
        }
        HermitianOp::BandComplex(band)
    };
    Ok(TransverseOperator {
        window: window.clone(),
        field: field.clone(),
        op,
    })
}

fn fill_hops<T: BandScalar>(
    band: &mut Band<T>,
    window: &LatticeWindow,
    field: &MagneticStructure,
    strides: &[usize],
    entry: impl Fn(f64) -> T,
) {
    let d = window.dim();
    let n = window.points_per_axis();
    let n_g = window.interior_count();
    let h = window.spacing();
    for g in 0..n_g {
        let x = window.point(g);
        // Per-axis index to detect the Dirichlet boundary.
        let mut rem = g;
        let mut idx = vec![0usize; d];
        for axis in (0..d).rev() {
            idx[axis] = rem % n;
            rem /= n;
        }
        for axis in 0..d {
            if idx[axis] + 1 < n {
                let phi = hop_phase(field, &x, axis, h);
                band.set(g + strides[axis], g, entry(phi));
            }
        }
    }
}

/// Smallest eigenvalue of the transverse operator, to absolute accuracy
/// `abs_tol`, by bisection on the inertia count.
pub fn ground_energy(op: &TransverseOperator, abs_tol: f64) -> Result<f64, BuildError> {
    lowest_eigenvalue(op.op(), abs_tol)
}

/// Bisection for the smallest eigenvalue of any Hermitian operator here.
pub fn lowest_eigenvalue(op: &HermitianOp, abs_tol: f64) -> Result<f64, BuildError> {
    kth_eigenvalue(op, 0, abs_tol)
}

/// k-th smallest eigenvalue (0-based) by bisection on the inertia count.
pub fn kth_eigenvalue(op: &HermitianOp, k: usize, abs_tol: f64) -> Result<f64, BuildError> {
    let scale = op.inf_norm().max(1.0);
    // Irrational-looking bracket so the midpoints never land on the exact
    // arithmetic of a structured spectrum (where pivots vanish to high
    // multiplicity and small nudges cannot escape).
    let (mut lo, mut hi) = (-scale * 1.0180339887498949, scale * 1.0457513110645906);
    while hi - lo > abs_tol {
        let mid = 0.5 * (lo + hi);
        if robust_count(op, mid, scale)? > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Inertia count with a geometric retry ladder around breakdown shifts.
fn robust_count(op: &HermitianOp, e: f64, scale: f64) -> Result<usize, BuildError> {
    let pivot_tol = 1e-13 * scale;
    let mut delta = 1e-9 * scale;
    let mut shift = e;
    for _ in 0..8 {
        match op.count_below_raw(shift, pivot_tol) {
            Ok(c) => return Ok(c),
            Err(_) => {
                shift = e + delta;
                delta *= -3.0;
            }
        }
    }
    Err(BuildError::SolverFailure {
        message: format!("inertia breakdown near energy {e}"),
    })
}

/// Diagonal magnetic-translation phases `x ↦ exp(-(i/2) Σ ξ_j B_{jk} x_k)`
/// on the window grid. Conjugating the operator built on the translated
/// window by (shift ∘ phase) reproduces the original hopping phases.
pub fn magnetic_translate(
    op: &TransverseOperator,
    xi: &[f64],
) -> Result<Vec<Complex64>, BuildError> {
    let window = op.window();
    assert_eq!(xi.len(), window.dim());
    if !window.is_grid_aligned(xi) {
        return Err(BuildError::UnalignedTranslation {
            xi: xi.to_vec(),
            h: window.spacing(),
        });
    }
    let field = op.field();
    let n_g = window.interior_count();
    let mut phases = Vec::with_capacity(n_g);
    for g in 0..n_g {
        let x = window.point(g);
        // Σ_{jk} ξ_j B_{jk} x_k = Σ_a b_a (ξ_{2a} x_{2a+1} - ξ_{2a+1} x_{2a})
        let mut arg = 0.0;
        for (a, &b) in field.b().iter().enumerate() {
            arg += b * (xi[2 * a] * x[2 * a + 1] - xi[2 * a + 1] * x[2 * a]);
        }
        phases.push(Complex64::from_polar(1.0, -0.5 * arg));
    }
    Ok(phases)
}

/// 1D longitudinal grid: Dirichlet box `[-half_width, half_width]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelGrid {
    pub half_width: f64,
    pub h: f64,
}

impl ParallelGrid {
    pub fn points(&self) -> usize {
        (2.0 * self.half_width / self.h).round() as usize - 1
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 1.0) * self.h
    }
}

/// Named longitudinal potentials.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// u(y) = y² (purely discrete spectrum).
    Harmonic,
    /// u(y) = -depth · 1_{|y| <= half_width}.
    SquareWell { depth: f64, half_width: f64 },
    /// Arbitrary samples on the grid points.
    Samples(Vec<f64>),
}

impl PotentialKind {
    fn sample(&self, grid: &ParallelGrid) -> Vec<f64> {
        let n = grid.points();
        match self {
            PotentialKind::Harmonic => (0..n)
                .map(|i| {
                    let y = grid.coord(i);
                    y * y
                })
                .collect(),
            PotentialKind::SquareWell { depth, half_width } => (0..n)
                .map(|i| {
                    if grid.coord(i).abs() <= *half_width {
                        -depth
                    } else {
                        0.0
                    }
                })
                .collect(),
            PotentialKind::Samples(u) => {
                assert_eq!(u.len(), n, "sample count must match the grid");
                u.clone()
            }
        }
    }
}

/// Longitudinal model descriptors.
#[derive(Clone, Debug, PartialEq)]
pub enum ParallelModel {
    /// Attractive delta well of strength `alpha`; essential spectrum [0, ∞).
    DeltaWell { alpha: f64, grid: ParallelGrid },
    /// Grid potential with a caller-declared essential-spectrum floor.
    Potential {
        kind: PotentialKind,
        grid: ParallelGrid,
        essential_floor: f64,
    },
    /// Analytic injection of the levels; no eigenvectors available.
    Explicit {
        levels: Vec<f64>,
        essential_floor: f64,
    },
}

/// Bound states of the longitudinal operator below the essential floor.
#[derive(Clone, Debug)]
pub struct ParallelSpectrum {
    levels: Vec<f64>,
    /// Grid eigenvectors, normalized so that Σ ψ² h = 1; `None` when the
    /// spectrum was injected analytically.
    vectors: Option<Vec<Vec<f64>>>,
    grid: Option<ParallelGrid>,
    essential_floor: f64,
    complete: bool,
    model: ParallelModel,
}

impl ParallelSpectrum {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn count(&self) -> usize {
        self.levels.len()
    }

    pub fn essential_floor(&self) -> f64 {
        self.essential_floor
    }

    /// False when fewer states than requested exist below the floor.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn model(&self) -> &ParallelModel {
        &self.model
    }

    pub fn grid(&self) -> Option<&ParallelGrid> {
        self.grid.as_ref()
    }

    /// Grid eigenvector of the j-th bound state (0-based).
    pub fn vector(&self, j: usize) -> Option<&[f64]> {
        self.vectors.as_ref().map(|v| v[j].as_slice())
    }

    /// Eigenvalue counting measure of the bound states.
    pub fn counting_measure(&self) -> crate::magnetic::CountingMeasure {
        crate::magnetic::CountingMeasure::from_levels(&self.levels, self.essential_floor)
    }
}

/// Solve for the lowest `count` bound states of the longitudinal model.
pub fn solve_parallel(model: &ParallelModel, count: usize) -> Result<ParallelSpectrum, BuildError> {
    match model {
        ParallelModel::Explicit {
            levels,
            essential_floor,
        } => {
            let mut sorted = levels.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if sorted.is_empty() || sorted[0] >= *essential_floor {
                return Err(BuildError::NoBoundState {
                    floor: *essential_floor,
                });
            }
            let complete = sorted.len() >= count;
            sorted.truncate(count);
            Ok(ParallelSpectrum {
                levels: sorted,
                vectors: None,
                grid: None,
                essential_floor: *essential_floor,
                complete,
                model: model.clone(),
            })
        }
        ParallelModel::DeltaWell { alpha, grid } => {
            assert!(*alpha > 0.0, "delta well strength must be positive");
            let n = grid.points();
            let h = grid.h;
            let mut diag = vec![2.0 / (h * h); n];
            let off = vec![-1.0 / (h * h); n - 1];
            // Site closest to y = 0 carries the -α/h term.
            let center = (0..n)
                .min_by(|&a, &b| {
                    grid.coord(a)
                        .abs()
                        .partial_cmp(&grid.coord(b).abs())
                        .unwrap()
                })
                .unwrap();
            diag[center] -= alpha / h;
            finish_grid_solve(TriDiag::new(diag, off), grid, 0.0, count, model)
        }
        ParallelModel::Potential {
            kind,
            grid,
            essential_floor,
        } => {
            let n = grid.points();
            let h = grid.h;
            let u = kind.sample(grid);
            let diag: Vec<f64> = u.iter().map(|ui| 2.0 / (h * h) + ui).collect();
            let off = vec![-1.0 / (h * h); n - 1];
            finish_grid_solve(TriDiag::new(diag, off), grid, *essential_floor, count, model)
        }
    }
}

fn finish_grid_solve(
    t: TriDiag,
    grid: &ParallelGrid,
    floor: f64,
    count: usize,
    model: &ParallelModel,
) -> Result<ParallelSpectrum, BuildError> {
    let below = t.sturm_count(floor.min(1e18));
    if below == 0 {
        return Err(BuildError::NoBoundState { floor });
    }
    let take = below.min(count);
    let pairs = t.lowest_eigenpairs(take);
    let inv_sqrt_h = 1.0 / grid.h.sqrt();
    let levels: Vec<f64> = pairs.iter().map(|(e, _)| *e).collect();
    let vectors: Vec<Vec<f64>> = pairs
        .into_iter()
        .map(|(_, v)| v.into_iter().map(|x| x * inv_sqrt_h).collect())
        .collect();
    Ok(ParallelSpectrum {
        levels,
        vectors: Some(vectors),
        grid: Some(grid.clone()),
        essential_floor: floor,
        complete: below >= count,
        model: model.clone(),
    })
}

/// Surface potential projected on the bound-state subspace: at transverse
/// point `g` the r×r block is `scale · field[g] · gram`.
///
/// `gram[j*r+k] = Σ_y g(y) ψ_j(y) ψ_k(y) h` is the longitudinal Gram matrix
/// of the single-site profile's y-factor; `field[g]` is the
/// coupling-weighted lattice sum of the transverse envelope.
#[derive(Clone, Debug)]
pub struct ProjectedPotential {
    pub field: Vec<f64>,
    pub gram: Vec<f64>,
    pub scale: f64,
}

/// Assembled finite-volume operator.
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    op: HermitianOp,
    transverse_dim: usize,
    block_size: usize,
}

impl AssembledOperator {
    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn transverse_dim(&self) -> usize {
        self.transverse_dim
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }
}

/// Assemble `H_⊥ ⊗ I + I ⊗ diag(E_j) + V` in spectrum-injection mode:
/// the longitudinal factor is reduced to its bound states and the surface
/// potential to its bound-state blocks. Index order is `g·r + j`.
pub fn assemble(
    transverse: &TransverseOperator,
    spectrum: &ParallelSpectrum,
    potential: Option<&ProjectedPotential>,
    budget: usize,
) -> Result<AssembledOperator, BuildError> {
    let r = spectrum.count();
    assert!(r >= 1, "need at least one longitudinal level");
    let n_g = transverse.dim();
    let dim = n_g * r;
    if dim > budget {
        return Err(BuildError::BudgetExceeded {
            required: dim,
            allowed: budget,
        });
    }
    if let Some(p) = potential {
        assert_eq!(p.field.len(), n_g, "potential field size mismatch");
        assert_eq!(p.gram.len(), r * r, "gram size mismatch");
    }
    let levels = spectrum.levels();
    let op = match transverse.op() {
        HermitianOp::TriReal(t) => {
            let entries: Vec<(usize, usize, f64)> = t
                .coo_entries()
                .into_iter()
                .map(|(i, j, re, _)| (i, j, re))
                .collect();
            HermitianOp::BandReal(assemble_spectrum(&entries, 1, n_g, r, levels, potential))
        }
        HermitianOp::BandReal(b) => {
            let entries: Vec<(usize, usize, f64)> = b.lower_entries().collect();
            HermitianOp::BandReal(assemble_spectrum(
                &entries,
                b.bandwidth(),
                n_g,
                r,
                levels,
                potential,
            ))
        }
        HermitianOp::BandComplex(b) => {
            let entries: Vec<(usize, usize, Complex64)> = b.lower_entries().collect();
            HermitianOp::BandComplex(assemble_spectrum(
                &entries,
                b.bandwidth(),
                n_g,
                r,
                levels,
                potential,
            ))
        }
    };
    Ok(AssembledOperator {
        op,
        transverse_dim: n_g,
        block_size: r,
    })
}

fn assemble_spectrum<T: BandScalar>(
    transverse_entries: &[(usize, usize, T)],
    kd_t: usize,
    n_g: usize,
    r: usize,
    levels: &[f64],
    potential: Option<&ProjectedPotential>,
) -> Band<T> {
    let kd = kd_t * r + (r - 1);
    let mut band = Band::<T>::zeros(n_g * r, kd);
    // Transverse part ⊗ identity.
    for &(i, j, v) in transverse_entries {
        for s in 0..r {
            band.add_to(i * r + s, j * r + s, v);
        }
    }
    // Longitudinal levels on the diagonal.
    for g in 0..n_g {
        for s in 0..r {
            band.add_to(g * r + s, g * r + s, T::from_re(levels[s]));
        }
    }
    // Potential blocks (real symmetric r×r per transverse point).
    if let Some(p) = potential {
        for g in 0..n_g {
            let a = p.scale * p.field[g];
            if a == 0.0 {
                continue;
            }
            for j in 0..r {
                for k in 0..=j {
                    let v = a * p.gram[j * r + k];
                    if v != 0.0 {
                        band.add_to(g * r + j, g * r + k, T::from_re(v));
                    }
                }
            }
        }
    }
    band
}

/// `H_⊥ + scale · diag(w)`: the reduced operator on the transverse window.
pub fn reduced_operator(transverse: &TransverseOperator, w: &[f64], scale: f64) -> HermitianOp {
    let n_g = transverse.dim();
    assert_eq!(w.len(), n_g, "field size mismatch");
    match transverse.op() {
        HermitianOp::TriReal(t) => {
            let mut t = t.clone();
            for (i, d) in t.diag_mut().iter_mut().enumerate() {
                *d += scale * w[i];
            }
            HermitianOp::TriReal(t)
        }
        HermitianOp::BandReal(b) => {
            let mut b = b.clone();
            for i in 0..n_g {
                b.add_to(i, i, scale * w[i]);
            }
            HermitianOp::BandReal(b)
        }
        HermitianOp::BandComplex(b) => {
            let mut b = b.clone();
            for i in 0..n_g {
                b.add_to(i, i, Complex64::new(scale * w[i], 0.0));
            }
            HermitianOp::BandComplex(b)
        }
    }
}

/// Assemble on the full product grid (validation mode): index `g·n_y + iy`,
/// `H_⊥ ⊗ I + I ⊗ T_y + diag(V)` with `V` sampled on the product grid.
pub fn assemble_grid(
    transverse: &TransverseOperator,
    longitudinal: &TriDiag,
    v_samples: Option<&[f64]>,
    budget: usize,
) -> Result<AssembledOperator, BuildError> {
    let n_g = transverse.dim();
    let n_y = longitudinal.dim();
    let dim = n_g * n_y;
    if dim > budget {
        return Err(BuildError::BudgetExceeded {
            required: dim,
            allowed: budget,
        });
    }
    if let Some(v) = v_samples {
        assert_eq!(v.len(), dim, "potential sample size mismatch");
    }
    let op = match transverse.op() {
        HermitianOp::TriReal(t) => {
            let entries: Vec<(usize, usize, f64)> = t
                .coo_entries()
                .into_iter()
                .map(|(i, j, re, _)| (i, j, re))
                .collect();
            HermitianOp::BandReal(assemble_grid_generic(
                &entries,
                1,
                n_g,
                longitudinal,
                v_samples,
            ))
        }
        HermitianOp::BandReal(b) => {
            let entries: Vec<(usize, usize, f64)> = b.lower_entries().collect();
            HermitianOp::BandReal(assemble_grid_generic(
                &entries,
                b.bandwidth(),
                n_g,
                longitudinal,
                v_samples,
            ))
        }
        HermitianOp::BandComplex(b) => {
            let entries: Vec<(usize, usize, Complex64)> = b.lower_entries().collect();
            HermitianOp::BandComplex(assemble_grid_generic(
                &entries,
                b.bandwidth(),
                n_g,
                longitudinal,
                v_samples,
            ))
        }
    };
    Ok(AssembledOperator {
        op,
        transverse_dim: n_g,
        block_size: n_y,
    })
}

fn assemble_grid_generic<T: BandScalar>(
    transverse_entries: &[(usize, usize, T)],
    kd_t: usize,
    n_g: usize,
    longitudinal: &TriDiag,
    v_samples: Option<&[f64]>,
) -> Band<T> {
    let n_y = longitudinal.dim();
    // Pick the index ordering with the smaller bandwidth. `v_samples` stays
    // indexed as g·n_y + iy either way.
    let kd_gmajor = kd_t * n_y + 1;
    let kd_ymajor = n_g.max(kd_t);
    let ymajor = kd_ymajor < kd_gmajor;
    let (kd, index): (usize, Box<dyn Fn(usize, usize) -> usize>) = if ymajor {
        (kd_ymajor, Box::new(move |g, s| s * n_g + g))
    } else {
        (kd_gmajor, Box::new(move |g, s| g * n_y + s))
    };
    let mut band = Band::<T>::zeros(n_g * n_y, kd);
    for &(i, j, v) in transverse_entries {
        for s in 0..n_y {
            band.add_to(index(i, s), index(j, s), v);
        }
    }
    for g in 0..n_g {
        for s in 0..n_y {
            band.add_to(index(g, s), index(g, s), T::from_re(longitudinal.diag()[s]));
            if s + 1 < n_y {
                // In y-major order the longitudinal hop is the long stride.
                let (hi, lo) = (index(g, s + 1), index(g, s));
                band.add_to(hi.max(lo), hi.min(lo), T::from_re(longitudinal.off()[s]));
            }
        }
    }
    if let Some(v) = v_samples {
        for g in 0..n_g {
            for s in 0..n_y {
                let vi = v[g * n_y + s];
                if vi != 0.0 {
                    band.add_to(index(g, s), index(g, s), T::from_re(vi));
                }
            }
        }
    }
    band
}
