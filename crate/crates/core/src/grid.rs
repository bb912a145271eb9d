//! Cubic lattice windows with Dirichlet convention (boundary excluded).

use crate::error::BuildError;

/// An axis-aligned cube of side `l` centered at `offset`, discretized with
/// spacing `h`. Unknowns are the interior points only; there are
/// `l/h - 1` of them per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeWindow {
    d: usize,
    l: f64,
    h: f64,
    offset: Vec<f64>,
}

impl LatticeWindow {
    pub fn new(d: usize, l: f64, h: f64) -> Result<Self, BuildError> {
        Self::with_offset(d, l, h, vec![0.0; d])
    }

    pub fn with_offset(d: usize, l: f64, h: f64, offset: Vec<f64>) -> Result<Self, BuildError> {
        assert_eq!(offset.len(), d, "offset dimension mismatch");
        if !(l > 0.0) || !(h > 0.0) {
            return Err(BuildError::BadWindow { l, h });
        }
        let cells = l / h;
        let rounded = cells.round();
        if rounded < 2.0 || (cells - rounded).abs() > 1e-9 * rounded {
            return Err(BuildError::BadWindow { l, h });
        }
        Ok(LatticeWindow { d, l, h, offset })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> f64 {
        self.l
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Interior points per axis: l/h - 1.
    pub fn points_per_axis(&self) -> usize {
        (self.l / self.h).round() as usize - 1
    }

    /// Total number of interior points.
    pub fn interior_count(&self) -> usize {
        self.points_per_axis().pow(self.d as u32)
    }

    /// Coordinate of interior point index `i` (0-based) along axis `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.offset[axis] - 0.5 * self.l + (i as f64 + 1.0) * self.h
    }

    /// Full coordinates of a flattened interior index (row-major: the last
    /// axis varies fastest).
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let n = self.points_per_axis();
        let mut rem = flat;
        let mut out = vec![0.0; self.d];
        for axis in (0..self.d).rev() {
            out[axis] = self.coord(axis, rem % n);
            rem /= n;
        }
        out
    }

    /// Translated copy of the window.
    pub fn translated(&self, shift: &[f64]) -> LatticeWindow {
        assert_eq!(shift.len(), self.d);
        let offset = self
            .offset
            .iter()
            .zip(shift)
            .map(|(o, s)| o + s)
            .collect();
        LatticeWindow {
            d: self.d,
            l: self.l,
            h: self.h,
            offset,
        }
    }

    /// Whether `shift` is an integer number of grid cells on every axis.
    pub fn is_grid_aligned(&self, shift: &[f64]) -> bool {
        shift.iter().all(|s| {
            let cells = s / self.h;
            (cells - cells.round()).abs() <= 1e-9 * cells.abs().max(1.0)
        })
    }
}
