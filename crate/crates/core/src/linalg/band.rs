//! Hermitian banded storage and LDLᴴ inertia counting.
//!
//! Storage is the lower band in column-major LAPACK 'L' layout: entry
//! (i, j) with 0 <= i - j <= kd lives at `data[j*(kd+1) + (i-j)]`.
//!
//! The factorization is the right-looking banded LDLᴴ without pivoting.
//! By Sylvester's law of inertia the number of negative pivots of
//! `A - shift·I` equals the number of eigenvalues below the shift. An
//! indefinite matrix can produce a near-zero pivot, which would poison the
//! trailing updates; in that case the factorization aborts with
//! [`LdlBreakdown`] and the counting layer retries at a perturbed shift.

use num_complex::Complex64;

/// Scalar kinds the banded factorization runs over.
pub trait BandScalar: Copy + core::fmt::Debug + 'static {
    fn zero() -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn abs(self) -> f64;
    fn add(self, other: Self) -> Self;
    fn sub_assign_prod(&mut self, a: Self, b: Self, d: f64);
    fn div_re(self, d: f64) -> Self;
    fn from_re(x: f64) -> Self;
}

impl BandScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub_assign_prod(&mut self, a: Self, b: Self, d: f64) {
        *self -= a * b * d;
    }
    fn div_re(self, d: f64) -> Self {
        self / d
    }
    fn from_re(x: f64) -> Self {
        x
    }
}

impl BandScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub_assign_prod(&mut self, a: Self, b: Self, d: f64) {
        *self -= a * b * d;
    }
    fn div_re(self, d: f64) -> Self {
        self / d
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Banded factorization breakdown: pivot too small at the given column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LdlBreakdown {
    pub column: usize,
    pub pivot: f64,
}

/// Hermitian banded matrix over `T` (lower band stored).
#[derive(Clone, Debug)]
pub struct Band<T> {
    n: usize,
    kd: usize,
    data: Vec<T>,
}

pub type SymBand = Band<f64>;
pub type HermBand = Band<Complex64>;

impl<T: BandScalar> Band<T> {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Band {
            n,
            kd,
            data: vec![T::zero(); n * (kd + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= j && i - j <= self.kd && i < self.n);
        j * (self.kd + 1) + (i - j)
    }

    /// Lower-triangle entry (i >= j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i >= j && i - j <= self.kd {
            self.data[self.idx(i, j)]
        } else {
            T::zero()
        }
    }

    /// Set lower-triangle entry (i >= j, within the band).
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// Add to a lower-triangle entry (i >= j, within the band).
    pub fn add_to(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx(i, j);
        self.data[k] = self.data[k].add(v);
    }

    /// Iterate the stored lower-triangle entries (row, col, value).
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |j| {
            (j..=(j + self.kd).min(self.n - 1)).map(move |i| (i, j, self.data[self.idx(i, j)]))
        })
    }

    /// Row-sum norm (uses Hermitian symmetry for the upper triangle).
    pub fn inf_norm(&self) -> f64 {
        let mut row = vec![0.0f64; self.n];
        for (i, j, v) in self.lower_entries() {
            row[i] += v.abs();
            if i != j {
                row[j] += v.abs();
            }
        }
        row.into_iter().fold(0.0, f64::max)
    }

    /// Count eigenvalues strictly below `shift` via LDLᴴ pivot signs.
    ///
    /// `pivot_tol` is the absolute breakdown threshold (callers scale it by
    /// the matrix norm).
    pub fn ldl_inertia(&self, shift: f64, pivot_tol: f64) -> Result<usize, LdlBreakdown> {
        let n = self.n;
        let kd = self.kd;
        let w = kd + 1;
        let mut a = self.data.clone();
        // Shift the diagonal in place.
        for j in 0..n {
            a[j * w] = a[j * w].add(T::from_re(-shift));
        }
        let mut negatives = 0usize;
        for j in 0..n {
            let d = a[j * w].re();
            if d.abs() < pivot_tol {
                return Err(LdlBreakdown {
                    column: j,
                    pivot: d,
                });
            }
            if d < 0.0 {
                negatives += 1;
            }
            let reach = kd.min(n - 1 - j);
            // Scale column j into L.
            for r in 1..=reach {
                let v = a[j * w + r];
                a[j * w + r] = v.div_re(d);
            }
            // Rank-1 update of the trailing block:
            // A[i, c] -= L[i, j] * conj(L[c, j]) * d  for j < c <= i <= j + kd.
            for c in 1..=reach {
                let ljc = a[j * w + c].conj();
                let col = (j + c) * w;
                for r in c..=reach {
                    let lij = a[j * w + r];
                    a[col + (r - c)].sub_assign_prod(lij, ljc, d);
                }
            }
        }
        Ok(negatives)
    }
}

impl SymBand {
    /// Expand to a dense row-major symmetric matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for (i, j, v) in self.lower_entries() {
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
        m
    }
}

impl HermBand {
    /// Expand to a dense row-major Hermitian matrix.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, j, v) in self.lower_entries() {
            m[i * n + j] = v;
            m[j * n + i] = v.conj();
        }
        m
    }
}
