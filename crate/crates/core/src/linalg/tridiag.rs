//! Real symmetric tridiagonal matrices: Sturm counting, bisection
//! eigenvalues, inverse-iteration eigenvectors.

/// Pivot guard for the Sturm recurrence; tiny pivots are clamped to this
/// magnitude instead of aborting (a misclassified pivot changes the count
/// by at most one at a shift that is itself an eigenvalue to rounding).
const STURM_PIVOT_GUARD: f64 = 1e-300;

/// Real symmetric tridiagonal matrix.
#[derive(Clone, Debug)]
pub struct TriDiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl TriDiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "off-diagonal length must be dim - 1"
        );
        TriDiag { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn diag_mut(&mut self) -> &mut [f64] {
        &mut self.diag
    }

    pub fn inf_norm(&self) -> f64 {
        let n = self.dim();
        let mut best: f64 = 0.0;
        for i in 0..n {
            let mut row = self.diag[i].abs();
            if i > 0 {
                row += self.off[i - 1].abs();
            }
            if i + 1 < n {
                row += self.off[i].abs();
            }
            best = best.max(row);
        }
        best
    }

    /// Lower-triangle entry (i >= j, i - j <= 1).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match i - j {
            0 => self.diag[i],
            1 => self.off[j],
            _ => 0.0,
        }
    }

    pub fn coo_entries(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for i in 0..self.dim() {
            out.push((i, i, self.diag[i], 0.0));
            if i + 1 < self.dim() {
                out.push((i + 1, i, self.off[i], 0.0));
            }
        }
        out
    }

    /// Count eigenvalues strictly less than `lambda` (Sturm sequence: the
    /// number of negative pivots in the LDLᵀ factorization of T - λI).
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let n = self.dim();
        if n == 0 {
            return 0;
        }
        let mut count = 0;
        let mut q = self.diag[0] - lambda;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let q_safe = if q.abs() < STURM_PIVOT_GUARD {
                if q >= 0.0 {
                    STURM_PIVOT_GUARD
                } else {
                    -STURM_PIVOT_GUARD
                }
            } else {
                q
            };
            q = (self.diag[i] - lambda) - self.off[i - 1] * self.off[i - 1] / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin bounds enclosing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for i in 0..n {
            let e_left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let e_right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - e_left - e_right);
            hi = hi.max(self.diag[i] + e_left + e_right);
        }
        (lo - 1.0, hi + 1.0)
    }

    /// k-th eigenvalue (0-based, ascending) by bisection on the Sturm count.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.dim());
        let (lo, hi) = self.gershgorin();
        self.bisect_index(k, lo, hi)
    }

    fn bisect_index(&self, k: usize, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (b - a) < 2.0 * f64::EPSILON * mid.abs().max(1.0) {
                break;
            }
            if self.sturm_count(mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.lowest_eigenvalues(self.dim())
    }

    /// The `count` smallest eigenvalues, ascending.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let n = self.dim();
        let count = count.min(n);
        let (lo, hi) = self.gershgorin();
        (0..count).map(|k| self.bisect_index(k, lo, hi)).collect()
    }

    /// Eigenvector for an isolated eigenvalue `lambda`, by two rounds of
    /// inverse iteration through a partially pivoted LU of T - λI.
    ///
    /// Vectors for eigenvalues closer than `cluster_tol` to an earlier one
    /// should be orthogonalized by the caller; `lowest_eigenpairs` does so.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        let lu = TriLu::factor(self, lambda);
        // Deterministic start with no special symmetry.
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 * 0.7368062997).sin()))
            .collect();
        normalize(&mut v);
        for _ in 0..3 {
            lu.solve_in_place(&mut v);
            normalize(&mut v);
        }
        // Fix an overall sign: entry of largest magnitude positive.
        if let Some(m) = v
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        {
            if m < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
        }
        v
    }

    /// Lowest `count` eigenpairs with vectors orthonormalized in the
    /// Euclidean inner product (no grid weight).
    pub fn lowest_eigenpairs(&self, count: usize) -> Vec<(f64, Vec<f64>)> {
        let vals = self.lowest_eigenvalues(count);
        let scale = self.inf_norm().max(1.0);
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(vals.len());
        for (k, &lam) in vals.iter().enumerate() {
            let mut v = self.eigenvector(lam);
            // Re-orthogonalize within near-degenerate clusters.
            for (lam_prev, v_prev) in out.iter().take(k) {
                if (lam - lam_prev).abs() < 1e-8 * scale {
                    let dot: f64 = v.iter().zip(v_prev).map(|(a, b)| a * b).sum();
                    for (x, y) in v.iter_mut().zip(v_prev) {
                        *x -= dot * y;
                    }
                }
            }
            normalize(&mut v);
            out.push((lam, v));
        }
        out
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Partially pivoted LU of a shifted tridiagonal matrix. Pivoting adds one
/// extra superdiagonal of fill.
struct TriLu {
    lower: Vec<f64>,
    diag: Vec<f64>,
    up1: Vec<f64>,
    up2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriLu {
    fn factor(t: &TriDiag, lambda: f64) -> TriLu {
        let n = t.dim();
        let scale = t.inf_norm().max(1.0);
        let tiny = 1e-290f64.max(f64::EPSILON * scale * 1e-3);
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - lambda).collect();
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            u1[i] = t.off[i];
        }
        let mut lower = vec![0.0; n];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            let sub = t.off[i];
            // Row with the larger leading entry becomes the pivot row.
            let (mut a, mut b1, mut b2) = (d[i], u1[i], u2[i]);
            let (mut c, mut c1) = (sub, d[i + 1]);
            let mut c2 = if i + 1 < n - 1 { t.off[i + 1] } else { 0.0 };
            if c.abs() > a.abs() {
                core::mem::swap(&mut a, &mut c);
                core::mem::swap(&mut b1, &mut c1);
                core::mem::swap(&mut b2, &mut c2);
                swapped[i] = true;
            }
            let a = if a.abs() < tiny {
                if a >= 0.0 {
                    tiny
                } else {
                    -tiny
                }
            } else {
                a
            };
            let m = c / a;
            d[i] = a;
            u1[i] = b1;
            u2[i] = b2;
            lower[i] = m;
            d[i + 1] = c1 - m * b1;
            if i + 1 < n - 1 {
                u1[i + 1] = c2 - m * b2;
                u2[i + 1] = 0.0;
            }
        }
        if n > 0 && d[n - 1].abs() < tiny {
            d[n - 1] = if d[n - 1] >= 0.0 { tiny } else { -tiny };
        }
        TriLu {
            lower,
            diag: d,
            up1: u1,
            up2: u2,
            swapped,
        }
    }

    fn solve_in_place(&self, v: &mut [f64]) {
        let n = v.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                v.swap(i, i + 1);
            }
            v[i + 1] -= self.lower[i] * v[i];
        }
        for i in (0..n).rev() {
            let mut x = v[i];
            if i + 1 < n {
                x -= self.up1[i] * v[i + 1];
            }
            if i + 2 < n {
                x -= self.up2[i] * v[i + 2];
            }
            v[i] = x / self.diag[i];
        }
    }
}
