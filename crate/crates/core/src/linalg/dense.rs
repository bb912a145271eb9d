//! Dense symmetric eigenvalues: Householder tridiagonalization followed by
//! Sturm bisection. Complex Hermitian matrices go through the real
//! symmetric doubling [[X, -Y], [Y, X]].

use super::tridiag::TriDiag;
use num_complex::Complex64;

/// Reduce a dense symmetric matrix (row-major, length n*n) to tridiagonal
/// form by Householder reflections.
fn householder_tridiagonalize(a: &mut [f64], n: usize) -> TriDiag {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return TriDiag::new(vec![], vec![]);
    }
    let mut off = vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1; // active column height below the diagonal
        let mut norm2 = 0.0;
        for i in 0..m {
            let x = a[(k + 1 + i) * n + k];
            norm2 += x * x;
        }
        let x0 = a[(k + 1) * n + k];
        if norm2 == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let norm = norm2.sqrt();
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        off[k] = alpha;
        // Householder vector v = x - alpha e1, normalized.
        let mut v = vec![0.0; m];
        for i in 0..m {
            v[i] = a[(k + 1 + i) * n + k];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let inv = 1.0 / vnorm2.sqrt();
        for x in v.iter_mut() {
            *x *= inv;
        }
        // p = B v on the trailing block B = A[k+1.., k+1..]
        let mut p = vec![0.0; m];
        for i in 0..m {
            let row = (k + 1 + i) * n + (k + 1);
            let mut acc = 0.0;
            for j in 0..m {
                acc += a[row + j] * v[j];
            }
            p[i] = acc;
        }
        let kappa: f64 = v.iter().zip(&p).map(|(x, y)| x * y).sum();
        // w = p - kappa v;  B <- B - 2 v wᵀ - 2 w vᵀ
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        for i in 0..m {
            let row = (k + 1 + i) * n + (k + 1);
            let vi = v[i];
            let wi = w[i];
            for j in 0..m {
                a[row + j] -= 2.0 * (vi * w[j] + wi * v[j]);
            }
        }
        // Store the annihilated column's representative entry.
        a[(k + 1) * n + k] = alpha;
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    TriDiag::new(diag, off)
}

/// All eigenvalues of a dense symmetric matrix (row-major), ascending.
pub fn dense_sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut work = a.to_vec();
    householder_tridiagonalize(&mut work, n).eigenvalues()
}

/// All eigenvalues of a dense complex Hermitian matrix (row-major),
/// ascending. Uses the doubled real embedding; duplicates are stripped.
pub fn dense_herm_eigenvalues(a: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let nn = 2 * n;
    let mut m = vec![0.0; nn * nn];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            m[i * nn + j] = z.re;
            m[(i + n) * nn + (j + n)] = z.re;
            m[i * nn + (j + n)] = -z.im;
            m[(i + n) * nn + j] = z.im;
        }
    }
    let doubled = dense_sym_eigenvalues(&m, nn);
    // Eigenvalues come in exact pairs; keep one per pair after sorting.
    doubled.into_iter().step_by(2).collect()
}
