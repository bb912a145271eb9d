//! Exact spectral data of the free transverse operator.
//!
//! A constant field is an antisymmetric matrix `B`; its canonical invariants
//! are the positive magnitudes `b_1 >= ... >= b_m > 0` of the eigenvalue
//! pairs `±i b_j`, the kernel dimension `n = d - 2m`, and the trace
//! `β = Σ b_j`. The shifted operator `(i∇ + A)² - β` has thresholds at the
//! ladder values `Λ = 2 Σ b_j ℓ_j`, and the free integrated density of
//! states per volume is known in closed form for every (m, n) split:
//!
//! ```text
//!   m = 0:          N_0(E) = ω_d/(2π)^d · E₊^{d/2}
//!   m >= 1, n >= 1: N_0(E) = Π b_j/(2π)^m · ω_n/(2π)^n · Σ_q μ_q (E-Λ_q)₊^{n/2}
//!   m >= 1, n = 0:  N_0(E) = Π b_j/(2π)^m · #{q : Λ_q < E counted with μ_q}
//! ```
//!
//! All counting-type functions here are left-continuous: comparisons against
//! an energy `E` are strict (`< E`).

use crate::error::MagneticError;
use crate::linalg::dense_sym_eigenvalues;
use crate::special::{beta, unit_ball_volume};

/// Default budget of lattice points a ladder enumeration may visit.
pub const DEFAULT_LADDER_BUDGET: u64 = 20_000_000;

/// Canonical invariants (m, n, {b_j}, β) of a constant magnetic field.
#[derive(Clone, Debug, PartialEq)]
pub struct MagneticStructure {
    b: Vec<f64>,
    m: usize,
    n: usize,
    beta: f64,
}

impl MagneticStructure {
    /// Structure with the given nonzero block magnitudes and kernel
    /// dimension. The magnitudes are sorted descending.
    pub fn from_parts(mut b: Vec<f64>, n: usize) -> Self {
        assert!(b.iter().all(|&x| x > 0.0), "block magnitudes must be positive");
        b.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let beta = b.iter().sum();
        let m = b.len();
        MagneticStructure { b, m, n, beta }
    }

    /// Zero field in dimension `d`.
    pub fn zero_field(d: usize) -> Self {
        MagneticStructure {
            b: Vec::new(),
            m: 0,
            n: d,
            beta: 0.0,
        }
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension d = 2m + n.
    pub fn dim(&self) -> usize {
        2 * self.m + self.n
    }

    /// β = Σ b_j = Tr (iB)₊.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Π b_j / (2π)^m, the per-level density prefactor.
    pub fn level_density(&self) -> f64 {
        let two_pi = 2.0 * core::f64::consts::PI;
        self.b.iter().product::<f64>() / two_pi.powi(self.m as i32)
    }
}

/// Canonical invariants of an antisymmetric real `d × d` matrix given
/// row-major. The nonzero eigenvalues `±i b_j` are recovered from the
/// symmetric matrix `BᵀB`, whose spectrum is `{b_j²}` in exact pairs plus
/// `n` zeros.
pub fn canonicalize_field(entries: &[f64], d: usize) -> Result<MagneticStructure, MagneticError> {
    assert_eq!(entries.len(), d * d, "matrix shape mismatch");
    let scale = entries.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = 1e-12 * scale.max(1.0);
    for i in 0..d {
        for j in i..d {
            let defect = (entries[i * d + j] + entries[j * d + i]).abs();
            if defect > tol {
                return Err(MagneticError::NotAntisymmetric { i, j, defect, tol });
            }
        }
    }
    // S = BᵀB = -B², symmetric PSD with eigenvalues {b_j², b_j²} ∪ {0}ⁿ.
    let mut s = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += entries[k * d + i] * entries[k * d + j];
            }
            s[i * d + j] = acc;
        }
    }
    let mut sq = dense_sym_eigenvalues(&s, d);
    sq.reverse(); // descending
    let zero_tol = 1e-10 * scale.max(1.0) * scale.max(1.0);
    let positive: Vec<f64> = sq.into_iter().filter(|&v| v > zero_tol).collect();
    debug_assert!(positive.len() % 2 == 0, "nonzero spectrum must pair up");
    let m = positive.len() / 2;
    let n = d - 2 * m;
    let b: Vec<f64> = (0..m)
        .map(|k| (0.5 * (positive[2 * k] + positive[2 * k + 1])).sqrt())
        .collect();
    Ok(if m == 0 {
        MagneticStructure::zero_field(d)
    } else {
        MagneticStructure::from_parts(b, n)
    })
}

/// Sorted Landau levels with multiplicities, up to an energy cap.
#[derive(Clone, Debug, PartialEq)]
pub struct LandauLadder {
    levels: Vec<(f64, u64)>,
    cap: f64,
}

impl LandauLadder {
    pub fn levels(&self) -> &[(f64, u64)] {
        &self.levels
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }
}

/// Coincidence tolerance for merging lattice sums into one level.
fn level_tolerance(ms: &MagneticStructure) -> f64 {
    1e-9 * ms.b.first().copied().unwrap_or(1.0).max(1.0)
}

/// Enumerate the ladder `{2 Σ b_j ℓ_j <= cap}` with multiplicities, using
/// the default enumeration budget.
pub fn landau_ladder(ms: &MagneticStructure, cap: f64) -> Result<LandauLadder, MagneticError> {
    landau_ladder_budgeted(ms, cap, DEFAULT_LADDER_BUDGET)
}

/// Ladder enumeration with an explicit lattice-point budget.
pub fn landau_ladder_budgeted(
    ms: &MagneticStructure,
    cap: f64,
    budget: u64,
) -> Result<LandauLadder, MagneticError> {
    if ms.m == 0 {
        return Err(MagneticError::ZeroField);
    }
    assert!(cap >= 0.0, "cap must be non-negative");
    let tol = level_tolerance(ms);
    let mut sums: Vec<f64> = Vec::new();
    let mut visited: u64 = 0;
    // Inclusive enumeration: values equal to the cap (within the merge
    // tolerance) are kept.
    let limit = cap + tol;
    collect_sums(&ms.b, 0.0, limit, &mut |v| {
        sums.push(v);
    }, &mut visited, budget)
    .map_err(|_| MagneticError::CapTooLarge { cap, budget })?;
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut levels: Vec<(f64, u64)> = Vec::new();
    for v in sums {
        match levels.last_mut() {
            Some((lv, mult)) if (v - *lv).abs() <= tol => *mult += 1,
            _ => levels.push((v, 1)),
        }
    }
    Ok(LandauLadder { levels, cap })
}

struct BudgetHit;

fn collect_sums(
    b: &[f64],
    base: f64,
    limit: f64,
    visit: &mut impl FnMut(f64),
    visited: &mut u64,
    budget: u64,
) -> Result<(), BudgetHit> {
    if b.is_empty() {
        *visited += 1;
        if *visited > budget {
            return Err(BudgetHit);
        }
        visit(base);
        return Ok(());
    }
    let step = 2.0 * b[0];
    let mut value = base;
    while value < limit {
        collect_sums(&b[1..], value, limit, visit, visited, budget)?;
        value += step;
    }
    Ok(())
}

/// Free integrated density of states `N_0(E)`, left-continuous in `E`.
pub fn free_ids(ms: &MagneticStructure, energy: f64) -> f64 {
    if energy <= 0.0 {
        return 0.0;
    }
    let two_pi = 2.0 * core::f64::consts::PI;
    if ms.m == 0 {
        let d = ms.n;
        return unit_ball_volume(d) / two_pi.powi(d as i32) * energy.powf(d as f64 / 2.0);
    }
    let prefactor = ms.level_density();
    if ms.n == 0 {
        // Pure step case: count lattice points strictly below the energy.
        let mut count: u64 = 0;
        walk_below(&ms.b, 0.0, energy, &mut |_| count += 1);
        prefactor * count as f64
    } else {
        let half_n = ms.n as f64 / 2.0;
        let mut acc = 0.0;
        walk_below(&ms.b, 0.0, energy, &mut |v| {
            acc += (energy - v).powf(half_n);
        });
        prefactor * unit_ball_volume(ms.n) / two_pi.powi(ms.n as i32) * acc
    }
}

/// Visit every lattice sum strictly below `limit` (no materialization, no
/// budget: cost grows like `limit^m`).
fn walk_below(b: &[f64], base: f64, limit: f64, visit: &mut impl FnMut(f64)) {
    if b.is_empty() {
        visit(base);
        return;
    }
    let step = 2.0 * b[0];
    let mut value = base;
    while value < limit {
        walk_below(&b[1..], value, limit, visit);
        value += step;
    }
}

/// The high-energy coefficient `ω_d/(2π)^d = lim E^{-d/2} N_0(E)`,
/// independent of the field.
pub fn semiclassical_coefficient(d: usize) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    unit_ball_volume(d) / two_pi.powi(d as i32)
}

/// Eigenvalue counting measure of the longitudinal operator: jumps below
/// the essential-spectrum floor.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingMeasure {
    jumps: Vec<(f64, u32)>,
    essential_floor: f64,
}

impl CountingMeasure {
    /// Build from raw eigenvalues (weights merge within `1e-12` of the
    /// level scale). Every level must sit below the floor.
    pub fn from_levels(levels: &[f64], essential_floor: f64) -> Self {
        let mut sorted = levels.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = sorted.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let tol = 1e-12 * scale;
        let mut jumps: Vec<(f64, u32)> = Vec::new();
        for v in sorted {
            assert!(
                v < essential_floor,
                "level {v} not below essential floor {essential_floor}"
            );
            match jumps.last_mut() {
                Some((lv, w)) if (v - *lv).abs() <= tol => *w += 1,
                _ => jumps.push((v, 1)),
            }
        }
        CountingMeasure {
            jumps,
            essential_floor,
        }
    }

    pub fn jumps(&self) -> &[(f64, u32)] {
        &self.jumps
    }

    pub fn essential_floor(&self) -> f64 {
        self.essential_floor
    }

    /// ρ(E): number of levels strictly below E.
    pub fn count_below(&self, energy: f64) -> u64 {
        self.jumps
            .iter()
            .take_while(|(e, _)| *e < energy)
            .map(|(_, w)| *w as u64)
            .sum()
    }
}

/// The convolution `(N_0 * dρ)(E) = Σ_j w_j N_0(E - E_j)` for `E` below the
/// essential-spectrum floor.
pub fn convolve_with_counting(
    ms: &MagneticStructure,
    rho: &CountingMeasure,
    energy: f64,
) -> Result<f64, MagneticError> {
    if energy >= rho.essential_floor {
        return Err(MagneticError::AboveEssentialFloor {
            energy,
            floor: rho.essential_floor,
        });
    }
    let mut acc = 0.0;
    for &(e_j, w) in &rho.jumps {
        if e_j < energy {
            acc += w as f64 * free_ids(ms, energy - e_j);
        }
    }
    Ok(acc)
}

/// Leading coefficient of `ν_V(E) ~ coeff · E^{d/2 + θ}` when the
/// longitudinal counting function grows like `ρ(E) = C E^θ (1 + o(1))`:
///
/// ```text
///   coeff = C · dθ/(d + 2θ) · B(d/2, θ) · ω_d/(2π)^d
/// ```
pub fn karamata_coefficient(d: usize, theta: f64, c: f64) -> f64 {
    assert!(d >= 1 && theta > 0.0 && c > 0.0);
    let df = d as f64;
    c * (df * theta / (df + 2.0 * theta)) * beta(df / 2.0, theta) * semiclassical_coefficient(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    #[test]
    fn canonicalize_single_block() {
        let b = 1.0;
        let ms = canonicalize_field(&[0.0, b, -b, 0.0], 2).unwrap();
        assert_eq!(ms.m(), 1);
        assert_eq!(ms.n(), 0);
        assert_relative_eq!(ms.b()[0], 1.0, max_relative = 1e-10);
        assert_relative_eq!(ms.beta(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn canonicalize_zero_field() {
        let ms = canonicalize_field(&[0.0; 9], 3).unwrap();
        assert_eq!(ms.m(), 0);
        assert_eq!(ms.n(), 3);
        assert!(ms.b().is_empty());
        assert_eq!(ms.beta(), 0.0);
    }

    #[test]
    fn canonicalize_two_blocks() {
        // blocks diag([0,2;-2,0], [0,1;-1,0])
        #[rustfmt::skip]
        let b = [
            0.0,  2.0, 0.0, 0.0,
            -2.0, 0.0, 0.0, 0.0,
            0.0,  0.0, 0.0, 1.0,
            0.0,  0.0, -1.0, 0.0,
        ];
        let ms = canonicalize_field(&b, 4).unwrap();
        assert_eq!(ms.m(), 2);
        assert_eq!(ms.n(), 0);
        assert_relative_eq!(ms.b()[0], 2.0, max_relative = 1e-10);
        assert_relative_eq!(ms.b()[1], 1.0, max_relative = 1e-10);
        assert_relative_eq!(ms.beta(), 3.0, max_relative = 1e-10);
    }

    #[test]
    fn canonicalize_rejects_asymmetry() {
        let err = canonicalize_field(&[0.0, 1.0, 1.0, 0.0], 2).unwrap_err();
        match err {
            MagneticError::NotAntisymmetric { i, j, .. } => {
                assert_eq!((i, j), (0, 1));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ladder_single_frequency() {
        let ms = MagneticStructure::from_parts(vec![1.0], 0);
        let ladder = landau_ladder(&ms, 5.0).unwrap();
        assert_eq!(ladder.levels(), &[(0.0, 1), (2.0, 1), (4.0, 1)]);
    }

    #[test]
    fn ladder_two_frequencies() {
        let ms = MagneticStructure::from_parts(vec![2.0, 1.0], 0);
        let ladder = landau_ladder(&ms, 8.0).unwrap();
        let expected = [(0.0, 1), (2.0, 1), (4.0, 2), (6.0, 2), (8.0, 3)];
        assert_eq!(ladder.levels().len(), expected.len());
        for ((v, m), (ev, em)) in ladder.levels().iter().zip(expected.iter()) {
            assert_relative_eq!(*v, *ev, epsilon = 1e-9);
            assert_eq!(m, em);
        }
    }

    #[test]
    fn ladder_equal_frequencies() {
        let ms = MagneticStructure::from_parts(vec![1.0, 1.0], 0);
        let ladder = landau_ladder(&ms, 4.0).unwrap();
        let expected = [(0.0, 1), (2.0, 2), (4.0, 3)];
        for ((v, m), (ev, em)) in ladder.levels().iter().zip(expected.iter()) {
            assert_relative_eq!(*v, *ev, epsilon = 1e-9);
            assert_eq!(m, em);
        }
    }

    /// Independent brute-force enumeration with integer keys: the ladder
    /// for rational b is exact, so scaled rounding is an exact oracle.
    fn brute_ladder(b: &[f64], cap: f64, scale: f64) -> Vec<(f64, u64)> {
        use std::collections::BTreeMap;
        let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
        let bounds: Vec<usize> = b.iter().map(|bj| (cap / (2.0 * bj)).floor() as usize).collect();
        let mut idx = vec![0usize; b.len()];
        loop {
            let sum: f64 = idx.iter().zip(b).map(|(l, bj)| 2.0 * bj * *l as f64).sum();
            if sum <= cap + 1e-9 {
                *counts.entry((sum * scale).round() as i64).or_insert(0) += 1;
            }
            // advance the multi-index
            let mut axis = 0;
            loop {
                if axis == b.len() {
                    return counts
                        .into_iter()
                        .map(|(k, v)| (k as f64 / scale, v))
                        .collect();
                }
                idx[axis] += 1;
                if idx[axis] <= bounds[axis] {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }

    #[test]
    fn ladder_matches_brute_force() {
        let cases: Vec<(Vec<f64>, f64)> = vec![
            (vec![1.0], 50.0),
            (vec![3.0, 2.0], 40.0),
            (vec![1.5, 1.0, 0.5], 20.0),
            (vec![2.0, 2.0, 1.0], 30.0),
        ];
        for (b, cap) in cases {
            let ms = MagneticStructure::from_parts(b.clone(), 0);
            let ladder = landau_ladder(&ms, cap).unwrap();
            let brute = brute_ladder(&b, cap, 1024.0);
            assert_eq!(ladder.levels().len(), brute.len(), "b = {b:?}");
            for ((v, m), (bv, bm)) in ladder.levels().iter().zip(brute.iter()) {
                assert_relative_eq!(*v, *bv, epsilon = 1e-8);
                assert_eq!(m, bm, "multiplicity at {v} for b = {b:?}");
            }
        }
    }

    #[test]
    fn ladder_zero_field_and_budget_errors() {
        let ms = MagneticStructure::zero_field(2);
        assert_eq!(landau_ladder(&ms, 1.0).unwrap_err(), MagneticError::ZeroField);

        let ms = MagneticStructure::from_parts(vec![1.0], 0);
        let err = landau_ladder_budgeted(&ms, 1000.0, 10).unwrap_err();
        assert!(matches!(err, MagneticError::CapTooLarge { .. }));
    }

    #[test]
    fn free_ids_zero_field_1d() {
        let ms = MagneticStructure::zero_field(1);
        assert_relative_eq!(free_ids(&ms, PI * PI), 1.0, max_relative = 1e-12);
        // N_0(E) = sqrt(E)/π
        assert_relative_eq!(free_ids(&ms, 4.0), 2.0 / PI, max_relative = 1e-12);
    }

    #[test]
    fn free_ids_full_rank_counts_levels() {
        let ms = MagneticStructure::from_parts(vec![1.0], 0);
        // Levels 0 and 2 lie strictly below 3.
        assert_relative_eq!(free_ids(&ms, 3.0), 1.0 / PI, max_relative = 1e-12);
        // Strictness at a level: E = 2 counts only the ground level.
        assert_relative_eq!(free_ids(&ms, 2.0), 1.0 / (2.0 * PI), max_relative = 1e-12);
    }

    #[test]
    fn free_ids_nonpositive_energy() {
        for ms in [
            MagneticStructure::zero_field(3),
            MagneticStructure::from_parts(vec![2.0], 1),
            MagneticStructure::from_parts(vec![1.0, 0.5], 0),
        ] {
            assert_eq!(free_ids(&ms, 0.0), 0.0);
            assert_eq!(free_ids(&ms, -5.0), 0.0);
        }
    }

    #[test]
    fn free_ids_is_monotone_and_left_continuous() {
        let cases = [
            MagneticStructure::zero_field(2),
            MagneticStructure::from_parts(vec![1.0], 0),
            MagneticStructure::from_parts(vec![1.0], 1),
            MagneticStructure::from_parts(vec![2.0, 1.0], 0),
        ];
        for ms in &cases {
            let mut prev = 0.0;
            let mut e = -1.0;
            while e < 12.0 {
                let v = free_ids(ms, e);
                assert!(v >= prev - 1e-14, "monotone failed at {e}");
                prev = v;
                e += 0.0137;
            }
        }
        // Left-continuity at a jump (n = 0): value at Λ equals the limit
        // from below, not from above.
        let ms = MagneticStructure::from_parts(vec![1.0], 0);
        let at = free_ids(&ms, 2.0);
        let below = free_ids(&ms, 2.0 - 1e-12);
        let above = free_ids(&ms, 2.0 + 1e-12);
        assert_eq!(at, below);
        assert!(above > at);
    }

    #[test]
    fn free_ids_jumps_match_ladder_multiplicities() {
        let ms = MagneticStructure::from_parts(vec![2.0, 1.0], 0);
        let ladder = landau_ladder(&ms, 10.0).unwrap();
        let eps = 1e-7;
        for &(level, mult) in ladder.levels() {
            let jump = free_ids(&ms, level + eps) - free_ids(&ms, level - eps);
            assert_relative_eq!(
                jump,
                mult as f64 * ms.level_density(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn semiclassical_values() {
        assert_relative_eq!(semiclassical_coefficient(1), 1.0 / PI, max_relative = 1e-12);
        assert_relative_eq!(semiclassical_coefficient(2), 1.0 / (4.0 * PI), max_relative = 1e-12);
        assert_relative_eq!(
            semiclassical_coefficient(3),
            1.0 / (6.0 * PI * PI),
            max_relative = 1e-12
        );
    }

    #[test]
    fn semiclassical_limit_reached_for_all_field_splits() {
        // E^{-d/2} N_0(E) approaches ω_d/(2π)^d regardless of B, d <= 4.
        let cases = [
            MagneticStructure::from_parts(vec![1.0], 0),      // d = 2
            MagneticStructure::from_parts(vec![1.0], 1),      // d = 3
            MagneticStructure::from_parts(vec![1.0], 2),      // d = 4
            MagneticStructure::from_parts(vec![1.3, 0.7], 0), // d = 4
        ];
        for ms in &cases {
            let d = ms.dim();
            let target = semiclassical_coefficient(d);
            // Energies off the ladder arithmetic, so errors are generic.
            let errs: Vec<f64> = [100.5, 1000.5, 10000.5]
                .iter()
                .map(|&e: &f64| (free_ids(ms, e) / e.powf(d as f64 / 2.0) - target).abs() / target)
                .collect();
            assert!(errs[0] >= errs[1] && errs[1] >= errs[2], "trend {errs:?}");
            assert!(errs[2] < 0.02, "relative error at 1e4: {}", errs[2]);
        }
        // Zero field: the relation is exact at every energy.
        let ms = MagneticStructure::zero_field(2);
        assert_relative_eq!(
            free_ids(&ms, 123.0) / 123.0,
            semiclassical_coefficient(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn convolution_examples() {
        // Single jump at -1 reduces to a shifted free density:
        // (N_0 * dρ)(E_1 + 3) = N_0(3) = 1/π for the b = 1 full-rank field.
        let ms = MagneticStructure::from_parts(vec![1.0], 0);
        let rho = CountingMeasure::from_levels(&[-1.0], f64::INFINITY);
        assert_relative_eq!(
            convolve_with_counting(&ms, &rho, -1.0 + 3.0).unwrap(),
            1.0 / PI,
            max_relative = 1e-12
        );
        // Below the lowest jump everything vanishes.
        assert_eq!(convolve_with_counting(&ms, &rho, -2.0).unwrap(), 0.0);

        // Two quadratic terms at d = 2, zero field, evaluated just below
        // the essential floor at 0: (4 + 1)/(4π).
        let ms = MagneticStructure::zero_field(2);
        let rho = CountingMeasure::from_levels(&[-4.0, -1.0], 0.0);
        assert_relative_eq!(
            convolve_with_counting(&ms, &rho, -1e-12).unwrap(),
            5.0 / (4.0 * PI),
            max_relative = 1e-9
        );
    }

    #[test]
    fn convolution_rejects_energies_at_the_floor() {
        let ms = MagneticStructure::zero_field(1);
        let rho = CountingMeasure::from_levels(&[-1.0], 0.5);
        assert!(matches!(
            convolve_with_counting(&ms, &rho, 0.5),
            Err(MagneticError::AboveEssentialFloor { .. })
        ));
    }

    #[test]
    fn convolution_with_unit_jump_at_zero_is_free_ids() {
        let ms = MagneticStructure::from_parts(vec![1.5, 0.5], 1);
        let rho = CountingMeasure::from_levels(&[0.0], f64::INFINITY);
        let mut e = -0.5;
        while e < 9.0 {
            assert_relative_eq!(
                convolve_with_counting(&ms, &rho, e).unwrap(),
                free_ids(&ms, e),
                max_relative = 1e-13,
                epsilon = 1e-300
            );
            e += 0.173;
        }
    }

    #[test]
    fn karamata_closed_forms() {
        assert_relative_eq!(
            karamata_coefficient(2, 1.0, 1.0),
            1.0 / (8.0 * PI),
            max_relative = 1e-12
        );
        // Linearity in C.
        assert_relative_eq!(
            karamata_coefficient(3, 0.7, 2.0),
            2.0 * karamata_coefficient(3, 0.7, 1.0),
            max_relative = 1e-12
        );
        // d = 1, θ = 1/2: dθ/(d+2θ)·B(1/2,1/2)·ω_1/(2π) = (1/4)·π·(1/π) = 1/4.
        assert_relative_eq!(karamata_coefficient(1, 0.5, 1.0), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn karamata_matches_convolution_asymptotics() {
        // Oracle: ρ with jumps at j² has ρ(E) = √E (1 + o(1)), i.e.
        // C = 1, θ = 1/2 at d = 1. The convolution over the actual jumps
        // must approach coeff·E^{d/2+θ} = coeff·E.
        let ms = MagneticStructure::zero_field(1);
        let levels: Vec<f64> = (1..=1000u32).map(|j| (j as f64) * (j as f64)).collect();
        let rho = CountingMeasure::from_levels(&levels, f64::INFINITY);
        let e = 1e6 - 0.5;
        let conv = convolve_with_counting(&ms, &rho, e).unwrap();
        let coeff = karamata_coefficient(1, 0.5, 1.0);
        let ratio = conv / (coeff * e);
        assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
    }
}
