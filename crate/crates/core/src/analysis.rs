//! Two-sided estimates, plateau checks, and Lifshits-tail fits.
//!
//! The sandwich comparisons come in two strengths, matching what holds at
//! finite volume:
//!
//! - per-realization **integer inequalities** (Weyl monotonicity and the
//!   bound-state projection bound) hold exactly on every realization and
//!   are checked with zero slack;
//! - the **edge sandwiches** relating the surface density to reduced-
//!   operator densities are limit statements, so ensemble means are
//!   compared with a statistical slack of `stat_tol` standard errors
//!   (default 2).
//!
//! The Lifshits fitter performs least squares on the double-log transform
//! `ln|ln y|` against `ln λ` or `ln|ln λ|`; only points with `y ∈ (0, 1)`
//! enter (elsewhere the transform is undefined).

use crate::counting::{idss_estimate, Counter, EnsembleCurve, EstimateConfig, SurfaceModel};
use crate::error::AnalysisError;
use crate::hamiltonian::{assemble, build_transverse, ParallelSpectrum};
use crate::magnetic::{convolve_with_counting, CountingMeasure, MagneticStructure};
use crate::error::CountingError;

/// Default statistical slack on ensemble-mean comparisons, in standard
/// errors.
pub const DEFAULT_STAT_TOL: f64 = 2.0;

// ---------------------------------------------------------------------------
// Admissible parameter intervals
// ---------------------------------------------------------------------------

/// Admissible open interval for δ at the ground edge:
/// `(M/(M + E2 - E1 - λ*), 1)`.
pub fn ground_delta_interval(m: f64, e1: f64, e2: f64, lambda_star: f64) -> (f64, f64) {
    (m / (m + e2 - e1 - lambda_star), 1.0)
}

/// Lower endpoint of the admissible δ₋ range at an internal edge:
/// `(M/(E_j - E_{j-1} - M), ∞)`.
pub fn internal_delta_minus_min(m: f64, e_prev: f64, e_j: f64) -> f64 {
    m / (e_j - e_prev - m)
}

/// Upper endpoint of the admissible λ* range at an internal edge:
/// `min{E_{j+1} - E_j, (1 + δ₋⁻¹) M}`.
pub fn internal_lambda_star_max(delta_minus: f64, m: f64, e_j: f64, e_next: f64) -> f64 {
    (e_next - e_j).min((1.0 + 1.0 / delta_minus) * m)
}

/// Admissible open interval for δ₊ at an internal edge:
/// `(M/(M + E_{j+1} - E_j - λ*), 1)`.
pub fn internal_delta_plus_interval(
    m: f64,
    e_j: f64,
    e_next: f64,
    lambda_star: f64,
) -> (f64, f64) {
    (m / (m + e_next - e_j - lambda_star), 1.0)
}

fn require_open(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), AnalysisError> {
    if value > lo && value < hi {
        Ok(())
    } else {
        Err(AnalysisError::BadParameters {
            name,
            value,
            lo,
            hi,
        })
    }
}

// ---------------------------------------------------------------------------
// Sandwich reports
// ---------------------------------------------------------------------------

/// Outcome of a (lower ≤ target ≤ upper) comparison on a grid.
#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub energies: Vec<f64>,
    pub lower: Vec<f64>,
    pub target: Vec<f64>,
    pub upper: Vec<f64>,
    /// Standard error of the target mean, per energy (zeros for closed-form
    /// targets).
    pub std_err: Vec<f64>,
    pub stat_tol: f64,
    /// Per-energy pass: lower - tol·se <= target <= upper + tol·se.
    pub pass: Vec<bool>,
    /// Exact per-realization violations (description, count); empty when no
    /// exact route applies.
    pub exact_violations: Vec<(String, usize)>,
    pub params: String,
}

impl SandwichReport {
    fn evaluate(
        energies: Vec<f64>,
        lower: Vec<f64>,
        target: Vec<f64>,
        upper: Vec<f64>,
        std_err: Vec<f64>,
        stat_tol: f64,
        params: String,
    ) -> Self {
        let pass = energies
            .iter()
            .enumerate()
            .map(|(i, _)| {
                // Statistical slack plus a rounding guard: the means are
                // averages of integer counts and can disagree in the last
                // few bits even when the underlying integers coincide.
                let rounding = 1e-12
                    * lower[i]
                        .abs()
                        .max(target[i].abs())
                        .max(upper[i].abs())
                        .max(1.0);
                let slack = stat_tol * std_err[i] + rounding;
                lower[i] <= target[i] + slack && target[i] <= upper[i] + slack
            })
            .collect();
        SandwichReport {
            energies,
            lower,
            target,
            upper,
            std_err,
            stat_tol,
            pass,
            exact_violations: Vec::new(),
            params,
        }
    }

    pub fn passed(&self) -> bool {
        self.pass.iter().all(|p| *p) && self.exact_violations.iter().all(|(_, n)| *n == 0)
    }

    /// CSV with one row per grid energy.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("E,lower,target,upper,std_err,pass\n");
        for i in 0..self.energies.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.energies[i],
                self.lower[i],
                self.target[i],
                self.upper[i],
                self.std_err[i],
                self.pass[i] as u8
            ));
        }
        out
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let passed = self.pass.iter().filter(|p| **p).count();
        let mut s = format!(
            "sandwich [{}]: {passed}/{} grid points within {}·SE\n",
            self.params,
            self.pass.len(),
            self.stat_tol
        );
        for (label, n) in &self.exact_violations {
            s.push_str(&format!("exact check {label}: {n} violations\n"));
        }
        s.push_str(if self.passed() { "PASS\n" } else { "FAIL\n" });
        s
    }
}

/// Global bounds: `(N_0 * dρ)(E - M) <= ν̂(E) <= (N_0 * dρ)(E)` against the
/// closed-form convolution.
pub fn global_sandwich(
    nu: &EnsembleCurve,
    ms: &MagneticStructure,
    rho: &CountingMeasure,
    m_bound: f64,
    stat_tol: f64,
) -> Result<SandwichReport, AnalysisError> {
    let stats = nu.stats();
    let mut lower = Vec::with_capacity(stats.energies.len());
    let mut upper = Vec::with_capacity(stats.energies.len());
    for &e in &stats.energies {
        let up = convolve_with_counting(ms, rho, e).map_err(|_| AnalysisError::BadParameters {
            name: "energy",
            value: e,
            lo: f64::NEG_INFINITY,
            hi: rho.essential_floor(),
        })?;
        let lo = convolve_with_counting(ms, rho, e - m_bound).unwrap_or(0.0);
        lower.push(lo);
        upper.push(up);
    }
    Ok(SandwichReport::evaluate(
        stats.energies,
        lower,
        stats.mean,
        upper,
        stats.std_err,
        stat_tol,
        format!("global, M={m_bound}"),
    ))
}

/// Exact finite-volume sandwich per realization:
/// `N(H_0; E - M) <= N(H_ω; E) <= N(H_0; E)` as integer inequalities.
/// Runs the assembled pipeline on matched realizations and reports
/// violations (expected: none).
pub struct ExactSandwichOutcome {
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub checks: usize,
}

pub fn exact_sandwich_check(
    model: &SurfaceModel,
    spectrum: &ParallelSpectrum,
    cfg: &EstimateConfig,
    m_bound: f64,
) -> Result<ExactSandwichOutcome, CountingError> {
    let nu = idss_estimate(model, spectrum, cfg)?;
    let transverse = build_transverse(cfg.window, &model.field)?;
    let h0 = assemble(&transverse, spectrum, None, cfg.opts.budget)?;
    let counter = Counter::new(h0.op(), &cfg.opts, 2 * cfg.energies.len());
    let mut lower_violations = 0;
    let mut upper_violations = 0;
    let mut checks = 0;
    for (k, &e) in cfg.energies.iter().enumerate() {
        let h0_at_e = counter.count(e)? as u64;
        let h0_shifted = counter.count(e - m_bound)? as u64;
        for row in &nu.counts {
            checks += 1;
            if h0_shifted > row[k] {
                lower_violations += 1;
            }
            if row[k] > h0_at_e {
                upper_violations += 1;
            }
        }
    }
    Ok(ExactSandwichOutcome {
        lower_violations,
        upper_violations,
        checks,
    })
}

/// Ground-edge sandwich (simple lowest level):
/// `N̂_{W_1}(λ) <= ν̂(E_1 + λ) <= N̂_{(1-δ)W_1}(λ)` on `λ ∈ (0, λ*]`, with the
/// projection bound `count(H_ω; E_1 + λ) >= count(H_⊥ + W_1; λ)` checked
/// exactly on matched realizations.
#[allow(clippy::too_many_arguments)]
pub fn ground_edge_sandwich(
    nu: &EnsembleCurve,
    reduced_full: &EnsembleCurve,
    reduced_scaled: &EnsembleCurve,
    lambdas: &[f64],
    e1: f64,
    e2: f64,
    m_bound: f64,
    lambda_star: f64,
    delta: f64,
    stat_tol: f64,
) -> Result<SandwichReport, AnalysisError> {
    require_open("lambda_star", lambda_star, 0.0, e2 - e1)?;
    let (dlo, dhi) = ground_delta_interval(m_bound, e1, e2, lambda_star);
    require_open("delta", delta, dlo, dhi)?;
    for &l in lambdas {
        require_open("lambda", l, 0.0, lambda_star * (1.0 + 1e-12))?;
    }
    let nu_stats = nu.stats();
    let lower = reduced_full.stats();
    let upper = reduced_scaled.stats();
    let mut report = SandwichReport::evaluate(
        lambdas.to_vec(),
        lower.mean,
        nu_stats.mean,
        upper.mean,
        nu_stats.std_err,
        stat_tol,
        format!("ground edge, E1={e1}, E2={e2}, M={m_bound}, delta={delta}"),
    );
    // Exact projection bound per realization (zero slack).
    let mut lower_viol = 0;
    if nu.counts.len() == reduced_full.counts.len() {
        for (nr, rr) in nu.counts.iter().zip(&reduced_full.counts) {
            for (a, b) in nr.iter().zip(rr) {
                if a < b {
                    lower_viol += 1;
                }
            }
        }
        report
            .exact_violations
            .push(("projection lower bound".into(), lower_viol));
    }
    // Exact scaled upper bound per realization (holds under admissibility).
    let mut upper_viol = 0;
    if nu.counts.len() == reduced_scaled.counts.len() {
        for (nr, rr) in nu.counts.iter().zip(&reduced_scaled.counts) {
            for (a, b) in nr.iter().zip(rr) {
                if a > b {
                    upper_viol += 1;
                }
            }
        }
        report
            .exact_violations
            .push(("scaled upper bound".into(), upper_viol));
    }
    Ok(report)
}

/// Internal-edge sandwich at a gapped level `E_j` (1-based j >= 2):
/// `N̂_{(1+δ₋)W_j}(λ) <= ν̂(E_j + λ) - ν̂(E_j) <= N̂_{(1-δ₊)W_j}(λ)`.
#[allow(clippy::too_many_arguments)]
pub fn internal_edge_sandwich(
    nu_above: &EnsembleCurve,
    nu_edge: &EnsembleCurve,
    reduced_minus: &EnsembleCurve,
    reduced_plus: &EnsembleCurve,
    lambdas: &[f64],
    levels_with_floor: &[f64],
    j: usize,
    m_bound: f64,
    delta_minus: f64,
    delta_plus: f64,
    lambda_star: f64,
    stat_tol: f64,
) -> Result<SandwichReport, AnalysisError> {
    assert!(j >= 2, "internal edges start at the second level");
    if levels_with_floor.len() < j + 1 {
        return Err(AnalysisError::HypothesisViolated {
            message: format!(
                "need levels through E_{} (including the floor as E_(r+1))",
                j + 1
            ),
        });
    }
    let e_prev = levels_with_floor[j - 2];
    let e_j = levels_with_floor[j - 1];
    let e_next = levels_with_floor[j];
    if !(e_prev < e_j && e_j < e_next) {
        return Err(AnalysisError::HypothesisViolated {
            message: format!("levels not strictly gapped: {e_prev}, {e_j}, {e_next}"),
        });
    }
    if !(m_bound < e_j - e_prev) {
        return Err(AnalysisError::HypothesisViolated {
            message: format!("M = {m_bound} not below the lower gap {}", e_j - e_prev),
        });
    }
    require_open(
        "delta_minus",
        delta_minus,
        internal_delta_minus_min(m_bound, e_prev, e_j),
        f64::INFINITY,
    )?;
    require_open(
        "lambda_star",
        lambda_star,
        0.0,
        internal_lambda_star_max(delta_minus, m_bound, e_j, e_next),
    )?;
    let (plo, phi) = internal_delta_plus_interval(m_bound, e_j, e_next, lambda_star);
    require_open("delta_plus", delta_plus, plo, phi)?;

    let above = nu_above.stats();
    let edge = nu_edge.stats();
    let target: Vec<f64> = above.mean.iter().map(|v| v - edge.mean[0]).collect();
    let std_err: Vec<f64> = above
        .std_err
        .iter()
        .map(|s| (s * s + edge.std_err[0] * edge.std_err[0]).sqrt())
        .collect();
    let lower = reduced_minus.stats();
    let upper = reduced_plus.stats();
    Ok(SandwichReport::evaluate(
        lambdas.to_vec(),
        lower.mean,
        target,
        upper.mean,
        std_err,
        stat_tol,
        format!(
            "internal edge j={j}, E_j={e_j}, M={m_bound}, delta-={delta_minus}, delta+={delta_plus}"
        ),
    ))
}

// ---------------------------------------------------------------------------
// Plateau
// ---------------------------------------------------------------------------

/// Outcome of the gap-plateau check on `[E_j - M, E_j]`.
#[derive(Clone, Debug)]
pub struct PlateauReport {
    /// Realizations whose counts are not constant across the window.
    pub nonconstant_realizations: usize,
    pub mean_value: f64,
    pub expected: f64,
    pub rel_error: f64,
    pub rel_tol: f64,
}

impl PlateauReport {
    pub fn passed(&self) -> bool {
        self.nonconstant_realizations == 0 && self.rel_error <= self.rel_tol
    }
}

/// Check that the estimated surface density is constant on the window and
/// equal to `(j-1) · Π b/(2π)^m` within `rel_tol` (full-rank fields).
pub fn plateau_check(
    nu_window: &EnsembleCurve,
    j: usize,
    ms: &MagneticStructure,
    rel_tol: f64,
) -> PlateauReport {
    assert!(ms.n() == 0, "plateau requires a full-rank field");
    assert!(j >= 1);
    let mut nonconstant = 0;
    for row in &nu_window.counts {
        if row.iter().any(|c| *c != row[0]) {
            nonconstant += 1;
        }
    }
    let stats = nu_window.stats();
    let mean_value = stats.mean[stats.mean.len() - 1];
    let expected = (j as f64 - 1.0) * ms.level_density();
    let rel_error = if expected == 0.0 {
        mean_value.abs()
    } else {
        (mean_value - expected).abs() / expected
    };
    PlateauReport {
        nonconstant_realizations: nonconstant,
        mean_value,
        expected,
        rel_error,
        rel_tol,
    }
}

// ---------------------------------------------------------------------------
// Lifshits fits
// ---------------------------------------------------------------------------

/// Abscissa of the double-log regression.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitAxis {
    /// slope of ln|ln y| against ln λ (power-law tails).
    LogLambda,
    /// slope of ln|ln y| against ln|ln λ| (Gaussian-class tails).
    LogLogLambda,
}

/// Least-squares fit of the double-log transform.
#[derive(Clone, Debug)]
pub struct LifshitsFit {
    pub axis: FitAxis,
    /// (abscissa, ln|ln y|) pairs that entered the regression.
    pub points: Vec<(f64, f64)>,
    pub masked: usize,
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_err: f64,
    /// Half-width of the 95% confidence interval on the slope.
    pub ci_half_width: f64,
}

impl LifshitsFit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("abscissa,double_log\n");
        for (a, t) in &self.points {
            out.push_str(&format!("{a},{t}\n"));
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "axis: {:?}\npoints: {} (masked {})\nslope: {} ± {} (95% CI)\nintercept: {}\n",
            self.axis,
            self.points.len(),
            self.masked,
            self.slope,
            self.ci_half_width,
            self.intercept
        )
    }
}

/// Two-sided 97.5% Student quantiles for small samples; beyond the table
/// the normal quantile is close enough for a reported CI.
fn t_quantile_975(df: usize) -> f64 {
    const TABLE: [(usize, f64); 14] = [
        (1, 12.706),
        (2, 4.303),
        (3, 3.182),
        (4, 2.776),
        (5, 2.571),
        (6, 2.447),
        (7, 2.365),
        (8, 2.306),
        (9, 2.262),
        (10, 2.228),
        (12, 2.179),
        (15, 2.131),
        (20, 2.086),
        (30, 2.042),
    ];
    for &(d, t) in TABLE.iter().rev() {
        if df >= d {
            if d == 30 && df > 30 {
                return 1.96 + 2.4 / df as f64;
            }
            return t;
        }
    }
    12.706
}

/// Fit the Lifshits exponent on `λ ∈ [window.0, window.1]`. Target slopes
/// for the supported tail classes, against `ln λ`:
/// `-2/(ϰ-2)` (full-rank fields, power-law sites), `-d/(ϰ-d)` and `-d/2`
/// (zero field); against `ln|ln λ|`: `1 + 2/β` (stretched-Gaussian sites)
/// and `2` (compactly supported sites under a full-rank field).
pub fn fit_lifshits(
    lambdas: &[f64],
    values: &[f64],
    axis: FitAxis,
    window: (f64, f64),
) -> Result<LifshitsFit, AnalysisError> {
    assert_eq!(lambdas.len(), values.len());
    let mut points = Vec::new();
    let mut masked = 0;
    let mut in_window = 0;
    for (&l, &y) in lambdas.iter().zip(values) {
        if l < window.0 || l > window.1 {
            continue;
        }
        in_window += 1;
        if !(y > 0.0 && y < 1.0) || l <= 0.0 {
            masked += 1;
            continue;
        }
        let a = match axis {
            FitAxis::LogLambda => l.ln(),
            FitAxis::LogLogLambda => {
                if l >= 1.0 {
                    masked += 1;
                    continue;
                }
                (-l.ln()).ln()
            }
        };
        points.push((a, (-y.ln()).ln()));
    }
    if in_window > 0 && points.is_empty() {
        return Err(AnalysisError::DegenerateWindow);
    }
    if points.len() < 5 {
        return Err(AnalysisError::TooFewPoints {
            usable: points.len(),
            needed: 5,
        });
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(a, _)| a).sum();
    let sy: f64 = points.iter().map(|(_, t)| t).sum();
    let mx = sx / n;
    let my = sy / n;
    let sxx: f64 = points.iter().map(|(a, _)| (a - mx) * (a - mx)).sum();
    let sxy: f64 = points.iter().map(|(a, t)| (a - mx) * (t - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|(a, t)| {
            let r = t - (slope * a + intercept);
            r * r
        })
        .sum();
    let df = points.len().saturating_sub(2);
    let slope_std_err = if df > 0 {
        (ss_res / df as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    let ci_half_width = t_quantile_975(df.max(1)) * slope_std_err;
    Ok(LifshitsFit {
        axis,
        points,
        masked,
        slope,
        intercept,
        slope_std_err,
        ci_half_width,
    })
}

// ---------------------------------------------------------------------------
// Scaled reduced-operator consistency
// ---------------------------------------------------------------------------

/// Exact per-realization consistency: a stronger potential never increases
/// a counting function. Returns the number of violations of
/// `counts(stronger) <= counts(base) <= counts(weaker)`.
pub fn scaled_monotonicity_violations(
    stronger: &EnsembleCurve,
    base: &EnsembleCurve,
    weaker: &EnsembleCurve,
) -> usize {
    let mut violations = 0;
    for ((s, b), w) in stronger
        .counts
        .iter()
        .zip(&base.counts)
        .zip(&weaker.counts)
    {
        for ((cs, cb), cw) in s.iter().zip(b).zip(w) {
            if cs > cb || cb > cw {
                violations += 1;
            }
        }
    }
    violations
}
