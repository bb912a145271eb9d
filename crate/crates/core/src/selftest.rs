//! Fast self-test battery: the worked examples and invariants of every
//! module, runnable from the command line. Each check is independent and
//! cheap (the whole battery runs in seconds); the heavyweight acceptance
//! studies live in the integration suite instead.

use crate::analysis::{
    fit_lifshits, ground_delta_interval, internal_delta_minus_min, internal_lambda_star_max,
    FitAxis,
};
use crate::counting::{
    count_below, curve_csv, idss_estimate, superadditivity_check, CountOptions, Counter,
    EstimateConfig, SurfaceModel,
};
use crate::disorder::{
    coupling_field, evaluate_potential, reduce_site, reduced_field, sample_couplings, sup_bound,
    CouplingLaw, DisorderRealization, EnvelopeKind, LongitudinalFactor, SingleSiteProfile,
};
use crate::error::{AnalysisError, BuildError, DisorderError, MagneticError};
use crate::grid::LatticeWindow;
use crate::hamiltonian::{
    assemble, build_transverse, ground_energy, magnetic_translate, reduced_operator,
    solve_parallel, ParallelGrid, ParallelModel, PotentialKind,
};
use crate::linalg::HermitianOp;
use crate::magnetic::{
    canonicalize_field, convolve_with_counting, free_ids, karamata_coefficient, landau_ladder,
    semiclassical_coefficient, CountingMeasure, MagneticStructure,
};
use std::f64::consts::PI;

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = (&'static str, fn() -> Result<String, String>);

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !($cond) {
            return Err(format!($($arg)*));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

// --- magnetic ---------------------------------------------------------------

fn check_canonicalize() -> Result<String, String> {
    let ms = canonicalize_field(&[0.0, 1.0, -1.0, 0.0], 2).map_err(|e| e.to_string())?;
    ensure!(ms.m() == 1 && ms.n() == 0, "single block misread");
    ensure!(close(ms.beta(), 1.0, 1e-10), "beta {}", ms.beta());
    let ms = canonicalize_field(&[0.0; 9], 3).map_err(|e| e.to_string())?;
    ensure!(ms.m() == 0 && ms.n() == 3, "zero field misread");
    #[rustfmt::skip]
    let b4 = [0.0, 2.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0];
    let ms = canonicalize_field(&b4, 4).map_err(|e| e.to_string())?;
    ensure!(
        ms.m() == 2 && close(ms.b()[0], 2.0, 1e-9) && close(ms.beta(), 3.0, 1e-9),
        "two blocks misread: {:?}",
        ms
    );
    match canonicalize_field(&[0.0, 1.0, 1.0, 0.0], 2) {
        Err(MagneticError::NotAntisymmetric { .. }) => {}
        other => return Err(format!("asymmetry not rejected: {other:?}")),
    }
    Ok("canonical invariants (m, n, b, β) on three fields + rejection".into())
}

fn check_landau_ladder() -> Result<String, String> {
    let ms = MagneticStructure::from_parts(vec![1.0], 0);
    let l = landau_ladder(&ms, 5.0).map_err(|e| e.to_string())?;
    ensure!(l.levels() == &[(0.0, 1), (2.0, 1), (4.0, 1)], "b=1 ladder {:?}", l.levels());
    let ms = MagneticStructure::from_parts(vec![2.0, 1.0], 0);
    let l = landau_ladder(&ms, 8.0).map_err(|e| e.to_string())?;
    let mults: Vec<u64> = l.levels().iter().map(|(_, m)| *m).collect();
    ensure!(mults == [1, 1, 2, 2, 3], "b=[2,1] multiplicities {mults:?}");
    ensure!(
        matches!(
            landau_ladder(&MagneticStructure::zero_field(2), 1.0),
            Err(MagneticError::ZeroField)
        ),
        "zero field must be rejected"
    );
    Ok("ladder enumeration with multiplicities and guards".into())
}

fn check_free_ids() -> Result<String, String> {
    let ms = MagneticStructure::zero_field(1);
    ensure!(close(free_ids(&ms, PI * PI), 1.0, 1e-12), "1D closed form");
    let ms = MagneticStructure::from_parts(vec![1.0], 0);
    ensure!(close(free_ids(&ms, 3.0), 1.0 / PI, 1e-12), "step case");
    ensure!(free_ids(&ms, 0.0) == 0.0 && free_ids(&ms, -3.0) == 0.0, "E<=0");
    // Jump at a ladder level equals multiplicity × level density.
    let ms = MagneticStructure::from_parts(vec![2.0, 1.0], 0);
    let jump = free_ids(&ms, 4.0 + 1e-9) - free_ids(&ms, 4.0 - 1e-9);
    ensure!(close(jump, 2.0 * ms.level_density(), 1e-9), "jump {}", jump);
    Ok("free density: closed forms, left continuity, ladder jumps".into())
}

fn check_semiclassical() -> Result<String, String> {
    ensure!(close(semiclassical_coefficient(1), 1.0 / PI, 1e-12), "d=1");
    ensure!(close(semiclassical_coefficient(2), 1.0 / (4.0 * PI), 1e-12), "d=2");
    ensure!(
        close(semiclassical_coefficient(3), 1.0 / (6.0 * PI * PI), 1e-12),
        "d=3"
    );
    let ms = MagneticStructure::from_parts(vec![1.0], 1);
    let e = 5000.5;
    let ratio = free_ids(&ms, e) / e.powf(1.5) / semiclassical_coefficient(3);
    ensure!((ratio - 1.0).abs() < 0.02, "high-energy ratio {}", ratio);
    Ok("semiclassical coefficients and the high-energy limit".into())
}

fn check_convolution() -> Result<String, String> {
    let ms = MagneticStructure::from_parts(vec![1.0], 0);
    let rho = CountingMeasure::from_levels(&[-1.0], f64::INFINITY);
    let v = convolve_with_counting(&ms, &rho, 2.0).map_err(|e| e.to_string())?;
    ensure!(close(v, 1.0 / PI, 1e-12), "shifted step {}", v);
    let ms = MagneticStructure::zero_field(2);
    let rho = CountingMeasure::from_levels(&[-4.0, -1.0], 0.0);
    let v = convolve_with_counting(&ms, &rho, -1e-12).map_err(|e| e.to_string())?;
    ensure!(close(v, 5.0 / (4.0 * PI), 1e-9), "two-term sum {}", v);
    ensure!(
        matches!(
            convolve_with_counting(&ms, &rho, 0.5),
            Err(MagneticError::AboveEssentialFloor { .. })
        ),
        "floor not enforced"
    );
    Ok("counting-measure convolution against hand values".into())
}

fn check_karamata() -> Result<String, String> {
    ensure!(
        close(karamata_coefficient(2, 1.0, 1.0), 1.0 / (8.0 * PI), 1e-12),
        "d=2 θ=1"
    );
    ensure!(close(karamata_coefficient(1, 0.5, 1.0), 0.25, 1e-12), "d=1 θ=1/2");
    ensure!(
        close(
            karamata_coefficient(3, 0.7, 2.0),
            2.0 * karamata_coefficient(3, 0.7, 1.0),
            1e-12
        ),
        "linearity in C"
    );
    Ok("Karamata coefficients and linearity".into())
}

// --- hamiltonians -----------------------------------------------------------

fn check_transverse_basics() -> Result<String, String> {
    let w = LatticeWindow::new(1, 1.0, 0.5).map_err(|e| e.to_string())?;
    let op = build_transverse(&w, &MagneticStructure::zero_field(1)).map_err(|e| e.to_string())?;
    match op.op() {
        HermitianOp::TriReal(t) => ensure!(t.diag() == [8.0], "1-point operator {:?}", t.diag()),
        other => return Err(format!("unexpected storage {other:?}")),
    }
    let w = LatticeWindow::new(2, 4.0, 1.0).unwrap();
    ensure!(
        matches!(
            build_transverse(&w, &MagneticStructure::from_parts(vec![1.0], 0)),
            Err(BuildError::FluxTooLarge { .. })
        ),
        "flux guard"
    );
    Ok("smallest Dirichlet operator and the flux guard".into())
}

fn check_ground_energy_convergence() -> Result<String, String> {
    let l = 10.0;
    let target = PI * PI / (l * l);
    let mut errs = Vec::new();
    for h in [0.5, 0.25] {
        let w = LatticeWindow::new(1, l, h).unwrap();
        let op = build_transverse(&w, &MagneticStructure::zero_field(1)).unwrap();
        errs.push((ground_energy(&op, 1e-10).map_err(|e| e.to_string())? - target).abs());
    }
    let ratio = errs[0] / errs[1];
    ensure!((3.5..4.5).contains(&ratio), "h² rate broken: ratio {}", ratio);
    Ok(format!("Dirichlet ground energy converges at rate h² (ratio {ratio:.2})"))
}

fn check_magnetic_translation() -> Result<String, String> {
    let field = MagneticStructure::from_parts(vec![1.0], 0);
    let w = LatticeWindow::new(2, 3.0, 0.5).unwrap();
    let op = build_transverse(&w, &field).unwrap();
    let xi = [1.0, 0.0];
    let shifted = build_transverse(&w.translated(&xi), &field).unwrap();
    let phases = magnetic_translate(&op, &xi).map_err(|e| e.to_string())?;
    let (orig, shif) = match (op.op(), shifted.op()) {
        (HermitianOp::BandComplex(a), HermitianOp::BandComplex(b)) => (a, b),
        _ => return Err("expected complex bands".into()),
    };
    let scale = orig.inf_norm();
    for (i, j, v) in shif.lower_entries() {
        let conj = phases[i] * v * phases[j].conj();
        ensure!(
            (conj - orig.get(i, j)).norm() <= 1e-12 * scale,
            "conjugation defect at ({i},{j})"
        );
    }
    Ok("discrete magnetic translation conjugates hops exactly".into())
}

fn check_parallel_models() -> Result<String, String> {
    let spec = solve_parallel(
        &ParallelModel::DeltaWell {
            alpha: 2.0,
            grid: ParallelGrid {
                half_width: 20.0,
                h: 0.01,
            },
        },
        1,
    )
    .map_err(|e| e.to_string())?;
    ensure!((spec.levels()[0] + 1.0).abs() < 1e-3, "delta well E1 {}", spec.levels()[0]);
    let spec = solve_parallel(
        &ParallelModel::Potential {
            kind: PotentialKind::Harmonic,
            grid: ParallelGrid {
                half_width: 8.0,
                h: 0.02,
            },
            essential_floor: f64::INFINITY,
        },
        2,
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        (spec.levels()[0] - 1.0).abs() < 1e-2 && (spec.levels()[1] - 3.0).abs() < 1e-2,
        "harmonic levels {:?}",
        spec.levels()
    );
    let spec = solve_parallel(
        &ParallelModel::Explicit {
            levels: vec![-1.0],
            essential_floor: 0.0,
        },
        1,
    )
    .map_err(|e| e.to_string())?;
    ensure!(spec.levels() == [-1.0] && spec.vector(0).is_none(), "injection echo");
    Ok("delta well, harmonic, and injected longitudinal spectra".into())
}

fn check_kronecker_assembly() -> Result<String, String> {
    let w = LatticeWindow::new(1, 3.5, 0.5).unwrap();
    let t = build_transverse(&w, &MagneticStructure::zero_field(1)).unwrap();
    let spec = solve_parallel(
        &ParallelModel::Explicit {
            levels: vec![-2.0, -0.5],
            essential_floor: 0.0,
        },
        2,
    )
    .unwrap();
    let a = assemble(&t, &spec, None, 10_000).map_err(|e| e.to_string())?;
    let got = a.op().dense_eigenvalues();
    let mut expected: Vec<f64> = t
        .op()
        .dense_eigenvalues()
        .iter()
        .flat_map(|x| spec.levels().iter().map(move |y| x + y))
        .collect();
    expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for (g, e) in got.iter().zip(&expected) {
        ensure!((g - e).abs() < 1e-9, "Kronecker sum spectrum: {g} vs {e}");
    }
    Ok("assembled spectrum equals pairwise factor sums".into())
}

// --- disorder ---------------------------------------------------------------

fn check_coupling_support_and_determinism() -> Result<String, String> {
    let law = CouplingLaw::uniform(1.0);
    let w = LatticeWindow::new(2, 6.0, 0.5).unwrap();
    let real = sample_couplings(&law, &w, 2, 42);
    let mut sites = real.sites();
    sites.reverse();
    for s in &sites {
        let v = real.coupling(s);
        ensure!((0.0..=1.0).contains(&v), "support violated: {v}");
        ensure!(v == real.coupling(s), "non-deterministic value");
    }
    Ok("couplings live in [0, E0], independent of enumeration order".into())
}

fn check_power_law_fraction() -> Result<String, String> {
    let law = CouplingLaw::power(2.0, 1.0);
    let w = LatticeWindow::new(1, 100_000.0, 1.0).unwrap();
    let real = sample_couplings(&law, &w, 0, 2024);
    let (lo, hi) = real.bounds();
    let mut below = 0u64;
    let mut total = 0u64;
    for s in lo[0]..=hi[0] {
        total += 1;
        if real.coupling(&[s]) < 0.1 {
            below += 1;
        }
    }
    let p = below as f64 / total as f64;
    let sigma = (0.01f64 * 0.99 / total as f64).sqrt();
    ensure!((p - 0.01).abs() <= 3.0 * sigma, "F(0.1) estimate {p}");
    Ok(format!("power-law small-coupling fraction {p:.4} ≈ 0.01"))
}

fn check_potential_evaluation() -> Result<String, String> {
    let law = CouplingLaw::uniform(1.0);
    let w = LatticeWindow::new(2, 4.0, 0.5).unwrap();
    let profile = SingleSiteProfile::new(
        EnvelopeKind::Compact {
            radius: 0.4,
            amplitude: 1.0,
        },
        LongitudinalFactor::Constant,
    );
    let zero = DisorderRealization::constant(&law, &w, 2, 0.0);
    ensure!(
        evaluate_potential(&zero, &profile, &[0.3, 0.1], 0.0, 0.5).map_err(|e| e.to_string())? == 0.0,
        "zero couplings"
    );
    let mut map = std::collections::BTreeMap::new();
    map.insert(vec![0i64, 0i64], 1.0);
    let single = DisorderRealization::explicit(&law, &w, 2, map);
    ensure!(
        evaluate_potential(&single, &profile, &[0.25, -0.3], 0.0, 0.5).unwrap() == 1.0,
        "indicator inside"
    );
    ensure!(
        evaluate_potential(&single, &profile, &[0.5, 0.0], 0.0, 0.5).unwrap() == 0.0,
        "indicator outside"
    );
    let thin = SingleSiteProfile::new(
        EnvelopeKind::PowerLaw {
            kappa: 2.5,
            amplitude: 1.0,
        },
        LongitudinalFactor::Constant,
    );
    ensure!(
        matches!(
            evaluate_potential(&zero, &thin, &[0.0, 0.0], 0.0, 1e-6),
            Err(DisorderError::HaloTooSmall { .. })
        ),
        "halo guard"
    );
    Ok("alloy sums: zeros, single-site indicator, halo guard".into())
}

fn check_shift_covariance() -> Result<String, String> {
    let law = CouplingLaw::uniform(1.0);
    let w = LatticeWindow::new(2, 6.0, 0.5).unwrap();
    let real = sample_couplings(&law, &w, 3, 99);
    let eta = [2i64, -1i64];
    let shifted = real.shifted(&eta);
    for site in [[0i64, 0i64], [1, 2], [-3, 1]] {
        let orig = [site[0] + eta[0], site[1] + eta[1]];
        ensure!(
            shifted.coupling(&site) == real.coupling(&orig),
            "covariance at {site:?}"
        );
    }
    Ok("integer shifts act exactly on coupling keys".into())
}

fn check_reduced_potentials() -> Result<String, String> {
    let spec = solve_parallel(
        &ParallelModel::DeltaWell {
            alpha: 2.0,
            grid: ParallelGrid {
                half_width: 15.0,
                h: 0.01,
            },
        },
        1,
    )
    .unwrap();
    let plain = SingleSiteProfile::new(
        EnvelopeKind::PowerLaw {
            kappa: 4.0,
            amplitude: 0.7,
        },
        LongitudinalFactor::Constant,
    );
    let red = reduce_site(&plain, &spec, 0);
    ensure!(close(red.weight, 1.0, 1e-9), "normalized weight {}", red.weight);
    let boxed = SingleSiteProfile::new(
        EnvelopeKind::Compact {
            radius: 1.0,
            amplitude: 1.0,
        },
        LongitudinalFactor::Indicator { half_width: 1.0 },
    );
    let red = reduce_site(&boxed, &spec, 0);
    let expected = 1.0 - (-2.0f64).exp();
    ensure!((red.weight - expected).abs() < 2e-3, "delta-well weight {}", red.weight);

    // Fubini: reduce-then-sum equals sum-then-reduce.
    let law = CouplingLaw::uniform(1.0);
    let w = LatticeWindow::new(2, 4.0, 1.0).unwrap();
    let real = sample_couplings(&law, &w, 4, 5);
    let profile = SingleSiteProfile::new(
        EnvelopeKind::Gaussian {
            beta: 2.0,
            amplitude: 1.0,
            inv_scale: 1.0,
        },
        LongitudinalFactor::Gaussian {
            width: 1.5,
            center: 0.2,
        },
    );
    let red = reduce_site(&profile, &spec, 0);
    let x = [0.5, -0.5];
    let via_reduced = reduced_field(&real, &red, &x, 0.5).unwrap();
    let grid = spec.grid().unwrap();
    let psi = spec.vector(0).unwrap();
    let mut via_sum = 0.0;
    for i in 0..psi.len() {
        let v = evaluate_potential(&real, &profile, &x, grid.coord(i), 0.5).unwrap();
        via_sum += v * psi[i] * psi[i] * grid.h;
    }
    ensure!(close(via_reduced, via_sum, 1e-12), "Fubini: {via_reduced} vs {via_sum}");
    Ok("reduced sites: normalization, delta-well weight, Fubini".into())
}

fn check_sup_bound() -> Result<String, String> {
    let compact = SingleSiteProfile::new(
        EnvelopeKind::Compact {
            radius: 0.4,
            amplitude: 1.0,
        },
        LongitudinalFactor::Constant,
    );
    let law = CouplingLaw::uniform(1.0);
    ensure!(close(sup_bound(&compact, &law, 2), 1.0, 1e-9), "disjoint translates");
    let law2 = CouplingLaw::uniform(2.5);
    ensure!(
        close(sup_bound(&compact, &law2, 2), 2.5, 1e-9),
        "linearity in E0"
    );
    Ok("sup bound: disjoint translates and linearity".into())
}

// --- counting ---------------------------------------------------------------

fn check_counting_basics() -> Result<String, String> {
    let opts = CountOptions::default();
    let op = HermitianOp::TriReal(crate::linalg::TriDiag::new(vec![5.0], vec![]));
    ensure!(count_below(&op, 4.0, &opts).unwrap() == 0, "scalar below");
    ensure!(count_below(&op, 6.0, &opts).unwrap() == 1, "scalar above");
    let op = HermitianOp::TriReal(crate::linalg::TriDiag::new(
        vec![1.0, 2.0, 3.0],
        vec![0.0, 0.0],
    ));
    ensure!(count_below(&op, 2.0, &opts).unwrap() == 1, "strict tie");
    Ok("counting conventions: strict inequality at eigenvalues".into())
}

fn check_dense_vs_inertia() -> Result<String, String> {
    let mut state = 4242u64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    };
    let n = 50;
    let kd = 6;
    let mut band = crate::linalg::SymBand::zeros(n, kd);
    for j in 0..n {
        for i in j..=(j + kd).min(n - 1) {
            band.set(i, j, next() * if i == j { 5.0 } else { 1.0 });
        }
    }
    let op = HermitianOp::BandReal(band);
    let opts = CountOptions::default();
    let dense = Counter::dense_route(&op, &opts);
    let inertia = Counter::new(&op, &opts, 1);
    for _ in 0..20 {
        let e = next() * 6.0;
        ensure!(
            dense.count(e).unwrap() == inertia.count(e).unwrap(),
            "routes disagree at {e}"
        );
    }
    Ok("dense and inertia counting agree on 20 shifts".into())
}

fn check_direct_sum_identity() -> Result<String, String> {
    let w = LatticeWindow::new(2, 5.0, 0.5).unwrap();
    let t = build_transverse(&w, &MagneticStructure::zero_field(2)).unwrap();
    let levels = [-1.0, -0.4];
    let spec = solve_parallel(
        &ParallelModel::Explicit {
            levels: levels.to_vec(),
            essential_floor: 0.0,
        },
        2,
    )
    .unwrap();
    let h0 = assemble(&t, &spec, None, 100_000).unwrap();
    let opts = CountOptions::default();
    let ac = Counter::new(h0.op(), &opts, 4);
    let tc = Counter::new(t.op(), &opts, 8);
    for e in [-0.9, -0.55, -0.31, -0.011] {
        let mut rhs = 0;
        for &ej in &levels {
            if ej < e {
                rhs += tc.count(e - ej).unwrap();
            }
        }
        ensure!(ac.count(e).unwrap() == rhs, "direct sum at {e}");
    }
    Ok("assembled counts split over longitudinal levels exactly".into())
}

fn check_superadditivity() -> Result<String, String> {
    let whole_w = LatticeWindow::new(1, 8.0, 0.25).unwrap();
    let left_w = LatticeWindow::with_offset(1, 4.0, 0.25, vec![-2.0]).unwrap();
    let right_w = LatticeWindow::with_offset(1, 4.0, 0.25, vec![2.0]).unwrap();
    let field = MagneticStructure::zero_field(1);
    let profile = SingleSiteProfile::new(
        EnvelopeKind::Gaussian {
            beta: 2.0,
            amplitude: 1.0,
            inv_scale: 1.0,
        },
        LongitudinalFactor::Constant,
    );
    let law = CouplingLaw::uniform(2.0);
    let mut whole = Vec::new();
    let mut parts = Vec::new();
    for i in 0..5u64 {
        let real = sample_couplings(&law, &whole_w, 5, i);
        let build = |win: &LatticeWindow| {
            let t = build_transverse(win, &field).unwrap();
            let f = coupling_field(&real, &profile, win, 0.5).unwrap();
            reduced_operator(&t, &f, 1.0)
        };
        whole.push(build(&whole_w));
        parts.push(vec![build(&left_w), build(&right_w)]);
    }
    let energies: Vec<f64> = (0..20).map(|k| 0.3 + 0.8 * k as f64).collect();
    let report =
        superadditivity_check(&whole, &parts, &energies, &CountOptions::default()).unwrap();
    ensure!(report.passed(), "violations {:?}", report.violations);
    Ok(format!("Dirichlet superadditivity: {} checks clean", report.checks))
}

fn check_idss_free_case() -> Result<String, String> {
    let model = SurfaceModel {
        field: MagneticStructure::zero_field(1),
        parallel: ParallelModel::Explicit {
            levels: vec![-1.0],
            essential_floor: 0.0,
        },
        parallel_count: 1,
        profile: SingleSiteProfile::new(
            EnvelopeKind::Compact {
                radius: 0.45,
                amplitude: 1.0,
            },
            LongitudinalFactor::Constant,
        ),
        law: CouplingLaw::uniform(0.0),
        halo: 1,
        tail_tol: 1.0,
    };
    let spectrum = model.solve_spectrum().unwrap();
    let window = LatticeWindow::new(1, 60.0, 0.05).unwrap();
    let energies = [-0.5, -0.1];
    let cfg = EstimateConfig {
        window: &window,
        energies: &energies,
        n_realizations: 1,
        seed: 0,
        scale: 1.0,
        opts: CountOptions::default(),
    };
    let curve = idss_estimate(&model, &spectrum, &cfg)
        .map_err(|e| e.to_string())?
        .mean_curve();
    for (&e, &v) in energies.iter().zip(curve.values()) {
        let target = free_ids(&model.field, e + 1.0);
        ensure!((v - target).abs() / target < 0.08, "free case at {e}: {v} vs {target}");
    }
    let csv = curve_csv(&idss_estimate(&model, &spectrum, &cfg).unwrap());
    ensure!(
        csv.starts_with("E,value,std_err,n_real,L,h,seed0\n"),
        "CSV header"
    );
    Ok("free-case estimator matches the shifted closed form".into())
}

// --- analysis ---------------------------------------------------------------

fn check_admissible_intervals() -> Result<String, String> {
    let (lo, hi) = ground_delta_interval(0.2, 0.0, 1.0, 0.5);
    ensure!(close(lo, 0.2 / 0.7, 1e-12) && hi == 1.0, "ground interval ({lo}, {hi})");
    ensure!(
        close(internal_delta_minus_min(0.1, 0.0, 0.5), 0.25, 1e-12),
        "delta- lower bound"
    );
    ensure!(
        close(internal_lambda_star_max(1.0, 0.1, 0.5, 1.1), 0.2, 1e-12),
        "lambda* upper bound"
    );
    Ok("admissible parameter intervals reproduce the stated arithmetic".into())
}

fn check_fitter() -> Result<String, String> {
    let lambdas: Vec<f64> = (1..=20).map(|k| 0.05 + 0.0225 * k as f64).collect();
    let power: Vec<f64> = lambdas.iter().map(|l| (-l.powi(-2)).exp()).collect();
    let fit = fit_lifshits(&lambdas, &power, FitAxis::LogLambda, (0.0, 1.0))
        .map_err(|e| e.to_string())?;
    ensure!((fit.slope + 2.0).abs() < 1e-6, "power slope {}", fit.slope);
    let loglog: Vec<f64> = lambdas.iter().map(|l| (-(-l.ln()).powi(3)).exp()).collect();
    let fit = fit_lifshits(&lambdas, &loglog, FitAxis::LogLogLambda, (0.0, 0.9))
        .map_err(|e| e.to_string())?;
    ensure!((fit.slope - 3.0).abs() < 1e-6, "loglog slope {}", fit.slope);
    ensure!(
        matches!(
            fit_lifshits(&[0.1, 0.2, 0.3], &[1.5, 2.0, 0.0], FitAxis::LogLambda, (0.0, 1.0)),
            Err(AnalysisError::DegenerateWindow)
        ),
        "degenerate window"
    );
    Ok("double-log fits recover constructed exponents exactly".into())
}

/// Run the whole battery.
pub fn run_all() -> Vec<CheckResult> {
    let checks: Vec<Check> = vec![
        ("magnetic/canonicalize", check_canonicalize),
        ("magnetic/landau-ladder", check_landau_ladder),
        ("magnetic/free-ids", check_free_ids),
        ("magnetic/semiclassical", check_semiclassical),
        ("magnetic/convolution", check_convolution),
        ("magnetic/karamata", check_karamata),
        ("hamiltonians/transverse-basics", check_transverse_basics),
        ("hamiltonians/ground-energy-rate", check_ground_energy_convergence),
        ("hamiltonians/magnetic-translation", check_magnetic_translation),
        ("hamiltonians/parallel-models", check_parallel_models),
        ("hamiltonians/kronecker-assembly", check_kronecker_assembly),
        ("disorder/coupling-support", check_coupling_support_and_determinism),
        ("disorder/power-law-fraction", check_power_law_fraction),
        ("disorder/potential-evaluation", check_potential_evaluation),
        ("disorder/shift-covariance", check_shift_covariance),
        ("disorder/reduced-potentials", check_reduced_potentials),
        ("disorder/sup-bound", check_sup_bound),
        ("counting/conventions", check_counting_basics),
        ("counting/dense-vs-inertia", check_dense_vs_inertia),
        ("counting/direct-sum", check_direct_sum_identity),
        ("counting/superadditivity", check_superadditivity),
        ("counting/idss-free-case", check_idss_free_case),
        ("analysis/admissible-intervals", check_admissible_intervals),
        ("analysis/lifshits-fitter", check_fitter),
    ];
    checks
        .into_iter()
        .map(|(name, f)| match f() {
            Ok(detail) => CheckResult {
                name,
                passed: true,
                detail,
            },
            Err(detail) => CheckResult {
                name,
                passed: false,
                detail,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_green() {
        let results = run_all();
        let failures: Vec<_> = results.iter().filter(|r| !r.passed).collect();
        assert!(failures.is_empty(), "failed checks: {failures:?}");
        assert!(results.len() >= 20);
    }
}
