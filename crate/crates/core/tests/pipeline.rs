//! Cross-mode validation: the spectrum-injection operator is the exact
//! compression of the full product-grid operator onto the bound-state
//! subspace, so its counting function can never exceed the full one, and
//! the two agree below the essential floor once the truncations converge.

use idss_core::counting::{CountOptions, Counter};
use idss_core::disorder::{
    coupling_field, longitudinal_gram, projected_potential, sample_couplings, CouplingLaw,
    EnvelopeKind, LongitudinalFactor, SingleSiteProfile,
};
use idss_core::grid::LatticeWindow;
use idss_core::hamiltonian::{
    assemble, assemble_grid, build_transverse, solve_parallel, ParallelGrid, ParallelModel,
    PotentialKind,
};
use idss_core::linalg::TriDiag;
use idss_core::magnetic::MagneticStructure;

#[test]
fn spectrum_mode_is_a_compression_of_grid_mode() {
    let window = LatticeWindow::new(1, 8.0, 0.5).unwrap();
    let field = MagneticStructure::zero_field(1);
    let transverse = build_transverse(&window, &field).unwrap();

    let grid = ParallelGrid {
        half_width: 10.0,
        h: 0.05,
    };
    let model = ParallelModel::Potential {
        kind: PotentialKind::SquareWell {
            depth: 2.4,
            half_width: 1.5,
        },
        grid: grid.clone(),
        essential_floor: 0.0,
    };
    let spectrum = solve_parallel(&model, 2).unwrap();

    let profile = SingleSiteProfile::new(
        EnvelopeKind::Gaussian {
            beta: 2.0,
            amplitude: 1.0,
            inv_scale: 1.0,
        },
        LongitudinalFactor::Gaussian {
            width: 1.5,
            center: 0.3,
        },
    );
    let law = CouplingLaw::uniform(0.2);
    let opts = CountOptions::default();

    // Longitudinal factor sampled on the grid for the product potential.
    let n_y = grid.points();
    let g_samples: Vec<f64> = (0..n_y)
        .map(|i| profile.longitudinal.eval(grid.coord(i)))
        .collect();
    // Longitudinal kinetic + well on the same grid.
    let hy = {
        let h = grid.h;
        let mut diag = vec![2.0 / (h * h); n_y];
        let off = vec![-1.0 / (h * h); n_y - 1];
        for (i, d) in diag.iter_mut().enumerate() {
            if grid.coord(i).abs() <= 1.5 {
                *d -= 2.4;
            }
        }
        TriDiag::new(diag, off)
    };

    let mut equal = 0;
    let mut total = 0;
    for seed in 0..4u64 {
        let real = sample_couplings(&law, &window, 6, seed);
        let pot = projected_potential(&real, &profile, &spectrum, &window, 1.0, 0.5).unwrap();
        let proj = assemble(&transverse, &spectrum, Some(&pot), opts.budget).unwrap();

        let a = coupling_field(&real, &profile, &window, 0.5).unwrap();
        let n_g = window.interior_count();
        let mut v = vec![0.0; n_g * n_y];
        for g in 0..n_g {
            for iy in 0..n_y {
                v[g * n_y + iy] = a[g] * g_samples[iy];
            }
        }
        let full = assemble_grid(&transverse, &hy, Some(&v), opts.budget).unwrap();

        let proj_counter = Counter::new(proj.op(), &opts, 8);
        let full_counter = Counter::new(full.op(), &opts, 8);
        for &e in &[-1.6, -1.2, -0.8, -0.5, -0.3, -0.15] {
            let p = proj_counter.count(e).unwrap();
            let f = full_counter.count(e).unwrap();
            assert!(p <= f, "compression bound violated at E = {e}: {p} > {f}");
            total += 1;
            if p == f {
                equal += 1;
            }
        }
    }
    // Far below the essential floor the two modes agree.
    assert!(
        equal * 10 >= total * 8,
        "grid and spectrum modes disagree too often: {equal}/{total}"
    );

    // The Gram matrix the projection uses is genuinely non-diagonal here
    // (the longitudinal factor is off-center), so the agreement above
    // exercises the coupling blocks.
    let gram = longitudinal_gram(&profile, &spectrum);
    assert!(gram[1].abs() > 1e-3, "off-diagonal Gram {}", gram[1]);
}
