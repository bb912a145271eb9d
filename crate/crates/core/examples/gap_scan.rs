//! Scan the transverse spectrum in the first Landau gap and the coupling
//! field statistics, to pick window parameters for the gap studies.
//!
//! Run: cargo run --release -p idss-core --example gap_scan

use idss_core::counting::{count_below, CountOptions};
use idss_core::disorder::{
    coupling_field, sample_couplings, sup_bound, CouplingLaw, EnvelopeKind, LongitudinalFactor,
    SingleSiteProfile,
};
use idss_core::grid::LatticeWindow;
use idss_core::hamiltonian::{build_transverse, ground_energy};
use idss_core::magnetic::MagneticStructure;

fn main() {
    let field = MagneticStructure::from_parts(vec![1.0], 0);
    let opts = CountOptions::default();

    for (l, h) in [(16.0, 0.125), (20.0, 0.125)] {
        let w = LatticeWindow::new(2, l, h).unwrap();
        let t = build_transverse(&w, &field).unwrap();
        let z = ground_energy(&t, 1e-9).unwrap();
        println!("L={l} h={h}: n_g={} Z={z:.6}", t.dim());
        let mut prev = count_below(t.op(), 0.25, &opts).unwrap();
        println!("  count below 0.25 (lowest cluster+): {prev}");
        let mut e = 0.25;
        while e < 1.31 {
            let next_e = e + 0.02;
            let c = count_below(t.op(), next_e, &opts).unwrap();
            if c != prev {
                // refine the eigenvalue(s) in (e, next_e)
                let mut lo = e;
                let mut hi = next_e;
                for _ in 0..30 {
                    let mid = 0.5 * (lo + hi);
                    if count_below(t.op(), mid, &opts).unwrap() > prev {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                println!("  edge state(s) x{} near {:.5}", c - prev, 0.5 * (lo + hi));
            }
            prev = c;
            e = next_e;
        }
        println!("  count below 1.31: {prev}");
        println!("  per-area lowest-band estimate at 0.5: {}", count_below(t.op(), 0.5, &opts).unwrap() as f64 / (l * l));
        println!("  b/(2pi) = {}", 1.0 / (2.0 * std::f64::consts::PI));
    }

    // Coupling field statistics for the wide Gaussian envelope.
    let profile = SingleSiteProfile::new(
        EnvelopeKind::Gaussian {
            beta: 2.0,
            amplitude: 1.0,
            inv_scale: 0.15,
        },
        LongitudinalFactor::Constant,
    );
    let law = CouplingLaw::uniform(1.0);
    let m = sup_bound(&profile, &law, 2);
    println!("sup bound per unit E0: {m}");
    let w = LatticeWindow::new(2, 16.0, 0.25).unwrap();
    for seed in 0..6u64 {
        let real = sample_couplings(&law, &w, 10, seed);
        let f = coupling_field(&real, &profile, &w, 0.5).unwrap();
        let amin = f.iter().cloned().fold(f64::MAX, f64::min);
        let amax = f.iter().cloned().fold(0.0f64, f64::max);
        println!("seed {seed}: A_min={amin:.4} A_max={amax:.4} A_min/M={:.4}", amin / m);
    }
}
