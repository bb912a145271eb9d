//! Cluster masses of the shifted transverse operator at the Landau-structure
//! benchmark parameters.

use idss_core::counting::{count_below, CountOptions};
use idss_core::grid::LatticeWindow;
use idss_core::hamiltonian::build_transverse;
use idss_core::magnetic::MagneticStructure;

fn main() {
    let field = MagneticStructure::from_parts(vec![1.0], 0);
    let opts = CountOptions::default();
    let w = LatticeWindow::new(2, 20.0, 0.1).unwrap();
    let t = build_transverse(&w, &field).unwrap();
    println!("n_g = {}", t.dim());
    let probes = [
        -0.5, -0.1, 0.1, 0.5, 1.0, 1.5, 1.9, 2.1, 2.5, 3.0, 3.5, 3.9, 4.1, 4.5, 5.0,
    ];
    let mut counts = Vec::new();
    for &e in &probes {
        let c = count_below(t.op(), e, &opts).unwrap();
        counts.push(c);
        println!("count below {e:5}: {c}");
    }
    let area = 400.0;
    println!("tight cluster 0: {}", counts[2] - counts[1]);
    println!("band 0 (below 1.9): {} per-area {}", counts[6], counts[6] as f64 / area);
    println!("tight cluster 1: {}", counts[7] - counts[5]);
    println!("band 1 (1.9..3.9): {}", counts[11] - counts[6]);
    println!("tight cluster 2: {}", counts[12] - counts[11]);

    // Plateau window placement: edges above 1.31 at L=20, h=0.125.
    let w = LatticeWindow::new(2, 20.0, 0.125).unwrap();
    let t = build_transverse(&w, &field).unwrap();
    let mut prev = count_below(t.op(), 1.30, &opts).unwrap();
    println!("L=20 h=0.125 count below 1.30: {prev}");
    let mut e = 1.30;
    while e < 1.63 {
        let next_e = e + 0.02;
        let c = count_below(t.op(), next_e, &opts).unwrap();
        if c != prev {
            let mut lo = e;
            let mut hi = next_e;
            for _ in 0..25 {
                let mid = 0.5 * (lo + hi);
                if count_below(t.op(), mid, &opts).unwrap() > prev {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            println!("  edge x{} near {:.5}", c - prev, 0.5 * (lo + hi));
        }
        prev = c;
        e = next_e;
    }
}
