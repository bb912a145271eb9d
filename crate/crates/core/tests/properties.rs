//! Property tests for the structural invariants.

use idss_core::counting::{count_below, CountOptions, Counter};
use idss_core::disorder::{sample_couplings, CouplingLaw};
use idss_core::grid::LatticeWindow;
use idss_core::linalg::{HermitianOp, SymBand};
use idss_core::magnetic::{convolve_with_counting, free_ids, CountingMeasure, MagneticStructure};
use proptest::prelude::*;

fn magnetic_structures() -> impl Strategy<Value = MagneticStructure> {
    (
        proptest::collection::vec(0.25f64..3.0, 0..3),
        0usize..3,
    )
        .prop_filter_map("d >= 1", |(b, n)| {
            if b.is_empty() && n == 0 {
                None
            } else if b.is_empty() {
                Some(MagneticStructure::zero_field(n))
            } else {
                Some(MagneticStructure::from_parts(b, n))
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_ids_is_monotone_and_nonnegative(
        ms in magnetic_structures(),
        e1 in -2.0f64..15.0,
        de in 0.0f64..5.0,
    ) {
        let lo = free_ids(&ms, e1);
        let hi = free_ids(&ms, e1 + de);
        prop_assert!(lo >= 0.0);
        prop_assert!(hi >= lo - 1e-14);
    }

    #[test]
    fn convolution_with_unit_jump_at_zero_is_free_ids(
        ms in magnetic_structures(),
        e in -2.0f64..10.0,
    ) {
        let rho = CountingMeasure::from_levels(&[0.0], f64::INFINITY);
        let conv = convolve_with_counting(&ms, &rho, e).unwrap();
        let free = free_ids(&ms, e);
        prop_assert!((conv - free).abs() <= 1e-13 * free.max(1.0));
    }

    #[test]
    fn counts_are_monotone_in_energy(
        seed in 0u64..1000,
        e in -4.0f64..4.0,
        de in 0.0f64..2.0,
    ) {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let n = 24;
        let kd = 3;
        let mut band = SymBand::zeros(n, kd);
        for j in 0..n {
            for i in j..=(j + kd).min(n - 1) {
                band.set(i, j, next() * if i == j { 4.0 } else { 1.0 });
            }
        }
        let op = HermitianOp::BandReal(band);
        let opts = CountOptions::default();
        let lo = count_below(&op, e, &opts).unwrap();
        let hi = count_below(&op, e + de, &opts).unwrap();
        prop_assert!(hi >= lo);
    }

    #[test]
    fn dense_and_inertia_routes_agree(
        seed in 0u64..500,
        shift in -4.0f64..4.0,
    ) {
        let mut state = seed.wrapping_mul(0xD6E8FEB86659FD93) | 1;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let n = 20;
        let kd = 4;
        let mut band = SymBand::zeros(n, kd);
        for j in 0..n {
            for i in j..=(j + kd).min(n - 1) {
                band.set(i, j, next() * if i == j { 4.0 } else { 1.0 });
            }
        }
        let op = HermitianOp::BandReal(band);
        let opts = CountOptions::default();
        let dense = Counter::dense_route(&op, &opts).count(shift).unwrap();
        let inertia = Counter::new(&op, &opts, 1).count(shift).unwrap();
        prop_assert_eq!(dense, inertia);
    }

    #[test]
    fn couplings_stay_in_support_and_translate_exactly(
        seed in 0u64..10_000,
        e0 in 0.1f64..3.0,
        kappa in 0.3f64..4.0,
        eta0 in -5i64..5,
        eta1 in -5i64..5,
    ) {
        let law = CouplingLaw::power(kappa, e0);
        let window = LatticeWindow::new(2, 4.0, 0.5).unwrap();
        let real = sample_couplings(&law, &window, 2, seed);
        let shifted = real.shifted(&[eta0, eta1]);
        for site in [[0i64, 0i64], [1, -2], [-3, 3]] {
            let v = real.coupling(&site);
            prop_assert!((0.0..=e0).contains(&v));
            let w = shifted.coupling(&site);
            prop_assert_eq!(w, real.coupling(&[site[0] + eta0, site[1] + eta1]));
        }
    }
}
