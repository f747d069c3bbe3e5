use kostin_core::packet::*;
use kostin_core::*;
use proptest::prelude::*;

fn state(q: f64, qdot: f64, a: f64, adot: f64, s0: f64) -> TrajectoryState {
    TrajectoryState { t: 0.0, q, qdot, a, adot, s0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn packet_is_normalized_and_decomposes(
        q in -3.0..3.0f64,
        qdot in -2.0..2.0f64,
        a in 0.4..2.0f64,
        adot in -0.5..0.5f64,
        s0 in -10.0..10.0f64,
    ) {
        let sys = PhysicalSystem::natural(0.0);
        let s = state(q, qdot, a, adot, s0);
        let grid = SpatialGrid::closed(q - 12.0 * a, q + 12.0 * a, 2401).unwrap();
        let psi = packet_psi(&s, &sys, &grid);
        prop_assert!((psi.norm_sqr() - 1.0).abs() <= 1e-8);
        for (j, z) in psi.values.iter().enumerate() {
            prop_assert!((z.norm_sqr() - packet_density(&s, grid.x(j))).abs() <= 1e-12);
        }

        // Roundtrip through the polar form, up to one global 2π multiple.
        let hydro = madelung_decompose(&psi, &sys);
        let j0 = hydro.peak;
        let offset = hydro.s[j0] - packet_phase(&s, &sys, grid.x(j0));
        prop_assert!((offset / std::f64::consts::TAU - (offset / std::f64::consts::TAU).round()).abs() < 1e-9);
        for j in 0..grid.n {
            if hydro.mask[j] {
                prop_assert!((hydro.s[j] - offset - packet_phase(&s, &sys, grid.x(j))).abs() <= 1e-8);
            }
        }
        // Below the density floor the phase is only extrapolated, so the
        // roundtrip is exact up to the floor's amplitude.
        let back = hydro.recompose(0.0);
        prop_assert!(back.relative_l2_distance(&psi).unwrap() <= 1e-6);
    }
}
