use kostin_core::packet::{packet_phase, packet_psi};
use kostin_core::pde::*;
use kostin_core::trajectory::*;
use kostin_core::*;
use num_complex::Complex64;

fn start(sys: &PhysicalSystem, ic: &InitialConditions, grid: SpatialGrid) -> ComplexGridField {
    packet_psi(&ic.initial_state(sys), sys, &grid)
}

fn solver(
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    ic: &InitialConditions,
    grid: SpatialGrid,
    dt: f64,
) -> KostinSolver {
    let s0 = ic.initial_state(sys);
    let sys_copy = *sys;
    KostinSolver::new(&start(sys, ic, grid), sys, pot, &SolverConfig::new(grid, dt).unwrap())
        .unwrap()
        .with_reference_phase(move |x| packet_phase(&s0, &sys_copy, x))
}

#[test]
fn free_second_moment_matches_width_law() {
    let sys = PhysicalSystem::natural(0.0);
    let ic = InitialConditions::new(0.0, 0.0, 1.0, 0.0).unwrap();
    let grid = SpatialGrid::periodic(-20.0, 20.0, 1024).unwrap();
    let out = kostin_evolve(
        &start(&sys, &ic, grid),
        &sys,
        &PotentialModel::Free,
        &SolverConfig::new(grid, 1e-3).unwrap(),
        1.0,
        100,
    )
    .unwrap();
    assert_eq!(out.len(), 11);
    for f in &out {
        let a2 = 1.0 + (f.time_tag / 2.0).powi(2);
        assert!((f.variance() / a2 - 1.0).abs() <= 1e-4, "t={}", f.time_tag);
    }
    assert!((out.last().unwrap().time_tag - 1.0).abs() <= 5e-4);
}

#[test]
fn every_step_preserves_the_norm() {
    let sys = PhysicalSystem::natural(0.3);
    let pot = PotentialModel::Harmonic { omega: 1.0, center: 0.0 };
    let ic = InitialConditions::new(1.0, 0.5, 0.7, 0.1).unwrap();
    let grid = SpatialGrid::periodic(-20.0, 20.0, 1024).unwrap();
    let mut s = solver(&sys, &pot, &ic, grid, 1e-3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        s.step().unwrap();
        let norm = s.field().norm_sqr();
        assert!((norm - 1.0).abs() <= 1e-10);
        worst = worst.max((norm - 1.0).abs());
    }
    assert!(worst <= 1e-9);
}

#[test]
fn damped_centroid_follows_trajectory() {
    let sys = PhysicalSystem::natural(0.5);
    let pot = PotentialModel::Harmonic { omega: 1.0, center: 0.0 };
    let ic = InitialConditions::new(1.0, 0.0, 0.5f64.sqrt(), 0.0).unwrap();
    let grid = SpatialGrid::periodic(-20.0, 20.0, 1024).unwrap();
    let series = integrate(&ic, &sys, &pot, 2.0, 1e-3).unwrap();
    let out = solver(&sys, &pot, &ic, grid, 1e-3).run(2000, 50).unwrap();
    for (k, f) in out.iter().enumerate() {
        assert!((f.centroid() - series.states[50 * k].q).abs() <= 1e-3);
    }
}

#[test]
fn damped_harmonic_matches_ansatz_at_fine_spacing() {
    let sys = PhysicalSystem::natural(0.2);
    let pot = PotentialModel::Harmonic { omega: 1.0, center: 0.0 };
    let ic = InitialConditions::new(1.0, 0.0, 0.5f64.sqrt(), 0.0).unwrap();
    let grid = SpatialGrid::new(-20.48, 0.02, 2048).unwrap();
    let mut s = solver(&sys, &pot, &ic, grid, 2.5e-4);
    s.run(8000, 8000).unwrap();
    let reference = packet_psi(&final_state(&ic, &sys, &pot, 2.0, 1e-3).unwrap(), &sys, &grid);
    let d = s.field().relative_l2_distance(&reference).unwrap();
    assert!(d <= 5e-3, "{d}");
}

#[test]
fn friction_slows_a_free_packet() {
    let sys = PhysicalSystem::natural(0.4);
    let ic = InitialConditions::new(-3.0, 1.5, 1.0, 0.0).unwrap();
    let grid = SpatialGrid::periodic(-25.0, 25.0, 1024).unwrap();
    let out = solver(&sys, &PotentialModel::Free, &ic, grid, 1e-3).run(3000, 100).unwrap();
    let centroids: Vec<f64> = out.iter().map(|f| f.centroid()).collect();
    let speeds: Vec<f64> = centroids.windows(2).map(|w| (w[1] - w[0]) / 0.1).collect();
    assert!(speeds[0] > 0.0);
    for w in speeds.windows(2) {
        assert!(w[1] < w[0], "{speeds:?}");
    }
}

#[test]
fn direct_width_arbitrates_the_width_law() {
    let sys = PhysicalSystem::natural(0.0);
    let pot = PotentialModel::Harmonic { omega: 1.0, center: 0.0 };
    let ic = InitialConditions::new(0.5, 0.0, 1.0, 0.0).unwrap();
    let grid = SpatialGrid::periodic(-20.0, 20.0, 1024).unwrap();
    let out = solver(&sys, &pot, &ic, grid, 1e-3).run(2000, 100).unwrap();
    let fixed = integrate_with(&ic, &sys, &pot, 2.0, 1e-3, WidthLaw::Corrected).unwrap();
    let printed = integrate_with(&ic, &sys, &pot, 2.0, 1e-3, WidthLaw::AsPrinted).unwrap();
    let gap = |series: &TrajectorySeries| {
        out.iter().enumerate().map(|(k, f)| (f.variance().sqrt() - series.states[100 * k].a).abs()).fold(0.0, f64::max)
    };
    assert!(gap(&fixed) <= 1e-3, "{}", gap(&fixed));
    assert!(gap(&printed) > 1e-2, "{}", gap(&printed));
}

#[test]
fn global_phase_leaves_density_unchanged() {
    let sys = PhysicalSystem::natural(0.5);
    let pot = PotentialModel::Harmonic { omega: 1.0, center: 0.0 };
    let ic = InitialConditions::new(0.5, 1.0, 0.8, 0.0).unwrap();
    let grid = SpatialGrid::periodic(-16.0, 16.0, 512).unwrap();
    let cfg = SolverConfig::new(grid, 1e-3).unwrap();
    let f0 = start(&sys, &ic, grid);
    let rotated = f0.scaled(Complex64::from_polar(1.0, 2.3));
    let a = kostin_evolve(&f0, &sys, &pot, &cfg, 1.0, 1000).unwrap();
    let b = kostin_evolve(&rotated, &sys, &pot, &cfg, 1.0, 1000).unwrap();
    let (a, b) = (a.last().unwrap().density(), b.last().unwrap().density());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn errors_carry_the_failing_time() {
    // A fast packet reaches the edge of a small box.
    let sys = PhysicalSystem::natural(0.0);
    let ic = InitialConditions::new(0.0, 8.0, 0.5, 0.0).unwrap();
    let grid = SpatialGrid::periodic(-8.0, 8.0, 256).unwrap();
    let err = kostin_evolve(
        &start(&sys, &ic, grid),
        &sys,
        &PotentialModel::Free,
        &SolverConfig::new(grid, 1e-3).unwrap(),
        2.0,
        10,
    )
    .unwrap_err();
    match err {
        Error::EdgeProximity { t, ratio } => {
            assert!(t > 0.1 && t < 1.0, "{t}");
            assert!(ratio > 1e-8);
        }
        other => panic!("unexpected {other:?}"),
    }
}
