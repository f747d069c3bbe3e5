use kostin_core::propagator::*;
use kostin_core::quadrature::QuadratureSpec;
use kostin_core::*;
use num_complex::Complex64;

fn bump(x: f64) -> f64 {
    (-x * x / 2.0).exp()
}

#[test]
fn completeness_reproduces_a_smooth_bump() {
    let sys = PhysicalSystem::natural(0.0);
    let fam = FamilyParams::new(0.0, 4.0, 0.0).unwrap();
    let quad = QuadratureSpec::trapezoid(0.0, 20.0, 401).unwrap();
    let xp = SpatialGrid::closed(-12.0, 12.0, 961).unwrap();
    let probe = |f: &dyn Fn(f64) -> f64, x: f64| {
        completeness_probe(&fam, &sys, &PotentialModel::Free, 0.25, 1e-3, &quad, f, x, &xp).unwrap()
    };
    let at_center = probe(&bump, 0.0);
    assert!((at_center - Complex64::new(bump(0.0), 0.0)).norm() <= 1e-2, "{at_center}");
    assert!(probe(&bump, 7.0).norm() <= 1e-2);
    assert_eq!(probe(&|_| 0.0, 0.0), Complex64::new(0.0, 0.0));
}

#[test]
fn completeness_probe_rejects_negative_time() {
    let fam = FamilyParams::new(0.0, 1.0, 0.0).unwrap();
    let quad = QuadratureSpec::trapezoid(0.0, 10.0, 41).unwrap();
    let xp = SpatialGrid::closed(-5.0, 5.0, 11).unwrap();
    let sys = PhysicalSystem::natural(0.0);
    assert!(completeness_probe(&fam, &sys, &PotentialModel::Free, -0.1, 1e-3, &quad, bump, 0.0, &xp).is_err());
}

fn causality_setup() -> (FamilyParams, PhysicalSystem, QuadratureSpec, SpatialGrid) {
    (
        FamilyParams::new(0.0, 0.5, 0.0).unwrap(),
        PhysicalSystem::natural(0.0),
        QuadratureSpec::trapezoid(0.0, 40.0, 161).unwrap(),
        SpatialGrid::periodic(-8.0, 8.0, 256).unwrap(),
    )
}

#[test]
fn causality_limit_is_approached() {
    let (fam, sys, quad, grid) = causality_setup();
    let d: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&t| causality_probe(&fam, &sys, &PotentialModel::Free, &quad, 5e-3, &grid, 1.0, t).unwrap())
        .collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    assert!(d[2] <= 2e-3);
}

#[test]
fn causality_probe_bounds() {
    let (fam, sys, quad, grid) = causality_setup();
    for t in [0.0, 0.06] {
        assert!(causality_probe(&fam, &sys, &PotentialModel::Free, &quad, 5e-3, &grid, 1.0, t).is_err());
    }
}

#[test]
fn propagation_is_linear() {
    let sys = PhysicalSystem::natural(0.2);
    let pot = PotentialModel::Harmonic { omega: 1.0, center: 0.0 };
    let fam = FamilyParams::new(0.5, 0.7, 0.0).unwrap();
    let quad = QuadratureSpec::trapezoid(0.0, 20.0, 81).unwrap();
    let grid = SpatialGrid::periodic(-6.0, 6.0, 48).unwrap();
    let k = kernel_eval(&fam, &sys, &pot, 0.3, 1e-2, &quad, &grid, &grid).unwrap();
    let f = ComplexGridField::from_fn(grid, 0.0, |x| Complex64::new((-x * x).exp(), x * (-x * x).exp()));
    let g = ComplexGridField::from_fn(grid, 0.0, |x| Complex64::new(0.0, (-(x - 1.0).powi(2)).exp()));
    let c = Complex64::new(0.3, -1.7);
    let pf = propagate(&k, &f).unwrap();
    let pg = propagate(&k, &g).unwrap();
    let scaled = propagate(&k, &f.scaled(c)).unwrap();
    let sum_in =
        ComplexGridField::new(grid, f.values.iter().zip(&g.values).map(|(a, b)| a + b).collect(), 0.0).unwrap();
    let sum = propagate(&k, &sum_in).unwrap();
    let scale = pf.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..grid.n {
        assert!((scaled.values[i] - c * pf.values[i]).norm() <= 1e-13 * scale);
        assert!((sum.values[i] - pf.values[i] - pg.values[i]).norm() <= 1e-13 * scale);
    }
}

#[test]
fn free_kernel_ignores_family_width() {
    let sys = PhysicalSystem::natural(0.0);
    let quad = QuadratureSpec::trapezoid(0.0, 40.0, 161).unwrap();
    let grid = SpatialGrid::periodic(-4.0, 4.0, 32).unwrap();
    let k = |a0: f64| {
        kernel_eval_auto(
            &FamilyParams::new(0.0, a0, 0.0).unwrap(),
            &sys,
            &PotentialModel::Free,
            0.5,
            1e-3,
            &quad,
            &grid,
            &grid,
        )
        .unwrap()
    };
    let (narrow, wide) = (k(0.5), k(1.0));
    for (a, b) in narrow.values.iter().zip(&wide.values) {
        assert!((a - b).norm() / b.norm() <= 1e-3);
    }
    // Constant modulus of the free kernel.
    let moduli: Vec<f64> = narrow.values.iter().map(|z| z.norm()).collect();
    let (lo, hi) = moduli.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &m| (lo.min(m), hi.max(m)));
    assert!(hi / lo - 1.0 <= 1e-6);
}

#[test]
fn kernel_converges_under_node_refinement() {
    let sys = PhysicalSystem::natural(0.0);
    let fam = FamilyParams::new(0.0, 0.7, 0.0).unwrap();
    let quad = QuadratureSpec::trapezoid(0.0, 40.0, 161).unwrap();
    let grid = SpatialGrid::periodic(-4.0, 4.0, 32).unwrap();
    let coarse = kernel_eval(&fam, &sys, &PotentialModel::Free, 0.5, 1e-3, &quad, &grid, &grid).unwrap();
    let fine = kernel_eval(&fam, &sys, &PotentialModel::Free, 0.5, 1e-3, &quad.refined(), &grid, &grid).unwrap();
    for (a, b) in coarse.values.iter().zip(&fine.values) {
        assert!((a - b).norm() / b.norm() <= 1e-8);
    }
}

#[test]
fn narrow_window_warns() {
    let sys = PhysicalSystem::natural(0.0);
    let fam = FamilyParams::new(0.0, 0.5, 0.0).unwrap();
    let quad = QuadratureSpec::trapezoid(0.0, 3.0, 41).unwrap();
    let grid = SpatialGrid::periodic(-4.0, 4.0, 16).unwrap();
    let k = kernel_eval(&fam, &sys, &PotentialModel::Free, 0.5, 1e-3, &quad, &grid, &grid).unwrap();
    assert!(k.end_node_ratio > END_NODE_WARNING);
    assert_eq!(k.warnings.len(), 1);
    let auto = kernel_eval_auto(&fam, &sys, &PotentialModel::Free, 0.5, 1e-3, &quad, &grid, &grid).unwrap();
    assert!(auto.end_node_ratio <= END_NODE_TARGET);
    assert!(auto.warnings[0].contains("widened"));
}

#[test]
fn kernel_csv_layout() {
    let sys = PhysicalSystem::natural(0.0);
    let fam = FamilyParams::new(0.0, 1.0, 0.0).unwrap();
    let quad = QuadratureSpec::trapezoid(0.0, 10.0, 41).unwrap();
    let grid = SpatialGrid::periodic(-1.0, 1.0, 8).unwrap();
    let k = kernel_eval(&fam, &sys, &PotentialModel::Free, 0.2, 1e-2, &quad, &grid, &grid).unwrap();
    let mut buf = Vec::new();
    k.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(PropagatorKernel::CSV_HEADER));
    assert_eq!(lines.count(), 64);
}
