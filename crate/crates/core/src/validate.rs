//! Scenario descriptions and the comparison suites that tie the analytic
//! packet, the kernel, and the direct solver together.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::csvfmt::fmt_f64;
use crate::error::{Error, Result};
use crate::grid::{ComplexGridField, SpatialGrid};
use crate::model::{PhysicalSystem, PotentialModel};
use crate::packet::{continuity_residual, packet_phase, packet_psi};
use crate::pde::{self, KostinSolver, SolverConfig};
use crate::propagator::{self, exact, FamilyParams, PropagatorKernel};
use crate::quadrature::QuadratureSpec;
use crate::trajectory::{self, derivatives, residual_coefficients, InitialConditions, TrajectorySeries};

/// Label attached to ansatz comparisons outside the quadratic class.
pub const LINEARIZED_LABEL: &str = "linearized-regime only";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_final: f64,
    pub dt_ode: f64,
    #[serde(default)]
    pub dt_pde: Option<f64>,
}

/// Kernel evaluation settings. Source and target grids coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub t: f64,
    pub grid: SpatialGrid,
    /// Second family width for the family-independence check (free, ν = 0).
    #[serde(default)]
    pub alt_a0: Option<f64>,
    /// Also re-evaluate with refined and widened velocity windows.
    #[serde(default)]
    pub check_quadrature: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Pipelines {
    pub trajectory: bool,
    pub packet: bool,
    pub kernel: bool,
    pub pde: bool,
    pub validate: bool,
}

impl Default for Pipelines {
    fn default() -> Self {
        Self { trajectory: true, packet: false, kernel: false, pde: false, validate: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Output directory; relative paths are resolved by the caller.
    pub dir: Option<String>,
    /// PDE steps between snapshots (packet snapshots follow the same times).
    pub snapshot_every: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, snapshot_every: 1000 }
    }
}

/// Thresholds for the report rows. The two without a universal value must be
/// set by the scenario when the corresponding check runs outside the cases
/// with a known bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub residual: f64,
    pub analytic_norm: f64,
    pub continuity: f64,
    pub pde_norm_per_1000_steps: f64,
    pub ansatz_pde: Option<f64>,
    pub kernel_reconstruction: Option<f64>,
    pub free_propagator: f64,
    pub family_independence: f64,
    pub quadrature_stability: f64,
    pub oscillation_amplitude: f64,
    pub reduction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            analytic_norm: 1e-8,
            continuity: 1e-4,
            pde_norm_per_1000_steps: 1e-9,
            ansatz_pde: None,
            kernel_reconstruction: None,
            free_propagator: 1e-3,
            family_independence: 1e-3,
            quadrature_stability: 1e-8,
            oscillation_amplitude: 5e-3,
            reduction: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub system: PhysicalSystem,
    pub potential: PotentialModel,
    pub initial: InitialConditions,
    pub time: TimeSpec,
    pub grid: SpatialGrid,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub pipelines: Pipelines,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Scenario {
    /// Checks every component invariant and that the selected pipelines have
    /// what they need.
    pub fn validated(self) -> Result<Self> {
        let ctx = |e: Error| Error::domain(format!("scenario {}: {e}", self.id));
        self.system.validated().map_err(ctx)?;
        self.potential.clone().validated().map_err(ctx)?;
        self.initial.validated().map_err(ctx)?;
        self.grid.validated().map_err(ctx)?;
        if !(self.time.t_final > 0.0) || !(self.time.dt_ode > 0.0) || self.time.dt_ode > self.time.t_final {
            return Err(ctx(Error::domain("time needs 0 < dt_ode <= t_final")));
        }
        if self.output.snapshot_every == 0 {
            return Err(ctx(Error::domain("output.snapshot_every must be positive")));
        }
        if self.pipelines.pde {
            let dt = self.time.dt_pde.ok_or_else(|| ctx(Error::domain("pde pipeline needs time.dt_pde")))?;
            SolverConfig::new(self.grid, dt).map_err(ctx)?;
        }
        if self.pipelines.kernel {
            let k = self.kernel.ok_or_else(|| ctx(Error::domain("kernel pipeline needs a [kernel] section")))?;
            self.quadrature
                .ok_or_else(|| ctx(Error::domain("kernel pipeline needs a [quadrature] section")))?
                .validated()
                .map_err(ctx)?;
            k.grid.validated().map_err(ctx)?;
            if !(k.t > 0.0) {
                return Err(ctx(Error::domain("kernel.t must be positive")));
            }
            if let Some(a) = k.alt_a0 {
                if !(a > 0.0) {
                    return Err(ctx(Error::domain("kernel.alt_a0 must be positive")));
                }
            }
        }
        Ok(self)
    }

    pub fn family(&self) -> Result<FamilyParams> {
        FamilyParams::new(self.initial.x0, self.initial.a0, self.initial.b0)
    }

    fn kernel_parts(&self) -> Result<(KernelSpec, QuadratureSpec)> {
        match (self.kernel, self.quadrature) {
            (Some(k), Some(q)) => Ok((k, q)),
            _ => Err(Error::domain(format!("scenario {} has no [kernel] and [quadrature] sections", self.id))),
        }
    }

    fn is_harmonic(&self) -> Option<(f64, f64)> {
        match self.potential {
            PotentialModel::Harmonic { omega, center } => Some((omega, center)),
            _ => None,
        }
    }
}

/// One row of a validation report. `pass` holds exactly when `value <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Qualifier such as [`LINEARIZED_LABEL`]; empty when none applies.
    pub label: String,
    /// Discretization summary (grids, steps).
    pub metadata: String,
}

impl ComparisonReport {
    pub fn new(scenario: &str, metric: &str, value: f64, tolerance: f64, metadata: String) -> Self {
        Self {
            scenario: scenario.to_string(),
            metric: metric.to_string(),
            value,
            tolerance,
            // NaN never passes.
            pass: value <= tolerance,
            label: String::new(),
            metadata,
        }
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub const CSV_HEADER: &'static str = "scenario,metric,value,tolerance,pass,label,metadata";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            csv_field(&self.scenario),
            csv_field(&self.metric),
            fmt_f64(self.value),
            fmt_f64(self.tolerance),
            self.pass,
            csv_field(&self.label),
            csv_field(&self.metadata)
        )
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} / {}: {:.3e} (tolerance {:.1e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.scenario,
            self.metric,
            self.value,
            self.tolerance
        )?;
        if !self.label.is_empty() {
            write!(f, " [{}]", self.label)?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_reports_csv<W: Write>(reports: &[ComparisonReport], mut w: W) -> io::Result<()> {
    writeln!(w, "{}", ComparisonReport::CSV_HEADER)?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn format_reports_text(reports: &[ComparisonReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    out.push_str(&format!("{} checks, {} failed\n", reports.len(), failed));
    out
}

fn grid_meta(g: &SpatialGrid) -> String {
    format!("grid x_min={} dx={} n={}", g.x_min, g.dx, g.n)
}

/// Largest coefficient residual of the reduced equation along a series.
pub fn max_residual(series: &TrajectorySeries, sys: &PhysicalSystem, pot: &PotentialModel) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in &series.states {
        let rates = derivatives(s, sys, pot)?;
        for c in residual_coefficients(s, &rates, sys, pot) {
            worst = worst.max(c.abs());
        }
    }
    Ok(worst)
}

pub fn trajectory_series(sc: &Scenario) -> Result<TrajectorySeries> {
    trajectory::integrate(&sc.initial, &sc.system, &sc.potential, sc.time.t_final, sc.time.dt_ode)
}

pub fn check_residuals(sc: &Scenario, series: &TrajectorySeries) -> Result<ComparisonReport> {
    let value = max_residual(series, &sc.system, &sc.potential)?;
    let meta = format!("dt_ode={} steps={}", series.dt, series.states.len() - 1);
    Ok(ComparisonReport::new(&sc.id, "max_coefficient_residual", value, sc.tolerances.residual, meta))
}

/// Times at which packet snapshots are taken: every `snapshot_every` PDE
/// steps when a PDE step is configured, else evenly spaced ODE steps.
pub fn snapshot_times(sc: &Scenario) -> Vec<f64> {
    let dt = sc.time.dt_pde.unwrap_or(sc.time.dt_ode);
    let steps = pde::step_count(sc.time.t_final, dt);
    let every = sc.output.snapshot_every.max(1);
    let mut out: Vec<f64> = (0..=steps).filter(|k| k % every == 0).map(|k| k as f64 * dt).collect();
    if !steps.is_multiple_of(every) {
        out.push(steps as f64 * dt);
    }
    out
}

/// Analytic packet at time `t` (the trajectory solved with the scenario's ODE step).
pub fn analytic_packet(sc: &Scenario, t: f64, grid: &SpatialGrid) -> Result<ComplexGridField> {
    let s = if t == 0.0 {
        sc.initial.initial_state(&sc.system)
    } else {
        trajectory::final_state(&sc.initial, &sc.system, &sc.potential, t, sc.time.dt_ode.min(t))?
    };
    Ok(packet_psi(&s, &sc.system, grid))
}

pub fn analytic_snapshots(sc: &Scenario) -> Result<Vec<ComplexGridField>> {
    snapshot_times(sc).into_iter().map(|t| analytic_packet(sc, t, &sc.grid)).collect()
}

pub fn check_analytic_norm(sc: &Scenario, snapshots: &[ComplexGridField]) -> ComparisonReport {
    let value = snapshots.iter().map(|f| (f.norm_sqr() - 1.0).abs()).fold(0.0, f64::max);
    let meta = format!("{} snapshots; {}", snapshots.len(), grid_meta(&sc.grid));
    ComparisonReport::new(&sc.id, "analytic_norm_deviation", value, sc.tolerances.analytic_norm, meta)
}

/// Grid spacing of the continuity check.
pub const CONTINUITY_DX: f64 = 0.01;

/// Continuity residual on analytic packet pairs one ODE step apart, taken at
/// each snapshot time. The packets are resampled at spacing
/// [`CONTINUITY_DX`] (or the scenario's, if finer) over the scenario's span.
pub fn check_continuity(sc: &Scenario) -> Result<ComparisonReport> {
    let dt = sc.time.dt_ode;
    let span = sc.grid.n as f64 * sc.grid.dx;
    let dx = sc.grid.dx.min(CONTINUITY_DX);
    let grid = SpatialGrid::new(sc.grid.x_min, dx, (span / dx).round() as usize)?;
    let mut worst: f64 = 0.0;
    for t in snapshot_times(sc) {
        let t0 = (t - dt).max(0.0);
        let a = analytic_packet(sc, t0, &grid)?;
        let b = analytic_packet(sc, t0 + dt, &grid)?;
        worst = worst.max(continuity_residual(&a, &b, &sc.system)?);
    }
    let meta = format!("dt={dt}; {}", grid_meta(&grid));
    Ok(ComparisonReport::new(&sc.id, "continuity_residual", worst, sc.tolerances.continuity, meta))
}

/// Direct evolution of the analytic initial packet, with the phase gauge set
/// by the analytic phase.
#[derive(Debug, Clone)]
pub struct PdeRun {
    pub snapshots: Vec<ComplexGridField>,
    pub steps: usize,
    pub dt: f64,
}

pub fn run_pde(sc: &Scenario) -> Result<PdeRun> {
    let dt = sc.time.dt_pde.ok_or_else(|| Error::domain(format!("scenario {} has no time.dt_pde", sc.id)))?;
    let cfg = SolverConfig::new(sc.grid, dt)?;
    let s0 = sc.initial.initial_state(&sc.system);
    let f0 = packet_psi(&s0, &sc.system, &sc.grid);
    let sys = sc.system;
    let mut solver =
        KostinSolver::new(&f0, &sc.system, &sc.potential, &cfg)?.with_reference_phase(|x| packet_phase(&s0, &sys, x));
    let steps = pde::step_count(sc.time.t_final, dt);
    let snapshots = solver.run(steps, sc.output.snapshot_every)?;
    Ok(PdeRun { snapshots, steps, dt })
}

pub fn ansatz_pde_report(sc: &Scenario, run: &PdeRun) -> Result<ComparisonReport> {
    let quadratic = sc.potential.is_quadratic_or_lower();
    let default = if quadratic { 5e-3 } else { 5e-2 };
    let tol = sc.tolerances.ansatz_pde.unwrap_or(default);
    let mut worst: f64 = 0.0;
    for f in &run.snapshots {
        let reference = analytic_packet(sc, f.time_tag, &sc.grid)?;
        worst = worst.max(f.relative_l2_distance(&reference)?);
    }
    let meta = format!("dt_pde={} steps={}; {}", run.dt, run.steps, grid_meta(&sc.grid));
    let r = ComparisonReport::new(&sc.id, "ansatz_pde_distance", worst, tol, meta);
    Ok(if quadratic { r } else { r.labeled(LINEARIZED_LABEL) })
}

/// Largest norm deviation of the direct solution, per 1000 steps.
pub fn pde_norm_report(sc: &Scenario, run: &PdeRun) -> ComparisonReport {
    let every = sc.output.snapshot_every.max(1);
    let mut worst: f64 = 0.0;
    for (k, f) in run.snapshots.iter().enumerate() {
        let steps = (k * every).min(run.steps).max(1000) as f64;
        worst = worst.max((f.norm_sqr() - 1.0).abs() * 1000.0 / steps);
    }
    let meta = format!("dt_pde={} steps={}", run.dt, run.steps);
    ComparisonReport::new(&sc.id, "pde_norm_drift_per_1000_steps", worst, sc.tolerances.pde_norm_per_1000_steps, meta)
}

/// Relative L2 distance between the analytic packet and the direct solution,
/// maximized over the snapshot times.
pub fn compare_ansatz_pde(sc: &Scenario) -> Result<ComparisonReport> {
    ansatz_pde_report(sc, &run_pde(sc)?)
}

pub fn build_kernel(sc: &Scenario) -> Result<PropagatorKernel> {
    let (k, q) = sc.kernel_parts()?;
    propagator::kernel_eval_auto(&sc.family()?, &sc.system, &sc.potential, k.t, sc.time.dt_ode, &q, &k.grid, &k.grid)
}

fn kernel_meta(k: &PropagatorKernel) -> String {
    format!("t={} nodes={} halfwidth={}; {}", k.t, k.quadrature.n_nodes, k.quadrature.v_halfwidth, grid_meta(&k.x_grid))
}

pub fn kernel_reconstruction_report(sc: &Scenario, kernel: &PropagatorKernel) -> Result<ComparisonReport> {
    let tol = match sc.tolerances.kernel_reconstruction {
        Some(t) => t,
        None if sc.system.nu == 0.0 && matches!(sc.potential, PotentialModel::Free) => 1e-3,
        None if sc.system.nu == 0.0 && sc.is_harmonic().is_some() => 2e-3,
        None => {
            return Err(Error::domain(format!(
                "scenario {}: tolerances.kernel_reconstruction must be set for this potential and damping",
                sc.id
            )))
        }
    };
    let fam = sc.family()?;
    let grid = kernel.x0_grid;
    let psi0 = propagator::member_packet(sc.initial.v0, &fam, &sc.system, &sc.potential, 0.0, sc.time.dt_ode, &grid)?;
    let reference =
        propagator::member_packet(sc.initial.v0, &fam, &sc.system, &sc.potential, kernel.t, sc.time.dt_ode, &grid)?;
    let value = propagator::reconstruction_distance(kernel, &psi0, &reference)?;
    Ok(ComparisonReport::new(&sc.id, "kernel_reconstruction_distance", value, tol, kernel_meta(kernel)))
}

/// Reconstruction of the scenario's family member through the kernel.
pub fn compare_kernel_reconstruction(sc: &Scenario) -> Result<ComparisonReport> {
    kernel_reconstruction_report(sc, &build_kernel(sc)?)
}

fn central(n: usize) -> std::ops::Range<usize> {
    n / 4..n - n / 4
}

/// Largest `|K − K_ref| / |K_ref|` over the central half of both grids.
pub fn kernel_relative_error(kernel: &PropagatorKernel, reference: impl Fn(f64, f64) -> num_complex::Complex64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in central(kernel.x_grid.n) {
        for j in central(kernel.x0_grid.n) {
            let r = reference(kernel.x_grid.x(i), kernel.x0_grid.x(j));
            worst = worst.max((kernel.get(i, j) - r).norm() / r.norm());
        }
    }
    worst
}

/// Largest difference between two kernels on the central half, relative to
/// the largest modulus of `a` there.
pub fn kernel_difference(a: &PropagatorKernel, b: &PropagatorKernel) -> f64 {
    let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
    for i in central(a.x_grid.n) {
        for j in central(a.x0_grid.n) {
            diff = diff.max((a.get(i, j) - b.get(i, j)).norm());
            scale = scale.max(a.get(i, j).norm());
        }
    }
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Reference kernel in closed form, when one exists for the scenario.
fn closed_form_kernel(sc: &Scenario, t: f64) -> Option<Box<dyn Fn(f64, f64) -> num_complex::Complex64>> {
    if sc.system.nu != 0.0 {
        return None;
    }
    let sys = sc.system;
    match sc.potential {
        PotentialModel::Free => Some(Box::new(move |x, x0| exact::free(&sys, x, x0, t))),
        PotentialModel::Harmonic { omega, center } if omega * t > 0.0 && omega * t < std::f64::consts::PI => {
            Some(Box::new(move |x, x0| exact::harmonic(&sys, omega, center, x, x0, t)))
        }
        _ => None,
    }
}

/// Quadrature stability of the kernel: the larger of the changes under node
/// refinement and under a 1.5× wider window.
pub fn kernel_quadrature_report(sc: &Scenario, kernel: &PropagatorKernel) -> Result<ComparisonReport> {
    let fam = sc.family()?;
    let mut cache = propagator::TrajectoryCache::new(&sc.system, &sc.potential);
    let (t, g, q) = (kernel.t, kernel.x_grid, kernel.quadrature);
    let refined = propagator::kernel_eval_cached(&mut cache, &fam, t, sc.time.dt_ode, &q.refined(), &g, &g)?;
    let widened = propagator::kernel_eval_cached(&mut cache, &fam, t, sc.time.dt_ode, &q.widened(1.5), &g, &g)?;
    let value = kernel_difference(kernel, &refined).max(kernel_difference(kernel, &widened));
    Ok(ComparisonReport::new(
        &sc.id,
        "kernel_quadrature_stability",
        value,
        sc.tolerances.quadrature_stability,
        kernel_meta(kernel),
    ))
}

/// Checks of the undamped limit: the ν = 0 packet against an independent
/// solve of the same equations, and, when a kernel is configured, the kernel
/// against its closed form and (harmonic case) the oscillation of the
/// propagated packet.
pub fn schrodinger_reduction_check(sc: &Scenario) -> Result<Vec<ComparisonReport>> {
    let kernel = if sc.pipelines.kernel { Some(build_kernel(sc)?) } else { None };
    reduction_reports(sc, kernel.as_ref())
}

fn reduction_reports(sc: &Scenario, kernel: Option<&PropagatorKernel>) -> Result<Vec<ComparisonReport>> {
    if sc.system.nu != 0.0 {
        return Err(Error::domain(format!(
            "scenario {}: the reduction check needs nu = 0 (got {})",
            sc.id, sc.system.nu
        )));
    }
    let mut out = Vec::new();

    let t = sc.time.t_final;
    let series = trajectory_series(sc)?;
    let direct = trajectory::final_state(&sc.initial, &sc.system, &sc.potential, t, sc.time.dt_ode)?;
    let a = packet_psi(series.last(), &sc.system, &sc.grid);
    let b = packet_psi(&direct, &sc.system, &sc.grid);
    out.push(ComparisonReport::new(
        &sc.id,
        "undamped_packet_consistency",
        a.relative_l2_distance(&b)?,
        sc.tolerances.reduction,
        format!("t={t} dt_ode={}", sc.time.dt_ode),
    ));

    let Some(kernel) = kernel else { return Ok(out) };
    if let Some(reference) = closed_form_kernel(sc, kernel.t) {
        let metric = if matches!(sc.potential, PotentialModel::Free) {
            "free_propagator_error"
        } else {
            "harmonic_propagator_error"
        };
        out.push(ComparisonReport::new(
            &sc.id,
            metric,
            kernel_relative_error(kernel, reference),
            sc.tolerances.free_propagator,
            kernel_meta(kernel),
        ));
    }
    if let Some((omega, center)) = sc.is_harmonic() {
        let fam = sc.family()?;
        let psi0 = propagator::member_packet(
            sc.initial.v0,
            &fam,
            &sc.system,
            &sc.potential,
            0.0,
            sc.time.dt_ode,
            &kernel.x0_grid,
        )?;
        let peak = propagator::propagate(kernel, &psi0)?.density_peak();
        let (wt, y0) = (omega * kernel.t, sc.initial.x0 - center);
        let expected = center + y0 * wt.cos() + sc.initial.v0 / omega * wt.sin();
        out.push(ComparisonReport::new(
            &sc.id,
            "oscillation_peak_error",
            (peak - expected).abs(),
            sc.tolerances.oscillation_amplitude,
            kernel_meta(kernel),
        ));
    }
    Ok(out)
}

fn family_independence_report(sc: &Scenario, kernel: &PropagatorKernel, alt_a0: f64) -> Result<ComparisonReport> {
    let (k, q) = sc.kernel_parts()?;
    let fam = FamilyParams::new(sc.initial.x0, alt_a0, sc.initial.b0)?;
    let other =
        propagator::kernel_eval_auto(&fam, &sc.system, &sc.potential, k.t, sc.time.dt_ode, &q, &k.grid, &k.grid)?;
    Ok(ComparisonReport::new(
        &sc.id,
        "family_independence",
        kernel_difference(kernel, &other),
        sc.tolerances.family_independence,
        format!("a0={} vs {alt_a0}; {}", sc.initial.a0, kernel_meta(kernel)),
    ))
}

/// Everything a scenario run produces: the computed artifacts and the
/// validation rows.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub series: Option<TrajectorySeries>,
    pub packet_snapshots: Vec<ComplexGridField>,
    pub pde: Option<PdeRun>,
    pub kernel: Option<PropagatorKernel>,
    pub reports: Vec<ComparisonReport>,
    pub warnings: Vec<String>,
}

impl ScenarioOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Runs the selected pipelines and, if enabled, every applicable check.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioOutcome> {
    let sc = sc.clone().validated()?;
    let p = sc.pipelines;
    let mut out = ScenarioOutcome {
        series: None,
        packet_snapshots: Vec::new(),
        pde: None,
        kernel: None,
        reports: Vec::new(),
        warnings: Vec::new(),
    };

    if p.trajectory || p.validate {
        let series = trajectory_series(&sc)?;
        out.warnings.extend(series.warnings.iter().cloned());
        if p.validate {
            out.reports.push(check_residuals(&sc, &series)?);
        }
        out.series = Some(series);
    }
    if p.packet {
        out.packet_snapshots = analytic_snapshots(&sc)?;
        if p.validate {
            out.reports.push(check_analytic_norm(&sc, &out.packet_snapshots));
            out.reports.push(check_continuity(&sc)?);
        }
    }
    if p.pde {
        let run = run_pde(&sc)?;
        if p.validate {
            out.reports.push(ansatz_pde_report(&sc, &run)?);
            out.reports.push(pde_norm_report(&sc, &run));
        }
        out.pde = Some(run);
    }
    if p.kernel {
        let kernel = build_kernel(&sc)?;
        out.warnings.extend(kernel.warnings.iter().cloned());
        if p.validate {
            out.reports.push(kernel_reconstruction_report(&sc, &kernel)?);
            let spec = sc.kernel.expect("validated scenario has a kernel section");
            if spec.check_quadrature {
                out.reports.push(kernel_quadrature_report(&sc, &kernel)?);
            }
            if let Some(a) = spec.alt_a0 {
                out.reports.push(family_independence_report(&sc, &kernel, a)?);
            }
        }
        out.kernel = Some(kernel);
    }
    if p.validate && sc.system.nu == 0.0 {
        out.reports.extend(reduction_reports(&sc, out.kernel.as_ref())?);
    }
    Ok(out)
}
