//! Direct split-step solver of the full Kostin equation
//!
//! ```text
//! iħ ∂ψ/∂t = −(ħ²/2m) ∂²ψ/∂x² + [V + (ħν/2i) ln(ψ/ψ*)] ψ
//! ```
//!
//! on a periodic grid. The logarithm is evaluated as `ħν S` with `S` the
//! unwrapped phase of ψ, tracked continuously in time so that no `2π` jumps
//! enter the friction term.
//!
//! Each Strang step is: half a step of the pointwise flow
//! `∂S/∂t = −(V + ħνS)/ħ` (solved exactly, since `|ψ|` is frozen along it),
//! a full spectral kinetic step, then the second pointwise half step.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexGridField, SpatialGrid};
use crate::model::{PhysicalSystem, PotentialModel};
use crate::packet::{extract_phase, MASK_THRESHOLD};
use crate::unwrap::wrap_to_pi;

/// Largest boundary density, relative to the peak, that a step accepts.
pub const EDGE_DENSITY_LIMIT: f64 = 1e-8;
/// Required normalization of the input field.
pub const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    StrangSplitStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: SpatialGrid,
    pub dt: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_mask")]
    pub mask_threshold: f64,
}

fn default_mask() -> f64 {
    MASK_THRESHOLD
}

impl SolverConfig {
    pub fn new(grid: SpatialGrid, dt: f64) -> Result<Self> {
        Self { grid, dt, scheme: Scheme::StrangSplitStep, mask_threshold: MASK_THRESHOLD }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let grid = self.grid.validated()?;
        if !grid.is_power_of_two() {
            return Err(Error::domain(format!("spectral solver needs a power-of-two grid (got n = {})", grid.n)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::domain(format!("solver dt must be positive (got {})", self.dt)));
        }
        if !(self.mask_threshold > 0.0 && self.mask_threshold < 1.0) {
            return Err(Error::domain("mask threshold must lie in (0, 1)"));
        }
        Ok(self)
    }
}

/// Stateful stepper: holds the field, its gauge-tracked phase, and the
/// precomputed kinetic factors.
pub struct KostinSolver {
    sys: PhysicalSystem,
    cfg: SolverConfig,
    potential: Vec<f64>,
    kinetic: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    psi: Vec<Complex64>,
    /// Unwrapped phase of `psi`, continuous in time.
    phase: Vec<f64>,
    t: f64,
}

impl std::fmt::Debug for KostinSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KostinSolver")
            .field("sys", &self.sys)
            .field("cfg", &self.cfg)
            .field("t", &self.t)
            .finish_non_exhaustive()
    }
}

impl KostinSolver {
    /// Starts from `f0`. The initial phase gauge is the principal branch of
    /// `arg ψ` at the density peak; see [`KostinSolver::with_reference_phase`].
    pub fn new(f0: &ComplexGridField, sys: &PhysicalSystem, pot: &PotentialModel, cfg: &SolverConfig) -> Result<Self> {
        let cfg = cfg.validated()?;
        let sys = sys.validated()?;
        cfg.grid.ensure_same(&f0.grid, "initial field must live on the solver grid")?;
        let n = cfg.grid.n;

        let norm = f0.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::domain(format!("initial field must be normalized (norm² = {norm})")));
        }

        let potential: Vec<f64> = cfg.grid.points().map(|x| pot.value(&sys, x, 0.0)).collect();
        let length = n as f64 * cfg.grid.dx;
        let kinetic = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                let k = 2.0 * std::f64::consts::PI * m / length;
                Complex64::from_polar(1.0, -sys.hbar * k * k * cfg.dt / (2.0 * sys.mass))
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch =
            vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];

        let mut solver = Self {
            sys,
            cfg,
            potential,
            kinetic,
            forward,
            inverse,
            scratch,
            psi: f0.values.clone(),
            phase: Vec::new(),
            t: f0.time_tag,
        };
        solver.check_edges()?;
        solver.phase = solver.extract(None)?;
        Ok(solver)
    }

    /// Re-references the tracked phase so that at the density peak it is the
    /// branch closest to `reference(x_peak)`.
    pub fn with_reference_phase(mut self, reference: impl Fn(f64) -> f64) -> Self {
        let rho: Vec<f64> = self.psi.iter().map(|z| z.norm_sqr()).collect();
        let peak = crate::grid::argmax(&rho);
        let target = reference(self.cfg.grid.x(peak));
        let shift = std::f64::consts::TAU * ((target - self.phase[peak]) / std::f64::consts::TAU).round();
        self.phase.iter_mut().for_each(|s| *s += shift);
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// The tracked (unwrapped, gauge-continuous) phase.
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn field(&self) -> ComplexGridField {
        ComplexGridField { grid: self.cfg.grid, values: self.psi.clone(), time_tag: self.t }
    }

    pub fn step(&mut self) -> Result<()> {
        let half = 0.5 * self.cfg.dt;
        self.pointwise_flow(half);

        self.forward.process_with_scratch(&mut self.psi, &mut self.scratch);
        let inv_n = 1.0 / self.cfg.grid.n as f64;
        for (z, k) in self.psi.iter_mut().zip(&self.kinetic) {
            *z *= k * inv_n;
        }
        self.inverse.process_with_scratch(&mut self.psi, &mut self.scratch);

        self.t += self.cfg.dt;
        // The pointwise flows keep |ψ|, so the edge check can run here, ahead
        // of the phase extraction it would otherwise derail.
        self.check_edges()?;
        self.phase = self.extract(Some(&self.phase))?;
        self.pointwise_flow(half);
        Ok(())
    }

    /// Advances `steps` steps, returning every `snapshot_every`-th field (and
    /// the last one) after the initial field.
    pub fn run(&mut self, steps: usize, snapshot_every: usize) -> Result<Vec<ComplexGridField>> {
        let every = snapshot_every.max(1);
        let t0 = self.t;
        let mut out = vec![self.field()];
        for k in 1..=steps {
            self.step()?;
            // Keep step times free of accumulated round-off.
            self.t = t0 + k as f64 * self.cfg.dt;
            if k % every == 0 || k == steps {
                out.push(self.field());
            }
        }
        Ok(out)
    }

    /// Exact flow of `iħ ∂ψ/∂t = (V + ħνS) ψ` over `tau`: the modulus is
    /// frozen and `∂S/∂t = −(V + ħνS)/ħ`.
    fn pointwise_flow(&mut self, tau: f64) {
        let nu = self.sys.nu;
        let decay = (-nu * tau).exp();
        // (1 − e^{−ντ})/ν, which tends to τ as ν → 0.
        let lag = if nu == 0.0 { tau } else { -(-nu * tau).exp_m1() / nu };
        let inv_hbar = 1.0 / self.sys.hbar;
        for ((z, s), v) in self.psi.iter_mut().zip(self.phase.iter_mut()).zip(&self.potential) {
            let next = *s * decay - v * inv_hbar * lag;
            *z *= Complex64::from_polar(1.0, next - *s);
            *s = next;
        }
    }

    fn extract(&self, previous: Option<&[f64]>) -> Result<Vec<f64>> {
        let rho: Vec<f64> = self.psi.iter().map(|z| z.norm_sqr()).collect();
        let ext = extract_phase(&self.psi, &rho, self.cfg.mask_threshold);
        if ext.disconnected && !continues_across_seam(&rho, self.cfg.mask_threshold * rho[ext.peak], ext.lo, ext.hi) {
            return Err(Error::MaskDisconnected { t: self.t });
        }
        let mut s = ext.s;
        if let Some(prev) = previous {
            let p = ext.peak;
            let shift = prev[p] - s[p];
            let turns = (shift - wrap_to_pi(shift)) / std::f64::consts::TAU;
            let offset = std::f64::consts::TAU * turns.round();
            s.iter_mut().for_each(|v| *v += offset);
        }
        Ok(s)
    }

    fn check_edges(&self) -> Result<()> {
        let n = self.psi.len();
        let peak = self.psi.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let edge = self.psi[0].norm_sqr().max(self.psi[n - 1].norm_sqr());
        if peak > 0.0 && edge > EDGE_DENSITY_LIMIT * peak {
            return Err(Error::EdgeProximity { t: self.t, ratio: edge / peak });
        }
        Ok(())
    }
}

/// True when the points above `floor` outside `lo..=hi` form a single run
/// that joins `lo..=hi` through the periodic boundary.
fn continues_across_seam(rho: &[f64], floor: f64, lo: usize, hi: usize) -> bool {
    let n = rho.len();
    let above = |j: usize| rho[j] > floor;
    if lo == 0 {
        // Only a suffix run ending at n − 1 may remain.
        let start = (hi + 1..n).find(|&j| above(j));
        start.is_none_or(|k| (k..n).all(above))
    } else if hi == n - 1 {
        let end = (0..lo).rev().find(|&j| above(j));
        end.is_none_or(|k| (0..=k).all(above))
    } else {
        false
    }
}

/// One Strang step from `f` (phase gauge: principal branch at the peak).
pub fn kostin_step(
    f: &ComplexGridField,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    cfg: &SolverConfig,
) -> Result<ComplexGridField> {
    let mut solver = KostinSolver::new(f, sys, pot, cfg)?;
    solver.step()?;
    Ok(solver.field())
}

/// Number of steps whose end time is closest to `t_final`; zero when
/// `t_final < dt`.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    if t_final < dt {
        0
    } else {
        (t_final / dt).round() as usize
    }
}

/// Evolves `f0` to (within `dt/2` of) `t_final`, returning the initial field,
/// every `snapshot_every`-th step, and the final field.
pub fn kostin_evolve(
    f0: &ComplexGridField,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    cfg: &SolverConfig,
    t_final: f64,
    snapshot_every: usize,
) -> Result<Vec<ComplexGridField>> {
    if snapshot_every == 0 {
        return Err(Error::domain("snapshot_every must be positive"));
    }
    let mut solver = KostinSolver::new(f0, sys, pot, cfg)?;
    solver.run(step_count(t_final - f0.time_tag, cfg.dt), snapshot_every)
}
