//! Feynman–de Broglie–Bohm kernel built from the normalized packet family.
//!
//! The family member with velocity `v₀` is the Gaussian packet launched from
//! `q(0) = x₀` with `q̇(0) = v₀`, `a(0) = a₀`, `ȧ(0) = b₀`, scaled by
//! `(2π a₀²)^{1/4}` so that its peak modulus at `t = 0` is one. The kernel is
//!
//! ```text
//! K(x, x₀; t) = (m / 2πħ) ∫ dv₀ Φ_{x₀,v₀}(x, t) exp(−i m v₀ x₀ / ħ)
//! ```
//!
//! discretized by a [`QuadratureSpec`]. Each member is launched from the
//! kernel's own source point, where `Φ*(v₀, x₀, 0) = exp(−i m v₀ x₀ / ħ)` holds
//! exactly, so one trajectory is solved per `(x₀, v₀)` pair.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::csvfmt;
use crate::error::{Error, Result};
use crate::grid::{ComplexGridField, SpatialGrid};
use crate::model::{PhysicalSystem, PotentialModel};
use crate::packet::{packet_amplitude, packet_phase, packet_psi};
use crate::quadrature::QuadratureSpec;
use crate::trajectory::{final_state, InitialConditions, TrajectoryState};

/// End-node integrand modulus (relative to its maximum) above which the
/// kernel carries a truncation warning.
pub const END_NODE_WARNING: f64 = 1e-10;
/// Target of [`kernel_eval_auto`].
pub const END_NODE_TARGET: f64 = 1e-12;
const MAX_WIDENINGS: usize = 8;

/// Shared initial data of the packet family; the family index is `v₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    /// Launch point used by [`phi_family`] and [`completeness_probe`].
    #[serde(default)]
    pub x0_family: f64,
    pub a0: f64,
    #[serde(default)]
    pub b0: f64,
}

impl FamilyParams {
    pub fn new(x0_family: f64, a0: f64, b0: f64) -> Result<Self> {
        Self { x0_family, a0, b0 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        InitialConditions::new(self.x0_family, 0.0, self.a0, self.b0)?;
        Ok(self)
    }

    pub fn member(&self, v0: f64) -> InitialConditions {
        self.launched_from(self.x0_family, v0)
    }

    pub fn launched_from(&self, x0: f64, v0: f64) -> InitialConditions {
        InitialConditions { x0, v0, a0: self.a0, b0: self.b0 }
    }

    /// `(2π a₀²)^{1/4}`.
    pub fn normalization(&self) -> f64 {
        (2.0 * PI * self.a0 * self.a0).powf(0.25)
    }
}

/// Memoized trajectory end states for one system and potential.
#[derive(Debug, Clone)]
pub struct TrajectoryCache {
    sys: PhysicalSystem,
    pot: PotentialModel,
    states: HashMap<[u64; 6], TrajectoryState>,
    misses: usize,
}

impl TrajectoryCache {
    pub fn new(sys: &PhysicalSystem, pot: &PotentialModel) -> Self {
        Self { sys: *sys, pot: pot.clone(), states: HashMap::new(), misses: 0 }
    }

    /// State at time `t` of the packet launched with `ic`, integrated with step
    /// `min(dt, t)`.
    pub fn state_at(&mut self, ic: &InitialConditions, t: f64, dt: f64) -> Result<TrajectoryState> {
        let key = [ic.x0, ic.v0, ic.a0, ic.b0, t, dt].map(f64::to_bits);
        if let Some(s) = self.states.get(&key) {
            return Ok(*s);
        }
        let s = if t == 0.0 {
            ic.validated()?.initial_state(&self.sys)
        } else {
            final_state(ic, &self.sys, &self.pot, t, dt.min(t))?
        };
        self.misses += 1;
        self.states.insert(key, s);
        Ok(s)
    }

    /// Number of trajectories actually integrated.
    pub fn solves(&self) -> usize {
        self.misses
    }
}

/// `Φ(v₀, x, t) = (2π a₀²)^{1/4} ψ(v₀, x, t)` for the member launched from
/// `fam.x0_family`.
pub fn phi_family(
    v0: f64,
    fam: &FamilyParams,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    t: f64,
    dt: f64,
    grid: &SpatialGrid,
) -> Result<ComplexGridField> {
    let s = TrajectoryCache::new(sys, pot).state_at(&fam.member(v0), t, dt)?;
    Ok(packet_psi(&s, sys, grid).scaled(Complex64::new(fam.normalization(), 0.0)))
}

/// Normalized packet (not scaled by the family factor) of the member `v0`
/// launched from `fam.x0_family`, at time `t`.
pub fn member_packet(
    v0: f64,
    fam: &FamilyParams,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    t: f64,
    dt: f64,
    grid: &SpatialGrid,
) -> Result<ComplexGridField> {
    let s = TrajectoryCache::new(sys, pot).state_at(&fam.member(v0), t, dt)?;
    Ok(packet_psi(&s, sys, grid))
}

/// Sampled `K(x, x₀; t)`, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorKernel {
    pub x_grid: SpatialGrid,
    pub x0_grid: SpatialGrid,
    pub t: f64,
    pub values: Vec<Complex64>,
    pub quadrature: QuadratureSpec,
    pub family: FamilyParams,
    /// Largest ratio, over all `(x, x₀)`, of the integrand modulus at the
    /// extreme nodes to its maximum over the nodes.
    pub end_node_ratio: f64,
    pub warnings: Vec<String>,
}

impl PropagatorKernel {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.x0_grid.n + j]
    }

    pub const CSV_HEADER: &'static str = "x,x0,re_K,im_K";

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for i in 0..self.x_grid.n {
            for j in 0..self.x0_grid.n {
                let k = self.get(i, j);
                csvfmt::write_row(&mut w, &[self.x_grid.x(i), self.x0_grid.x(j), k.re, k.im])?;
            }
        }
        Ok(())
    }
}

pub fn kernel_eval(
    fam: &FamilyParams,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    t: f64,
    dt: f64,
    quad: &QuadratureSpec,
    x_grid: &SpatialGrid,
    x0_grid: &SpatialGrid,
) -> Result<PropagatorKernel> {
    let mut cache = TrajectoryCache::new(sys, pot);
    kernel_eval_cached(&mut cache, fam, t, dt, quad, x_grid, x0_grid)
}

/// Like [`kernel_eval`], but widens the velocity window (same node spacing)
/// until the end-node ratio drops below [`END_NODE_TARGET`].
pub fn kernel_eval_auto(
    fam: &FamilyParams,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    t: f64,
    dt: f64,
    quad: &QuadratureSpec,
    x_grid: &SpatialGrid,
    x0_grid: &SpatialGrid,
) -> Result<PropagatorKernel> {
    let mut cache = TrajectoryCache::new(sys, pot);
    let mut q = *quad;
    let mut widened = 0;
    loop {
        let mut k = kernel_eval_cached(&mut cache, fam, t, dt, &q, x_grid, x0_grid)?;
        if k.end_node_ratio <= END_NODE_TARGET || widened == MAX_WIDENINGS {
            if widened > 0 {
                k.warnings.insert(
                    0,
                    format!(
                        "velocity window widened from ±{} to ±{} ({} nodes)",
                        quad.v_halfwidth, q.v_halfwidth, q.n_nodes
                    ),
                );
            }
            return Ok(k);
        }
        q = q.widened(1.5);
        widened += 1;
    }
}

pub fn kernel_eval_cached(
    cache: &mut TrajectoryCache,
    fam: &FamilyParams,
    t: f64,
    dt: f64,
    quad: &QuadratureSpec,
    x_grid: &SpatialGrid,
    x0_grid: &SpatialGrid,
) -> Result<PropagatorKernel> {
    let fam = fam.validated()?;
    let quad = quad.validated()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "kernel time must be positive (got {t}); the t = 0 kernel is a delta function"
        )));
    }
    let sys = cache.sys;
    let nodes = quad.nodes();
    let (nx, nx0) = (x_grid.n, x0_grid.n);
    let prefactor = sys.mass / (2.0 * PI * sys.hbar) * fam.normalization();
    let k_over_hbar = sys.mass / sys.hbar;

    let mut values = vec![Complex64::new(0.0, 0.0); nx * nx0];
    let mut max_mod = vec![0.0f64; nx];
    let mut end_mod = vec![0.0f64; nx];
    let mut worst_ratio: f64 = 0.0;
    let last = nodes.len() - 1;

    for j in 0..nx0 {
        let x0 = x0_grid.x(j);
        max_mod.iter_mut().for_each(|m| *m = 0.0);
        end_mod.iter_mut().for_each(|m| *m = 0.0);
        for (k, &(v, w)) in nodes.iter().enumerate() {
            let s = cache.state_at(&fam.launched_from(x0, v), t, dt)?;
            let conj_phase = -k_over_hbar * v * x0;
            for i in 0..nx {
                let x = x_grid.x(i);
                let amp = packet_amplitude(&s, x);
                let term = Complex64::from_polar(amp, packet_phase(&s, &sys, x) + conj_phase);
                values[i * nx0 + j] += term * w;
                max_mod[i] = max_mod[i].max(amp);
                if k == 0 || k == last {
                    end_mod[i] = end_mod[i].max(amp);
                }
            }
        }
        for i in 0..nx {
            if max_mod[i] > 0.0 {
                worst_ratio = worst_ratio.max(end_mod[i] / max_mod[i]);
            }
        }
    }
    values.iter_mut().for_each(|z| *z *= prefactor);

    let mut warnings = Vec::new();
    if worst_ratio > END_NODE_WARNING {
        warnings.push(format!(
            "velocity quadrature truncated: end-node integrand ratio {worst_ratio:.3e} exceeds {END_NODE_WARNING:e}"
        ));
    }
    Ok(PropagatorKernel {
        x_grid: *x_grid,
        x0_grid: *x0_grid,
        t,
        values,
        quadrature: quad,
        family: fam,
        end_node_ratio: worst_ratio,
        warnings,
    })
}

/// `ψ(x, t) = ∫ K(x, x₀; t) ψ₀(x₀) dx₀` by the trapezoidal rule on the source grid.
pub fn propagate(kernel: &PropagatorKernel, psi0: &ComplexGridField) -> Result<ComplexGridField> {
    kernel.x0_grid.ensure_same(&psi0.grid, "propagate: initial field must live on the kernel source grid")?;
    let nx0 = kernel.x0_grid.n;
    let values = (0..kernel.x_grid.n)
        .map(|i| {
            let row = &kernel.values[i * nx0..(i + 1) * nx0];
            row.iter().zip(&psi0.values).enumerate().map(|(j, (k, p))| k * p * kernel.x0_grid.weight(j)).sum()
        })
        .collect();
    Ok(ComplexGridField { grid: kernel.x_grid, values, time_tag: kernel.t })
}

/// Relative L2 distance between `propagate(kernel, psi0)` and `reference`.
pub fn reconstruction_distance(
    kernel: &PropagatorKernel,
    psi0: &ComplexGridField,
    reference: &ComplexGridField,
) -> Result<f64> {
    propagate(kernel, psi0)?.relative_l2_distance(reference)
}

/// Weak-form check of the completeness relation of the family launched from
/// `fam.x0_family`:
///
/// `∫ dx′ [(m/2πħ) Σ_k w_k Φ(v_k, x, t) Φ*(v_k, x′, t)] f(x′)`, which should
/// approximate `f(x)`. The `x′` integral uses the trapezoidal rule on `xp_grid`.
pub fn completeness_probe(
    fam: &FamilyParams,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    t: f64,
    dt: f64,
    quad: &QuadratureSpec,
    test_fn: impl Fn(f64) -> f64,
    x: f64,
    xp_grid: &SpatialGrid,
) -> Result<Complex64> {
    let fam = fam.validated()?;
    let quad = quad.validated()?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("completeness probe needs t >= 0 (got {t})")));
    }
    let mut cache = TrajectoryCache::new(sys, pot);
    let f: Vec<f64> = xp_grid.points().map(&test_fn).collect();
    let norm = fam.normalization();
    let mut total = Complex64::new(0.0, 0.0);
    for (v, w) in quad.nodes() {
        let s = cache.state_at(&fam.member(v), t, dt)?;
        let overlap: Complex64 = xp_grid
            .points()
            .zip(&f)
            .enumerate()
            .map(|(j, (xp, fv))| {
                Complex64::from_polar(packet_amplitude(&s, xp), -packet_phase(&s, sys, xp)) * (fv * xp_grid.weight(j))
            })
            .sum();
        let at_x = Complex64::from_polar(packet_amplitude(&s, x), packet_phase(&s, sys, x));
        total += at_x * overlap * w;
    }
    Ok(total * (sys.mass / (2.0 * PI * sys.hbar) * norm * norm))
}

/// Reconstruction distance of the family member `v0_member` after a short time
/// `t_small`; it should vanish as `t_small → 0`. The same grid serves as
/// source and target grid.
pub fn causality_probe(
    fam: &FamilyParams,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    quad: &QuadratureSpec,
    dt: f64,
    grid: &SpatialGrid,
    v0_member: f64,
    t_small: f64,
) -> Result<f64> {
    if !(t_small > 0.0 && t_small <= 0.05) {
        return Err(Error::domain(format!("causality probe needs 0 < t <= 0.05 (got {t_small})")));
    }
    let psi0 = member_packet(v0_member, fam, sys, pot, 0.0, dt, grid)?;
    let reference = member_packet(v0_member, fam, sys, pot, t_small, dt, grid)?;
    let kernel = kernel_eval(fam, sys, pot, t_small, dt, quad, grid, grid)?;
    reconstruction_distance(&kernel, &psi0, &reference)
}

/// Closed-form propagators used as references.
pub mod exact {
    use super::*;

    /// Free particle: `√(m/2πiħt) exp(i m (x−x₀)² / 2ħt)`.
    pub fn free(sys: &PhysicalSystem, x: f64, x0: f64, t: f64) -> Complex64 {
        let modulus = (sys.mass / (2.0 * PI * sys.hbar * t)).sqrt();
        let phase = sys.mass * (x - x0).powi(2) / (2.0 * sys.hbar * t) - PI / 4.0;
        Complex64::from_polar(modulus, phase)
    }

    /// Undamped harmonic oscillator (Mehler kernel), valid for `0 < ωt < π`.
    pub fn harmonic(sys: &PhysicalSystem, omega: f64, center: f64, x: f64, x0: f64, t: f64) -> Complex64 {
        let (y, y0) = (x - center, x0 - center);
        let s = (omega * t).sin();
        let c = (omega * t).cos();
        let modulus = (sys.mass * omega / (2.0 * PI * sys.hbar * s)).sqrt();
        let phase = sys.mass * omega * ((y * y + y0 * y0) * c - 2.0 * y * y0) / (2.0 * sys.hbar * s) - PI / 4.0;
        Complex64::from_polar(modulus, phase)
    }
}
