//! Analytic Gaussian packet and hydrodynamic (Madelung) fields.
//!
//! Along a trajectory state `(q, q̇, a, ȧ, S₀)` the packet is `ψ = φ e^{iS}` with
//!
//! ```text
//! φ(x) = (2π a²)^{−1/4} exp(−(x−q)²/(4a²))
//! S(x) = S₀ + (m q̇/ħ)(x−q) + (m/2ħ)(ȧ/a)(x−q)²
//! ```

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::csvfmt;
use crate::error::{Error, Result};
use crate::grid::{argmax, ComplexGridField, SpatialGrid};
use crate::model::PhysicalSystem;
use crate::trajectory::TrajectoryState;
use crate::unwrap::unwrap_from;

/// Phase is only extracted where `ρ > MASK_THRESHOLD × max ρ`.
pub const MASK_THRESHOLD: f64 = 1e-12;

pub fn packet_density(s: &TrajectoryState, x: f64) -> f64 {
    let d = x - s.q;
    (2.0 * PI * s.a * s.a).powf(-0.5) * (-d * d / (2.0 * s.a * s.a)).exp()
}

/// `φ = √ρ`.
pub fn packet_amplitude(s: &TrajectoryState, x: f64) -> f64 {
    let d = x - s.q;
    (2.0 * PI * s.a * s.a).powf(-0.25) * (-d * d / (4.0 * s.a * s.a)).exp()
}

pub fn packet_phase(s: &TrajectoryState, sys: &PhysicalSystem, x: f64) -> f64 {
    let d = x - s.q;
    let k = sys.mass / sys.hbar;
    s.s0 + k * s.qdot * d + 0.5 * k * (s.adot / s.a) * d * d
}

pub fn packet_value(s: &TrajectoryState, sys: &PhysicalSystem, x: f64) -> Complex64 {
    Complex64::from_polar(packet_amplitude(s, x), packet_phase(s, sys, x))
}

pub fn packet_psi(s: &TrajectoryState, sys: &PhysicalSystem, grid: &SpatialGrid) -> ComplexGridField {
    ComplexGridField::from_fn(*grid, s.t, |x| packet_value(s, sys, x))
}

pub fn quantum_velocity(s: &TrajectoryState, x: f64) -> f64 {
    (s.adot / s.a) * (x - s.q) + s.qdot
}

/// Bohm potential of the Gaussian amplitude, exact in `(x − q)`.
pub fn quantum_potential_gaussian(s: &TrajectoryState, sys: &PhysicalSystem, x: f64) -> f64 {
    let h2m = sys.hbar * sys.hbar / sys.mass;
    let a2 = s.a * s.a;
    let d = x - s.q;
    h2m / (4.0 * a2) - h2m * d * d / (8.0 * a2 * a2)
}

/// `−(ħ²/2m) φ″/φ` with a three-point second difference; the two endpoints
/// copy their neighbour.
pub fn quantum_potential_field(phi: &[f64], grid: &SpatialGrid, sys: &PhysicalSystem) -> Result<Vec<f64>> {
    if phi.len() != grid.n {
        return Err(Error::GridMismatch(format!("{} amplitudes on {} points", phi.len(), grid.n)));
    }
    let n = phi.len();
    let c = -sys.hbar * sys.hbar / (2.0 * sys.mass * grid.dx * grid.dx);
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        if !(phi[j] > 0.0) {
            return Err(Error::domain(format!("amplitude must be positive at interior point {j} (x = {})", grid.x(j))));
        }
        out[j] = c * (phi[j - 1] - 2.0 * phi[j] + phi[j + 1]) / phi[j];
    }
    out[0] = out[1];
    out[n - 1] = out[n - 2];
    Ok(out)
}

/// Density, unwrapped phase and velocity of a sampled wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroFields {
    pub grid: SpatialGrid,
    pub rho: Vec<f64>,
    /// Unwrapped phase, continuous over the unmasked run around the peak.
    pub s: Vec<f64>,
    /// `(ħ/m) ∂S/∂x`.
    pub v: Vec<f64>,
    /// True on the contiguous run around the density peak where the phase
    /// was extracted.
    pub mask: Vec<bool>,
    pub peak: usize,
    /// Some point outside the run still exceeds the density floor.
    pub disconnected: bool,
}

impl HydroFields {
    /// `√ρ e^{iS}`.
    pub fn recompose(&self, time_tag: f64) -> ComplexGridField {
        let values = self.rho.iter().zip(&self.s).map(|(r, s)| Complex64::from_polar(r.sqrt(), *s)).collect();
        ComplexGridField { grid: self.grid, values, time_tag }
    }

    /// Bohm potential on the unmasked run (away from its ends); elsewhere the
    /// nearest computed value.
    pub fn quantum_potential(&self, sys: &PhysicalSystem) -> Vec<f64> {
        let n = self.rho.len();
        let c = -sys.hbar * sys.hbar / (2.0 * sys.mass * self.grid.dx * self.grid.dx);
        let phi: Vec<f64> = self.rho.iter().map(|r| r.sqrt()).collect();
        let mut out = vec![f64::NAN; n];
        let mut first = None;
        let mut last = None;
        for j in 1..n.saturating_sub(1) {
            if self.mask[j - 1] && self.mask[j] && self.mask[j + 1] && phi[j] > 0.0 {
                out[j] = c * (phi[j - 1] - 2.0 * phi[j] + phi[j + 1]) / phi[j];
                first.get_or_insert(j);
                last = Some(j);
            }
        }
        let (Some(first), Some(last)) = (first, last) else {
            return vec![0.0; n];
        };
        let (l, r) = (out[first], out[last]);
        out[..first].iter_mut().for_each(|v| *v = l);
        out[last + 1..].iter_mut().for_each(|v| *v = r);
        out
    }
}

pub fn madelung_decompose(f: &ComplexGridField, sys: &PhysicalSystem) -> HydroFields {
    madelung_decompose_with(f, sys, MASK_THRESHOLD)
}

/// Unwrapped phase of a sampled field.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseExtraction {
    pub s: Vec<f64>,
    pub peak: usize,
    /// Contiguous run `lo..=hi` around the peak above the density floor.
    pub lo: usize,
    pub hi: usize,
    pub disconnected: bool,
}

/// Unwraps `arg ψ` starting at the density peak and walking outward; the walk
/// stops at the first point on each side whose density is at or below
/// `tau × max ρ`, and points beyond carry the last unwrapped value.
pub fn extract_phase(values: &[Complex64], rho: &[f64], tau: f64) -> PhaseExtraction {
    let n = values.len();
    let peak = argmax(rho);
    if !(rho[peak] > 0.0) {
        return PhaseExtraction { s: vec![0.0; n], peak, lo: peak, hi: peak, disconnected: false };
    }
    let floor = tau * rho[peak];
    let raw: Vec<f64> = values.iter().map(|z| z.arg()).collect();
    let keep = |j: usize| rho[j] > floor && rho[j] > 1e-300;
    let (s, lo, hi) = unwrap_from(&raw, peak, keep);
    let disconnected = (0..lo).chain(hi + 1..n).any(keep);
    PhaseExtraction { s, peak, lo, hi, disconnected }
}

/// Polar decomposition with an explicit relative density floor `tau`.
pub fn madelung_decompose_with(f: &ComplexGridField, sys: &PhysicalSystem, tau: f64) -> HydroFields {
    let grid = f.grid;
    let n = grid.n;
    let rho = f.density();
    let ext = extract_phase(&f.values, &rho, tau);
    let live = rho[ext.peak] > 0.0;
    let mask: Vec<bool> = (0..n).map(|j| live && j >= ext.lo && j <= ext.hi).collect();
    let s = ext.s;

    let scale = sys.hbar / sys.mass;
    let mut v = vec![0.0; n];
    for j in 1..n - 1 {
        v[j] = scale * (s[j + 1] - s[j - 1]) / (2.0 * grid.dx);
    }
    v[0] = scale * (s[1] - s[0]) / grid.dx;
    v[n - 1] = scale * (s[n - 1] - s[n - 2]) / grid.dx;

    HydroFields { grid, rho, s, v, mask, peak: ext.peak, disconnected: ext.disconnected }
}

/// `max |∂ρ/∂t + ∂(ρv)/∂x|` over interior unmasked points, with the time
/// derivative taken across the two snapshots and `ρ`, `v` from their average.
pub fn continuity_residual(f_prev: &ComplexGridField, f_next: &ComplexGridField, sys: &PhysicalSystem) -> Result<f64> {
    f_prev.grid.ensure_same(&f_next.grid, "continuity residual")?;
    let dt = f_next.time_tag - f_prev.time_tag;
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::domain("continuity residual needs snapshots at distinct times"));
    }
    let mid = ComplexGridField {
        grid: f_prev.grid,
        values: f_prev.values.iter().zip(&f_next.values).map(|(a, b)| 0.5 * (a + b)).collect(),
        time_tag: 0.5 * (f_prev.time_tag + f_next.time_tag),
    };
    let hydro = madelung_decompose(&mid, sys);
    let flux: Vec<f64> = hydro.rho.iter().zip(&hydro.v).map(|(r, v)| r * v).collect();
    let dx = f_prev.grid.dx;
    let mut worst: f64 = 0.0;
    for j in 1..hydro.rho.len() - 1 {
        if !(hydro.mask[j - 1] && hydro.mask[j] && hydro.mask[j + 1]) {
            continue;
        }
        let drho_dt = (f_next.values[j].norm_sqr() - f_prev.values[j].norm_sqr()) / dt;
        let dflux_dx = (flux[j + 1] - flux[j - 1]) / (2.0 * dx);
        worst = worst.max((drho_dt + dflux_dx).abs());
    }
    Ok(worst)
}

pub const SNAPSHOT_HEADER: &str = "x,re_psi,im_psi,rho,S,v,V_qu";

/// Snapshot CSV: `x, re ψ, im ψ, ρ, S, v, V_qu`.
pub fn write_snapshot_csv<W: Write>(f: &ComplexGridField, sys: &PhysicalSystem, mut w: W) -> io::Result<()> {
    let hydro = madelung_decompose(f, sys);
    let vq = hydro.quantum_potential(sys);
    writeln!(w, "{SNAPSHOT_HEADER}")?;
    for (j, z) in f.values.iter().enumerate() {
        csvfmt::write_row(&mut w, &[f.grid.x(j), z.re, z.im, hydro.rho[j], hydro.s[j], hydro.v[j], vq[j]])?;
    }
    Ok(())
}
