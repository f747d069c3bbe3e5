//! Closed ODE system for the packet center `q`, width `a` and center phase `S₀`.
//!
//! The state evolves as
//!
//! ```text
//! q̈ = −ν q̇ − V′(q)/m
//! ä = −ν ȧ − (V″(q)/m) a + ħ²/(4 m² a³)
//! Ṡ₀ = (½ m q̇² − V(q) − ħ²/(4 m a²))/ħ − ν S₀
//! ```
//!
//! and is integrated with fixed-step classic RK4.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::csvfmt;
use crate::error::{Error, Result};
use crate::model::{PhysicalSystem, PotentialModel};

/// Widths below this are accepted but flagged as stiff.
pub const STIFF_WIDTH: f64 = 1e-6;

/// Initial data of a packet. `S₀(0) = m v0 x0 / ħ` is implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    pub x0: f64,
    pub v0: f64,
    pub a0: f64,
    #[serde(default)]
    pub b0: f64,
}

impl InitialConditions {
    pub fn new(x0: f64, v0: f64, a0: f64, b0: f64) -> Result<Self> {
        Self { x0, v0, a0, b0 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.a0 > 0.0) || !self.a0.is_finite() {
            return Err(Error::domain(format!("initial width a0 must be positive (got {})", self.a0)));
        }
        if ![self.x0, self.v0, self.b0].iter().all(|v| v.is_finite()) {
            return Err(Error::domain("initial conditions must be finite"));
        }
        Ok(self)
    }

    pub fn initial_state(&self, sys: &PhysicalSystem) -> TrajectoryState {
        TrajectoryState {
            t: 0.0,
            q: self.x0,
            qdot: self.v0,
            a: self.a0,
            adot: self.b0,
            s0: sys.mass * self.v0 * self.x0 / sys.hbar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub q: f64,
    pub qdot: f64,
    pub a: f64,
    pub adot: f64,
    /// Phase at the packet center (dimensionless).
    pub s0: f64,
}

/// Time derivatives of the `(q, q̇, a, ȧ, S₀)` components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rates {
    pub q: f64,
    pub qdot: f64,
    pub a: f64,
    pub adot: f64,
    pub s0: f64,
}

/// Which form of the width equation to integrate.
///
/// `AsPrinted` drops the factor `a` on the curvature term; it is kept only so
/// the PDE solver can show that form is wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WidthLaw {
    #[default]
    Corrected,
    AsPrinted,
}

pub fn derivatives(s: &TrajectoryState, sys: &PhysicalSystem, pot: &PotentialModel) -> Result<Rates> {
    derivatives_with(s, sys, pot, WidthLaw::Corrected)
}

pub fn derivatives_with(
    s: &TrajectoryState,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    law: WidthLaw,
) -> Result<Rates> {
    if !(s.a > 0.0) {
        return Err(Error::IntegratorFailure { t: s.t, width: s.a });
    }
    let (m, hbar, nu) = (sys.mass, sys.hbar, sys.nu);
    let v = pot.eval(sys, s.q, s.t);
    let curvature_force = match law {
        WidthLaw::Corrected => v.curvature / m * s.a,
        WidthLaw::AsPrinted => v.curvature / m,
    };
    let a2 = s.a * s.a;
    Ok(Rates {
        q: s.qdot,
        qdot: -nu * s.qdot - v.slope / m,
        a: s.adot,
        adot: -nu * s.adot - curvature_force + hbar * hbar / (4.0 * m * m * a2 * s.a),
        s0: (0.5 * m * s.qdot * s.qdot - v.value - hbar * hbar / (4.0 * m * a2)) / hbar - nu * s.s0,
    })
}

/// Coefficients of `(x−q)⁰`, `(x−q)¹`, `(x−q)²` left over when the ansatz is
/// substituted into the real-part (phase) equation with the given rates.
///
/// All three vanish when `rates` come from [`derivatives`].
pub fn residual_coefficients(
    s: &TrajectoryState,
    rates: &Rates,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
) -> [f64; 3] {
    let (m, hbar, nu) = (sys.mass, sys.hbar, sys.nu);
    let v = pot.eval(sys, s.q, s.t);
    let a2 = s.a * s.a;
    let c0 = hbar * rates.s0 - 0.5 * m * s.qdot * s.qdot + v.value + hbar * nu * s.s0 + hbar * hbar / (4.0 * m * a2);
    let c1 = m * rates.qdot + nu * m * s.qdot + v.slope;
    // The ȧ²/a² pieces from ∂S/∂t and ½ m v² cancel exactly.
    let c2 = 0.5 * m * rates.adot / s.a + 0.5 * m * nu * s.adot / s.a + 0.5 * v.curvature
        - hbar * hbar / (8.0 * m * a2 * a2);
    [c0, c1, c2]
}

fn advance(s: &TrajectoryState, r: &Rates, h: f64) -> TrajectoryState {
    TrajectoryState {
        t: s.t + h,
        q: s.q + h * r.q,
        qdot: s.qdot + h * r.qdot,
        a: s.a + h * r.a,
        adot: s.adot + h * r.adot,
        s0: s.s0 + h * r.s0,
    }
}

/// One classic RK4 step of size `h`. The returned state carries time `t_next`
/// (passed separately so step times do not accumulate round-off).
pub fn rk4_step(
    s: &TrajectoryState,
    h: f64,
    t_next: f64,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    law: WidthLaw,
) -> Result<TrajectoryState> {
    let k1 = derivatives_with(s, sys, pot, law)?;
    let k2 = derivatives_with(&advance(s, &k1, 0.5 * h), sys, pot, law)?;
    let k3 = derivatives_with(&advance(s, &k2, 0.5 * h), sys, pot, law)?;
    let k4 = derivatives_with(&advance(s, &k3, h), sys, pot, law)?;
    let w = h / 6.0;
    let next = TrajectoryState {
        t: t_next,
        q: s.q + w * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
        qdot: s.qdot + w * (k1.qdot + 2.0 * k2.qdot + 2.0 * k3.qdot + k4.qdot),
        a: s.a + w * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a),
        adot: s.adot + w * (k1.adot + 2.0 * k2.adot + 2.0 * k3.adot + k4.adot),
        s0: s.s0 + w * (k1.s0 + 2.0 * k2.s0 + 2.0 * k3.s0 + k4.s0),
    };
    if !(next.a > 0.0) {
        return Err(Error::IntegratorFailure { t: t_next, width: next.a });
    }
    Ok(next)
}

/// Step schedule covering `[0, t_final]`: full steps of `dt`, the last one
/// shortened to land exactly on `t_final`.
fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::domain(format!("t_final must be positive (got {t_final})")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("dt must be positive (got {dt})")));
    }
    if dt > t_final * (1.0 + 1e-12) {
        return Err(Error::domain(format!("dt = {dt} exceeds t_final = {t_final}")));
    }
    let ratio = t_final / dt;
    let n = (ratio - 1e-9 * ratio.max(1.0)).ceil() as usize;
    Ok(n.max(1))
}

fn step_time(k: usize, n: usize, dt: f64, t_final: f64) -> f64 {
    if k == n {
        t_final
    } else {
        k as f64 * dt
    }
}

/// A stored trajectory, one state per step including both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySeries {
    pub initial: InitialConditions,
    pub dt: f64,
    pub states: Vec<TrajectoryState>,
    pub warnings: Vec<String>,
}

impl TrajectorySeries {
    pub fn last(&self) -> &TrajectoryState {
        self.states.last().expect("series is never empty")
    }

    pub fn t_final(&self) -> f64 {
        self.last().t
    }

    pub const CSV_HEADER: &'static str = "t,q,qdot,a,adot,S0";

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for s in &self.states {
            csvfmt::write_row(&mut w, &[s.t, s.q, s.qdot, s.a, s.adot, s.s0])?;
        }
        Ok(())
    }
}

pub fn integrate(
    ic: &InitialConditions,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    t_final: f64,
    dt: f64,
) -> Result<TrajectorySeries> {
    integrate_with(ic, sys, pot, t_final, dt, WidthLaw::Corrected)
}

pub fn integrate_with(
    ic: &InitialConditions,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    t_final: f64,
    dt: f64,
    law: WidthLaw,
) -> Result<TrajectorySeries> {
    let ic = ic.validated()?;
    let n = step_count(t_final, dt)?;
    let mut warnings = Vec::new();
    if ic.a0 < STIFF_WIDTH {
        warnings.push(format!(
            "initial width a0 = {:e} is below {STIFF_WIDTH:e}; the width equation is stiff and may need a smaller dt",
            ic.a0
        ));
    }
    let mut states = Vec::with_capacity(n + 1);
    let mut s = ic.initial_state(sys);
    states.push(s);
    for k in 1..=n {
        let t_next = step_time(k, n, dt, t_final);
        s = rk4_step(&s, t_next - s.t, t_next, sys, pot, law)?;
        states.push(s);
    }
    Ok(TrajectorySeries { initial: ic, dt, states, warnings })
}

/// Integrates to `t_final` keeping only the final state.
pub fn final_state(
    ic: &InitialConditions,
    sys: &PhysicalSystem,
    pot: &PotentialModel,
    t_final: f64,
    dt: f64,
) -> Result<TrajectoryState> {
    let ic = ic.validated()?;
    let n = step_count(t_final, dt)?;
    let mut s = ic.initial_state(sys);
    for k in 1..=n {
        let t_next = step_time(k, n, dt, t_final);
        s = rk4_step(&s, t_next - s.t, t_next, sys, pot, WidthLaw::Corrected)?;
    }
    Ok(s)
}
