//! Physical parameters and external potentials.
//!
//! Potentials are evaluated analytically together with their first and
//! second spatial derivatives, which is all the linearized dynamics needs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the polynomial degree of [`PotentialModel::Polynomial`].
pub const MAX_POLYNOMIAL_DEGREE: usize = 6;

/// Mass, reduced Planck constant and friction coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSystem {
    pub mass: f64,
    pub hbar: f64,
    pub nu: f64,
}

impl Default for PhysicalSystem {
    /// Natural units, no friction.
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0, nu: 0.0 }
    }
}

impl PhysicalSystem {
    pub fn new(mass: f64, hbar: f64, nu: f64) -> Result<Self> {
        Self { mass, hbar, nu }.validated()
    }

    /// Natural units (m = ħ = 1) with the given friction.
    pub fn natural(nu: f64) -> Self {
        Self { mass: 1.0, hbar: 1.0, nu }
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::domain(format!("mass must be positive (got {})", self.mass)));
        }
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return Err(Error::domain(format!("hbar must be positive (got {})", self.hbar)));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::domain(format!("nu must be non-negative (got {})", self.nu)));
        }
        Ok(self)
    }
}

/// Value and spatial derivatives of a potential at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSample {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Time-independent external potential.
///
/// `Harmonic` is `½ m ω² (x − x_c)²`, so its evaluation needs the mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialModel {
    Free,
    /// Uniform force `F`: `V = −F x`.
    Linear {
        force: f64,
    },
    Harmonic {
        omega: f64,
        #[serde(default)]
        center: f64,
    },
    /// `V = Σ c_k x^k`.
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl PotentialModel {
    pub fn validated(self) -> Result<Self> {
        self.validate_with_cap(MAX_POLYNOMIAL_DEGREE)?;
        Ok(self)
    }

    pub fn validate_with_cap(&self, max_degree: usize) -> Result<()> {
        match self {
            PotentialModel::Free => Ok(()),
            PotentialModel::Linear { force } if force.is_finite() => Ok(()),
            PotentialModel::Linear { .. } => Err(Error::domain("linear force must be finite")),
            PotentialModel::Harmonic { omega, center } => {
                if !(*omega >= 0.0) || !omega.is_finite() {
                    Err(Error::domain(format!("harmonic omega must be non-negative (got {omega})")))
                } else if !center.is_finite() {
                    Err(Error::domain("harmonic center must be finite"))
                } else {
                    Ok(())
                }
            }
            PotentialModel::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::domain("polynomial needs at least one coefficient"));
                }
                if coefficients.len() - 1 > max_degree {
                    return Err(Error::domain(format!(
                        "polynomial degree {} exceeds the cap of {max_degree}",
                        coefficients.len() - 1
                    )));
                }
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::domain("polynomial coefficients must be finite"));
                }
                Ok(())
            }
        }
    }

    /// True when `V″` is constant in space, i.e. the Gaussian ansatz is exact.
    pub fn is_quadratic_or_lower(&self) -> bool {
        match self {
            PotentialModel::Polynomial { coefficients } => coefficients.len() <= 3,
            _ => true,
        }
    }

    /// `V`, `V′`, `V″` at `(x, t)`.
    pub fn eval(&self, sys: &PhysicalSystem, x: f64, _t: f64) -> PotentialSample {
        match self {
            PotentialModel::Free => PotentialSample { value: 0.0, slope: 0.0, curvature: 0.0 },
            PotentialModel::Linear { force } => PotentialSample { value: -force * x, slope: -force, curvature: 0.0 },
            PotentialModel::Harmonic { omega, center } => {
                let k = sys.mass * omega * omega;
                let d = x - center;
                PotentialSample { value: 0.5 * k * d * d, slope: k * d, curvature: k }
            }
            PotentialModel::Polynomial { coefficients } => {
                // Horner for the polynomial and its first two derivatives.
                let (mut p, mut dp, mut d2p) = (0.0, 0.0, 0.0);
                for &c in coefficients.iter().rev() {
                    d2p = d2p * x + 2.0 * dp;
                    dp = dp * x + p;
                    p = p * x + c;
                }
                PotentialSample { value: p, slope: dp, curvature: d2p }
            }
        }
    }

    pub fn value(&self, sys: &PhysicalSystem, x: f64, t: f64) -> f64 {
        self.eval(sys, x, t).value
    }
}
