//! One-dimensional quadrature rules on a symmetric window `[c − W, c + W]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    #[default]
    Trapezoid,
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default)]
    pub v_center: f64,
    pub v_halfwidth: f64,
    pub n_nodes: usize,
    #[serde(default)]
    pub rule: QuadratureRule,
}

impl QuadratureSpec {
    pub fn trapezoid(v_center: f64, v_halfwidth: f64, n_nodes: usize) -> Result<Self> {
        Self { v_center, v_halfwidth, n_nodes, rule: QuadratureRule::Trapezoid }.validated()
    }

    pub fn gauss_legendre(v_center: f64, v_halfwidth: f64, n_nodes: usize) -> Result<Self> {
        Self { v_center, v_halfwidth, n_nodes, rule: QuadratureRule::GaussLegendre }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.n_nodes < MIN_NODES || self.n_nodes.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "quadrature needs an odd node count of at least {MIN_NODES} (got {})",
                self.n_nodes
            )));
        }
        if !(self.v_halfwidth > 0.0) || !self.v_halfwidth.is_finite() || !self.v_center.is_finite() {
            return Err(Error::domain(format!("quadrature halfwidth must be positive (got {})", self.v_halfwidth)));
        }
        Ok(self)
    }

    /// Trapezoid node spacing (`2W / (n − 1)`).
    pub fn spacing(&self) -> f64 {
        2.0 * self.v_halfwidth / (self.n_nodes - 1) as f64
    }

    /// Same spacing, halfwidth grown by at least `factor`. Trapezoid nodes of
    /// the narrower rule are reused bit-for-bit.
    pub fn widened(&self, factor: f64) -> Self {
        let half = (self.n_nodes - 1) / 2;
        let new_half = ((half as f64) * factor).ceil() as usize;
        let dv = self.spacing();
        Self { v_halfwidth: dv * new_half as f64, n_nodes: 2 * new_half + 1, ..*self }
    }

    /// Twice the resolution on the same window.
    pub fn refined(&self) -> Self {
        Self { n_nodes: 2 * self.n_nodes - 1, ..*self }
    }

    /// Nodes and weights, ordered by increasing node.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        match self.rule {
            QuadratureRule::Trapezoid => {
                let half = (self.n_nodes - 1) / 2;
                let dv = self.spacing();
                (0..self.n_nodes)
                    .map(|k| {
                        let v = self.v_center + (k as f64 - half as f64) * dv;
                        let w = if k == 0 || k + 1 == self.n_nodes { 0.5 * dv } else { dv };
                        (v, w)
                    })
                    .collect()
            }
            QuadratureRule::GaussLegendre => gauss_legendre(self.n_nodes)
                .into_iter()
                .map(|(x, w)| (self.v_center + self.v_halfwidth * x, self.v_halfwidth * w))
                .collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes().into_iter().map(|(v, w)| w * f(v)).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
///
/// Newton iteration on `P_n` from the Tricomi initial guess.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.0;
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(QuadratureSpec::trapezoid(0.0, 1.0, 31).is_err());
        assert!(QuadratureSpec::trapezoid(0.0, 1.0, 34).is_err());
        assert!(QuadratureSpec::trapezoid(0.0, 0.0, 35).is_err());
        assert!(QuadratureSpec::gauss_legendre(0.0, 1.0, 33).is_ok());
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let q = QuadratureSpec::gauss_legendre(0.5, 2.0, 33).unwrap();
        // ∫_{−1.5}^{2.5} x^64 dx
        let exact = (2.5f64.powi(65) + 1.5f64.powi(65)) / 65.0;
        let got = q.integrate(|x| x.powi(64));
        assert!((got / exact - 1.0).abs() < 1e-13, "{got} vs {exact}");
        let wsum: f64 = q.nodes().iter().map(|(_, w)| w).sum();
        assert!((wsum - 4.0).abs() < 1e-13);
    }

    #[test]
    fn large_gauss_legendre_weights() {
        let nodes = gauss_legendre(1001);
        let wsum: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((wsum - 2.0).abs() < 1e-12);
        assert!(nodes.windows(2).all(|p| p[1].0 > p[0].0));
        let second: f64 = nodes.iter().map(|(x, w)| w * x * x).sum();
        assert!((second - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_on_gaussian_is_spectral() {
        let q = QuadratureSpec::trapezoid(0.3, 12.0, 97).unwrap();
        let got = q.integrate(|v| (-(v - 0.3f64).powi(2)).exp());
        assert!((got - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn widening_keeps_nodes() {
        let q = QuadratureSpec::trapezoid(0.25, 10.0, 41).unwrap();
        let w = q.widened(1.5);
        assert_eq!(w.n_nodes, 61);
        assert!((w.spacing() - q.spacing()).abs() < 1e-15);
        let old: Vec<u64> = q.nodes().iter().map(|n| n.0.to_bits()).collect();
        let new: Vec<u64> = w.nodes().iter().map(|n| n.0.to_bits()).collect();
        assert!(old.iter().all(|b| new.contains(b)));
        assert_eq!(q.refined().n_nodes, 81);
    }
}
