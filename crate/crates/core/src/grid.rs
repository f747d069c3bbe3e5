//! Uniform 1-D grids and complex fields sampled on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_GRID_POINTS: usize = 8;

/// Points `x_j = x_min + j dx`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub dx: f64,
    pub n: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, dx: f64, n: usize) -> Result<Self> {
        Self { x_min, dx, n }.validated()
    }

    /// `n` points covering `[lo, hi)` (the right end excluded, as on a periodic grid).
    pub fn periodic(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, (hi - lo) / n as f64, n)
    }

    /// `n` points covering `[lo, hi]` with both ends included.
    pub fn closed(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("closed grid needs at least two points"));
        }
        Self::new(lo, (hi - lo) / (n - 1) as f64, n)
    }

    pub fn validated(self) -> Result<Self> {
        if self.n < MIN_GRID_POINTS {
            return Err(Error::domain(format!("grid needs at least {MIN_GRID_POINTS} points (got {})", self.n)));
        }
        if !(self.dx > 0.0) || !self.dx.is_finite() || !self.x_min.is_finite() {
            return Err(Error::domain(format!("grid spacing must be positive (got {})", self.dx)));
        }
        Ok(self)
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.x(j))
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n - 1)
    }

    /// Trapezoidal weight of point `j`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.n {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(j, v)| self.weight(j) * v).sum()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.n.is_power_of_two()
    }

    pub fn same_as(&self, other: &SpatialGrid) -> bool {
        self.n == other.n
            && (self.x_min - other.x_min).abs() <= 1e-12 * self.dx
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }

    pub(crate) fn ensure_same(&self, other: &SpatialGrid, what: &str) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{what}: {self:?} vs {other:?}")))
        }
    }
}

/// Complex amplitudes on a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGridField {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
    pub time_tag: f64,
}

impl ComplexGridField {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>, time_tag: f64) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!("{} values for a grid of {} points", values.len(), grid.n)));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("field amplitudes must be finite"));
        }
        Ok(Self { grid, values, time_tag })
    }

    pub fn zeros(grid: SpatialGrid, time_tag: f64) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.n], time_tag }
    }

    pub fn from_fn(grid: SpatialGrid, time_tag: f64, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values, time_tag }
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Trapezoidal `∫|ψ|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.trapezoid(&self.density())
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Trapezoidal `∫ ψ₁* ψ₂ dx`.
    pub fn inner(&self, other: &ComplexGridField) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid, "inner product")?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(j, (a, b))| a.conj() * b * self.grid.weight(j))
            .sum())
    }

    /// `‖self − reference‖ / ‖reference‖` (trapezoidal L2, phase-sensitive).
    pub fn relative_l2_distance(&self, reference: &ComplexGridField) -> Result<f64> {
        self.grid.ensure_same(&reference.grid, "relative distance")?;
        let diff: Vec<f64> = self.values.iter().zip(&reference.values).map(|(a, b)| (a - b).norm_sqr()).collect();
        let num = self.grid.trapezoid(&diff).sqrt();
        let den = reference.l2_norm();
        if den == 0.0 {
            return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok(num / den)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|z| z * c).collect(), time_tag: self.time_tag }
    }

    /// `∫ x |ψ|² dx / ∫ |ψ|² dx`.
    pub fn centroid(&self) -> f64 {
        let rho = self.density();
        let xr: Vec<f64> = rho.iter().enumerate().map(|(j, r)| self.grid.x(j) * r).collect();
        self.grid.trapezoid(&xr) / self.grid.trapezoid(&rho)
    }

    /// Second central moment `∫ (x − x̄)² |ψ|² dx / ∫ |ψ|² dx`.
    pub fn variance(&self) -> f64 {
        let mean = self.centroid();
        let rho = self.density();
        let m2: Vec<f64> = rho.iter().enumerate().map(|(j, r)| (self.grid.x(j) - mean).powi(2) * r).collect();
        self.grid.trapezoid(&m2) / self.grid.trapezoid(&rho)
    }

    /// Location of the density maximum, refined by a parabola through the
    /// logarithm of the three largest samples (exact for a Gaussian).
    pub fn density_peak(&self) -> f64 {
        let rho = self.density();
        let j = argmax(&rho);
        if j == 0 || j + 1 == rho.len() || rho[j - 1] <= 0.0 || rho[j + 1] <= 0.0 {
            return self.grid.x(j);
        }
        let (l, c, r) = (rho[j - 1].ln(), rho[j].ln(), rho[j + 1].ln());
        let denom = l - 2.0 * c + r;
        if denom >= 0.0 {
            return self.grid.x(j);
        }
        self.grid.x(j) + 0.5 * self.grid.dx * (l - r) / denom
    }
}

/// Index of the first maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::new(0.0, 0.1, 7).is_err());
        assert!(SpatialGrid::new(0.0, 0.0, 16).is_err());
        let g = SpatialGrid::periodic(-20.0, 20.0, 2048).unwrap();
        assert_eq!(g.dx, 40.0 / 2048.0);
        assert!(g.is_power_of_two());
        let c = SpatialGrid::closed(-1.0, 1.0, 21).unwrap();
        assert!((c.x_max() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_of_linear_is_exact() {
        let g = SpatialGrid::closed(0.0, 2.0, 11).unwrap();
        let f: Vec<f64> = g.points().map(|x| 3.0 * x + 1.0).collect();
        assert!((g.trapezoid(&f) - 8.0).abs() < 1e-13);
    }

    #[test]
    fn field_length_checked() {
        let g = SpatialGrid::new(0.0, 0.1, 8).unwrap();
        assert!(ComplexGridField::new(g, vec![Complex64::new(1.0, 0.0); 7], 0.0).is_err());
        assert!(ComplexGridField::new(g, vec![Complex64::new(f64::NAN, 0.0); 8], 0.0).is_err());
    }

    #[test]
    fn gaussian_peak_refinement_is_exact() {
        let g = SpatialGrid::periodic(-5.0, 5.0, 64).unwrap();
        let f = ComplexGridField::from_fn(g, 0.0, |x| Complex64::new((-(x - 0.3721f64).powi(2)).exp(), 0.0));
        assert!((f.density_peak() - 0.3721).abs() < 1e-10);
    }
}
