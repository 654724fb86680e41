//! Tensor-product quadrature over the spherical chart of CP^D.
//!
//! Each `φ_i ∈ [0, π/2]` is covered by `phi_panels` equal panels carrying a
//! Gauss–Legendre rule of `phi_order` nodes; each `θ_i ∈ [0, 2π)` by the
//! trapezoid rule on `theta_points` nodes (spectrally accurate for periodic
//! integrands). Integrals are taken against the volume element, so
//! `integrate(|_| 1.0)` returns the Fubini–Study volume.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;

use crate::error::{budget, invalid, Error, Result};
use crate::geometry::{volume_density, SphericalChart};
use crate::numeric::{gauss_legendre_on, CompensatedSum};

/// Upper bound on chart nodes for a single tensor grid.
pub const MAX_CHART_NODES: f64 = 2.0e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartGrid {
    pub phi_panels: usize,
    pub phi_order: usize,
    pub theta_points: usize,
}

impl Default for ChartGrid {
    fn default() -> Self {
        Self {
            phi_panels: 4,
            phi_order: 8,
            theta_points: 32,
        }
    }
}

impl ChartGrid {
    pub fn refined(self) -> Self {
        Self {
            phi_panels: self.phi_panels * 2,
            phi_order: self.phi_order,
            theta_points: self.theta_points * 2,
        }
    }

    pub fn node_count(&self, dim_d: usize) -> f64 {
        ((self.phi_panels * self.phi_order * self.theta_points) as f64).powi(dim_d as i32)
    }

    fn phi_rule(&self) -> (Vec<f64>, Vec<f64>) {
        let width = FRAC_PI_2 / self.phi_panels as f64;
        let mut nodes = Vec::with_capacity(self.phi_panels * self.phi_order);
        let mut weights = Vec::with_capacity(self.phi_panels * self.phi_order);
        for p in 0..self.phi_panels {
            let lo = p as f64 * width;
            let (x, w) = gauss_legendre_on(self.phi_order, lo, lo + width);
            nodes.extend(x);
            weights.extend(w);
        }
        (nodes, weights)
    }

    /// `∫ g(chart) d^{2D}v` on this grid.
    pub fn integrate<F>(&self, dim_d: usize, g: F) -> Result<f64>
    where
        F: Fn(&SphericalChart) -> f64 + Sync,
    {
        if dim_d == 0 {
            return invalid("chart quadrature needs D >= 1");
        }
        if self.phi_panels == 0 || self.phi_order == 0 || self.theta_points == 0 {
            return invalid("quadrature grid sizes must be positive");
        }
        let nodes = self.node_count(dim_d);
        if nodes > MAX_CHART_NODES {
            return budget("chart quadrature nodes", nodes, MAX_CHART_NODES);
        }
        let (phi_x, phi_w) = self.phi_rule();
        let theta_w = TAU / self.theta_points as f64;
        let theta_x: Vec<f64> = (0..self.theta_points).map(|t| t as f64 * theta_w).collect();
        let per_axis = phi_x.len() * theta_x.len();
        // Slabs over the leading (phi_0, theta_0) pair keep the reduction order fixed.
        let slabs: Vec<f64> = (0..per_axis)
            .into_par_iter()
            .map(|lead| {
                let mut acc = CompensatedSum::new();
                let inner = per_axis.pow(dim_d as u32 - 1);
                let mut theta = vec![0.0; dim_d];
                let mut phi = vec![0.0; dim_d];
                for rest in 0..inner {
                    let mut weight = 1.0;
                    let mut code = lead + per_axis * rest;
                    for axis in 0..dim_d {
                        let digit = code % per_axis;
                        code /= per_axis;
                        let (ip, it) = (digit / theta_x.len(), digit % theta_x.len());
                        phi[axis] = phi_x[ip];
                        theta[axis] = theta_x[it];
                        weight *= phi_w[ip] * theta_w;
                    }
                    let chart = SphericalChart::new_unchecked(theta.clone(), phi.clone());
                    let dv = volume_density(&chart);
                    if dv > 0.0 {
                        acc.add(weight * dv * g(&chart));
                    }
                }
                acc.value()
            })
            .collect();
        let total: CompensatedSum = slabs.into_iter().collect();
        let value = total.value();
        if !value.is_finite() {
            return Err(Error::Numerical("chart quadrature produced a non-finite value".into()));
        }
        Ok(value)
    }

    /// Refine until successive values differ by less than `tol`; returns
    /// `(value, |last change|)`.
    pub fn integrate_adaptive<F>(&self, dim_d: usize, tol: f64, g: F) -> Result<(f64, f64)>
    where
        F: Fn(&SphericalChart) -> f64 + Sync,
    {
        let mut grid = *self;
        let mut previous = grid.integrate(dim_d, &g)?;
        loop {
            let next = grid.refined();
            if next.node_count(dim_d) > MAX_CHART_NODES {
                return Err(Error::NonConvergence { residual: f64::NAN });
            }
            let value = next.integrate(dim_d, &g)?;
            let change = (value - previous).abs();
            if change < tol {
                return Ok((value, change));
            }
            if next.refined().node_count(dim_d) > MAX_CHART_NODES {
                return Err(Error::NonConvergence { residual: change });
            }
            previous = value;
            grid = next;
        }
    }
}

/// `Vol(CP^D) = (4π)^D / D!` for the metric normalized as in [`crate::geometry`].
pub fn volume_cp(dim_d: usize) -> f64 {
    let mut v = 1.0;
    for k in 1..=dim_d {
        v *= 4.0 * std::f64::consts::PI / k as f64;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn volume_matches_closed_form() {
        let grid = ChartGrid::default();
        for d in 1..=2 {
            let v = grid.integrate(d, |_| 1.0).unwrap();
            assert!((v - volume_cp(d)).abs() < 1e-10 * volume_cp(d), "D={d}: {v}");
        }
        assert!((volume_cp(1) - 4.0 * PI).abs() < 1e-14);
        assert!((volume_cp(2) - 8.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn hemisphere_is_resolved_exactly_by_panels() {
        let grid = ChartGrid::default();
        let v = grid
            .integrate(1, |c| if c.phi()[0] < PI / 4.0 { 1.0 } else { 0.0 })
            .unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let grid = ChartGrid {
            phi_panels: 512,
            phi_order: 16,
            theta_points: 1024,
        };
        assert!(matches!(grid.integrate(2, |_| 1.0), Err(Error::Budget { .. })));
    }
}
