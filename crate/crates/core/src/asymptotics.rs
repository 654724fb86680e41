//! Large-`m` closed forms.
//!
//! Every prediction has the shape `c · log(λ m) + κ`, with `c = d/2` set by
//! the dimension of the support of the measure:
//!
//! * torus at ratios `p`: `S_n ≈ s log 2πm + s log n/(n-1) + ½ log Π p_j`,
//!   `s = D/2`, and `s log 2πem + ½ log Π p_j` at `n = 1`;
//! * full-space density `f`: `S_n ≈ D log(m/8π) + log(n^{-D} ∫ f^n)/(1-n)`,
//!   and `D log(em/8π) - ∫ f log f` at `n = 1`;
//! * single copy: `(d/2) log(m/8π) - log f_max`.
//!
//! The torus constant comes from a Gaussian integral over the `(n-1)·D`
//! relative phases with matrix `A = L'_n ⊗ B`, where `L'_n` is the cycle
//! Laplacian with one node removed and `B = diag(1/p_k) - J` on `k < D`.

use std::f64::consts::{E, PI, TAU};

use nalgebra::DMatrix;

use crate::error::{budget, invalid, Error, Result};
use crate::measures::{DensityMeasure, TorusMeasure};
use crate::quadrature::ChartGrid;
use crate::renyi::RenyiOrder;

pub use crate::quadrature::volume_cp;

pub const MAX_GAUSSIAN_DIM: usize = 64;
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaTag {
    /// Torus Rényi law.
    Renyi2,
    /// Torus von Neumann law.
    Vn3,
    /// Full-space Rényi law.
    Snass2,
    /// Full-space von Neumann law (geometric entropy).
    Snass3,
    SingleCopy,
}

impl FormulaTag {
    pub fn name(self) -> &'static str {
        match self {
            FormulaTag::Renyi2 => "renyi2",
            FormulaTag::Vn3 => "vn3",
            FormulaTag::Snass2 => "snass2",
            FormulaTag::Snass3 => "snass3",
            FormulaTag::SingleCopy => "single_copy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPrediction {
    pub leading_coeff: f64,
    pub log_argument_scale: f64,
    pub constant_term: f64,
    pub n: f64,
    pub formula_tag: FormulaTag,
}

impl AsymptoticPrediction {
    pub fn at(&self, m: f64) -> f64 {
        self.leading_coeff * (self.log_argument_scale * m).ln() + self.constant_term
    }
}

/// `log n / (n - 1)`, continuous at `n = 1`.
fn log_ratio(n: f64) -> f64 {
    let x = n - 1.0;
    if x.abs() < 1e-6 {
        return 1.0 - x / 2.0 + x * x / 3.0;
    }
    x.ln_1p() / x
}

fn check_positive_ratios(p: &TorusMeasure) -> Result<()> {
    if let Some(j) = p.p().iter().position(|&x| x <= 0.0) {
        return Err(Error::SingularParameter(format!(
            "p_{j} = 0: the torus asymptote diverges; use the reduced measure"
        )));
    }
    Ok(())
}

/// The torus-measure asymptote as a line in `log m`.
pub fn torus_prediction(p: &TorusMeasure, order: RenyiOrder) -> Result<AsymptoticPrediction> {
    check_positive_ratios(p)?;
    let s = p.dim() as f64 / 2.0;
    let half_log_prod: f64 = 0.5 * p.p().iter().map(|x| x.ln()).sum::<f64>();
    Ok(match order {
        RenyiOrder::Infinite => AsymptoticPrediction {
            leading_coeff: s,
            log_argument_scale: TAU,
            constant_term: half_log_prod,
            n: f64::INFINITY,
            formula_tag: FormulaTag::SingleCopy,
        },
        RenyiOrder::Finite(n) if n == 1.0 => AsymptoticPrediction {
            leading_coeff: s,
            log_argument_scale: TAU * E,
            constant_term: half_log_prod,
            n,
            formula_tag: FormulaTag::Vn3,
        },
        RenyiOrder::Finite(n) => AsymptoticPrediction {
            leading_coeff: s,
            log_argument_scale: TAU,
            constant_term: s * log_ratio(n) + half_log_prod,
            n,
            formula_tag: FormulaTag::Renyi2,
        },
    })
}

pub fn torus_renyi_asymptotic(p: &TorusMeasure, order: RenyiOrder, m: f64) -> Result<f64> {
    if !(m >= 1.0) {
        return invalid(format!("block size must be >= 1, got {m}"));
    }
    Ok(torus_prediction(p, order)?.at(m))
}

/// `log F(n)` with `F(n) = (2π)^{s(n-1)} n^{-s} (Π_{j<D} p_j / p_D)^{(n-1)/2}`.
pub fn log_gaussian_factor(p: &TorusMeasure, n: f64) -> Result<f64> {
    check_positive_ratios(p)?;
    let d = p.dim();
    let s = d as f64 / 2.0;
    let pv = p.p();
    let log_ratio_p: f64 = pv[..d].iter().map(|x| x.ln()).sum::<f64>() - pv[d].ln();
    Ok(s * (n - 1.0) * TAU.ln() - s * n.ln() + 0.5 * (n - 1.0) * log_ratio_p)
}

/// `s log(4π² m) + log Π_{j<D} p_j + log F / (1 - n)`.
pub fn torus_renyi_from_gaussian(p: &TorusMeasure, n: f64, log_f: f64, m: f64) -> Result<f64> {
    check_positive_ratios(p)?;
    if !(n > 1.0) {
        return invalid(format!("Gaussian form needs n > 1, got {n}"));
    }
    let d = p.dim();
    let s = d as f64 / 2.0;
    let log_prod: f64 = p.p()[..d].iter().map(|x| x.ln()).sum();
    Ok(s * (4.0 * PI * PI * m).ln() + log_prod + log_f / (1.0 - n))
}

/// `det A = n^D (p_D / Π_{j<D} p_j)^{n-1}`.
pub fn det_a_closed(p: &TorusMeasure, n: u32) -> Result<f64> {
    check_positive_ratios(p)?;
    if n < 2 {
        return invalid(format!("det A needs n >= 2, got {n}"));
    }
    let d = p.dim();
    let pv = p.p();
    let ratio = pv[d] / pv[..d].iter().product::<f64>();
    Ok((n as f64).powi(d as i32) * ratio.powi(n as i32 - 1))
}

/// The quadratic form `A = L'_n ⊗ B` of the relative-phase Gaussian integral.
pub fn gaussian_form(p: &TorusMeasure, n: u32) -> Result<DMatrix<f64>> {
    check_positive_ratios(p)?;
    if n < 2 {
        return invalid(format!("det A needs n >= 2, got {n}"));
    }
    let d = p.dim();
    let size = d * (n as usize - 1);
    if size > MAX_GAUSSIAN_DIM {
        return budget("Gaussian form dimension", size as f64, MAX_GAUSSIAN_DIM as f64);
    }
    let pv = p.p();
    let b = DMatrix::from_fn(d, d, |j, k| if j == k { (1.0 - pv[k]) / pv[k] } else { -1.0 });
    let r = n as usize - 1;
    let laplacian = DMatrix::from_fn(r, r, |i, j| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    });
    Ok(laplacian.kronecker(&b))
}

pub fn det_a_numeric(p: &TorusMeasure, n: u32) -> Result<f64> {
    let a = gaussian_form(p, n)?;
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Numerical("Gaussian form is not positive definite (assembly error)".into()))?;
    Ok(chol.l().diagonal().iter().map(|x| x * x).product())
}

/// A full-space asymptote together with its quadrature residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullspaceAsymptote {
    pub prediction: AsymptoticPrediction,
    pub value: f64,
    /// `false` when the `O(1)` term outweighs the leading logarithm at this `m`.
    pub within_validity: bool,
    pub residual: f64,
}

/// `-∫ f log f d^{2D}v` with its quadrature residual.
pub fn geometric_entropy(f: &DensityMeasure) -> Result<(f64, f64)> {
    ChartGrid::default().integrate_adaptive(f.dim(), QUADRATURE_TOLERANCE, |c| {
        let x = f.eval(c);
        if x > 0.0 {
            -x * x.ln()
        } else {
            0.0
        }
    })
}

/// `∫ f^n d^{2D}v`, refined until the relative change is below tolerance;
/// returns the value and the last absolute change.
pub fn density_power_integral(f: &DensityMeasure, n: f64) -> Result<(f64, f64)> {
    let mut grid = ChartGrid::default();
    let mut previous = grid.integrate(f.dim(), |c| f.eval(c).powf(n))?;
    loop {
        grid = grid.refined();
        let value = grid.integrate(f.dim(), |c| f.eval(c).powf(n))?;
        let change = (value - previous).abs();
        if change <= QUADRATURE_TOLERANCE * value.abs() {
            return Ok((value, change));
        }
        if grid.refined().node_count(f.dim()) > crate::quadrature::MAX_CHART_NODES {
            return Err(Error::NonConvergence {
                residual: change / value.abs(),
            });
        }
        previous = value;
    }
}

/// Full-space density asymptote; `d = 2D`.
pub fn fullspace_renyi_asymptotic(f: &DensityMeasure, order: RenyiOrder, m: f64) -> Result<FullspaceAsymptote> {
    if !(m >= 1.0) {
        return invalid(format!("block size must be >= 1, got {m}"));
    }
    let dd = f.dim() as f64;
    let (prediction, residual) = match order {
        RenyiOrder::Finite(n) if n == 1.0 => {
            let (h, res) = geometric_entropy(f)?;
            (
                AsymptoticPrediction {
                    leading_coeff: dd,
                    log_argument_scale: E / (8.0 * PI),
                    constant_term: h,
                    n,
                    formula_tag: FormulaTag::Snass3,
                },
                res,
            )
        }
        RenyiOrder::Finite(n) => {
            let (integral, res) = density_power_integral(f, n)?;
            if !(integral > 0.0) {
                return Err(Error::Numerical("∫ f^n is not positive".into()));
            }
            (
                AsymptoticPrediction {
                    leading_coeff: dd,
                    log_argument_scale: 1.0 / (8.0 * PI),
                    constant_term: (integral.ln() - dd * n.ln()) / (1.0 - n),
                    n,
                    formula_tag: FormulaTag::Snass2,
                },
                res / integral,
            )
        }
        RenyiOrder::Infinite => {
            let f_max = f.envelope().ok_or_else(|| {
                Error::InvalidArgument("single-copy asymptote needs the density maximum (envelope)".into())
            })?;
            (
                AsymptoticPrediction {
                    leading_coeff: dd,
                    log_argument_scale: 1.0 / (8.0 * PI),
                    constant_term: -f_max.ln(),
                    n: f64::INFINITY,
                    formula_tag: FormulaTag::SingleCopy,
                },
                0.0,
            )
        }
    };
    let leading = prediction.leading_coeff * (prediction.log_argument_scale * m).ln();
    Ok(FullspaceAsymptote {
        value: prediction.at(m),
        within_validity: prediction.constant_term.abs() <= leading.abs(),
        prediction,
        residual,
    })
}

/// `(d/2) log(m/8π) - log f_max`.
pub fn single_copy_asymptotic(f_max: f64, d: f64, m: f64) -> Result<f64> {
    if !(f_max > 0.0 && f_max.is_finite()) {
        return invalid(format!("f_max must be positive, got {f_max}"));
    }
    if !(d >= 0.0) {
        return invalid(format!("dimension must be >= 0, got {d}"));
    }
    if d == 0.0 {
        return Ok(-f_max.ln());
    }
    Ok(0.5 * d * (m / (8.0 * PI)).ln() - f_max.ln())
}

/// The leading term `(d/2) log m` for a support of dimension `0 <= d <= 2D`.
pub fn generic_scaling(d: f64, dim_d: usize, order: RenyiOrder, m: f64) -> Result<f64> {
    let _ = order;
    if !(0.0..=2.0 * dim_d as f64).contains(&d) {
        return invalid(format!("dimension {d} outside [0, {}]", 2 * dim_d));
    }
    Ok(0.5 * d * m.ln())
}
