//! Points of CP^D in canonical gauge, overlaps, the Fubini–Study distance,
//! metric and volume element in the spherical chart.
//!
//! A point is stored as a unit vector of `D + 1` complex amplitudes whose
//! first component of (numerically) largest modulus is real and nonnegative.
//! The chart coordinates are `θ_0..θ_{D-1} ∈ [0, 2π)` with `θ_D = 0`, and
//! `φ_0..φ_{D-1} ∈ [0, π/2]` with
//!
//! ```text
//! a_0 = cos φ_0,  a_i = cos φ_i Π_{k<i} sin φ_k,  a_D = Π_{k<D} sin φ_k.
//! ```

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Amplitudes closer than this to the maximal modulus compete for the gauge pivot.
const GAUGE_TIE: f64 = 1e-12;
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    components: Vec<Complex64>,
}

impl ProjectivePoint {
    /// Normalize and gauge-fix a nonzero vector of `D + 1 ≥ 2` amplitudes.
    pub fn canonicalize(raw: &[Complex64]) -> Result<Self> {
        if raw.len() < 2 {
            return invalid(format!("need at least 2 components (D >= 1), got {}", raw.len()));
        }
        if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("non-finite component");
        }
        let scale = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return invalid("all-zero vector has no projective class");
        }
        // pre-scale so that the norm computation cannot overflow or underflow
        let scaled: Vec<Complex64> = raw.iter().map(|z| z / scale).collect();
        let norm = scaled.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let unit: Vec<Complex64> = scaled.iter().map(|z| z / norm).collect();

        let max_mod = unit.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = unit
            .iter()
            .position(|z| z.norm() >= max_mod - GAUGE_TIE)
            .expect("a component attains the maximum");
        let phase = unit[pivot].conj() / unit[pivot].norm();
        let mut components: Vec<Complex64> = unit.iter().map(|z| z * phase).collect();
        components[pivot] = Complex64::new(components[pivot].norm(), 0.0);
        Ok(Self { components })
    }

    pub fn from_real(raw: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = raw.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::canonicalize(&c)
    }

    /// The basis vector `e_j` of CP^D.
    pub fn basis(dim_d: usize, j: usize) -> Self {
        assert!(dim_d >= 1 && j <= dim_d, "basis index out of range");
        let mut components = vec![Complex64::new(0.0, 0.0); dim_d + 1];
        components[j] = Complex64::new(1.0, 0.0);
        Self { components }
    }

    /// `D`, the complex dimension of the projective space.
    pub fn dim(&self) -> usize {
        self.components.len() - 1
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    /// Moduli `a_j = |v_j|`.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.components.iter().map(|z| z.norm()).collect()
    }

    /// Spherical-chart coordinates of this point.
    ///
    /// Phases are measured relative to the last component; if it vanishes the
    /// canonical-gauge phases are used directly.
    pub fn to_chart(&self) -> SphericalChart {
        let d = self.dim();
        let a = self.amplitudes();
        let reference = if a[d] > 1e-300 { self.components[d].arg() } else { 0.0 };
        let theta = (0..d)
            .map(|j| {
                if a[j] == 0.0 {
                    0.0
                } else {
                    wrap_angle(self.components[j].arg() - reference)
                }
            })
            .collect();
        // R_i = sqrt(Σ_{j>=i} a_j²), φ_i = atan2(R_{i+1}, a_i)
        let mut tail = vec![0.0; d + 2];
        for i in (0..=d).rev() {
            tail[i] = tail[i + 1] + a[i] * a[i];
        }
        let phi = (0..d)
            .map(|i| tail[i + 1].sqrt().atan2(a[i]).clamp(0.0, PI / 2.0))
            .collect();
        SphericalChart { theta, phi }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn check_same_dim(v: &ProjectivePoint, w: &ProjectivePoint) -> Result<()> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: w.dim(),
        });
    }
    Ok(())
}

/// `v† w`.
pub fn overlap(v: &ProjectivePoint, w: &ProjectivePoint) -> Result<Complex64> {
    check_same_dim(v, w)?;
    Ok(raw_overlap(v.components(), w.components()))
}

#[inline]
pub(crate) fn raw_overlap(v: &[Complex64], w: &[Complex64]) -> Complex64 {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

/// Fubini–Study distance `2 arccos |v† w|`, in `[0, π]`.
pub fn fs_distance(v: &ProjectivePoint, w: &ProjectivePoint) -> Result<f64> {
    let ov = overlap(v, w)?;
    // arccos loses half the digits near 1. Align the phase of w to v and use
    // arccos c = 2 atan(|v - w'| / |v + w'|) instead.
    let phase = if ov.norm() > 0.0 {
        ov.conj() / ov.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in v.components().iter().zip(w.components()) {
        let b = b * phase;
        minus += (a - b).norm_sqr();
        plus += (a + b).norm_sqr();
    }
    Ok(4.0 * minus.sqrt().atan2(plus.sqrt()))
}

/// Spherical-chart coordinates; `theta` and `phi` both have `D` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalChart {
    theta: Vec<f64>,
    phi: Vec<f64>,
}

impl SphericalChart {
    pub fn new(theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if theta.is_empty() || theta.len() != phi.len() {
            return invalid(format!(
                "chart needs D >= 1 angles of each kind, got {} theta and {} phi",
                theta.len(),
                phi.len()
            ));
        }
        if let Some(t) = theta.iter().find(|t| !(0.0..TAU).contains(*t)) {
            return invalid(format!("theta angle {t} outside [0, 2π)"));
        }
        if let Some(p) = phi.iter().find(|p| !(0.0..=PI / 2.0).contains(*p)) {
            return invalid(format!("phi angle {p} outside [0, π/2]"));
        }
        Ok(Self { theta, phi })
    }

    pub(crate) fn new_unchecked(theta: Vec<f64>, phi: Vec<f64>) -> Self {
        Self { theta, phi }
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `a_0..a_D` of the spherical parametrization.
    pub fn amplitudes(&self) -> Vec<f64> {
        let d = self.dim();
        let mut a = Vec::with_capacity(d + 1);
        let mut sin_prod = 1.0;
        for &p in &self.phi {
            a.push(p.cos() * sin_prod);
            sin_prod *= p.sin();
        }
        a.push(sin_prod);
        a
    }

    /// Raw (not gauge-fixed) homogeneous coordinates `a_j e^{iθ_j}`, `θ_D = 0`.
    pub fn raw_components(&self) -> Vec<Complex64> {
        let a = self.amplitudes();
        a.iter()
            .enumerate()
            .map(|(j, &aj)| {
                let t = self.theta.get(j).copied().unwrap_or(0.0);
                Complex64::from_polar(aj, t)
            })
            .collect()
    }
}

pub fn chart_to_point(chart: &SphericalChart) -> ProjectivePoint {
    ProjectivePoint::canonicalize(&chart.raw_components()).expect("spherical amplitudes have unit norm")
}

/// Jacobian of `d^{2D}v` with respect to `dθ dφ`:
/// `2^D Π_p sin 2φ_p · Π_k Π_{p<k} sin² φ_p`.
pub fn volume_density(chart: &SphericalChart) -> f64 {
    let phi = chart.phi();
    let d = phi.len();
    let mut density = 2f64.powi(d as i32);
    let mut sin2_prefix = 1.0;
    for &p in phi {
        density *= (2.0 * p).sin() * sin2_prefix;
        sin2_prefix *= p.sin() * p.sin();
    }
    density.max(0.0)
}

/// Fubini–Study metric in the order `(θ_0..θ_{D-1}, φ_0..φ_{D-1})`.
pub fn metric_at(chart: &SphericalChart) -> DMatrix<f64> {
    let d = chart.dim();
    let a = chart.amplitudes();
    let p: Vec<f64> = a.iter().map(|x| x * x).collect();
    let mut g = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        for j in 0..d {
            let delta = if k == j { p[k] } else { 0.0 };
            g[(k, j)] = -4.0 * (p[k] * p[j] - delta);
        }
    }
    let mut sin2_prefix = 1.0;
    for (k, &phi) in chart.phi().iter().enumerate() {
        g[(d + k, d + k)] = 4.0 * sin2_prefix;
        sin2_prefix *= phi.sin() * phi.sin();
    }
    g
}

/// A complex number stored as `(ln|z|, arg z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_modulus: f64,
    /// Phase in `(-π, π]`.
    pub phase: f64,
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex {
        log_modulus: 0.0,
        phase: 0.0,
    };
    pub const ZERO: LogComplex = LogComplex {
        log_modulus: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn exp(self) -> Complex64 {
        if self.log_modulus == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_modulus.exp(), self.phase)
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.norm() == 0.0 {
            return Self::ZERO;
        }
        Self {
            log_modulus: z.norm().ln(),
            phase: z.arg(),
        }
    }

    /// `z^m` for a nonnegative integer power.
    pub fn powu(self, m: u64) -> Self {
        if m == 0 {
            return Self::ONE;
        }
        if self.log_modulus == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self {
            log_modulus: m as f64 * self.log_modulus,
            phase: principal(self.phase * m as f64),
        }
    }
}

impl std::ops::Mul for LogComplex {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        if self.log_modulus == f64::NEG_INFINITY || other.log_modulus == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self {
            log_modulus: self.log_modulus + other.log_modulus,
            phase: principal(self.phase + other.phase),
        }
    }
}

pub(crate) fn principal(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// `Π_α (v_α† v_{α+1})^m` over a closed chain (`v_{n+1} = v_1`), in log form.
pub fn log_chain_product(points: &[ProjectivePoint], m: u64) -> Result<LogComplex> {
    if points.len() < 2 {
        return invalid(format!("chain needs at least 2 points, got {}", points.len()));
    }
    if m == 0 {
        return invalid("block size m must be at least 1");
    }
    let d = points[0].dim();
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.dim(),
        });
    }
    let n = points.len();
    let mut acc = LogComplex::ONE;
    for alpha in 0..n {
        let z = raw_overlap(points[alpha].components(), points[(alpha + 1) % n].components());
        acc = acc * LogComplex::from_complex(z).powu(m);
        if acc.log_modulus == f64::NEG_INFINITY {
            return Ok(LogComplex::ZERO);
        }
    }
    Ok(acc)
}
