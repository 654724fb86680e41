//! The `n`-copy moment `Tr ρ_A^n = ∫ Π_α dμ(v_α) Π_α (v_α† v_{α+1})^m`
//! and its conversion to Rényi entropies.
//!
//! Discrete measures are summed exactly through the Hermitian transfer matrix
//! `H_vw = √(w_v w_w) (v†w)^m`, which is similar to `T_vw = w_w (v†w)^m` and
//! whose eigenvalues are the nonzero spectrum of the block density matrix.
//! Torus measures use the trapezoid rule on the phase torus with one replica
//! pinned. Everything samplable also has a plain Monte Carlo estimator.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{budget, invalid, Error, Result};
use crate::geometry::{log_chain_product, raw_overlap, LogComplex};
use crate::measures::{DiscreteMeasure, SpinMeasure, TorusMeasure};
use crate::numeric::CompensatedSum;
use crate::renyi::{spectrum_entropy, RenyiOrder};

/// Transfer-matrix entries below `exp(DEFAULT_LOG_FLOOR)` are dropped.
pub const DEFAULT_LOG_FLOOR: f64 = -700.0;
/// Largest atom count for a dense Hermitian eigendecomposition.
pub const MAX_EIGEN_ATOMS: usize = 2048;
/// Largest atom count for the `n = 2` entrywise sum.
pub const MAX_PAIR_ATOMS: usize = 1 << 16;
pub const DEFAULT_TORUS_BUDGET: f64 = 2.0e8;
const MC_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiQuery {
    pub n: f64,
    pub m: u64,
}

impl RenyiQuery {
    /// `n >= 1`; `m = 0` is accepted as the empty block (moment 1).
    pub fn new(n: f64, m: u64) -> Result<Self> {
        if n.is_nan() || n < 1.0 {
            return invalid(format!("Rényi index must satisfy n >= 1, got {n}"));
        }
        Ok(Self { n, m })
    }

    /// The number of replicas, for engines that need an integer `n >= 2`.
    pub fn replicas(&self) -> Result<usize> {
        RenyiOrder::new(self.n)?
            .as_replica_count()
            .map(|n| n as usize)
            .ok_or_else(|| Error::InvalidArgument(format!("moment evaluation needs an integer n >= 2, got {}", self.n)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentMethod {
    ExactTransfer,
    Quadrature,
    MonteCarlo,
}

impl MomentMethod {
    pub fn tag(self) -> &'static str {
        match self {
            MomentMethod::ExactTransfer => "exact-transfer",
            MomentMethod::Quadrature => "quadrature",
            MomentMethod::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub log_moment: f64,
    /// Standard error of the moment itself (not of its logarithm).
    pub std_error: f64,
    pub method: MomentMethod,
    pub samples_used: u64,
}

impl MomentEstimate {
    fn exact(log_moment: f64, method: MomentMethod, samples_used: u64) -> Self {
        Self {
            log_moment,
            std_error: 0.0,
            method,
            samples_used,
        }
    }

    pub fn moment(&self) -> f64 {
        self.log_moment.exp()
    }
}

/// `S_n = log_moment / (1 - n)` with standard error `σ / ((n - 1) moment)`.
pub fn renyi_from_moment(est: &MomentEstimate, n: f64) -> Result<(f64, f64)> {
    if n.is_nan() || n <= 1.0 || n.is_infinite() {
        return invalid(format!("entropy from a moment needs finite n > 1, got {n}"));
    }
    let s = est.log_moment / (1.0 - n);
    let err = est.std_error / ((n - 1.0) * est.moment());
    Ok((if s == 0.0 { 0.0 } else { s }, err))
}

fn log_overlap_power(v: &[Complex64], w: &[Complex64], m: u64) -> LogComplex {
    LogComplex::from_complex(raw_overlap(v, w)).powu(m)
}

/// `H_vw = √(w_v w_w) (v†w)^m`, entries below the floor set to zero.
fn hermitian_transfer(measure: &DiscreteMeasure, m: u64, log_floor: f64) -> DMatrix<Complex64> {
    let pts = measure.points();
    let w = measure.weights();
    let k = pts.len();
    let rows: Vec<Vec<Complex64>> = (0..k)
        .into_par_iter()
        .map(|i| {
            (0..k)
                .map(|j| transfer_entry(pts[i].components(), pts[j].components(), w[i], w[j], m, log_floor))
                .collect()
        })
        .collect();
    DMatrix::from_fn(k, k, |i, j| rows[i][j])
}

fn transfer_entry(v: &[Complex64], u: &[Complex64], wv: f64, wu: f64, m: u64, log_floor: f64) -> Complex64 {
    let mut z = log_overlap_power(v, u, m);
    z.log_modulus += 0.5 * (wv.ln() + wu.ln());
    if z.log_modulus < log_floor {
        return Complex64::new(0.0, 0.0);
    }
    z.exp()
}

/// Exact moment of a discrete measure, `Tr T^n`.
pub fn moment_discrete(measure: &DiscreteMeasure, q: &RenyiQuery) -> Result<MomentEstimate> {
    moment_discrete_with_floor(measure, q, DEFAULT_LOG_FLOOR)
}

pub fn moment_discrete_with_floor(measure: &DiscreteMeasure, q: &RenyiQuery, log_floor: f64) -> Result<MomentEstimate> {
    let n = q.replicas()?;
    let k = measure.len();
    if q.m == 0 || k == 1 {
        // T has rank one: Tr T^n = (Σ w)^n = 1
        return Ok(MomentEstimate::exact(0.0, MomentMethod::ExactTransfer, 0));
    }
    let log_moment = if n == 2 {
        if k > MAX_PAIR_ATOMS {
            return budget("transfer-matrix atoms", k as f64, MAX_PAIR_ATOMS as f64);
        }
        // Tr H² = Σ |H_vw|², row by row without materializing H
        let pts = measure.points();
        let w = measure.weights();
        let rows: Vec<f64> = (0..k)
            .into_par_iter()
            .map(|i| {
                let mut acc = CompensatedSum::new();
                for j in 0..k {
                    acc.add(
                        transfer_entry(pts[i].components(), pts[j].components(), w[i], w[j], q.m, log_floor).norm_sqr(),
                    );
                }
                acc.value()
            })
            .collect();
        rows.into_iter().collect::<CompensatedSum>().value().ln()
    } else {
        let spectrum = block_spectrum_with_floor(measure, q.m, log_floor)?;
        let acc: CompensatedSum = spectrum.iter().map(|l| l.powi(n as i32)).collect();
        acc.value().ln()
    };
    if !log_moment.is_finite() {
        return Err(Error::Numerical("transfer-matrix moment is not finite".into()));
    }
    Ok(MomentEstimate::exact(
        log_moment.min(0.0),
        MomentMethod::ExactTransfer,
        0,
    ))
}

/// Nonzero spectrum of the block density matrix for a discrete measure
/// (eigenvalues of `H`, clamped at zero), in descending order.
pub fn discrete_block_spectrum(measure: &DiscreteMeasure, m: u64) -> Result<Vec<f64>> {
    block_spectrum_with_floor(measure, m, DEFAULT_LOG_FLOOR)
}

fn block_spectrum_with_floor(measure: &DiscreteMeasure, m: u64, log_floor: f64) -> Result<Vec<f64>> {
    let k = measure.len();
    if k > MAX_EIGEN_ATOMS {
        return budget(
            "transfer-matrix eigendecomposition atoms",
            k as f64,
            MAX_EIGEN_ATOMS as f64,
        );
    }
    if m == 0 {
        return Ok(vec![1.0]);
    }
    let h = hermitian_transfer(measure, m, log_floor);
    let eig = h.symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Large-`m` limit of `S_n`: the entropy of the weights themselves.
pub fn saturation_value(measure: &DiscreteMeasure, order: RenyiOrder) -> f64 {
    spectrum_entropy(measure.weights(), order)
}

/// `-log max_v w_v`.
pub fn single_copy_discrete(measure: &DiscreteMeasure) -> f64 {
    let max = measure.weights().iter().copied().fold(0.0, f64::max);
    let s = -max.ln();
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

/// Trapezoid quadrature on the phase torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusQuadrature {
    pub grid_points: usize,
    /// Maximal number of integrand evaluations.
    pub max_evaluations: f64,
}

impl TorusQuadrature {
    pub fn new(grid_points: usize) -> Self {
        Self {
            grid_points,
            max_evaluations: DEFAULT_TORUS_BUDGET,
        }
    }

    /// The smallest grid that integrates the degree-`m` trigonometric
    /// integrand exactly.
    pub fn exact_for(m: u64) -> Self {
        Self::new(2 * m as usize + 2)
    }
}

/// Moment of a torus measure by the trapezoid rule on `(n - 1)·D` angles.
pub fn moment_torus_quadrature(
    measure: &TorusMeasure,
    q: &RenyiQuery,
    rule: &TorusQuadrature,
) -> Result<MomentEstimate> {
    let n = q.replicas()?;
    if rule.grid_points == 0 {
        return invalid("torus quadrature needs at least one grid point");
    }
    let measure = match measure.reduced() {
        Some(r) => r,
        None => return Ok(MomentEstimate::exact(0.0, MomentMethod::Quadrature, 1)),
    };
    if q.m == 0 {
        return Ok(MomentEstimate::exact(0.0, MomentMethod::Quadrature, 1));
    }
    let d = measure.dim();
    let free = (n - 1) * d;
    let g = rule.grid_points;
    let evaluations = (g as f64).powi(free as i32);
    if evaluations > rule.max_evaluations {
        return budget("torus quadrature evaluations", evaluations, rule.max_evaluations);
    }
    let step = TAU / g as f64;
    // Phase factors e^{iθ} on the grid, and moduli.
    let phases: Vec<Complex64> = (0..g).map(|t| Complex64::from_polar(1.0, t as f64 * step)).collect();
    let a = measure.amplitudes();
    let inner = evaluations as usize / g;
    let slabs: Vec<f64> = (0..g)
        .into_par_iter()
        .map(|lead| {
            let mut acc = CompensatedSum::new();
            let mut replicas = vec![vec![Complex64::new(0.0, 0.0); d + 1]; n];
            for (j, r) in replicas[0].iter_mut().enumerate() {
                *r = Complex64::new(a[j], 0.0);
            }
            for rest in 0..inner {
                let mut code = lead + g * rest;
                for replica in replicas.iter_mut().skip(1) {
                    for (j, comp) in replica.iter_mut().take(d).enumerate() {
                        *comp = phases[code % g] * a[j];
                        code /= g;
                    }
                    replica[d] = Complex64::new(a[d], 0.0);
                }
                let mut z = LogComplex::ONE;
                for alpha in 0..n {
                    z = z * log_overlap_power(&replicas[alpha], &replicas[(alpha + 1) % n], q.m);
                }
                acc.add(z.exp().re);
            }
            acc.value()
        })
        .collect();
    let total = slabs.into_iter().collect::<CompensatedSum>().value() / evaluations;
    if !(total > 0.0) {
        return Err(Error::Numerical(format!(
            "torus quadrature returned non-positive moment {total:e}; grid too coarse"
        )));
    }
    Ok(MomentEstimate::exact(
        total.ln().min(0.0),
        MomentMethod::Quadrature,
        evaluations as u64,
    ))
}

/// Plain Monte Carlo over `n` independent draws from `μ` per sample.
///
/// Samples are drawn in fixed-size chunks; chunk `c` uses the ChaCha stream
/// `c` of the seed, and chunks are reduced in index order, so the result does
/// not depend on the thread count.
pub fn moment_mc(measure: &SpinMeasure, q: &RenyiQuery, num_samples: u64, seed: u64) -> Result<MomentEstimate> {
    let n = q.replicas()?;
    if num_samples == 0 {
        return invalid("Monte Carlo needs a positive sample count");
    }
    if q.m == 0 {
        return Ok(MomentEstimate::exact(0.0, MomentMethod::MonteCarlo, num_samples));
    }
    let chunks = num_samples.div_ceil(MC_CHUNK);
    let partials: Vec<Result<(f64, f64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = MC_CHUNK.min(num_samples - c * MC_CHUNK);
            let mut mean = 0.0;
            let mut m2 = 0.0;
            let mut points = Vec::with_capacity(n);
            for i in 0..count {
                points.clear();
                for _ in 0..n {
                    points.push(measure.sample(&mut rng)?);
                }
                let x = log_chain_product(&points, q.m)?.exp().re;
                let delta = x - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (x - mean);
            }
            Ok((mean, m2, count))
        })
        .collect();
    // Chan et al. pairwise combination in chunk order
    let (mut mean, mut m2, mut total) = (0.0, 0.0, 0u64);
    for part in partials {
        let (mb, m2b, nb) = part?;
        let combined = total + nb;
        let delta = mb - mean;
        mean += delta * nb as f64 / combined as f64;
        m2 += m2b + delta * delta * total as f64 * nb as f64 / combined as f64;
        total = combined;
    }
    let variance = if total > 1 { m2 / (total - 1) as f64 } else { 0.0 };
    let std_error = (variance / total as f64).sqrt();
    if !(mean > 0.0) {
        return Err(Error::Numerical(format!(
            "Monte Carlo mean {mean:e} is not positive (std. error {std_error:e}); increase samples"
        )));
    }
    Ok(MomentEstimate {
        log_moment: mean.ln(),
        std_error,
        method: MomentMethod::MonteCarlo,
        samples_used: total,
    })
}
