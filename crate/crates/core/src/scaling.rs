//! Entropy curves `S_n(m)`, logarithmic slope fits, and the self-similar
//! Cantor moment `Q_m`.
//!
//! For a measure whose support has dimension `d`, `S_n ≈ (d/2) log m`, so the
//! fitted slope against `log m` estimates `d/2`. For the Cantor measure the
//! moment obeys `Q_m ≈ 2^{-(n-1)} Q_{m/9}` over the range of `m` in which the
//! level-`k` atom set resolves the attractor.

use rayon::prelude::*;

use crate::asymptotics::{fullspace_renyi_asymptotic, torus_prediction};
use crate::error::{budget, invalid, Error, Result};
use crate::measures::{IfsMeasure, SpinMeasure};
use crate::moments::{
    discrete_block_spectrum, moment_discrete, moment_mc, moment_torus_quadrature, renyi_from_moment, saturation_value,
    RenyiQuery, TorusQuadrature,
};
use crate::numeric::CompensatedSum;
use crate::oracles::{dicke_renyi, DickeOccupation};
use crate::renyi::{spectrum_entropy, RenyiOrder};

pub const WINDOW_LOW: f64 = 10.0;
pub const WINDOW_HIGH: f64 = 0.1;
pub const DEFAULT_TRUNCATION: f64 = 40.0;
/// Largest atom count for the dense `n >= 3` Gaussian-kernel product.
pub const MAX_KERNEL_ATOMS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub m: u64,
    pub s: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    pub points: Vec<CurvePoint>,
    pub order: RenyiOrder,
    pub engine: String,
    pub measure_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub window: (u64, u64),
    pub dimension_estimate: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CantorKernel {
    /// `exp(-π² m/8 Σ_α (x_{α+1} - x_α)²)`, the small-angle form.
    Gaussian,
    /// `Π_α (v(x_α)† v(x_{α+1}))^m` on the embedded atoms.
    ExactOverlap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    /// Transfer matrix on discrete atoms (IFS measures at their sampling depth).
    ExactTransfer,
    /// Trapezoid rule on the phase torus; `None` picks the exact grid `2m + 2`.
    TorusQuadrature {
        grid_points: Option<usize>,
    },
    MonteCarlo {
        samples: u64,
        seed: u64,
    },
    Asymptotic,
    /// Exact spectrum of the `N`-site Dicke state with the torus ratios.
    DickeExact {
        n_sites: u64,
    },
    /// `Q_m` of an IFS measure at a fixed level.
    IfsKernel {
        level: usize,
        kernel: CantorKernel,
        truncation: f64,
    },
}

impl Engine {
    pub fn tag(&self) -> &'static str {
        match self {
            Engine::ExactTransfer => "exact-transfer",
            Engine::TorusQuadrature { .. } => "quadrature",
            Engine::MonteCarlo { .. } => "monte-carlo",
            Engine::Asymptotic => "asymptotic",
            Engine::DickeExact { .. } => "dicke-exact",
            Engine::IfsKernel { .. } => "ifs-kernel",
        }
    }
}

fn incompatible(engine: &Engine, measure: &SpinMeasure) -> Error {
    Error::Incompatible {
        engine: engine.tag().into(),
        family: measure.family().into(),
    }
}

/// FNV-1a of the measure's debug description; stable across runs.
pub fn measure_hash(measure: &SpinMeasure) -> String {
    let text = format!("{measure:?}");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn integer_moment_entropy(est: &crate::moments::MomentEstimate, n: f64) -> Result<(f64, f64)> {
    renyi_from_moment(est, n)
}

fn one_point(measure: &SpinMeasure, order: RenyiOrder, m: u64, engine: &Engine, index: u64) -> Result<(f64, f64)> {
    let n = order.value();
    match (engine, measure) {
        (Engine::ExactTransfer, SpinMeasure::Discrete(_)) | (Engine::ExactTransfer, SpinMeasure::Ifs(_)) => {
            let atoms = match measure {
                SpinMeasure::Discrete(d) => d.clone(),
                SpinMeasure::Ifs(f) => f.atoms_at_level(f.sample_depth())?,
                _ => unreachable!(),
            };
            if order.as_replica_count().is_some() {
                let est = moment_discrete(&atoms, &RenyiQuery::new(n, m)?)?;
                integer_moment_entropy(&est, n)
            } else {
                let spectrum = discrete_block_spectrum(&atoms, m)?;
                Ok((spectrum_entropy(&spectrum, order), 0.0))
            }
        }
        (Engine::TorusQuadrature { grid_points }, SpinMeasure::Torus(t)) => {
            let rule = match grid_points {
                Some(g) => TorusQuadrature::new(*g),
                None => TorusQuadrature::exact_for(m),
            };
            let est = moment_torus_quadrature(t, &RenyiQuery::new(n, m)?, &rule)?;
            integer_moment_entropy(&est, n)
        }
        (Engine::MonteCarlo { samples, seed }, _) => {
            let est = moment_mc(measure, &RenyiQuery::new(n, m)?, *samples, seed.wrapping_add(index))?;
            integer_moment_entropy(&est, n)
        }
        (Engine::Asymptotic, SpinMeasure::Torus(t)) => {
            let t = t
                .reduced()
                .ok_or_else(|| Error::SingularParameter("torus reduces to a point".into()))?;
            Ok((torus_prediction(&t, order)?.at(m as f64), 0.0))
        }
        (Engine::Asymptotic, SpinMeasure::Density(f)) => {
            Ok((fullspace_renyi_asymptotic(f, order, m as f64)?.value, 0.0))
        }
        (Engine::Asymptotic, SpinMeasure::Discrete(d)) => Ok((saturation_value(d, order), 0.0)),
        (Engine::DickeExact { n_sites }, SpinMeasure::Torus(t)) => {
            let occ = DickeOccupation::from_ratios(t.p(), *n_sites)?;
            Ok((dicke_renyi(&occ, m, order)?, 0.0))
        }
        (
            Engine::IfsKernel {
                level,
                kernel,
                truncation,
            },
            SpinMeasure::Ifs(f),
        ) => {
            let replicas = order
                .as_replica_count()
                .ok_or_else(|| Error::InvalidArgument(format!("IFS kernel needs an integer n >= 2, got {order}")))?;
            let q = ifs_qm(f, *level, replicas as usize, m as f64, *kernel, *truncation)?;
            Ok((q.value.ln() / (1.0 - n), 0.0))
        }
        _ => Err(incompatible(engine, measure)),
    }
}

/// `S_n` at each `m` of the grid.
pub fn entropy_curve(
    measure: &SpinMeasure,
    order: RenyiOrder,
    m_grid: &[u64],
    engine: &Engine,
) -> Result<EntropyCurve> {
    if m_grid.is_empty() {
        return invalid("empty m grid");
    }
    if m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("m grid must be strictly increasing");
    }
    let values: Vec<Result<(f64, f64)>> = m_grid
        .par_iter()
        .enumerate()
        .map(|(i, &m)| one_point(measure, order, m, engine, i as u64))
        .collect();
    let mut points = Vec::with_capacity(m_grid.len());
    for (&m, v) in m_grid.iter().zip(values) {
        let (s, stderr) = v?;
        if !s.is_finite() {
            return Err(Error::Numerical(format!("entropy at m = {m} is not finite")));
        }
        points.push(CurvePoint { m, s, stderr });
    }
    Ok(EntropyCurve {
        points,
        order,
        engine: engine.tag().into(),
        measure_hash: measure_hash(measure),
    })
}

/// Roughly geometric grid of distinct integers from `lo` to `hi`.
pub fn geometric_grid(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    if count <= 1 || hi <= lo {
        return vec![lo];
    }
    let ratio = (hi as f64 / lo as f64).ln() / (count - 1) as f64;
    let mut grid: Vec<u64> = (0..count)
        .map(|i| (lo as f64 * (ratio * i as f64).exp()).round() as u64)
        .collect();
    grid.dedup();
    grid
}

/// Weighted least squares of `S` against `log m` over the window
/// (inclusive; `None` uses every point). Weights are `1/stderr²` when every
/// point carries an error bar, unit otherwise.
pub fn fit_log_slope(curve: &EntropyCurve, window: Option<(u64, u64)>) -> Result<ScalingFit> {
    let (lo, hi) = window.unwrap_or((0, u64::MAX));
    if lo > hi {
        return invalid(format!("empty fit window [{lo}, {hi}]"));
    }
    let pts: Vec<&CurvePoint> = curve
        .points
        .iter()
        .filter(|p| p.m >= lo && p.m <= hi && p.m > 0)
        .collect();
    if pts.len() < 3 {
        return invalid(format!(
            "fit needs at least 3 points in the window, found {}",
            pts.len()
        ));
    }
    let weighted = pts.iter().all(|p| p.stderr > 0.0);
    let w: Vec<f64> = pts
        .iter()
        .map(|p| if weighted { 1.0 / (p.stderr * p.stderr) } else { 1.0 })
        .collect();
    let x: Vec<f64> = pts.iter().map(|p| (p.m as f64).ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.s).collect();
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = y.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(x, w)| w * (x - xm) * (x - xm)).sum();
    if sxx <= 0.0 {
        return invalid("fit window has a single distinct m");
    }
    let sxy: f64 = x
        .iter()
        .zip(&y)
        .zip(&w)
        .map(|((x, y), w)| w * (x - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = x.iter().zip(&y).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(ScalingFit {
        slope,
        intercept,
        residual_rms: (rss / pts.len() as f64).sqrt(),
        window: (pts[0].m, pts[pts.len() - 1].m),
        dimension_estimate: 2.0 * slope,
        points_used: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoment {
    pub value: f64,
    /// Upper bound on the relative weight of discarded chains.
    pub truncation_bound: f64,
}

/// `Q_m` of the middle-thirds Cantor measure at level `k`.
pub fn cantor_qm(k: usize, n: usize, m: f64, kernel: CantorKernel, truncation: f64) -> Result<KernelMoment> {
    ifs_qm(&IfsMeasure::cantor(k), k, n, m, kernel, truncation)
}

/// `Q_m = 2^{-kn} Σ_{chains} K(x_1, .., x_n)` over the level-`k` atoms.
pub fn ifs_qm(
    ifs: &IfsMeasure,
    k: usize,
    n: usize,
    m: f64,
    kernel: CantorKernel,
    truncation: f64,
) -> Result<KernelMoment> {
    if n < 2 {
        return invalid(format!("Q_m needs n >= 2, got {n}"));
    }
    if !(m >= 0.0) {
        return invalid(format!("block size must be >= 0, got {m}"));
    }
    match kernel {
        CantorKernel::ExactOverlap => {
            if m.fract() != 0.0 {
                return invalid(format!("exact-overlap kernel needs an integer m, got {m}"));
            }
            let atoms = ifs.atoms_at_level(k)?;
            let est = moment_discrete(&atoms, &RenyiQuery::new(n as f64, m as u64)?)?;
            Ok(KernelMoment {
                value: est.moment(),
                truncation_bound: 0.0,
            })
        }
        CantorKernel::Gaussian => gaussian_qm(ifs, k, n, m, truncation),
    }
}

fn gaussian_qm(ifs: &IfsMeasure, k: usize, n: usize, m: f64, truncation: f64) -> Result<KernelMoment> {
    if !(truncation > 0.0) {
        return invalid("truncation bound must be positive");
    }
    let mut xs = ifs.level_parameters(k)?;
    xs.sort_by(f64::total_cmp);
    let v = xs.len();
    let rate = std::f64::consts::PI.powi(2) * m / 8.0;
    // a chain survives only if every step has rate·Δ² <= τ
    let reach = if rate > 0.0 {
        (truncation / rate).sqrt()
    } else {
        f64::INFINITY
    };
    let bands: Vec<(usize, usize)> = xs
        .iter()
        .map(|&x| {
            let lo = xs.partition_point(|&y| y < x - reach);
            let hi = xs.partition_point(|&y| y <= x + reach);
            (lo, hi)
        })
        .collect();
    let entry = |i: usize, j: usize| (-rate * (xs[i] - xs[j]).powi(2)).exp();
    let norm = (v as f64).powi(n as i32);
    let total = if n == 2 {
        // Tr K² = Σ K_ij², each chain exponent is 2·rate·Δ²
        let rows: Vec<f64> = (0..v)
            .into_par_iter()
            .map(|i| {
                let (lo, hi) = bands[i];
                (lo..hi)
                    .map(|j| entry(i, j).powi(2))
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        rows.into_iter().collect::<CompensatedSum>().value()
    } else {
        if v > MAX_KERNEL_ATOMS {
            return budget("Gaussian kernel atoms for n >= 3", v as f64, MAX_KERNEL_ATOMS as f64);
        }
        let mut kmat = nalgebra::DMatrix::<f64>::zeros(v, v);
        for i in 0..v {
            let (lo, hi) = bands[i];
            for j in lo..hi {
                kmat[(i, j)] = entry(i, j);
            }
        }
        let mut power = kmat.clone();
        for _ in 1..n - 1 {
            power = &power * &kmat;
        }
        // Tr(K^{n-1} K)
        (0..v)
            .map(|i| {
                power
                    .row(i)
                    .iter()
                    .zip(kmat.column(i).iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect::<CompensatedSum>()
            .value()
    };
    Ok(KernelMoment {
        value: total / norm,
        truncation_bound: (-truncation).exp(),
    })
}

/// Scale window `[c₁·9, c₂·9^{k-1}]` on which level-`k` Cantor atoms stand in
/// for the attractor.
pub fn cantor_window(k: usize) -> (f64, f64) {
    (WINDOW_LOW * 9.0, WINDOW_HIGH * 9f64.powi(k as i32 - 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionRow {
    pub m: u64,
    pub q_m: f64,
    pub q_m_over_9: f64,
    pub ratio: f64,
    /// `ratio / 2^{-(n-1)} - 1`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursionReport {
    pub rows: Vec<RecursionRow>,
    pub target: f64,
    pub max_deviation: f64,
}

/// `Q_m / Q_{m/9}` against `2^{-(n-1)}` for each `m` (multiples of 9 inside
/// the scale window).
pub fn verify_cantor_recursion(k: usize, n: usize, m_list: &[u64], kernel: CantorKernel) -> Result<RecursionReport> {
    let (lo, hi) = cantor_window(k);
    for &m in m_list {
        if m % 9 != 0 {
            return invalid(format!("m = {m} is not a multiple of 9"));
        }
        if (m as f64) < lo || (m as f64) > hi {
            return invalid(format!("m = {m} outside the level-{k} scale window [{lo}, {hi}]"));
        }
    }
    if m_list.is_empty() {
        return invalid("empty m list");
    }
    let target = 0.5f64.powi(n as i32 - 1);
    let rows: Vec<Result<RecursionRow>> = m_list
        .iter()
        .map(|&m| {
            let q_m = cantor_qm(k, n, m as f64, kernel, DEFAULT_TRUNCATION)?.value;
            let q_m_over_9 = cantor_qm(k, n, (m / 9) as f64, kernel, DEFAULT_TRUNCATION)?.value;
            let ratio = q_m / q_m_over_9;
            Ok(RecursionRow {
                m,
                q_m,
                q_m_over_9,
                ratio,
                deviation: ratio / target - 1.0,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let max_deviation = rows.iter().map(|r| r.deviation.abs()).fold(0.0, f64::max);
    Ok(RecursionReport {
        rows,
        target,
        max_deviation,
    })
}
