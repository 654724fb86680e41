//! Finite-`N` ground truth.
//!
//! * Dicke states: the block spectrum is the multivariate hypergeometric law
//!   `λ(k) = C(m; k) C(N-m; N-k) / C(N; N_0..N_D)`.
//! * Finite combinations `Σ_v c_v v^{⊗N}` of product states: exact moments.
//! * Dense state vectors over `(C^{D+1})^{⊗N}` for brute-force partial traces,
//!   the basis-inversion formula, and the cyclic replica twist operator.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use num_complex::Complex64;

use crate::error::{budget, invalid, Error, Result};
use crate::geometry::{fs_distance, log_chain_product, raw_overlap, LogComplex, ProjectivePoint};
use crate::measures::DiscreteMeasure;
use crate::numeric::{ln_choose, CompensatedSum};
use crate::renyi::{RenyiOrder, SpectrumAccumulator};

/// Largest dense Hilbert-space dimension `(D+1)^N`.
pub const MAX_DENSE_DIM: usize = 1 << 16;
/// Hypergeometric terms below `exp(-DEFAULT_TAIL_CUT)` are not enumerated.
pub const DEFAULT_TAIL_CUT: f64 = 45.0;
pub const DEFAULT_SPECTRUM_ENTRIES: usize = 5_000_000;
pub const DEFAULT_VISIT_BUDGET: f64 = 4.0e8;
pub const MAX_EXACT_SITES: u64 = 1000;
pub const MAX_COMBINATION_POINTS: usize = 256;
/// Largest auxiliary-plus-replica dimension for the literal twist operator.
pub const MAX_TWIST_DIM: usize = 512;

/// Species counts `N_0..N_D` of a Dicke state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DickeOccupation {
    counts: Vec<u64>,
}

impl DickeOccupation {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return invalid(format!("need D + 1 >= 2 species counts, got {}", counts.len()));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return invalid("Dicke state needs N >= 1 sites");
        }
        Ok(Self { counts })
    }

    /// Counts closest to `ratios · n_sites` with the exact total (largest remainder).
    pub fn from_ratios(ratios: &[f64], n_sites: u64) -> Result<Self> {
        if ratios.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return invalid("ratios must be nonnegative");
        }
        let total: f64 = ratios.iter().sum();
        if total <= 0.0 {
            return invalid("ratios must not all vanish");
        }
        let exact: Vec<f64> = ratios.iter().map(|p| p / total * n_sites as f64).collect();
        let mut counts: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
        let assigned: u64 = counts.iter().sum();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
        for &j in order.iter().take(n_sites.saturating_sub(assigned) as usize) {
            counts[j] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_sites(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn ratios(&self) -> Vec<f64> {
        let n = self.n_sites() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Eigenvalues of a block density matrix labelled by occupation patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectrum {
    species: usize,
    patterns: Vec<u64>,
    eigenvalues: Vec<f64>,
}

impl BlockSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn pattern(&self, i: usize) -> &[u64] {
        &self.patterns[i * self.species..(i + 1) * self.species]
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[u64], f64)> {
        self.patterns.chunks(self.species).zip(self.eigenvalues.iter().copied())
    }

    pub fn eigenvalue_of(&self, pattern: &[u64]) -> Option<f64> {
        self.entries().find(|(p, _)| *p == pattern).map(|(_, l)| l)
    }

    pub fn entropy(&self, order: RenyiOrder) -> f64 {
        crate::renyi::spectrum_entropy(&self.eigenvalues, order)
    }
}

/// Options for the truncated hypergeometric enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeOptions {
    pub tail_cut: f64,
    pub max_entries: usize,
    pub max_visits: f64,
}

impl Default for DickeOptions {
    fn default() -> Self {
        Self {
            tail_cut: DEFAULT_TAIL_CUT,
            max_entries: DEFAULT_SPECTRUM_ENTRIES,
            max_visits: DEFAULT_VISIT_BUDGET,
        }
    }
}

fn check_block(occ: &DickeOccupation, m: u64) -> Result<()> {
    let n = occ.n_sites();
    if m == 0 || m >= n {
        return invalid(format!("block size m = {m} outside [1, N - 1] for N = {n}"));
    }
    Ok(())
}

/// Visit every pattern `k` with `log λ(k) >= -tail_cut` as `(k, log λ)`.
///
/// Species are drawn one at a time from conditional univariate
/// hypergeometrics; each is walked outward from its mode with the term ratio,
/// which is exact for integer arguments and never forms a large factorial.
fn visit_dicke<F>(occ: &DickeOccupation, m: u64, opts: &DickeOptions, mut visit: F) -> Result<()>
where
    F: FnMut(&[u64], f64) -> Result<()>,
{
    check_block(occ, m)?;
    let counts = occ.counts();
    let mut pattern = vec![0u64; counts.len()];
    let mut visits = 0f64;
    let population: u64 = counts.iter().sum();
    descend(
        counts,
        0,
        population,
        m,
        0.0,
        opts,
        &mut pattern,
        &mut visits,
        &mut visit,
    )
}

#[allow(clippy::too_many_arguments)]
fn descend<F>(
    counts: &[u64],
    j: usize,
    population: u64,
    draws: u64,
    log_prob: f64,
    opts: &DickeOptions,
    pattern: &mut Vec<u64>,
    visits: &mut f64,
    visit: &mut F,
) -> Result<()>
where
    F: FnMut(&[u64], f64) -> Result<()>,
{
    if j + 1 == counts.len() {
        pattern[j] = draws;
        *visits += 1.0;
        if *visits > opts.max_visits {
            return budget("Dicke spectrum visits", *visits, opts.max_visits);
        }
        return visit(pattern, log_prob);
    }
    let big_k = counts[j];
    let rest = population - big_k;
    let lo = draws.saturating_sub(rest);
    let hi = big_k.min(draws);
    let (nf, kf, rf) = (population as f64, big_k as f64, draws as f64);
    let mode = ((((rf + 1.0) * (kf + 1.0)) / (nf + 2.0)).floor() as u64).clamp(lo, hi);
    let log_pmf = |k: u64| ln_choose(kf, k as f64) + ln_choose(nf - kf, (draws - k) as f64) - ln_choose(nf, rf);
    // P(k+1)/P(k) = (K-k)(r-k) / ((k+1)(N-K-r+k+1))
    let log_up = |k: u64| {
        let k = k as f64;
        ((kf - k) * (rf - k)).ln() - ((k + 1.0) * (nf - kf - rf + k + 1.0)).ln()
    };
    let at_mode = log_pmf(mode);
    let mut step = |k: u64, lp: f64, pattern: &mut Vec<u64>, visits: &mut f64| -> Result<bool> {
        let total = log_prob + lp;
        if total < -opts.tail_cut {
            return Ok(false);
        }
        pattern[j] = k;
        descend(counts, j + 1, rest, draws - k, total, opts, pattern, visits, visit)?;
        Ok(true)
    };
    step(mode, at_mode, pattern, visits)?;
    let mut lp = at_mode;
    let mut k = mode;
    while k < hi {
        lp += log_up(k);
        k += 1;
        if !step(k, lp, pattern, visits)? {
            break;
        }
    }
    let mut lp = at_mode;
    let mut k = mode;
    while k > lo {
        k -= 1;
        lp -= log_up(k);
        if !step(k, lp, pattern, visits)? {
            break;
        }
    }
    Ok(())
}

/// Block spectrum of a Dicke state, renormalized over the enumerated entries
/// and sorted by pattern.
pub fn dicke_spectrum(occ: &DickeOccupation, m: u64) -> Result<BlockSpectrum> {
    dicke_spectrum_with(occ, m, &DickeOptions::default())
}

pub fn dicke_spectrum_with(occ: &DickeOccupation, m: u64, opts: &DickeOptions) -> Result<BlockSpectrum> {
    let species = occ.counts().len();
    let mut entries: Vec<(Vec<u64>, f64)> = Vec::new();
    visit_dicke(occ, m, opts, |k, lp| {
        if entries.len() >= opts.max_entries {
            return budget(
                "Dicke spectrum entries",
                (entries.len() + 1) as f64,
                opts.max_entries as f64,
            );
        }
        entries.push((k.to_vec(), lp.exp()));
        Ok(())
    })?;
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mass: CompensatedSum = entries.iter().map(|e| e.1).collect();
    let mass = mass.value();
    let mut patterns = Vec::with_capacity(entries.len() * species);
    let mut eigenvalues = Vec::with_capacity(entries.len());
    for (k, l) in entries {
        patterns.extend(k);
        eigenvalues.push(l / mass);
    }
    Ok(BlockSpectrum {
        species,
        patterns,
        eigenvalues,
    })
}

/// Rényi entropy of a Dicke block, streamed without storing the spectrum.
pub fn dicke_renyi(occ: &DickeOccupation, m: u64, order: RenyiOrder) -> Result<f64> {
    dicke_renyi_with(occ, m, order, &DickeOptions::default())
}

pub fn dicke_renyi_with(occ: &DickeOccupation, m: u64, order: RenyiOrder, opts: &DickeOptions) -> Result<f64> {
    let mut acc = SpectrumAccumulator::new(order);
    visit_dicke(occ, m, opts, |_, lp| {
        acc.push_log(lp);
        Ok(())
    })?;
    Ok(acc.entropy())
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Exact rational block spectrum, for `N <= 1000`.
pub fn dicke_spectrum_exact(occ: &DickeOccupation, m: u64) -> Result<Vec<(Vec<u64>, BigRational)>> {
    check_block(occ, m)?;
    let n = occ.n_sites();
    if n > MAX_EXACT_SITES {
        return budget("exact Dicke sites", n as f64, MAX_EXACT_SITES as f64);
    }
    let counts = occ.counts();
    let size: f64 = counts.iter().map(|&c| (c.min(m) + 1) as f64).product();
    if size > DEFAULT_SPECTRUM_ENTRIES as f64 {
        return budget("exact Dicke patterns", size, DEFAULT_SPECTRUM_ENTRIES as f64);
    }
    let fact: Vec<BigInt> = (0..=n).map(factorial).collect();
    // 1 / C(N; N_j) = Π N_j! / N!
    let inv_total = BigRational::new(
        counts.iter().fold(BigInt::one(), |a, &c| a * &fact[c as usize]),
        fact[n as usize].clone(),
    );
    let mut out = Vec::new();
    let mut pattern = vec![0u64; counts.len()];
    exact_patterns(counts, 0, m, &mut pattern, &mut |k| {
        let mut num = fact[m as usize].clone() * &fact[(n - m) as usize];
        let mut den = BigInt::one();
        for (kj, nj) in k.iter().zip(counts) {
            den *= &fact[*kj as usize] * &fact[(nj - kj) as usize];
        }
        num *= inv_total.numer();
        den *= inv_total.denom();
        out.push((k.to_vec(), BigRational::new(num, den)));
    });
    Ok(out)
}

fn exact_patterns(counts: &[u64], j: usize, draws: u64, pattern: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
    if j + 1 == counts.len() {
        if draws <= counts[j] {
            pattern[j] = draws;
            f(pattern);
        }
        return;
    }
    for k in 0..=counts[j].min(draws) {
        pattern[j] = k;
        exact_patterns(counts, j + 1, draws - k, pattern, f);
    }
}

/// A vector in `(C^{D+1})^{⊗N}`; site 0 is the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    local_dim: usize,
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

fn dense_dim(local_dim: usize, n_sites: usize) -> Result<usize> {
    let size = (local_dim as f64).powi(n_sites as i32);
    if size > MAX_DENSE_DIM as f64 {
        return budget("dense Hilbert-space dimension", size, MAX_DENSE_DIM as f64);
    }
    Ok(local_dim.pow(n_sites as u32))
}

impl DenseState {
    pub fn new(local_dim: usize, n_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if local_dim < 2 || n_sites == 0 {
            return invalid("dense state needs local dimension >= 2 and N >= 1");
        }
        let dim = dense_dim(local_dim, n_sites)?;
        if amplitudes.len() != dim {
            return invalid(format!("expected {dim} amplitudes, got {}", amplitudes.len()));
        }
        Ok(Self {
            local_dim,
            n_sites,
            amplitudes,
        })
    }

    /// `v^{⊗N}`.
    pub fn product(v: &ProjectivePoint, n_sites: usize) -> Result<Self> {
        let q = v.dim() + 1;
        let dim = dense_dim(q, n_sites)?;
        let c = v.components();
        let amplitudes = (0..dim)
            .map(|idx| digits(idx, q, n_sites).iter().map(|&d| c[d]).product())
            .collect();
        Self::new(q, n_sites, amplitudes)
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The state with sites `i` and `j` exchanged.
    pub fn swap_sites(&self, i: usize, j: usize) -> DenseState {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (idx, &a) in self.amplitudes.iter().enumerate() {
            let mut d = digits(idx, self.local_dim, self.n_sites);
            d.swap(i, j);
            out[undigits(&d, self.local_dim)] = a;
        }
        DenseState {
            local_dim: self.local_dim,
            n_sites: self.n_sites,
            amplitudes: out,
        }
    }

    pub fn max_abs_diff(&self, other: &DenseState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn digits(mut idx: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
    d
}

fn undigits(d: &[usize], base: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * base + x)
}

/// Eigenvalues of `Tr_B |ψ⟩⟨ψ| / ⟨ψ|ψ⟩` for `A` the first `m` sites, descending.
pub fn brute_force_reduced_spectrum(state: &DenseState, m: usize) -> Result<Vec<f64>> {
    if m == 0 || m >= state.n_sites {
        return invalid(format!(
            "block size m = {m} outside [1, N - 1] for N = {}",
            state.n_sites
        ));
    }
    let norm2 = state.norm().powi(2);
    if norm2 == 0.0 {
        return invalid("zero state vector");
    }
    let rows = state.local_dim.pow(m as u32);
    let cols = state.amplitudes.len() / rows;
    let psi = DMatrix::from_fn(rows, cols, |r, c| state.amplitudes[r * cols + c]);
    // A A† and A† A share their nonzero spectrum; use the smaller one
    let gram = if rows <= cols {
        &psi * psi.adjoint()
    } else {
        psi.adjoint() * &psi
    };
    let mut values: Vec<f64> = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| (l / norm2).max(0.0))
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// The normalized Dicke state with the given occupation.
pub fn symmetrize_dicke(occ: &DickeOccupation) -> Result<DenseState> {
    let q = occ.counts().len();
    let n = occ.n_sites() as usize;
    let dim = dense_dim(q, n)?;
    let log_coeff = -0.5 * ln_multinomial(occ.counts());
    let coeff = Complex64::new(log_coeff.exp(), 0.0);
    let amplitudes = (0..dim)
        .map(|idx| {
            let mut seen = vec![0u64; q];
            for d in digits(idx, q, n) {
                seen[d] += 1;
            }
            if seen == occ.counts() {
                coeff
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    DenseState::new(q, n, amplitudes)
}

fn ln_multinomial(counts: &[u64]) -> f64 {
    let mut remaining: u64 = counts.iter().sum();
    let mut total = 0.0;
    for &c in counts {
        total += ln_choose(remaining as f64, c as f64);
        remaining -= c;
    }
    total
}

/// The Dicke state rebuilt from product states `v(θ, a)^{⊗N}` by Fourier
/// projection onto the occupation `N_j`; each phase integral is replaced by
/// an `(N + 1)`-point sum, which is exact for these trigonometric polynomials.
pub fn reconstruct_dicke(occ: &DickeOccupation, a: &[f64]) -> Result<DenseState> {
    let q = occ.counts().len();
    if a.len() != q {
        return Err(Error::DimensionMismatch {
            expected: occ.dim(),
            found: a.len().saturating_sub(1),
        });
    }
    let norm2: f64 = a.iter().map(|x| x * x).sum();
    if (norm2 - 1.0).abs() > 1e-12 || a.iter().any(|&x| x < 0.0) {
        return invalid("moduli a_j must be nonnegative with Σ a_j² = 1");
    }
    if let Some(j) = (0..q).find(|&j| a[j] == 0.0 && occ.counts()[j] > 0) {
        return Err(Error::SingularParameter(format!(
            "a_{j} = 0 while N_{j} = {} > 0",
            occ.counts()[j]
        )));
    }
    let n = occ.n_sites() as usize;
    let dim = dense_dim(q, n)?;
    let d = q - 1;
    let nodes = n + 1;
    let steps = (nodes as f64).powi(d as i32) as usize;
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    let mut theta = vec![0.0; q];
    for code in 0..steps {
        let mut c = code;
        for t in theta.iter_mut().take(d) {
            *t = (c % nodes) as f64 * TAU / nodes as f64;
            c /= nodes;
        }
        // e^{-i Σ θ_j N_j} v(θ)^{⊗N}
        let phase: f64 = -theta
            .iter()
            .zip(occ.counts())
            .map(|(t, &nj)| t * nj as f64)
            .sum::<f64>();
        let v: Vec<Complex64> = (0..q).map(|j| Complex64::from_polar(a[j], theta[j])).collect();
        let weight = Complex64::from_polar(1.0, phase);
        for (idx, slot) in acc.iter_mut().enumerate() {
            let mut z = weight;
            for dgt in digits(idx, q, n) {
                z *= v[dgt];
            }
            *slot += z;
        }
    }
    // (1/√N!) Π √N_j! / a_j^{N_j}
    let mut log_pref = -0.5 * ln_multinomial(occ.counts()) - (steps as f64).ln();
    for (j, &nj) in occ.counts().iter().enumerate() {
        if nj > 0 {
            log_pref -= nj as f64 * a[j].ln();
        }
    }
    let pref = log_pref.exp();
    DenseState::new(q, n, acc.into_iter().map(|z| z * pref).collect())
}

/// `Σ_v c_v v^{⊗N}` over pairwise distinct product states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCombination {
    coefficients: Vec<Complex64>,
    points: Vec<ProjectivePoint>,
    n_sites: u64,
}

impl ProductCombination {
    pub fn new(coefficients: Vec<Complex64>, points: Vec<ProjectivePoint>, n_sites: u64) -> Result<Self> {
        if points.is_empty() || coefficients.len() != points.len() {
            return invalid("need one coefficient per point and at least one point");
        }
        if n_sites == 0 {
            return invalid("need N >= 1 sites");
        }
        if coefficients.iter().all(|c| c.norm() == 0.0) {
            return invalid("all coefficients vanish");
        }
        let d = points[0].dim();
        for (i, p) in points.iter().enumerate() {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
            for q in &points[..i] {
                if fs_distance(p, q)? <= crate::measures::DISTINCT_ATOMS {
                    return invalid("points of a product combination must be distinct in CP^D");
                }
            }
        }
        Ok(Self {
            coefficients,
            points,
            n_sites,
        })
    }

    pub fn with_sites(&self, n_sites: u64) -> Result<Self> {
        Self::new(self.coefficients.clone(), self.points.clone(), n_sites)
    }

    pub fn n_sites(&self) -> u64 {
        self.n_sites
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// The `N → ∞` measure, weights `|c_v|² / Σ|c|²`.
    pub fn limit_measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::from_coefficients(self.points.clone(), &self.coefficients)
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        let q = self.points[0].dim() + 1;
        let dim = dense_dim(q, self.n_sites as usize)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        for (c, p) in self.coefficients.iter().zip(&self.points) {
            let prod = DenseState::product(p, self.n_sites as usize)?;
            for (slot, a) in acc.iter_mut().zip(prod.amplitudes()) {
                *slot += c * a;
            }
        }
        DenseState::new(q, self.n_sites as usize, acc)
    }
}

fn overlap_power(w: &ProjectivePoint, v: &ProjectivePoint, power: u64) -> Complex64 {
    LogComplex::from_complex(raw_overlap(w.components(), v.components()))
        .powu(power)
        .exp()
}

/// Exact `Tr ρ_A^n` for a finite combination of product states.
///
/// With `X_vw = c_v c_w^* (w†v)^{N-m}`, `Y_wv' = (w†v')^m` and
/// `Z = Σ c_v c_w^* (w†v)^N`, the moment is `Tr (XY)^n / Z^n`.
pub fn product_combination_moment(pc: &ProductCombination, m: u64, n: u32) -> Result<f64> {
    let big_n = pc.n_sites;
    if m == 0 || m >= big_n {
        return invalid(format!("block size m = {m} outside [1, N - 1] for N = {big_n}"));
    }
    if n < 2 {
        return invalid(format!("moment needs an integer n >= 2, got {n}"));
    }
    let k = pc.points.len();
    if k > MAX_COMBINATION_POINTS {
        return budget("product-combination points", k as f64, MAX_COMBINATION_POINTS as f64);
    }
    let c = &pc.coefficients;
    let pts = &pc.points;
    let x = DMatrix::from_fn(k, k, |v, w| {
        c[v] * c[w].conj() * overlap_power(&pts[w], &pts[v], big_n - m)
    });
    let y = DMatrix::from_fn(k, k, |w, v| overlap_power(&pts[w], &pts[v], m));
    let mut z = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for v in 0..k {
        for w in 0..k {
            let term = c[v] * c[w].conj() * overlap_power(&pts[w], &pts[v], big_n);
            z += term;
            scale += term.norm();
        }
    }
    if !(z.re > 1e-13 * scale) {
        return Err(Error::IllConditioned(format!(
            "state norm Z = {z} is not positive; the combination nearly cancels"
        )));
    }
    let mxy = (&x * &y).unscale(z.re);
    let mut power = mxy.clone();
    for _ in 1..n {
        power = &power * &mxy;
    }
    let value = power.trace();
    if value.im.abs() > 1e-8 * value.re.abs().max(1e-300) + 1e-14 {
        return Err(Error::Numerical(format!("moment has imaginary part {}", value.im)));
    }
    Ok(value.re)
}

/// `⊗_α ψ_{v_α}(T_A) = Π_α (v_α† v_{α+1})^m`.
pub fn twist_expectation(replica_points: &[ProjectivePoint], m: u64) -> Result<Complex64> {
    Ok(log_chain_product(replica_points, m)?.exp())
}

/// The same expectation from the literal operator
/// `T_i = Tr_aux Π_α Σ_{ε,ε'} E^aux_{εε'} ⊗ E^{α,i}_{ε'ε}` on `n` replicas of
/// `m` sites, evaluated on `⊗_α v_α^{⊗m}`.
pub fn twist_expectation_brute(replica_points: &[ProjectivePoint], m: usize) -> Result<Complex64> {
    let n = replica_points.len();
    if n < 2 || m == 0 {
        return invalid("need n >= 2 replicas and m >= 1 sites");
    }
    let q = replica_points[0].dim() + 1;
    if let Some(p) = replica_points.iter().find(|p| p.dim() + 1 != q) {
        return Err(Error::DimensionMismatch {
            expected: q - 1,
            found: p.dim(),
        });
    }
    let slots = n * m;
    let space = (q as f64).powi(slots as i32);
    if space * q as f64 > MAX_TWIST_DIM as f64 {
        return budget("twist operator dimension", space * q as f64, MAX_TWIST_DIM as f64);
    }
    let space = space as usize;
    let full = q * space;
    // slot of (replica α, site i) is α·m + i
    let elementary_on_slot = |slot: usize, a: usize, b: usize, aux_a: usize, aux_b: usize| {
        let mut mat = DMatrix::<Complex64>::zeros(full, full);
        for col in 0..space {
            let mut d = digits(col, q, slots);
            if d[slot] != b {
                continue;
            }
            d[slot] = a;
            let row = undigits(&d, q);
            mat[(aux_a * space + row, aux_b * space + col)] = Complex64::new(1.0, 0.0);
        }
        mat
    };
    let mut t_a = DMatrix::<Complex64>::identity(space, space);
    for i in 0..m {
        let mut product = DMatrix::<Complex64>::identity(full, full);
        for alpha in 0..n {
            let mut factor = DMatrix::<Complex64>::zeros(full, full);
            for e1 in 0..q {
                for e2 in 0..q {
                    factor += elementary_on_slot(alpha * m + i, e2, e1, e1, e2);
                }
            }
            product *= factor;
        }
        let mut t_i = DMatrix::<Complex64>::zeros(space, space);
        for e in 0..q {
            t_i += product.view((e * space, e * space), (space, space));
        }
        t_a *= t_i;
    }
    let phi: Vec<Complex64> = (0..space)
        .map(|idx| {
            digits(idx, q, slots)
                .iter()
                .enumerate()
                .map(|(slot, &dg)| replica_points[slot / m].components()[dg])
                .product()
        })
        .collect();
    let phi = nalgebra::DVector::from_vec(phi);
    Ok(phi.dotc(&(&t_a * &phi)))
}

/// Exact rational eigenvalue as `f64`, for tests and reports.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or(f64::NAN)
}
