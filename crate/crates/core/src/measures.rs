//! Probability measures on CP^D representing thermodynamic-limit symmetric
//! states: finitely many atoms, the uniform phase torus at fixed moduli,
//! densities against the Fubini–Study volume, and self-similar measures on
//! an embedded interval.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{budget, invalid, Error, Result};
use crate::geometry::{fs_distance, raw_overlap, ProjectivePoint, SphericalChart};
use crate::numeric::{gauss_legendre_on, CompensatedSum};
use crate::quadrature::{volume_cp, ChartGrid};

pub const WEIGHT_TOLERANCE: f64 = 1e-12;
pub const DISTINCT_ATOMS: f64 = 1e-9;
pub const DENSITY_TOLERANCE: f64 = 1e-3;
/// Largest atom set materialized from an IFS.
pub const DEFAULT_ATOM_CAP: usize = 1 << 20;
const MAX_REJECTIONS: usize = 10_000_000;

fn check_weight_sum(sum: f64) -> Result<()> {
    let deficit = (sum - 1.0).abs();
    if deficit > WEIGHT_TOLERANCE {
        return Err(Error::Normalization { deficit });
    }
    Ok(())
}

/// Finitely many atoms `(v, w_v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<ProjectivePoint>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(ProjectivePoint, f64)>) -> Result<Self> {
        let measure = Self::build(atoms)?;
        measure.validate()?;
        Ok(measure)
    }

    /// Weights `|c_v|² / Σ|c|²` from state coefficients.
    pub fn from_coefficients(points: Vec<ProjectivePoint>, coefficients: &[Complex64]) -> Result<Self> {
        if points.len() != coefficients.len() {
            return invalid("one coefficient per point required");
        }
        let total: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if total <= 0.0 {
            return invalid("all coefficients vanish");
        }
        let atoms = points
            .into_iter()
            .zip(coefficients)
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(p, c)| (p, c.norm_sqr() / total))
            .collect();
        Self::new(atoms)
    }

    /// Atoms known to be pairwise distinct; only normalization is checked.
    pub(crate) fn from_distinct_atoms(atoms: Vec<(ProjectivePoint, f64)>) -> Result<Self> {
        let measure = Self::build(atoms)?;
        check_weight_sum(measure.weight_sum())?;
        Ok(measure)
    }

    fn build(atoms: Vec<(ProjectivePoint, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("discrete measure needs at least one atom");
        }
        let d = atoms[0].0.dim();
        let mut points = Vec::with_capacity(atoms.len());
        let mut weights = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
            if !(w > 0.0 && w.is_finite()) {
                return invalid(format!("atom weight must be positive, got {w}"));
            }
            points.push(p);
            weights.push(w);
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = CompensatedSum::new();
        for &w in &weights {
            acc.add(w);
            cumulative.push(acc.value());
        }
        Ok(Self {
            points,
            weights,
            cumulative,
        })
    }

    fn weight_sum(&self) -> f64 {
        self.weights.iter().copied().collect::<CompensatedSum>().value()
    }

    pub fn validate(&self) -> Result<()> {
        check_weight_sum(self.weight_sum())?;
        for i in 0..self.points.len() {
            for j in 0..i {
                if fs_distance(&self.points[i], &self.points[j])? <= DISTINCT_ATOMS {
                    return invalid(format!("atoms {j} and {i} coincide in CP^D"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ProjectivePoint {
        let total = *self.cumulative.last().expect("nonempty");
        let u = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.points[idx.min(self.points.len() - 1)].clone()
    }
}

/// Uniform phases at fixed moduli `a_j = √p_j`: the limit of Dicke states with
/// occupation ratios `p_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusMeasure {
    p: Vec<f64>,
}

impl TorusMeasure {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return invalid(format!("torus measure needs D + 1 >= 2 ratios, got {}", p.len()));
        }
        if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return invalid(format!("ratio {x} is not a probability"));
        }
        check_weight_sum(p.iter().copied().collect::<CompensatedSum>().value())?;
        Ok(Self { p })
    }

    pub fn dim(&self) -> usize {
        self.p.len() - 1
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.p.iter().map(|x| x.sqrt()).collect()
    }

    pub fn has_zero_ratio(&self) -> bool {
        self.p.contains(&0.0)
    }

    /// The same measure with vanishing ratios dropped; `None` when the support
    /// is a single product state.
    pub fn reduced(&self) -> Option<TorusMeasure> {
        let kept: Vec<f64> = self.p.iter().copied().filter(|&x| x > 0.0).collect();
        if kept.len() < 2 {
            return None;
        }
        Some(TorusMeasure { p: kept })
    }

    /// Unnormalized homogeneous coordinates `a_j e^{iθ_j}` with `θ_D = 0`.
    pub fn components_at(&self, theta: &[f64]) -> Vec<Complex64> {
        let a = self.amplitudes();
        a.iter()
            .enumerate()
            .map(|(j, &aj)| Complex64::from_polar(aj, theta.get(j).copied().unwrap_or(0.0)))
            .collect()
    }

    pub fn point_at(&self, theta: &[f64]) -> ProjectivePoint {
        ProjectivePoint::canonicalize(&self.components_at(theta)).expect("unit-norm torus point")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ProjectivePoint {
        let theta: Vec<f64> = (0..self.dim()).map(|_| rng.random::<f64>() * TAU).collect();
        self.point_at(&theta)
    }
}

type DensityFn = dyn Fn(&SphericalChart) -> f64 + Send + Sync;

/// A density `f` with respect to the Fubini–Study volume `d^{2D}v`.
#[derive(Clone)]
pub struct DensityMeasure {
    dim_d: usize,
    density: Arc<DensityFn>,
    envelope: Option<f64>,
    label: String,
    normalization_checked: bool,
}

impl fmt::Debug for DensityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMeasure")
            .field("dim_d", &self.dim_d)
            .field("label", &self.label)
            .field("envelope", &self.envelope)
            .field("normalization_checked", &self.normalization_checked)
            .finish()
    }
}

impl DensityMeasure {
    /// `f ≡ 1/Vol(CP^D)`.
    pub fn uniform(dim_d: usize) -> Result<Self> {
        if dim_d == 0 {
            return invalid("density measures need D >= 1");
        }
        let f = 1.0 / volume_cp(dim_d);
        Ok(Self {
            dim_d,
            density: Arc::new(move |_| f),
            envelope: Some(f),
            label: format!("uniform(D={dim_d})"),
            normalization_checked: false,
        })
    }

    /// `f(v) ∝ exp(κ |c†v|²)`, a smooth bump concentrated around `c`.
    pub fn coherent_bump(center: ProjectivePoint, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return invalid(format!("bump sharpness must be finite and >= 0, got {kappa}"));
        }
        let d = center.dim();
        let log_z = bump_log_normalizer(d, kappa);
        let c = center.components().to_vec();
        let density = move |chart: &SphericalChart| {
            let t = raw_overlap(&c, &chart.raw_components()).norm_sqr();
            (kappa * t - log_z).exp()
        };
        Ok(Self {
            dim_d: d,
            density: Arc::new(density),
            envelope: Some((kappa - log_z).exp()),
            label: format!("coherent_bump(kappa={kappa})"),
            normalization_checked: false,
        })
    }

    /// A user-supplied density; `envelope` must bound `f` from above for sampling.
    pub fn from_fn<F>(dim_d: usize, label: impl Into<String>, envelope: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(&SphericalChart) -> f64 + Send + Sync + 'static,
    {
        if dim_d == 0 {
            return invalid("density measures need D >= 1");
        }
        if let Some(e) = envelope {
            if !(e > 0.0 && e.is_finite()) {
                return invalid(format!("envelope must be positive and finite, got {e}"));
            }
        }
        Ok(Self {
            dim_d,
            density: Arc::new(f),
            envelope,
            label: label.into(),
            normalization_checked: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim_d
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn envelope(&self) -> Option<f64> {
        self.envelope
    }

    pub fn normalization_checked(&self) -> bool {
        self.normalization_checked
    }

    pub fn eval(&self, chart: &SphericalChart) -> f64 {
        (self.density)(chart)
    }

    pub fn eval_point(&self, v: &ProjectivePoint) -> f64 {
        self.eval(&v.to_chart())
    }

    /// `∫ f d^{2D}v` on the given grid.
    pub fn total_mass(&self, grid: &ChartGrid) -> Result<f64> {
        grid.integrate(self.dim_d, |c| self.eval(c))
    }

    pub fn check_normalization(&mut self, grid: &ChartGrid) -> Result<()> {
        let mass = self.total_mass(grid)?;
        let deficit = (mass - 1.0).abs();
        if deficit > DENSITY_TOLERANCE {
            return Err(Error::Normalization { deficit });
        }
        self.normalization_checked = true;
        Ok(())
    }

    /// Rejection sampling against the uniform volume.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ProjectivePoint> {
        let envelope = self.envelope.ok_or_else(|| {
            Error::InvalidArgument(format!("density {} has no envelope bound for sampling", self.label))
        })?;
        for _ in 0..MAX_REJECTIONS {
            let v = sample_uniform_cp(self.dim_d, rng);
            let f = self.eval_point(&v);
            if f > envelope * (1.0 + 1e-9) {
                return Err(Error::Numerical(format!(
                    "density {} exceeds its envelope ({f} > {envelope})",
                    self.label
                )));
            }
            if rng.random::<f64>() * envelope < f {
                return Ok(v);
            }
        }
        Err(Error::Numerical(format!(
            "rejection sampler for {} accepted nothing in {MAX_REJECTIONS} proposals",
            self.label
        )))
    }
}

/// `ln ∫ exp(κ|c†v|²) d^{2D}v`. Under the uniform measure `t = |c†v|²` has
/// density `D(1-t)^{D-1}` on `[0, 1]`.
fn bump_log_normalizer(d: usize, kappa: f64) -> f64 {
    let log_vol = volume_cp(d).ln();
    let df = d as f64;
    if kappa > 1.0 {
        // ∫ D u^{D-1} e^{κ(1-u)} du = e^κ D! κ^{-D} (1 - e^{-κ} Σ_{k<D} κ^k/k!)
        let mut term = 1.0;
        let mut partial = 0.0;
        for k in 0..d {
            if k > 0 {
                term *= kappa / k as f64;
            }
            partial += term;
        }
        let tail = -(-kappa).exp() * partial;
        let log_fact: f64 = (1..=d).map(|k| (k as f64).ln()).sum();
        return log_vol + kappa + log_fact - df * kappa.ln() + tail.ln_1p();
    }
    let (t, w) = gauss_legendre_on(32, 0.0, 1.0);
    let integral: f64 = t
        .iter()
        .zip(&w)
        .map(|(t, w)| w * df * (1.0 - t).powi(d as i32 - 1) * (kappa * t).exp())
        .sum();
    log_vol + integral.ln()
}

/// Uniform point of CP^D: a normalized complex Gaussian vector.
pub fn sample_uniform_cp<R: Rng + ?Sized>(dim_d: usize, rng: &mut R) -> ProjectivePoint {
    loop {
        let raw: Vec<Complex64> = (0..=dim_d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(p) = ProjectivePoint::canonicalize(&raw) {
            return p;
        }
    }
}

/// How the unit interval is placed in CP^D.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    /// `x ↦ (1, e^{iπx})/√2` on CP¹, the Bloch-sphere equator
    /// `(cos πx, sin πx, 0)`; `|v(x)† v(y)| = cos(π|x-y|/2)`.
    GreatCircle,
}

impl Embedding {
    pub fn dim(self) -> usize {
        match self {
            Embedding::GreatCircle => 1,
        }
    }

    pub fn point(self, x: f64) -> ProjectivePoint {
        match self {
            Embedding::GreatCircle => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                ProjectivePoint::canonicalize(&[Complex64::new(s, 0.0), Complex64::from_polar(s, PI * x)])
                    .expect("unit vector")
            }
        }
    }
}

/// Self-similar measure of the equal-ratio, equal-weight IFS
/// `x ↦ r x + b_j` on `[0, 1]`, pushed into CP^D.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsMeasure {
    ratio: f64,
    offsets: Vec<f64>,
    embedding: Embedding,
    sample_depth: usize,
    atom_cap: usize,
}

impl IfsMeasure {
    pub fn new(ratio: f64, mut offsets: Vec<f64>, embedding: Embedding, sample_depth: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return invalid(format!("contraction ratio must lie in (0, 1), got {ratio}"));
        }
        if offsets.is_empty() {
            return invalid("IFS needs at least one branch");
        }
        offsets.sort_by(f64::total_cmp);
        if offsets[0] < 0.0 || offsets[offsets.len() - 1] + ratio > 1.0 + 1e-15 {
            return invalid("branch images must lie inside [0, 1]");
        }
        if offsets.windows(2).any(|w| w[1] < w[0] + ratio - 1e-15) {
            return invalid("branch images overlap (open-set condition fails)");
        }
        Ok(Self {
            ratio,
            offsets,
            embedding,
            sample_depth,
            atom_cap: DEFAULT_ATOM_CAP,
        })
    }

    /// Middle-thirds Cantor set `C_{k+1} = ⅓(C_k ∪ (2 + C_k))`.
    pub fn cantor(sample_depth: usize) -> Self {
        Self::new(1.0 / 3.0, vec![0.0, 2.0 / 3.0], Embedding::GreatCircle, sample_depth).expect("valid Cantor IFS")
    }

    pub fn with_atom_cap(mut self, cap: usize) -> Self {
        self.atom_cap = cap;
        self
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn branches(&self) -> usize {
        self.offsets.len()
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }

    pub fn sample_depth(&self) -> usize {
        self.sample_depth
    }

    pub fn dim(&self) -> usize {
        self.embedding.dim()
    }

    pub fn similarity_dimension(&self) -> f64 {
        (self.branches() as f64).ln() / (1.0 / self.ratio).ln()
    }

    /// Interval parameters of the level-`k` atoms, in branch-address order.
    pub fn level_parameters(&self, k: usize) -> Result<Vec<f64>> {
        let count = (self.branches() as f64).powi(k as i32);
        if count > self.atom_cap as f64 {
            return budget("IFS atoms", count, self.atom_cap as f64);
        }
        let mut xs = vec![0.0];
        for _ in 0..k {
            let mut next = Vec::with_capacity(xs.len() * self.branches());
            for &b in &self.offsets {
                next.extend(xs.iter().map(|x| self.ratio * x + b));
            }
            xs = next;
        }
        Ok(xs)
    }

    pub fn atoms_at_level(&self, k: usize) -> Result<DiscreteMeasure> {
        let xs = self.level_parameters(k)?;
        let w = 1.0 / xs.len() as f64;
        DiscreteMeasure::from_distinct_atoms(xs.into_iter().map(|x| (self.embedding.point(x), w)).collect())
    }

    pub fn sample_parameter<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut x = 0.0;
        for _ in 0..self.sample_depth {
            let b = self.offsets[rng.random_range(0..self.branches())];
            x = self.ratio * x + b;
        }
        x
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ProjectivePoint {
        self.embedding.point(self.sample_parameter(rng))
    }
}

/// The four measure families.
#[derive(Debug, Clone)]
pub enum SpinMeasure {
    Discrete(DiscreteMeasure),
    Torus(TorusMeasure),
    Density(DensityMeasure),
    Ifs(IfsMeasure),
}

impl SpinMeasure {
    pub fn dim(&self) -> usize {
        match self {
            SpinMeasure::Discrete(m) => m.dim(),
            SpinMeasure::Torus(m) => m.dim(),
            SpinMeasure::Density(m) => m.dim(),
            SpinMeasure::Ifs(m) => m.dim(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            SpinMeasure::Discrete(_) => "discrete",
            SpinMeasure::Torus(_) => "torus",
            SpinMeasure::Density(_) => "density",
            SpinMeasure::Ifs(_) => "ifs",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpinMeasure::Discrete(m) => m.validate(),
            SpinMeasure::Torus(m) => TorusMeasure::new(m.p.clone()).map(|_| ()),
            SpinMeasure::Density(m) => m.clone().check_normalization(&ChartGrid::default()),
            SpinMeasure::Ifs(m) => IfsMeasure::new(m.ratio, m.offsets.clone(), m.embedding, m.sample_depth).map(|_| ()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ProjectivePoint> {
        Ok(match self {
            SpinMeasure::Discrete(m) => m.sample(rng),
            SpinMeasure::Torus(m) => m.sample(rng),
            SpinMeasure::Density(m) => m.sample(rng)?,
            SpinMeasure::Ifs(m) => m.sample(rng),
        })
    }

    /// Dimension `d` of the support, the coefficient of `½ log m`.
    pub fn support_dimension(&self) -> f64 {
        match self {
            SpinMeasure::Discrete(_) => 0.0,
            SpinMeasure::Torus(m) => (m.p.iter().filter(|&&x| x > 0.0).count() - 1) as f64,
            SpinMeasure::Density(m) => 2.0 * m.dim() as f64,
            SpinMeasure::Ifs(m) => m.similarity_dimension(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_atoms(w: (f64, f64)) -> Vec<(ProjectivePoint, f64)> {
        vec![(ProjectivePoint::basis(1, 0), w.0), (ProjectivePoint::basis(1, 1), w.1)]
    }

    #[test]
    fn validate_examples() {
        assert!(DiscreteMeasure::new(two_atoms((0.5, 0.5))).is_ok());
        match DiscreteMeasure::new(two_atoms((0.5, 0.6))) {
            Err(Error::Normalization { deficit }) => assert!((deficit - 0.1).abs() < 1e-12),
            other => panic!("expected normalization error, got {other:?}"),
        }
        assert!(TorusMeasure::new(vec![1.0 / 3.0; 3]).is_ok());
        let dup = vec![(ProjectivePoint::basis(1, 0), 0.5), (ProjectivePoint::basis(1, 0), 0.5)];
        assert!(DiscreteMeasure::new(dup).is_err());
    }

    #[test]
    fn cantor_levels() {
        let c = IfsMeasure::cantor(10);
        assert_eq!(c.level_parameters(0).unwrap(), vec![0.0]);
        let l1 = c.level_parameters(1).unwrap();
        assert_eq!(l1.len(), 2);
        assert!((l1[1] - 2.0 / 3.0).abs() < 1e-15);
        let mut l2 = c.level_parameters(2).unwrap();
        l2.sort_by(f64::total_cmp);
        for (x, e) in l2.iter().zip([0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0]) {
            assert!((x - e).abs() < 1e-15);
        }
        let a0 = c.atoms_at_level(0).unwrap();
        assert_eq!(a0.len(), 1);
        assert!(a0.points()[0].approx_eq(&ProjectivePoint::from_real(&[1.0, 1.0]).unwrap(), 1e-15));
        assert!((c.similarity_dimension() - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert!(matches!(
            c.clone().with_atom_cap(1000).level_parameters(10),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn ifs_rejects_overlapping_branches() {
        assert!(IfsMeasure::new(0.6, vec![0.0, 0.4], Embedding::GreatCircle, 5).is_err());
        assert!(IfsMeasure::new(0.5, vec![0.0, 0.5], Embedding::GreatCircle, 5).is_ok());
        assert!(IfsMeasure::new(1.0, vec![0.0], Embedding::GreatCircle, 5).is_err());
    }

    #[test]
    fn support_dimensions() {
        let disc = SpinMeasure::Discrete(DiscreteMeasure::new(two_atoms((0.5, 0.5))).unwrap());
        assert_eq!(disc.support_dimension(), 0.0);
        let torus = SpinMeasure::Torus(TorusMeasure::new(vec![1.0 / 3.0; 3]).unwrap());
        assert_eq!(torus.support_dimension(), 2.0);
        let cantor = SpinMeasure::Ifs(IfsMeasure::cantor(8));
        assert!((cantor.support_dimension() - 0.630_929_753_571_457_4).abs() < 1e-12);
        let full = SpinMeasure::Density(DensityMeasure::uniform(2).unwrap());
        assert_eq!(full.support_dimension(), 4.0);
    }

    #[test]
    fn densities_are_normalized() {
        let grid = ChartGrid::default();
        for d in 1..=2 {
            let mut u = DensityMeasure::uniform(d).unwrap();
            u.check_normalization(&grid).unwrap();
            assert!((u.total_mass(&grid).unwrap() - 1.0).abs() < 1e-6);
            assert!(u.normalization_checked());
        }
        for kappa in [0.0, 0.5, 3.0, 20.0] {
            let c = ProjectivePoint::from_real(&[0.6, 0.8]).unwrap();
            let b = DensityMeasure::coherent_bump(c, kappa).unwrap();
            let mass = b.total_mass(&ChartGrid::default().refined()).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "kappa={kappa}: {mass}");
        }
        let c = ProjectivePoint::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let b = DensityMeasure::coherent_bump(c, 4.0).unwrap();
        assert!((b.total_mass(&ChartGrid::default()).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn missing_envelope_is_reported() {
        let f = DensityMeasure::from_fn(1, "flat", None, |_| 1.0 / (4.0 * PI)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(f.sample(&mut rng).is_err());
    }

    #[test]
    fn discrete_sampling_single_atom() {
        let m = DiscreteMeasure::new(vec![(ProjectivePoint::basis(2, 1), 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(m.sample(&mut rng), ProjectivePoint::basis(2, 1));
        }
    }
}
