//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantity, the tolerance and the wall time. Exits nonzero if any fails.

use std::f64::consts::{E, PI};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symspin::asymptotics::{det_a_closed, det_a_numeric, torus_renyi_asymptotic};
use symspin::geometry::{fs_distance, metric_at, volume_density, ProjectivePoint};
use symspin::measures::{sample_uniform_cp, DiscreteMeasure, SpinMeasure, TorusMeasure};
use symspin::moments::{
    moment_discrete, moment_mc, moment_torus_quadrature, renyi_from_moment, saturation_value, RenyiQuery,
    TorusQuadrature,
};
use symspin::oracles::{
    brute_force_reduced_spectrum, dicke_renyi, dicke_spectrum, product_combination_moment, reconstruct_dicke,
    symmetrize_dicke, twist_expectation, twist_expectation_brute, DickeOccupation, ProductCombination,
};
use symspin::scaling::{
    cantor_qm, entropy_curve, fit_log_slope, geometric_grid, verify_cantor_recursion, CantorKernel, CurvePoint, Engine,
    EntropyCurve, DEFAULT_TRUNCATION,
};
use symspin::{RenyiOrder, SphericalChart as Chart};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(id: u32, title: &str, limit: Duration, body: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let result = std::panic::catch_unwind(body);
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(o) => (o.pass && elapsed <= limit, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    let timing = if elapsed <= limit { "" } else { " [over time limit]" };
    println!(
        "{} criterion {id:>2} {title}: {detail} ({:.2}s / limit {}s){timing}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn half_torus() -> TorusMeasure {
    TorusMeasure::new(vec![0.5, 0.5]).unwrap()
}

fn c1_dicke_von_neumann() -> Outcome {
    let occ = DickeOccupation::new(vec![500_000_000, 500_000_000]).unwrap();
    let mut devs = Vec::new();
    for m in [1_000u64, 10_000, 100_000] {
        let s = dicke_renyi(&occ, m, RenyiOrder::VON_NEUMANN).unwrap();
        let law = 0.5 * (2.0 * PI * E * m as f64).ln() + 0.5 * 0.25f64.ln();
        devs.push((s - law).abs());
    }
    let pass = devs[1] <= 0.01 && devs[0] > devs[1] && devs[1] > devs[2];
    outcome(
        pass,
        format!(
            "|S_1 - law| at m=1e3,1e4,1e5 = {:.2e}, {:.2e}, {:.2e} (<= 0.01 at 1e4, decreasing)",
            devs[0], devs[1], devs[2]
        ),
    )
}

fn c2_dicke_renyi() -> Outcome {
    let occ = DickeOccupation::new(vec![500_000_000, 500_000_000]).unwrap();
    let t = half_torus();
    let m = 10_000u64;
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [2.0, 3.0] {
        let order = RenyiOrder::Finite(n);
        let dev = (dicke_renyi(&occ, m, order).unwrap() - torus_renyi_asymptotic(&t, order, m as f64).unwrap()).abs();
        pass &= dev <= 0.01;
        parts.push(format!("s=1/2 n={n}: {dev:.2e}"));
    }
    let third = TorusMeasure::new(vec![1.0 / 3.0; 3]).unwrap();
    let occ3 = DickeOccupation::from_ratios(third.p(), 1_000_000_000).unwrap();
    let order = RenyiOrder::Finite(2.0);
    let dev = (dicke_renyi(&occ3, m, order).unwrap() - torus_renyi_asymptotic(&third, order, m as f64).unwrap()).abs();
    pass &= dev <= 0.03;
    parts.push(format!("s=1 n=2: {dev:.2e} (<= 0.03)"));
    outcome(pass, format!("{} at m=1e4 (<= 0.01)", parts.join(", ")))
}

fn c3_universality() -> Outcome {
    let grid = geometric_grid(1_000, 100_000, 7);
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [vec![0.5, 0.5], vec![1.0 / 3.0; 3]] {
        let t = TorusMeasure::new(p).unwrap();
        let d = t.dim() as f64;
        let measure = SpinMeasure::Torus(t);
        for order in [
            RenyiOrder::Finite(1.0),
            RenyiOrder::Finite(2.0),
            RenyiOrder::Finite(3.0),
            RenyiOrder::Infinite,
        ] {
            let curve = entropy_curve(&measure, order, &grid, &Engine::DickeExact { n_sites: 1_000_000_000 }).unwrap();
            let fit = fit_log_slope(&curve, Some((1_000, 100_000))).unwrap();
            let err = fit.dimension_estimate - d;
            pass &= err.abs() <= 0.05;
            parts.push(format!("D={d} n={order}: {:+.3}", err));
        }
    }
    outcome(pass, format!("d_fit - D: {} (|.| <= 0.05)", parts.join(", ")))
}

fn c4_determinant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = rng.random_range(1..=4usize);
        let n = rng.random_range(2..=6u32);
        let raw: Vec<f64> = (0..=d).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let head: f64 = p[..d].iter().sum();
        p[d] = 1.0 - head;
        let t = TorusMeasure::new(p).unwrap();
        let closed = det_a_closed(&t, n).unwrap();
        let numeric = det_a_numeric(&t, n).unwrap();
        worst = worst.max((numeric - closed).abs() / closed);
    }
    outcome(
        worst <= 1e-9,
        format!("max relative error {worst:.2e} over 200 cases (<= 1e-9)"),
    )
}

fn random_measure(rng: &mut ChaCha8Rng, max_overlap: f64) -> DiscreteMeasure {
    loop {
        let d = rng.random_range(1..=2usize);
        let k = rng.random_range(1..=4usize);
        let pts: Vec<ProjectivePoint> = (0..k).map(|_| sample_uniform_cp(d, rng)).collect();
        let ok =
            (0..k).all(|i| (0..i).all(|j| symspin::geometry::overlap(&pts[i], &pts[j]).unwrap().norm() <= max_overlap));
        if !ok {
            continue;
        }
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let head: f64 = w[..k - 1].iter().sum();
        w[k - 1] = 1.0 - head;
        return DiscreteMeasure::new(pts.into_iter().zip(w).collect()).unwrap();
    }
}

fn c5_saturation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_measure(&mut rng, 0.9);
        for n in [2.0, 3.0] {
            let est = moment_discrete(&mu, &RenyiQuery::new(n, 5000).unwrap()).unwrap();
            let s = renyi_from_moment(&est, n).unwrap().0;
            worst = worst.max((s - saturation_value(&mu, RenyiOrder::Finite(n))).abs());
        }
    }
    outcome(
        worst <= 1e-6,
        format!("max |S_n(5000) - saturation| = {worst:.2e} (<= 1e-6)"),
    )
}

fn c6_convergence() -> Outcome {
    let c = 0.5;
    let v1 = ProjectivePoint::basis(1, 0);
    let v2 = ProjectivePoint::from_real(&[c, (1.0 - c * c).sqrt()]).unwrap();
    let coeffs = vec![Complex64::new(1.0, 0.0); 2];
    let m = 5u64;
    let limit = {
        let mu = DiscreteMeasure::from_coefficients(vec![v1.clone(), v2.clone()], &coeffs).unwrap();
        moment_discrete(&mu, &RenyiQuery::new(2.0, m).unwrap())
            .unwrap()
            .moment()
    };
    let mut curve = Vec::new();
    for big_n in (m + 2)..=(m + 40) {
        let pc = ProductCombination::new(coeffs.clone(), vec![v1.clone(), v2.clone()], big_n).unwrap();
        let diff = (product_combination_moment(&pc, m, 2).unwrap() - limit).abs();
        if diff > 0.0 {
            curve.push((big_n as f64, diff.ln()));
        }
    }
    let k = curve.len() as f64;
    let xm = curve.iter().map(|p| p.0).sum::<f64>() / k;
    let ym = curve.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = curve.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = curve.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let rate = sxy / sxx;
    let target = 2.0 * c.ln();
    let rel = (rate / target - 1.0).abs();
    outcome(
        rel <= 0.1,
        format!("fitted rate {rate:.4} per unit N vs 2 log c = {target:.4} (rel. dev. {rel:.3}, <= 0.1)"),
    )
}

fn occupations(n: u64, species: usize) -> Vec<Vec<u64>> {
    if species == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in occupations(n - first, species - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn c7_oracles() -> Outcome {
    let mut worst_spec: f64 = 0.0;
    for species in 2..=3usize {
        for n in 2..=10u64 {
            for counts in occupations(n, species) {
                let occ = DickeOccupation::new(counts).unwrap();
                let dense = symmetrize_dicke(&occ).unwrap();
                for m in 1..n {
                    let mut exact: Vec<f64> = dicke_spectrum(&occ, m).unwrap().eigenvalues().to_vec();
                    exact.sort_by(|a, b| b.total_cmp(a));
                    let brute = brute_force_reduced_spectrum(&dense, m as usize).unwrap();
                    for (i, b) in brute.iter().enumerate() {
                        let e = exact.get(i).copied().unwrap_or(0.0);
                        worst_spec = worst_spec.max((e - b).abs());
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_pc: f64 = 0.0;
    for _ in 0..12 {
        let k = rng.random_range(1..=3usize);
        let pts: Vec<ProjectivePoint> = (0..k).map(|_| sample_uniform_cp(1, &mut rng)).collect();
        let coeffs: Vec<Complex64> = (0..k)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for big_n in [4u64, 7, 10, 12] {
            let pc = ProductCombination::new(coeffs.clone(), pts.clone(), big_n).unwrap();
            let dense = pc.to_dense().unwrap();
            for m in 1..big_n {
                let spec = brute_force_reduced_spectrum(&dense, m as usize).unwrap();
                for n in [2u32, 3] {
                    let brute: f64 = spec.iter().map(|l| l.powi(n as i32)).sum();
                    worst_pc = worst_pc.max((product_combination_moment(&pc, m, n).unwrap() - brute).abs());
                }
            }
        }
    }
    let pass = worst_spec <= 1e-10 && worst_pc <= 1e-10;
    outcome(
        pass,
        format!(
            "Dicke spectrum max err {worst_spec:.2e}, product-combination moment max err {worst_pc:.2e} (<= 1e-10)"
        ),
    )
}

fn c8_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for species in 2..=3usize {
        for n in 1..=6u64 {
            for counts in occupations(n, species) {
                let occ = DickeOccupation::new(counts).unwrap();
                let target = symmetrize_dicke(&occ).unwrap();
                for _ in 0..3 {
                    let raw: Vec<f64> = (0..species).map(|_| rng.random_range(0.1..1.0)).collect();
                    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let a: Vec<f64> = raw.iter().map(|x| x / norm).collect();
                    let r = reconstruct_dicke(&occ, &a).unwrap();
                    worst = worst.max(r.max_abs_diff(&target));
                    cases += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max amplitude error {worst:.2e} over {cases} reconstructions (<= 1e-10)"),
    )
}

fn c9_cantor() -> Outcome {
    let k = 12;
    let grid = geometric_grid(1_000, 100_000, 15);
    let points: Vec<CurvePoint> = grid
        .iter()
        .map(|&m| {
            let q = cantor_qm(k, 2, m as f64, CantorKernel::ExactOverlap, DEFAULT_TRUNCATION).unwrap();
            CurvePoint {
                m,
                s: -q.value.ln(),
                stderr: 0.0,
            }
        })
        .collect();
    let curve = EntropyCurve {
        points,
        order: RenyiOrder::Finite(2.0),
        engine: "exact-overlap".into(),
        measure_hash: String::new(),
    };
    let fit = fit_log_slope(&curve, Some((1_000, 100_000))).unwrap();
    let target = 2f64.ln() / 3f64.ln();
    let dim_err = fit.dimension_estimate - target;
    let report = verify_cantor_recursion(k, 2, &[729, 1458, 2916, 5832, 7290], CantorKernel::ExactOverlap).unwrap();
    let pass = dim_err.abs() <= 0.05 && report.max_deviation <= 0.1;
    outcome(
        pass,
        format!(
            "d_fit = {:.4} (target {target:.4} +- 0.05), max |Q_m/Q_(m/9) / (1/2) - 1| = {:.2e} over m in [729, 7290] (<= 0.1)",
            fit.dimension_estimate, report.max_deviation
        ),
    )
}

fn c10_engines() -> Outcome {
    let t = half_torus();
    let q = RenyiQuery::new(2.0, 200).unwrap();
    let quad = moment_torus_quadrature(&t, &q, &TorusQuadrature::exact_for(200)).unwrap();
    let s_quad = renyi_from_moment(&quad, 2.0).unwrap().0;
    let s_asym = torus_renyi_asymptotic(&t, RenyiOrder::Finite(2.0), 200.0).unwrap();
    let mc = moment_mc(&SpinMeasure::Torus(t), &q, 1_000_000, 20_240_601).unwrap();
    let z = (mc.moment() - quad.moment()).abs() / mc.std_error;
    let pass = (s_quad - s_asym).abs() <= 0.02 && z <= 4.0;
    outcome(
        pass,
        format!(
            "|S_quad - S_asym| = {:.2e} (<= 0.02); MC vs quadrature {:.2} sigma (<= 4)",
            (s_quad - s_asym).abs(),
            z
        ),
    )
}

// Charts of Fubini–Study-uniform points. Uniform angles would pile samples
// against the coordinate singularities, where det g is ill-conditioned.
fn random_chart(rng: &mut ChaCha8Rng, d: usize) -> Chart {
    sample_uniform_cp(d, rng).to_chart()
}

fn c11_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut triangle: f64 = 0.0;
    let mut symmetry: f64 = 0.0;
    let mut identity: f64 = 0.0;
    for i in 0..10_000 {
        let d = 1 + i % 3;
        let p: Vec<ProjectivePoint> = (0..3).map(|_| sample_uniform_cp(d, &mut rng)).collect();
        let ab = fs_distance(&p[0], &p[1]).unwrap();
        let bc = fs_distance(&p[1], &p[2]).unwrap();
        let ac = fs_distance(&p[0], &p[2]).unwrap();
        triangle = triangle.max(ac - ab - bc);
        symmetry = symmetry.max((ab - fs_distance(&p[1], &p[0]).unwrap()).abs());
        identity = identity.max(fs_distance(&p[0], &p[0]).unwrap());
        if ab < 0.0 {
            return outcome(false, "negative distance");
        }
    }
    let mut det_err: f64 = 0.0;
    for i in 0..1000 {
        let chart = random_chart(&mut rng, 1 + i % 3);
        let g = metric_at(&chart);
        let vol = volume_density(&chart);
        let det = g.determinant();
        det_err = det_err.max((det - vol * vol).abs() / (vol * vol).max(1e-300));
    }
    let mut twist_err: f64 = 0.0;
    for (d, n, m) in [(1, 2, 2), (1, 2, 3), (1, 3, 2), (2, 2, 2)] {
        for _ in 0..5 {
            let pts: Vec<ProjectivePoint> = (0..n).map(|_| sample_uniform_cp(d, &mut rng)).collect();
            let closed = twist_expectation(&pts, m as u64).unwrap();
            let brute = twist_expectation_brute(&pts, m).unwrap();
            twist_err = twist_err.max((closed - brute).norm());
        }
    }
    let pass = triangle <= 1e-9 && symmetry <= 1e-9 && identity <= 1e-9 && det_err <= 1e-9 && twist_err <= 1e-12;
    outcome(
        pass,
        format!(
            "triangle excess {triangle:.1e}, symmetry {symmetry:.1e}, d(p,p) {identity:.1e} (all <= 1e-9), det(g)/vol^2 rel. err {det_err:.1e} (<= 1e-9), twist brute err {twist_err:.1e} (<= 1e-12)"
        ),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let s = Duration::from_secs;
    let criteria: [Criterion; 11] = [
        (1, "Dicke von Neumann law", s(5), c1_dicke_von_neumann),
        (2, "Dicke Rényi law", s(30), c2_dicke_renyi),
        (3, "leading-coefficient universality", s(60), c3_universality),
        (4, "determinant identity", s(1), c4_determinant),
        (5, "saturation", s(5), c5_saturation),
        (6, "finite-N convergence rate", s(5), c6_convergence),
        (7, "oracle equivalence", s(120), c7_oracles),
        (8, "basis inversion", s(60), c8_reconstruction),
        (9, "Cantor dimension", s(300), c9_cantor),
        (10, "engine cross-checks", s(120), c10_engines),
        (11, "geometry suite", s(30), c11_geometry),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, title, limit, body) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        if !run(id, title, limit, body) {
            failed += 1;
        }
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
