//! Property tests for the structural invariants of the library.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symspin::asymptotics::{
    det_a_closed, det_a_numeric, log_gaussian_factor, torus_renyi_asymptotic, torus_renyi_from_gaussian,
};
use symspin::geometry::{chart_to_point, fs_distance, overlap, ProjectivePoint, SphericalChart};
use symspin::measures::{sample_uniform_cp, DiscreteMeasure, TorusMeasure};
use symspin::moments::{
    moment_discrete, moment_torus_quadrature, renyi_from_moment, saturation_value, RenyiQuery, TorusQuadrature,
};
use symspin::oracles::{dicke_renyi, dicke_spectrum, DickeOccupation};
use symspin::RenyiOrder;

fn point(dim_d: usize) -> impl Strategy<Value = ProjectivePoint> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim_d + 1).prop_filter_map("zero vector", |raw| {
        let z: Vec<Complex64> = raw.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        if z.iter().map(|c| c.norm_sqr()).sum::<f64>() < 1e-3 {
            return None;
        }
        ProjectivePoint::canonicalize(&z).ok()
    })
}

fn simplex(len: usize, floor: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(floor..1.0, len).prop_map(move |raw| {
        let total: f64 = raw.iter().sum();
        let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let head: f64 = p[..len - 1].iter().sum();
        p[len - 1] = 1.0 - head;
        p
    })
}

fn discrete(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (1usize..=2, 1usize..=max_atoms)
        .prop_flat_map(|(d, k)| (prop::collection::vec(point(d), k), simplex(k, 0.05)))
        .prop_filter_map("coincident atoms", |(pts, w)| {
            DiscreteMeasure::new(pts.into_iter().zip(w).collect()).ok()
        })
}

// Σ over all cyclic chains of weights times overlaps to the m-th power.
fn brute_chain_moment(mu: &DiscreteMeasure, n: usize, m: u64) -> f64 {
    let k = mu.len();
    let mut total = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; n];
    loop {
        let mut term = Complex64::new(1.0, 0.0);
        for r in 0..n {
            let a = &mu.points()[idx[r]];
            let b = &mu.points()[idx[(r + 1) % n]];
            term *= mu.weights()[idx[r]] * overlap(a, b).unwrap().powu(m as u32);
        }
        total += term;
        let mut pos = 0;
        loop {
            if pos == n {
                return total.re;
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_invariance(v in point(2), phase in 0.0f64..TAU, scale in 0.1f64..10.0) {
        let raw: Vec<Complex64> = v.components().iter().map(|z| z * Complex64::from_polar(scale, phase)).collect();
        let w = ProjectivePoint::canonicalize(&raw).unwrap();
        prop_assert!(w.approx_eq(&v, 1e-12));
        prop_assert!(fs_distance(&v, &w).unwrap() < 1e-9);
    }

    #[test]
    fn distance_is_a_metric(a in point(2), b in point(2), c in point(2)) {
        let ab = fs_distance(&a, &b).unwrap();
        let bc = fs_distance(&b, &c).unwrap();
        let ac = fs_distance(&a, &c).unwrap();
        prop_assert!((0.0..=PI + 1e-12).contains(&ab));
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!((ab - fs_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(fs_distance(&a, &a).unwrap() < 1e-9);
    }

    #[test]
    fn chart_round_trip(v in point(3)) {
        let back = chart_to_point(&v.to_chart());
        prop_assert!(back.approx_eq(&v, 1e-10));
    }

    #[test]
    fn chart_angles_in_range(theta in prop::collection::vec(0.0f64..TAU, 2), phi in prop::collection::vec(0.0f64..PI / 2.0, 2)) {
        let chart = SphericalChart::new(theta, phi).unwrap();
        let norm: f64 = chart.amplitudes().iter().map(|a| a * a).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transfer_matrix_matches_chain_sum(mu in discrete(5), n in 2usize..=4, m in 1u64..=50) {
        let est = moment_discrete(&mu, &RenyiQuery::new(n as f64, m).unwrap()).unwrap();
        let brute = brute_chain_moment(&mu, n, m);
        prop_assert!((est.moment() - brute).abs() <= 1e-10 * brute.abs().max(1e-300) + 1e-13,
            "transfer {} vs chain {}", est.moment(), brute);
    }

    #[test]
    fn moment_bounds(mu in discrete(4), n in 2u32..=4, m in 1u64..=200) {
        let est = moment_discrete(&mu, &RenyiQuery::new(n as f64, m).unwrap()).unwrap();
        let saturation: f64 = mu.weights().iter().map(|w| w.powi(n as i32)).sum();
        prop_assert!(est.moment() > 0.0 && est.moment() <= 1.0 + 1e-12);
        prop_assert!(est.moment() >= saturation * (1.0 - 1e-10));
    }

    #[test]
    fn entropy_approaches_saturation_from_above(mu in discrete(4), n in 2u32..=3) {
        let order = RenyiOrder::Finite(n as f64);
        let s = renyi_from_moment(&moment_discrete(&mu, &RenyiQuery::new(n as f64, 20).unwrap()).unwrap(), n as f64).unwrap().0;
        prop_assert!(s <= saturation_value(&mu, order) + 1e-9);
    }

    #[test]
    fn determinant_closed_form(p in (2usize..=5).prop_flat_map(|len| simplex(len, 0.05)), n in 2u32..=6) {
        let t = TorusMeasure::new(p).unwrap();
        let closed = det_a_closed(&t, n).unwrap();
        prop_assert!(((det_a_numeric(&t, n).unwrap() - closed) / closed).abs() < 1e-9);
    }

    #[test]
    fn gaussian_factor_form_agrees(p in (2usize..=4).prop_flat_map(|len| simplex(len, 0.05)), n in 2u32..=5, m in 10.0f64..1e6) {
        let t = TorusMeasure::new(p).unwrap();
        let log_f = log_gaussian_factor(&t, n as f64).unwrap();
        let direct = torus_renyi_asymptotic(&t, RenyiOrder::Finite(n as f64), m).unwrap();
        prop_assert!((torus_renyi_from_gaussian(&t, n as f64, log_f, m).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn dicke_schmidt_symmetry(counts in prop::collection::vec(0u64..=15, 2..=3), frac in 0.0f64..1.0) {
        let occ = DickeOccupation::new(counts).unwrap();
        let n_sites = occ.n_sites();
        prop_assume!(n_sites >= 2);
        let m = 1 + ((n_sites - 2) as f64 * frac) as u64;
        for order in [RenyiOrder::Finite(2.0), RenyiOrder::VON_NEUMANN] {
            let a = dicke_renyi(&occ, m, order).unwrap();
            let b = dicke_renyi(&occ, n_sites - m, order).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dicke_spectrum_is_normalized(counts in prop::collection::vec(0u64..=40, 2..=3), m in 1u64..=20) {
        let occ = DickeOccupation::new(counts).unwrap();
        prop_assume!(m <= occ.n_sites());
        let spec = dicke_spectrum(&occ, m).unwrap();
        let total: f64 = spec.eigenvalues().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(spec.eigenvalues().iter().all(|&l| l > 0.0));
    }
}

#[test]
fn renyi_order_is_continuous_at_one() {
    let occ = DickeOccupation::new(vec![3000, 7000]).unwrap();
    let vn = dicke_renyi(&occ, 500, RenyiOrder::VON_NEUMANN).unwrap();
    for eps in [1e-3, 1e-4] {
        for n in [1.0 - eps, 1.0 + eps] {
            let s = dicke_renyi(&occ, 500, RenyiOrder::Finite(n)).unwrap();
            assert!((s - vn).abs() < 10.0 * eps, "n = {n}: {s} vs {vn}");
        }
    }
}

#[test]
fn renyi_entropies_are_nonincreasing_in_order() {
    let occ = DickeOccupation::new(vec![200, 300, 500]).unwrap();
    let orders = [0.5, 1.0, 2.0, 3.0, 7.0];
    let values: Vec<f64> = orders
        .iter()
        .map(|&n| dicke_renyi(&occ, 100, RenyiOrder::Finite(n)).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[0] >= w[1] - 1e-12), "{values:?}");
    assert!(dicke_renyi(&occ, 100, RenyiOrder::Infinite).unwrap() <= values[4] + 1e-12);
}

#[test]
fn torus_quadrature_converges_to_exact_rule() {
    let t = TorusMeasure::new(vec![0.3, 0.7]).unwrap();
    let q = RenyiQuery::new(2.0, 40).unwrap();
    let exact = moment_torus_quadrature(&t, &q, &TorusQuadrature::exact_for(40))
        .unwrap()
        .moment();
    let coarse = (moment_torus_quadrature(&t, &q, &TorusQuadrature::new(12))
        .unwrap()
        .moment()
        - exact)
        .abs();
    let finer = (moment_torus_quadrature(&t, &q, &TorusQuadrature::new(24))
        .unwrap()
        .moment()
        - exact)
        .abs();
    assert!(finer < coarse, "{finer} !< {coarse}");
    assert!(
        moment_torus_quadrature(&t, &q, &TorusQuadrature::new(200))
            .unwrap()
            .moment()
            - exact
            < 1e-14
    );
}

#[test]
fn torus_samples_lie_on_the_torus() {
    let p = vec![0.2, 0.3, 0.5];
    let t = TorusMeasure::new(p.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let v = t.sample(&mut rng);
        for (a, pj) in v.amplitudes().iter().zip(&p) {
            assert!((a * a - pj).abs() < 1e-12);
        }
    }
}

#[test]
fn uniform_samples_have_uniform_overlap_law() {
    // For Fubini–Study uniform points on CP^1, |<e0|v>|^2 is uniform on [0, 1].
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let e0 = ProjectivePoint::basis(1, 0);
    let mut bins = [0usize; 10];
    let draws = 20_000;
    for _ in 0..draws {
        let x = overlap(&e0, &sample_uniform_cp(1, &mut rng)).unwrap().norm_sqr();
        bins[((x * 10.0) as usize).min(9)] += 1;
    }
    let chi2: f64 = bins
        .iter()
        .map(|&b| (b as f64 - draws as f64 / 10.0).powi(2) / (draws as f64 / 10.0))
        .sum();
    // 99.9% quantile of chi-square with 9 degrees of freedom.
    assert!(chi2 < 27.9, "chi2 = {chi2}");
}
