//! The `verify` subcommand: cross-check suites with fixed seeds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symspin::asymptotics::{det_a_closed, det_a_numeric};
use symspin::geometry::{fs_distance, metric_at, volume_density};
use symspin::measures::{sample_uniform_cp, TorusMeasure};
use symspin::oracles::{
    brute_force_reduced_spectrum, dicke_spectrum, product_combination_moment, reconstruct_dicke, symmetrize_dicke,
    twist_expectation, twist_expectation_brute, DickeOccupation, ProductCombination,
};
use symspin::scaling::{verify_cantor_recursion, CantorKernel};
use symspin::ProjectivePoint;

use crate::error::CliError;

pub const SUITES: [&str; 5] = ["detA", "oracles", "recursion", "reconstruction", "geometry"];

struct Check {
    name: &'static str,
    measured: f64,
    tolerance: f64,
}

type Outcome = Result<Vec<Check>, CliError>;

fn seeded(suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + suite)
}

fn det_a() -> Outcome {
    let mut rng = seeded(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = rng.random_range(1..=4usize);
        let n = rng.random_range(2..=6u32);
        let raw: Vec<f64> = (0..=d).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let t = TorusMeasure::new(p).map_err(CliError::core("measures", "TorusMeasure::new"))?;
        let closed = det_a_closed(&t, n).map_err(CliError::core("asymptotics", "det_a_closed"))?;
        let numeric = det_a_numeric(&t, n).map_err(CliError::core("asymptotics", "det_a_numeric"))?;
        worst = worst.max(((numeric - closed) / closed).abs());
    }
    Ok(vec![Check {
        name: "det A numeric vs closed form, 200 cases (relative)",
        measured: worst,
        tolerance: 1e-9,
    }])
}

fn occupations(n: u64, species: usize) -> Vec<Vec<u64>> {
    if species == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            occupations(n - first, species - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn oracles() -> Outcome {
    let spec_err = |e| CliError::core("exact_oracles", "dicke_spectrum")(e);
    let mut worst_spec: f64 = 0.0;
    for species in 2..=3 {
        for n in 2..=8u64 {
            for counts in occupations(n, species) {
                let occ = DickeOccupation::new(counts).map_err(spec_err)?;
                let dense = symmetrize_dicke(&occ).map_err(spec_err)?;
                for m in 1..n {
                    let mut exact = dicke_spectrum(&occ, m).map_err(spec_err)?.eigenvalues().to_vec();
                    exact.sort_by(|a, b| b.total_cmp(a));
                    let brute = brute_force_reduced_spectrum(&dense, m as usize).map_err(spec_err)?;
                    for (i, b) in brute.iter().enumerate() {
                        worst_spec = worst_spec.max((exact.get(i).copied().unwrap_or(0.0) - b).abs());
                    }
                }
            }
        }
    }
    let pc_err = |e| CliError::core("exact_oracles", "product_combination_moment")(e);
    let mut rng = seeded(2);
    let mut worst_pc: f64 = 0.0;
    for _ in 0..6 {
        let k = rng.random_range(1..=3usize);
        let pts: Vec<ProjectivePoint> = (0..k).map(|_| sample_uniform_cp(1, &mut rng)).collect();
        let coeffs: Vec<Complex64> = (0..k)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for big_n in [4u64, 8, 10] {
            let pc = ProductCombination::new(coeffs.clone(), pts.clone(), big_n).map_err(pc_err)?;
            let dense = pc.to_dense().map_err(pc_err)?;
            for m in 1..big_n {
                let spec = brute_force_reduced_spectrum(&dense, m as usize).map_err(pc_err)?;
                for n in [2u32, 3] {
                    let brute: f64 = spec.iter().map(|l| l.powi(n as i32)).sum();
                    let fast = product_combination_moment(&pc, m, n).map_err(pc_err)?;
                    worst_pc = worst_pc.max((fast - brute).abs());
                }
            }
        }
    }
    Ok(vec![
        Check {
            name: "Dicke spectrum vs partial trace, N <= 8, D <= 2",
            measured: worst_spec,
            tolerance: 1e-10,
        },
        Check {
            name: "product-combination moment vs partial trace, N <= 10",
            measured: worst_pc,
            tolerance: 1e-10,
        },
    ])
}

fn recursion() -> Outcome {
    let report = verify_cantor_recursion(10, 2, &[729, 1458, 2916, 5832], CantorKernel::ExactOverlap)
        .map_err(CliError::core("scaling_analysis", "verify_cantor_recursion"))?;
    Ok(vec![Check {
        name: "Cantor Q_m / Q_(m/9) vs 1/2, level 10, m in [729, 5832] (relative)",
        measured: report.max_deviation,
        tolerance: 0.1,
    }])
}

fn reconstruction() -> Outcome {
    let err = |e| CliError::core("exact_oracles", "reconstruct_dicke")(e);
    let mut rng = seeded(4);
    let mut worst: f64 = 0.0;
    for species in 2..=3usize {
        for n in 1..=6u64 {
            for counts in occupations(n, species) {
                let occ = DickeOccupation::new(counts).map_err(err)?;
                let target = symmetrize_dicke(&occ).map_err(err)?;
                for _ in 0..3 {
                    let raw: Vec<f64> = (0..species).map(|_| rng.random_range(0.1..1.0)).collect();
                    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let a: Vec<f64> = raw.iter().map(|x| x / norm).collect();
                    worst = worst.max(reconstruct_dicke(&occ, &a).map_err(err)?.max_abs_diff(&target));
                }
            }
        }
    }
    Ok(vec![Check {
        name: "basis inversion vs symmetrization, N <= 6, D <= 2",
        measured: worst,
        tolerance: 1e-10,
    }])
}

fn geometry() -> Outcome {
    let err = |e| CliError::core("projective_geometry", "fs_distance")(e);
    let mut rng = seeded(5);
    let mut axioms: f64 = 0.0;
    for i in 0..1000 {
        let d = 1 + i % 3;
        let p: Vec<ProjectivePoint> = (0..3).map(|_| sample_uniform_cp(d, &mut rng)).collect();
        let ab = fs_distance(&p[0], &p[1]).map_err(err)?;
        let bc = fs_distance(&p[1], &p[2]).map_err(err)?;
        let ac = fs_distance(&p[0], &p[2]).map_err(err)?;
        let ba = fs_distance(&p[1], &p[0]).map_err(err)?;
        let aa = fs_distance(&p[0], &p[0]).map_err(err)?;
        axioms = axioms
            .max(ac - ab - bc)
            .max((ab - ba).abs())
            .max(aa)
            .max(-ab)
            .max(ab - PI);
    }
    let mut det: f64 = 0.0;
    for i in 0..1000 {
        let chart = sample_uniform_cp(1 + i % 3, &mut rng).to_chart();
        let vol = volume_density(&chart);
        det = det.max((metric_at(&chart).determinant() - vol * vol).abs() / (vol * vol));
    }
    let twist_err = |e| CliError::core("projective_geometry", "twist_expectation")(e);
    let mut twist: f64 = 0.0;
    for (d, n, m) in [(1, 2, 2), (1, 3, 2), (2, 2, 2)] {
        let pts: Vec<ProjectivePoint> = (0..n).map(|_| sample_uniform_cp(d, &mut rng)).collect();
        let closed = twist_expectation(&pts, m as u64).map_err(twist_err)?;
        let brute = twist_expectation_brute(&pts, m).map_err(twist_err)?;
        twist = twist.max((closed - brute).norm());
    }
    Ok(vec![
        Check {
            name: "metric axioms, 1000 triples",
            measured: axioms.max(0.0),
            tolerance: 1e-9,
        },
        Check {
            name: "det(metric) vs volume density squared, 1000 charts (relative)",
            measured: det,
            tolerance: 1e-9,
        },
        Check {
            name: "twist expectation vs auxiliary-trace construction",
            measured: twist,
            tolerance: 1e-12,
        },
    ])
}

pub fn run(suite: &str) -> Result<(), CliError> {
    let checks = match suite {
        "detA" => det_a()?,
        "oracles" => oracles()?,
        "recursion" => recursion()?,
        "reconstruction" => reconstruction()?,
        "geometry" => geometry()?,
        other => {
            return Err(CliError::config(format!(
                "unknown suite {other:?}; available: {}",
                SUITES.join(", ")
            )))
        }
    };
    let mut failed = 0;
    println!("{:<6} {:<70} {:>12} {:>10}", "status", "check", "measured", "tolerance");
    for c in &checks {
        let pass = c.measured <= c.tolerance;
        if !pass {
            failed += 1;
        }
        println!(
            "{:<6} {:<70} {:>12.3e} {:>10.1e}",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance
        );
    }
    if failed > 0 {
        return Err(CliError::Verify(format!(
            "{failed} of {} checks in suite {suite}",
            checks.len()
        )));
    }
    Ok(())
}
