use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use rand::Rng;

use spectral_frames::circle::{circle_model, CircleConfig};
use spectral_frames::cubature::{calibrate, discrete_fourier_coeffs, solve_weights, MOMENT_TOL};
use spectral_frames::lattice::{build_cells, build_lattice, diagnose, lattice_csv};
use spectral_frames::numeric::rng;
use spectral_frames::spectral::{Point, SpectralFn, SpectralModel};
use spectral_frames::sphere::{eval_sph_harm, sphere_model, SphereConfig};
use spectral_frames::{Complex64, Error};

fn fine_sphere() -> Arc<SpectralModel> {
    sphere_model(&SphereConfig {
        max_degree: 32,
        gauss_latitudes: 128,
        longitudes: 256,
    })
    .unwrap()
}

#[test]
fn uniform_circle_lattice_gives_equal_cells() {
    let m = circle_model(&CircleConfig {
        max_degree: 8,
        quadrature_size: 48,
    })
    .unwrap();
    // three nodes per gap, so no node is equidistant from two lattice points
    let r = 2.0 * PI / 16.0;
    let lat = build_lattice(&m, r, 0).unwrap();
    let cells = build_cells(&m, &lat);
    assert_eq!(lat.len(), 16);
    for mu in &cells.measures {
        assert_relative_eq!(*mu, 2.0 * PI / 16.0, max_relative = 1e-12);
    }
    let rule = solve_weights(&m, &lat, &cells, 7.0).unwrap();
    for w in &rule.weights {
        assert_relative_eq!(*w, 2.0 * PI / 16.0, max_relative = 1e-12);
    }
}

#[test]
fn sphere_lattice_geometry() {
    let m = fine_sphere();
    let r = 0.4;
    let lat = build_lattice(&m, r, 3).unwrap();
    let cells = build_cells(&m, &lat);
    let d = diagnose(&m, &lat, &cells);
    assert!(d.covering_radius <= r / 2.0 * (1.0 + 1e-9));
    assert!(d.min_separation >= r / 2.0 * (1.0 - 1e-9));
    assert!(d.measure_ratio <= 4.0, "ratio {}", d.measure_ratio);
    assert_relative_eq!(d.measure_sum, 4.0 * PI, max_relative = 1e-12);
    assert!(d.inner_ball_fraction >= 0.99);
    let mut counts = vec![0usize; lat.len()];
    for &k in &cells.assignment {
        counts[k] += 1;
    }
    assert!(counts.iter().all(|&c| c > 0));
}

/// Disjoint `r/4` caps around lattice points within `r` of a node all fit in
/// the `5r/4` cap around it.
fn cap_packing_bound(r: f64) -> usize {
    ((1.0 - (1.25 * r).cos()) / (1.0 - (0.25 * r).cos())).floor() as usize
}

#[test]
fn sphere_multiplicity_is_bounded_independently_of_r() {
    let m = fine_sphere();
    let mut seen = Vec::new();
    for r in [0.25, 0.4, 0.6, 0.8] {
        let lat = build_lattice(&m, r, 1).unwrap();
        assert!(lat.multiplicity <= cap_packing_bound(r), "r = {r}: {}", lat.multiplicity);
        seen.push(lat.multiplicity);
    }
    let lo = *seen.iter().min().unwrap();
    let hi = *seen.iter().max().unwrap();
    assert!(hi <= 2 * lo, "{seen:?}");
}

#[test]
fn lattice_is_reproducible_from_the_seed() {
    let m = sphere_model(&SphereConfig::minimal(16)).unwrap();
    let a = build_lattice(&m, 0.5, 9).unwrap();
    let b = build_lattice(&m, 0.5, 9).unwrap();
    assert_eq!(a.node_ids, b.node_ids);
}

#[test]
fn oversized_radius_degenerates_to_one_point() {
    let m = circle_model(&CircleConfig::minimal(4)).unwrap();
    let lat = build_lattice(&m, 10.0, 0).unwrap();
    assert!(lat.degenerate);
    assert_eq!(lat.len(), 1);
    assert!(matches!(build_lattice(&m, 0.0, 0), Err(Error::Precondition(_))));
}

#[test]
fn csv_has_one_row_per_point() {
    let m = circle_model(&CircleConfig::minimal(8)).unwrap();
    let lat = build_lattice(&m, 0.5, 1).unwrap();
    let cells = build_cells(&m, &lat);
    let csv = lattice_csv(&lat, &cells);
    assert_eq!(csv.lines().count(), lat.len() + 1);
}

/// Real spherical harmonics stacked as rows, degree by degree.
fn design_matrix(points: &[Point], top: usize) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for l in 0..=top {
        for m in -(l as i64)..=l as i64 {
            rows.push(
                points
                    .iter()
                    .map(|p| {
                        let Point::Sphere(x) = p else { unreachable!() };
                        eval_sph_harm(l, m, x).unwrap()
                    })
                    .collect(),
            );
        }
    }
    rows
}

/// Solves `S x = b` for symmetric positive definite `S` by Cholesky.
fn cholesky_solve(s: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut v = s[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            if i == j {
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = v / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i][k] * y[k];
        }
        y[i] = v / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in i + 1..n {
            v -= l[k][i] * x[k];
        }
        x[i] = v / l[i][i];
    }
    x
}

#[test]
fn sphere_weights_match_normal_equation_oracle() {
    let m = fine_sphere();
    let omega = 8.0;
    let top = 7; // degrees with sqrt(l(l+1)) <= 8
    let lat = build_lattice(&m, 0.35, 2).unwrap();
    let cells = build_cells(&m, &lat);
    let rule = solve_weights(&m, &lat, &cells, omega).unwrap();

    let a = design_matrix(&lat.points, top);
    let w = &cells.measures;
    let mut rhs: Vec<f64> = a.iter().map(|row| -row.iter().zip(w).map(|(x, y)| x * y).sum::<f64>()).collect();
    rhs[0] += (4.0 * PI).sqrt();
    let gram: Vec<Vec<f64>> = a
        .iter()
        .map(|ri| a.iter().map(|rj| ri.iter().zip(rj).map(|(x, y)| x * y).sum()).collect())
        .collect();
    let y = cholesky_solve(&gram, &rhs);
    let oracle: Vec<f64> = (0..w.len())
        .map(|k| w[k] + a.iter().zip(&y).map(|(row, c)| row[k] * c).sum::<f64>())
        .collect();
    for (got, want) in rule.weights.iter().zip(&oracle) {
        assert!((got - want).abs() <= 1e-8 * want.abs().max(1e-3), "{got} vs {want}");
    }
    assert!(rule.residual <= MOMENT_TOL);
    assert!(rule.weights.iter().all(|w| *w > 0.0));
    assert_relative_eq!(rule.sum(), 4.0 * PI, max_relative = 1e-12);
}

#[test]
fn calibrated_rule_integrates_band_limited_products() {
    let m = fine_sphere();
    let cal = calibrate(&m, 16.0, 4, (1.0, 8.0), 6, 0.75).unwrap();
    let rule = &cal.rule;
    assert!(rule.weight_ratio() <= 20.0);
    let mut r = rng(5);
    let f = SpectralFn::random(m.clone(), m.band_len(8.0), true, &mut r).unwrap();
    let g = SpectralFn::random(m.clone(), m.band_len(8.0), true, &mut r).unwrap();
    let fv = spectral_frames::spectral::synthesize(&f, &rule.points).unwrap();
    let gv = spectral_frames::spectral::synthesize(&g, &rule.points).unwrap();
    let cub: Complex64 = fv.iter().zip(&gv).zip(&rule.weights).map(|((a, b), w)| a * b.conj() * w).sum();
    assert!((cub - f.inner(&g)).norm() <= 1e-9);
}

#[test]
fn discrete_coefficients_recover_band_limited_functions() {
    let m = fine_sphere();
    let cal = calibrate(&m, 16.0, 6, (1.0, 8.0), 6, 0.75).unwrap();
    let rule = &cal.rule;
    let mut r = rng(7);
    let f = SpectralFn::random(m.clone(), m.band_len(8.0), true, &mut r).unwrap();
    let samples = spectral_frames::spectral::synthesize(&f, &rule.points).unwrap();
    let c = discrete_fourier_coeffs(&m, rule, &samples, 8.0).unwrap();
    assert!(c.axpy(-1.0, &f).norm() <= 1e-9 * f.norm());

    let delta = SpectralFn::basis(m.clone(), 3).unwrap();
    let samples = spectral_frames::spectral::synthesize(&delta, &rule.points).unwrap();
    let c = discrete_fourier_coeffs(&m, rule, &samples, 8.0).unwrap();
    for l in 0..c.coeffs().len() {
        let want = if l == 3 { 1.0 } else { 0.0 };
        assert!((c.coeff(l) - Complex64::new(want, 0.0)).norm() <= 1e-9);
    }
    assert!(matches!(
        discrete_fourier_coeffs(&m, rule, &samples, 16.5),
        Err(Error::Exactness(_))
    ));
    assert!(matches!(
        discrete_fourier_coeffs(&m, rule, &samples[1..], 8.0),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn too_coarse_lattice_cannot_be_exact() {
    let m = fine_sphere();
    let lat = build_lattice(&m, 1.2, 0).unwrap();
    let cells = build_cells(&m, &lat);
    let err = solve_weights(&m, &lat, &cells, 16.0).unwrap_err();
    assert!(matches!(err, Error::Exactness(_) | Error::NonPositiveWeight { .. }), "{err:?}");
}

#[test]
fn band_above_the_model_is_a_truncation_error() {
    let m = sphere_model(&SphereConfig::minimal(8)).unwrap();
    let lat = build_lattice(&m, 0.3, 0).unwrap();
    let cells = build_cells(&m, &lat);
    assert!(matches!(solve_weights(&m, &lat, &cells, 50.0), Err(Error::Truncation(_))));
}

#[test]
fn jittered_circle_rule_is_exact() {
    let m = circle_model(&CircleConfig::minimal(64)).unwrap();
    let mut r = rng(8);
    let lat = build_lattice(&m, 2.0 * PI / 48.0, r.gen()).unwrap();
    let cells = build_cells(&m, &lat);
    let rule = solve_weights(&m, &lat, &cells, 12.0).unwrap();
    for k in -12i64..=12 {
        let s: Complex64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| {
                let Point::Circle(t) = p else { unreachable!() };
                Complex64::from_polar(*w, k as f64 * t)
            })
            .sum();
        let want = if k == 0 { 2.0 * PI } else { 0.0 };
        assert!((s - Complex64::new(want, 0.0)).norm() <= 1e-10, "k = {k}");
    }
}
