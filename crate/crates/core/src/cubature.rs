//! Positive cubature by projection: start from the cell measures `w` and add
//! the smallest correction that makes all moments up to the band exact,
//! `mu = w + A^+ (m - A w)`.

use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{build_cells, build_lattice, CellCover, Lattice};
use crate::linalg::pinv_solve;
use crate::numeric::pairwise_sum_c_by;
use crate::spectral::{ManifoldKind, Point, SpectralFn, SpectralModel};

pub const RANK_CUTOFF: f64 = 1e-12;
/// Largest accepted moment error of a rule.
pub const MOMENT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct CubatureRule {
    #[serde(skip)]
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Largest eigenvalue integrated exactly.
    pub band: f64,
    /// `max_l |sum_k mu_k u_l(x_k) - int u_l|` over the band.
    pub residual: f64,
    pub rank: usize,
    pub condition: f64,
    pub min_weight: f64,
    pub max_weight: f64,
}

impl CubatureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_ratio(&self) -> f64 {
        self.max_weight / self.min_weight
    }

    pub fn sum(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.weights)
    }

    /// CSV of coordinates and weights.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (p, w) in self.points.iter().zip(&self.weights) {
            let c = match p {
                Point::Circle(t) | Point::Line(t) => format!("{t:.17e}"),
                Point::Sphere(v) => format!("{:.17e},{:.17e},{:.17e}", v[0], v[1], v[2]),
            };
            let _ = writeln!(s, "{c},{w:.17e}");
        }
        s
    }
}

/// Real rows spanning the band: real bases as is; periodic bases through
/// `Re u_k`, `Im u_k` for `k >= 0` since `u_{-k} = conj(u_k)`.
fn real_rows(model: &SpectralModel, n: usize) -> Vec<(usize, bool)> {
    let mut rows = Vec::new();
    let periodic = matches!(model.kind(), ManifoldKind::Circle | ManifoldKind::Line);
    for (l, m) in model.modes()[..n].iter().enumerate() {
        if model.basis_is_real() {
            rows.push((l, false));
        } else if periodic {
            if m.order >= 0 {
                rows.push((l, false));
                if m.order > 0 {
                    rows.push((l, true));
                }
            }
        } else {
            rows.push((l, false));
            rows.push((l, true));
        }
    }
    rows
}

pub(crate) struct Projection {
    pub weights: Vec<f64>,
    pub residual: f64,
    pub rank: usize,
    pub condition: f64,
}

/// `w + A^+ (m - A w)` on the modes with `lambda <= omega`.
pub(crate) fn project_weights(model: &SpectralModel, points: &[Point], w: &[f64], omega: f64) -> Result<Projection> {
    let n = model.band_len(omega);
    let rows = real_rows(model, n);
    let vals: Vec<Vec<Complex64>> = points
        .iter()
        .map(|p| model.eval_modes(p, n))
        .collect::<Result<_>>()?;
    let a = Mat::<f64>::from_fn(rows.len(), points.len(), |i, k| {
        let (l, im) = rows[i];
        if im {
            vals[k][l].im
        } else {
            vals[k][l].re
        }
    });
    let mom = model.mode_integrals(n);
    let target: Vec<f64> = rows
        .iter()
        .map(|&(l, im)| if im { mom[l].im } else { mom[l].re })
        .collect();
    let aw = row_sums(&a, w);
    let rhs: Vec<f64> = target.iter().zip(&aw).map(|(t, v)| t - v).collect();
    let p = pinv_solve(&a, &rhs, RANK_CUTOFF)?;
    let weights: Vec<f64> = w.iter().zip(&p.solution).map(|(a, b)| a + b).collect();
    let am = row_sums(&a, &weights);
    let residual = am
        .iter()
        .zip(&target)
        .map(|(x, t)| (x - t).abs())
        .fold(0.0, f64::max);
    Ok(Projection {
        weights,
        residual,
        rank: p.rank,
        condition: p.condition,
    })
}

fn row_sums(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| crate::numeric::pairwise_sum_by(x.len(), &|k| a[(i, k)] * x[k]))
        .collect()
}

pub(crate) fn finish_rule(points: Vec<Point>, proj: Projection, band: f64, r_omega: f64) -> Result<CubatureRule> {
    if !(proj.residual <= MOMENT_TOL) {
        return Err(Error::Exactness(format!(
            "moment residual {:.3e} with {} nodes at rank {} (r*omega = {r_omega:.3})",
            proj.residual,
            points.len(),
            proj.rank
        )));
    }
    if let Some((index, &weight)) = proj.weights.iter().enumerate().find(|(_, w)| **w <= 0.0) {
        return Err(Error::NonPositiveWeight { index, weight, r_omega });
    }
    let min_weight = proj.weights.iter().copied().fold(f64::INFINITY, f64::min);
    let max_weight = proj.weights.iter().copied().fold(0.0, f64::max);
    Ok(CubatureRule {
        points,
        weights: proj.weights,
        band,
        residual: proj.residual,
        rank: proj.rank,
        condition: proj.condition,
        min_weight,
        max_weight,
    })
}

/// Positive weights on the lattice integrating every eigenfunction with
/// `lambda <= omega` exactly.
pub fn solve_weights(model: &SpectralModel, lattice: &Lattice, cells: &CellCover, omega: f64) -> Result<CubatureRule> {
    if omega > model.lambda_max() * (1.0 + 1e-12) {
        return Err(Error::Truncation(format!(
            "band {omega} exceeds lambda_max {}",
            model.lambda_max()
        )));
    }
    let proj = project_weights(model, &lattice.points, &cells.measures, omega)?;
    finish_rule(lattice.points.clone(), proj, omega, lattice.r * omega)
}

/// `c_l = sum_k mu_k f(x_k) conj(u_l(x_k))` for `lambda_l <= band`.
pub fn discrete_fourier_coeffs(
    model: &std::sync::Arc<SpectralModel>,
    rule: &CubatureRule,
    samples: &[Complex64],
    band: f64,
) -> Result<SpectralFn> {
    if samples.len() != rule.len() {
        return Err(Error::Precondition(format!(
            "{} samples for {} nodes",
            samples.len(),
            rule.len()
        )));
    }
    if band > rule.band * (1.0 + 1e-12) {
        return Err(Error::Exactness(format!(
            "band {band} above the rule's exact band {} (residual {:.3e})",
            rule.band, rule.residual
        )));
    }
    let n = model.band_len(band);
    let vals: Vec<Vec<Complex64>> = rule
        .points
        .iter()
        .map(|p| model.eval_modes(p, n))
        .collect::<Result<_>>()?;
    let coeffs = (0..n)
        .map(|l| pairwise_sum_c_by(rule.len(), &|k| samples[k] * rule.weights[k] * vals[k][l].conj()))
        .collect();
    SpectralFn::new(model.clone(), coeffs)
}

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    /// Largest `r * omega` found with all weights positive.
    pub calibrated_a: f64,
    /// `r * omega` actually used.
    pub used_a: f64,
    pub rule: CubatureRule,
    pub lattice: Lattice,
    #[serde(skip)]
    pub cells: CellCover,
}

/// Bisection for the positivity boundary of `r * omega`, then a rule built at
/// `safety * a*`.
pub fn calibrate(
    model: &SpectralModel,
    omega: f64,
    seed: u64,
    bracket: (f64, f64),
    steps: usize,
    safety: f64,
) -> Result<Calibration> {
    let attempt = |a: f64| -> Result<(Lattice, CellCover, CubatureRule)> {
        let lat = build_lattice(model, a / omega, seed)?;
        let cells = build_cells(model, &lat);
        let rule = solve_weights(model, &lat, &cells, omega)?;
        Ok((lat, cells, rule))
    };
    let ok = |a: f64| -> Result<bool> {
        match attempt(a) {
            Ok(_) => Ok(true),
            Err(Error::NonPositiveWeight { .. } | Error::Exactness(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let (mut lo, mut hi) = bracket;
    if !ok(lo)? {
        return Err(Error::Exactness(format!(
            "no positive rule even at r*omega = {lo}"
        )));
    }
    if ok(hi)? {
        lo = hi;
    } else {
        for _ in 0..steps {
            let mid = 0.5 * (lo + hi);
            if ok(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let a_star = lo;
    let mut a = a_star * safety;
    loop {
        match attempt(a) {
            Ok((lattice, cells, rule)) => {
                return Ok(Calibration {
                    calibrated_a: a_star,
                    used_a: a,
                    rule,
                    lattice,
                    cells,
                })
            }
            Err(Error::NonPositiveWeight { .. } | Error::Exactness(_)) if a > bracket.0 => a = (a * 0.9).max(bracket.0),
            Err(e) => return Err(e),
        }
    }
}
