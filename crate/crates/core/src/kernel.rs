//! Spectral kernels `K^F_t(x, y) = sum_l F(t lambda_l) u_l(x) conj(u_l(y))`,
//! their localisation and `L_p` sizes, and the Littlewood-Paley residual.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::FilterBank;
use crate::numeric::{pairwise_sum_by, weighted_lp_norm};
use crate::spectral::{analyze, apply_multiplier, GridFn, Point, SpectralFn, SpectralModel};

/// `F(t lambda(d))` for every degree `d` of the model, trimmed after the last
/// nonzero value. Fails if `F` is still nonzero one degree past the model.
fn degree_weights(model: &SpectralModel, f: &dyn Fn(f64) -> f64, t: f64) -> Result<Vec<f64>> {
    let dmax = model.max_degree();
    let beyond = f(t * model.degree_eigenvalue(dmax + 1));
    if beyond != 0.0 {
        return Err(Error::Truncation(format!(
            "F(t lambda) = {beyond:.3e} past the model's top degree {dmax}"
        )));
    }
    let mut w: Vec<f64> = (0..=dmax).map(|d| f(t * model.degree_eigenvalue(d))).collect();
    while w.last() == Some(&0.0) {
        w.pop();
    }
    Ok(w)
}

pub fn kernel_eval(model: &SpectralModel, f: &dyn Fn(f64) -> f64, t: f64, x: &Point, y: &Point) -> Result<Complex64> {
    let w = degree_weights(model, f, t)?;
    model.degree_kernel(&w, x, y)
}

/// `K(x, y)` at every quadrature node `y`. On the sphere the kernel depends on
/// `x . y` only, and values are shared between nodes with the same dot product.
pub fn kernel_on_nodes(model: &SpectralModel, f: &dyn Fn(f64) -> f64, t: f64, x: &Point) -> Result<Vec<Complex64>> {
    let w = degree_weights(model, f, t)?;
    model.check_point(x)?;
    let mut memo: HashMap<u64, Complex64> = HashMap::new();
    model
        .nodes()
        .iter()
        .map(|y| {
            let key = match (x, y) {
                (Point::Sphere(a), Point::Sphere(b)) => Some((a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).to_bits()),
                _ => None,
            };
            match key {
                Some(k) => {
                    if let Some(v) = memo.get(&k) {
                        return Ok(*v);
                    }
                    let v = model.degree_kernel(&w, x, y)?;
                    memo.insert(k, v);
                    Ok(v)
                }
                None => model.degree_kernel(&w, x, y),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelProfile {
    pub t: f64,
    /// `|K(x, x)| t^n`.
    pub peak: f64,
    /// `max_y |K(x, y)| t^n (1 + d(x, y)/t)^N`.
    pub envelope: f64,
    pub decay_order: u32,
    /// `(d(x, y), |K(x, y)|)` over the nodes, sorted by distance.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

pub fn kernel_decay_profile(
    model: &SpectralModel,
    f: &dyn Fn(f64) -> f64,
    t_list: &[f64],
    x: &Point,
    order: u32,
) -> Result<Vec<KernelProfile>> {
    let n = model.dimension() as i32;
    t_list
        .iter()
        .map(|&t| {
            let vals = kernel_on_nodes(model, f, t, x)?;
            let mut samples: Vec<(f64, f64)> = model
                .nodes()
                .iter()
                .zip(&vals)
                .map(|(y, v)| (model.distance(x, y), v.norm()))
                .collect();
            samples.sort_by(|a, b| a.0.total_cmp(&b.0));
            let tn = t.powi(n);
            let envelope = samples
                .iter()
                .map(|(d, k)| k * tn * (1.0 + d / t).powi(order as i32))
                .fold(0.0, f64::max);
            let peak = kernel_eval(model, f, t, x, x)?.norm() * tn;
            Ok(KernelProfile {
                t,
                peak,
                envelope,
                decay_order: order,
                samples,
            })
        })
        .collect()
}

/// Quadrature `L_p` norm of `y -> K(x, y)`.
pub fn kernel_lp_norm(model: &SpectralModel, f: &dyn Fn(f64) -> f64, t: f64, p: f64, x: &Point) -> Result<f64> {
    let vals = kernel_on_nodes(model, f, t, x)?;
    Ok(weighted_lp_norm(&vals, model.weights(), p))
}

/// `(sum_l |F(t lambda_l)|^2 |u_l(x)|^2)^(1/2)`, the `L_2` norm in `y` read off
/// the coefficients.
pub fn kernel_l2_spectral(model: &SpectralModel, f: &dyn Fn(f64) -> f64, t: f64, x: &Point) -> Result<f64> {
    let n = model.len();
    let u = model.eval_modes(x, n)?;
    let ev = model.eigenvalues();
    Ok(pairwise_sum_by(n, &|l| f(t * ev[l]).powi(2) * u[l].norm_sqr()).sqrt())
}

/// `sum_{j<=J} G_j(sqrt L) f` for a coefficient vector.
pub fn partial_sum(bank: &FilterBank, f: &SpectralFn, levels: usize) -> SpectralFn {
    apply_multiplier(|l: f64| (0..=levels).map(|j| bank.big_g(j, l)).sum::<f64>(), 1.0, f)
}

/// `|| f - sum_{j<=J} G_j(sqrt L) f ||_p` with `f` analysed on the full model band.
pub fn littlewood_paley_residual(bank: &FilterBank, f: &GridFn, p: f64, levels: usize) -> Result<f64> {
    let model = f.model();
    let c = analyze(f, model.lambda_max())?;
    let s = partial_sum(bank, &c, levels).to_grid();
    Ok(f.sub(&s).lp_norm(p))
}

/// `||G_j(sqrt L) f||_p / ||f||_p`.
pub fn block_ratio(bank: &FilterBank, f: &SpectralFn, j: usize, p: f64) -> f64 {
    let b = apply_multiplier(|l: f64| bank.big_g(j, l), 1.0, f).to_grid().lp_norm(p);
    b / f.to_grid().lp_norm(p)
}
