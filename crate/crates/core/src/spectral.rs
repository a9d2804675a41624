//! Spectral models, the coefficient-vector function carrier and the
//! multiplier calculus `F(t sqrt(L))`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{self, CircleConfig};
use crate::error::{Error, Result};
use crate::line::{self, LineConfig};
use crate::numeric::{inner, norm_sqr, pairwise_sum_c_by, weighted_lp_norm};
use crate::sphere::{self, SphereConfig};

const BAND_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Circle,
    Sphere2,
    Line,
}

impl ManifoldKind {
    pub fn dimension(self) -> usize {
        match self {
            ManifoldKind::Circle | ManifoldKind::Line => 1,
            ManifoldKind::Sphere2 => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    /// Angle in radians.
    Circle(f64),
    /// Unit vector.
    Sphere([f64; 3]),
    Line(f64),
}

/// Position of an eigenfunction: `degree` is `|k|` on periodic models and `l`
/// on the sphere; `order` is the signed frequency `k` or the harmonic order `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub degree: i64,
    pub order: i64,
}

#[derive(Debug)]
pub(crate) enum Geometry {
    /// `u_k(x) = exp(2 pi i k x / period) / sqrt(period)` on `N` uniform nodes
    /// starting at `start`.
    Periodic {
        period: f64,
        start: f64,
    },
    Sphere {
        lat_cos: Vec<f64>,
        lat_w: Vec<f64>,
        longitudes: usize,
    },
}

/// Discrete eigen-decomposition of a Laplace-type operator together with an
/// exact quadrature rule. Immutable; share through `Arc`.
#[derive(Debug)]
pub struct SpectralModel {
    kind: ManifoldKind,
    geometry: Geometry,
    eigenvalues: Vec<f64>,
    modes: Vec<Mode>,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    exact_degree: usize,
    exact_band: f64,
    volume: f64,
}

impl SpectralModel {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        kind: ManifoldKind,
        geometry: Geometry,
        eigenvalues: Vec<f64>,
        modes: Vec<Mode>,
        nodes: Vec<Point>,
        weights: Vec<f64>,
        exact_degree: usize,
        volume: f64,
    ) -> Self {
        let exact_band = match &geometry {
            Geometry::Periodic { period, .. } => 2.0 * std::f64::consts::PI * exact_degree as f64 / period,
            Geometry::Sphere { .. } => sphere::degree_eigenvalue(exact_degree),
        };
        Self {
            kind,
            geometry,
            eigenvalues,
            modes,
            nodes,
            weights,
            exact_degree,
            exact_band,
            volume,
        }
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.kind.dimension()
    }

    /// Number of eigenfunctions.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, l: usize) -> f64 {
        self.eigenvalues[l]
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap_or(&0.0)
    }

    pub fn max_degree(&self) -> usize {
        self.modes.last().map_or(0, |m| m.degree as usize)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Products of modes whose degrees sum to at most this are integrated
    /// exactly by the quadrature.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    /// Eigenvalue at the exact degree.
    pub fn exact_band(&self) -> f64 {
        self.exact_band
    }

    /// Eigenvalue attached to a degree.
    pub fn degree_eigenvalue(&self, d: usize) -> f64 {
        match &self.geometry {
            Geometry::Periodic { period, .. } => 2.0 * std::f64::consts::PI * d as f64 / period,
            Geometry::Sphere { .. } => sphere::degree_eigenvalue(d),
        }
    }

    /// Number of leading modes with `lambda <= omega` (relative slack 1e-12).
    pub fn band_len(&self, omega: f64) -> usize {
        let cut = omega * (1.0 + BAND_SLACK) + BAND_SLACK;
        self.eigenvalues.partition_point(|&l| l <= cut)
    }

    /// Number of leading modes with `lambda < omega` strictly.
    pub fn band_len_strict(&self, omega: f64) -> usize {
        let cut = omega * (1.0 - BAND_SLACK) - BAND_SLACK;
        self.eigenvalues.partition_point(|&l| l <= cut)
    }

    /// Number of modes of degree at most `d`.
    pub fn degree_len(&self, d: usize) -> usize {
        let n = match &self.geometry {
            Geometry::Periodic { .. } => 2 * d + 1,
            Geometry::Sphere { .. } => (d + 1) * (d + 1),
        };
        n.min(self.len())
    }

    /// Whether every basis function is real valued.
    pub fn basis_is_real(&self) -> bool {
        matches!(self.geometry, Geometry::Sphere { .. })
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (&self.geometry, self.kind, p) {
            (Geometry::Periodic { .. }, ManifoldKind::Circle, Point::Circle(t)) if t.is_finite() => Ok(()),
            (Geometry::Periodic { period, start, .. }, ManifoldKind::Line, Point::Line(x)) => {
                let hi = start + period;
                if *x >= *start - 1e-12 && *x <= hi + 1e-12 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("x = {x} outside window [{start}, {hi}]")))
                }
            }
            (Geometry::Sphere { .. }, _, Point::Sphere(v)) => sphere::validate_point(v),
            _ => Err(Error::Domain(format!("{p:?} does not belong to a {:?} model", self.kind))),
        }
    }

    fn periodic_coord(p: &Point) -> f64 {
        match p {
            Point::Circle(t) | Point::Line(t) => *t,
            Point::Sphere(_) => unreachable!("checked by check_point"),
        }
    }

    /// Values of the first `n` eigenfunctions at `p`.
    pub fn eval_modes(&self, p: &Point, n: usize) -> Result<Vec<Complex64>> {
        if n > self.len() {
            return Err(Error::Truncation(format!("{n} modes requested, model has {}", self.len())));
        }
        self.check_point(p)?;
        Ok(match (&self.geometry, p) {
            (Geometry::Periodic { period, .. }, _) => circle::periodic_eval(*period, Self::periodic_coord(p), n),
            (Geometry::Sphere { .. }, Point::Sphere(v)) => sphere::eval_all(n, v)
                .into_iter()
                .map(|y| Complex64::new(y, 0.0))
                .collect(),
            _ => unreachable!(),
        })
    }

    /// Geodesic distance.
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        match (&self.geometry, p, q) {
            (Geometry::Periodic { period, .. }, _, _) => {
                let d = (Self::periodic_coord(p) - Self::periodic_coord(q)).abs().rem_euclid(*period);
                d.min(period - d)
            }
            (Geometry::Sphere { .. }, Point::Sphere(a), Point::Sphere(b)) => sphere::geodesic(a, b),
            _ => f64::NAN,
        }
    }

    /// Diameter under `distance`.
    pub fn diameter(&self) -> f64 {
        match &self.geometry {
            Geometry::Periodic { period, .. } => period / 2.0,
            Geometry::Sphere { .. } => std::f64::consts::PI,
        }
    }

    /// `sum_l c_l u_l` at every quadrature node, using the separable structure.
    pub fn synthesize_nodes(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        match &self.geometry {
            Geometry::Periodic { period, start, .. } => {
                circle::periodic_synthesize(coeffs, *period, *start, self.nodes.len())
            }
            Geometry::Sphere { lat_cos, longitudes, .. } => sphere::synthesize_grid(coeffs, lat_cos, *longitudes),
        }
    }

    /// Quadrature inner products `sum_i w_i g(x_i) conj(u_l(x_i))` for `l < n`.
    pub fn analyze_nodes(&self, values: &[Complex64], n: usize) -> Vec<Complex64> {
        assert_eq!(values.len(), self.nodes.len());
        match &self.geometry {
            Geometry::Periodic { period, start, .. } => circle::periodic_analyze(values, n, *period, *start),
            Geometry::Sphere {
                lat_cos, lat_w, longitudes, ..
            } => sphere::analyze_grid(values, n, lat_cos, lat_w, *longitudes),
        }
    }

    /// Quadrature integral of node values.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        assert_eq!(values.len(), self.nodes.len());
        pairwise_sum_c_by(values.len(), &|i| values[i] * self.weights[i])
    }

    /// Exact integrals `int u_l` for `l < n`; only the constant mode is nonzero.
    pub fn mode_integrals(&self, n: usize) -> Vec<Complex64> {
        let mut m = vec![Complex64::new(0.0, 0.0); n];
        if n > 0 {
            m[0] = Complex64::new(self.volume.sqrt(), 0.0);
        }
        m
    }

    /// `sum_l w(degree_l) u_l(x) conj(u_l(y))` over degrees `0..w.len()`.
    pub fn degree_kernel(&self, w: &[f64], x: &Point, y: &Point) -> Result<Complex64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if w.is_empty() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let dmax = w.len() - 1;
        if dmax > self.max_degree() {
            return Err(Error::Truncation(format!(
                "kernel reaches degree {dmax}, model stops at {}",
                self.max_degree()
            )));
        }
        Ok(match &self.geometry {
            Geometry::Periodic { period, .. } => {
                let d = Self::periodic_coord(x) - Self::periodic_coord(y);
                circle::periodic_kernel(*period, d, w)
            }
            Geometry::Sphere { .. } => {
                let (Point::Sphere(a), Point::Sphere(b)) = (x, y) else { unreachable!() };
                let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                Complex64::new(sphere::zonal_kernel(dmax, dot, w), 0.0)
            }
        })
    }

    pub fn from_config(cfg: &ModelConfig) -> Result<Arc<SpectralModel>> {
        match cfg {
            ModelConfig::Circle(c) => circle::circle_model(c),
            ModelConfig::Sphere2(c) => sphere::sphere_model(c),
            ModelConfig::Line(c) => line::line_model(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Circle(CircleConfig),
    Sphere2(SphereConfig),
    Line(LineConfig),
}

/// A function held as eigen-coefficients. Coefficients past the stored length
/// are zero.
#[derive(Clone, Debug)]
pub struct SpectralFn {
    model: Arc<SpectralModel>,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    l: usize,
    re: f64,
    im: f64,
}

impl SpectralFn {
    pub fn new(model: Arc<SpectralModel>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() > model.len() {
            return Err(Error::Truncation(format!(
                "{} coefficients for a model with {} eigenfunctions",
                coeffs.len(),
                model.len()
            )));
        }
        Ok(Self { model, coeffs })
    }

    pub fn zero(model: Arc<SpectralModel>) -> Self {
        Self { model, coeffs: Vec::new() }
    }

    /// The eigenfunction `u_l`.
    pub fn basis(model: Arc<SpectralModel>, l: usize) -> Result<Self> {
        let mut c = vec![Complex64::new(0.0, 0.0); l + 1];
        c[l] = Complex64::new(1.0, 0.0);
        Self::new(model, c)
    }

    /// Gaussian coefficients on the first `n` modes. With `real` on a real basis
    /// the function is real valued.
    pub fn random(model: Arc<SpectralModel>, n: usize, real: bool, rng: &mut impl Rng) -> Result<Self> {
        let mut c = Vec::with_capacity(n);
        for _ in 0..n {
            let re = gaussian(rng);
            let im = if real { 0.0 } else { gaussian(rng) };
            c.push(Complex64::new(re, im));
        }
        Self::new(model, c)
    }

    pub fn model(&self) -> &Arc<SpectralModel> {
        &self.model
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at `l`, zero past the stored length.
    pub fn coeff(&self, l: usize) -> Complex64 {
        self.coeffs.get(l).copied().unwrap_or_default()
    }

    /// Coefficients padded or cut to length `n`.
    pub fn padded(&self, n: usize) -> Vec<Complex64> {
        let mut v = self.coeffs.clone();
        v.resize(n, Complex64::new(0.0, 0.0));
        v
    }

    /// Smallest eigenvalue bounding the support of the coefficients.
    pub fn band(&self) -> f64 {
        match self.coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)) {
            Some(l) => self.model.eigenvalue(l),
            None => 0.0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.coeffs)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other>`.
    pub fn inner(&self, other: &SpectralFn) -> Complex64 {
        inner(&self.coeffs, &other.coeffs)
    }

    pub fn scaled(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        Self {
            model: self.model.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: impl Into<Complex64>, other: &SpectralFn) -> Self {
        let s = s.into();
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|l| self.coeff(l) + s * other.coeff(l)).collect();
        Self {
            model: self.model.clone(),
            coeffs,
        }
    }

    /// Values at all quadrature nodes.
    pub fn to_grid(&self) -> GridFn {
        GridFn {
            model: self.model.clone(),
            values: self.model.synthesize_nodes(&self.coeffs),
        }
    }

    /// Largest imaginary part at the quadrature nodes.
    pub fn max_imag(&self) -> f64 {
        self.to_grid().values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        let entries: Vec<CoeffEntry> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(l, c)| CoeffEntry { l, re: c.re, im: c.im })
            .collect();
        Ok(serde_json::to_string(&entries)?)
    }

    pub fn from_json(model: Arc<SpectralModel>, s: &str) -> Result<Self> {
        let entries: Vec<CoeffEntry> = serde_json::from_str(s)?;
        let n = entries.iter().map(|e| e.l + 1).max().unwrap_or(0);
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for e in entries {
            c[e.l] += Complex64::new(e.re, e.im);
        }
        Self::new(model, c)
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Sampled representation at the quadrature nodes.
#[derive(Clone, Debug)]
pub struct GridFn {
    model: Arc<SpectralModel>,
    values: Vec<Complex64>,
}

impl GridFn {
    pub fn new(model: Arc<SpectralModel>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != model.node_count() {
            return Err(Error::Precondition(format!(
                "{} values for {} quadrature nodes",
                values.len(),
                model.node_count()
            )));
        }
        Ok(Self { model, values })
    }

    pub fn from_fn(model: Arc<SpectralModel>, f: impl Fn(&Point) -> Complex64) -> Self {
        let values = model.nodes().iter().map(f).collect();
        Self { model, values }
    }

    pub fn model(&self) -> &Arc<SpectralModel> {
        &self.model
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Quadrature `L_p` norm; `p = inf` is the max over nodes.
    pub fn lp_norm(&self, p: f64) -> f64 {
        weighted_lp_norm(&self.values, self.model.weights(), p)
    }

    pub fn sub(&self, other: &GridFn) -> GridFn {
        GridFn {
            model: self.model.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `sum_l c_l u_l(x)` at each point.
pub fn synthesize(f: &SpectralFn, points: &[Point]) -> Result<Vec<Complex64>> {
    let n = f.coeffs.len();
    points
        .iter()
        .map(|p| {
            let u = f.model.eval_modes(p, n)?;
            Ok(pairwise_sum_c_by(n, &|l| f.coeffs[l] * u[l]))
        })
        .collect()
}

/// Quadrature projection of grid values onto modes with `lambda <= band`.
pub fn analyze(g: &GridFn, band: f64) -> Result<SpectralFn> {
    let m = &g.model;
    if band > m.lambda_max() * (1.0 + BAND_SLACK) {
        return Err(Error::Truncation(format!("band {band} exceeds lambda_max {}", m.lambda_max())));
    }
    let n = m.band_len(band);
    SpectralFn::new(m.clone(), m.analyze_nodes(&g.values, n))
}

/// Coefficients `F(t lambda_l) c_l`.
pub fn apply_multiplier<V: Into<Complex64>>(f_mult: impl Fn(f64) -> V, t: f64, f: &SpectralFn) -> SpectralFn {
    let ev = f.model.eigenvalues();
    let mut coeffs: Vec<Complex64> = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(l, c)| c * f_mult(t * ev[l]).into())
        .collect();
    while coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
        coeffs.pop();
    }
    SpectralFn {
        model: f.model.clone(),
        coeffs,
    }
}

/// `|| i sqrt(L) f - (omega/pi^2) sum_k (-1)^(k-1) (k-1/2)^-2 exp(i (pi/omega)(k-1/2) sqrt(L)) f ||`
/// with the bilateral series cut to `k = 1-K ..= K`.
pub fn riesz_boas_residual(f: &SpectralFn, omega: f64, k_max: usize) -> Result<f64> {
    if k_max < 1 {
        return Err(Error::Precondition("K must be at least 1".into()));
    }
    if f.band() > omega * (1.0 + BAND_SLACK) {
        return Err(Error::Precondition(format!("band {} exceeds omega = {omega}", f.band())));
    }
    let pi = std::f64::consts::PI;
    let k_max = k_max as i64;
    let series = |lam: f64| -> Complex64 {
        // pair k with 1-k so the symbol is exactly odd in lambda
        let mut s = Complex64::new(0.0, 0.0);
        for k in (1..=k_max).rev() {
            let a = (k as f64 - 0.5) * pi / omega;
            let sign = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let pair = Complex64::new(0.0, (a * lam).sin() * 2.0);
            s += pair * (sign / ((k as f64 - 0.5) * (k as f64 - 0.5)));
        }
        s * (omega / (pi * pi))
    };
    let ev = f.model.eigenvalues();
    let diff: Vec<Complex64> = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(l, c)| c * (Complex64::new(0.0, ev[l]) - series(ev[l])))
        .collect();
    Ok(norm_sqr(&diff).sqrt())
}

/// `(||L^{s/2} f||, band^s ||f||)`; the first never exceeds the second.
pub fn bernstein_pair(f: &SpectralFn, s: i32) -> (f64, f64) {
    let lhs = apply_multiplier(|l: f64| l.powi(s), 1.0, f).norm();
    (lhs, f.band().powi(s) * f.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rng;

    fn circle(k: usize) -> Arc<SpectralModel> {
        circle::circle_model(&CircleConfig::minimal(k)).unwrap()
    }

    #[test]
    fn band_of_zero_is_zero() {
        assert_eq!(SpectralFn::zero(circle(4)).band(), 0.0);
    }

    #[test]
    fn too_many_coefficients_is_truncation() {
        let m = circle(2);
        let r = SpectralFn::new(m.clone(), vec![Complex64::new(1.0, 0.0); 6]);
        assert!(matches!(r, Err(Error::Truncation(_))));
    }

    #[test]
    fn json_roundtrip() {
        let m = circle(8);
        let f = SpectralFn::random(m.clone(), 9, false, &mut rng(3)).unwrap();
        let s = f.to_json().unwrap();
        let g = SpectralFn::from_json(m, &s).unwrap();
        assert_eq!(f.coeffs(), g.coeffs());
    }

    #[test]
    fn multiplier_composes() {
        let m = circle(16);
        let f = SpectralFn::random(m, 33, false, &mut rng(5)).unwrap();
        let f1 = |x: f64| (-x).exp();
        let f2 = |x: f64| 1.0 / (1.0 + x * x);
        let a = apply_multiplier(f2, 0.3, &apply_multiplier(f1, 0.3, &f));
        let b = apply_multiplier(|x: f64| f1(x) * f2(x), 0.3, &f);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() <= 1e-15 * x.norm().max(1.0));
        }
    }

    #[test]
    fn riesz_boas_constant_is_exactly_zero() {
        let m = circle(4);
        let f = SpectralFn::basis(m, 0).unwrap();
        for k in [1, 2, 7, 100] {
            assert_eq!(riesz_boas_residual(&f, 4.0, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn riesz_boas_rejects_wide_band() {
        let m = circle(8);
        let f = SpectralFn::basis(m, 12).unwrap();
        assert!(matches!(riesz_boas_residual(&f, 4.0, 8), Err(Error::Precondition(_))));
    }
}
