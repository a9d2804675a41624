//! Paley-Wiener spaces on the line, realised on a periodic window `[-T, T)`.
//!
//! Frequencies are `xi_n = 2 pi n / (2T)`. `PW_omega` keeps `|xi| < omega`; the
//! endpoint is a null set on the line and dropping it makes Nyquist sampling
//! at `pi / omega` an exact isometry on the window. Everything stated for the
//! line holds here up to the measured window leakage.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circle::periodic_model;
use crate::cubature::{finish_rule, project_weights, CubatureRule};
use crate::error::{Error, Result};
use crate::filters::{level_support, FilterBank};
use crate::frame::{bounds_on_modes, Atom, Frame, FrameKind, LevelInfo};
use crate::numeric::{composite_gauss, norm_sqr, pairwise_sum_by, rng};
use crate::spectral::{synthesize, ManifoldKind, Point, SpectralFn, SpectralModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineConfig {
    /// Largest frequency carried by the eigenbasis.
    pub max_frequency: f64,
    pub half_window: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_size: Option<usize>,
}

impl LineConfig {
    /// Window of `default_half_window(omega)` carrying frequencies up to `max_frequency`.
    pub fn for_bandwidth(omega: f64, max_frequency: f64) -> Self {
        Self {
            max_frequency,
            half_window: default_half_window(omega),
            quadrature_size: None,
        }
    }

    fn max_index(&self) -> usize {
        (self.max_frequency * self.half_window / PI + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_frequency > 0.0 && self.half_window > 0.0) {
            return Err(Error::Config("line model needs positive max_frequency and half_window".into()));
        }
        if let Some(n) = self.quadrature_size {
            let need = 4 * self.max_index() + 1;
            if n < need {
                return Err(Error::Config(format!("quadrature_size = {n} must be at least {need}")));
            }
        }
        Ok(())
    }
}

/// `max(40 pi / omega, 10 pi)` rounded up to a multiple of `pi / 4`, so that
/// every dyadic Nyquist grid with spacing `pi / 2^(j+1)` tiles the window.
pub fn default_half_window(omega: f64) -> f64 {
    let t = (40.0 * PI / omega).max(10.0 * PI);
    (t / (PI / 4.0) - 1e-9).ceil() * (PI / 4.0)
}

pub fn line_model(cfg: &LineConfig) -> Result<Arc<SpectralModel>> {
    cfg.validate()?;
    let k = cfg.max_index();
    let n = cfg.quadrature_size.unwrap_or(4 * k + 1);
    let period = 2.0 * cfg.half_window;
    let h = period / n as f64;
    let nodes = (0..n).map(|i| Point::Line(-cfg.half_window + i as f64 * h)).collect();
    Ok(Arc::new(periodic_model(
        ManifoldKind::Line,
        period,
        -cfg.half_window,
        k,
        nodes,
        vec![h; n],
    )))
}

fn half_window(model: &SpectralModel) -> Result<f64> {
    if model.kind() != ManifoldKind::Line {
        return Err(Error::Precondition("a line model is required".into()));
    }
    Ok(model.volume() / 2.0)
}

/// Strictly increasing points on the window with wrap-around cells.
#[derive(Clone, Debug, Serialize)]
pub struct SamplingSet1D {
    pub points: Vec<f64>,
    pub rho: f64,
    pub eps: f64,
    pub half_window: f64,
}

impl SamplingSet1D {
    /// Checks `rho / (1 + eps) <= gap <= rho` including the wrap gap.
    pub fn new(points: Vec<f64>, rho: f64, eps: f64, half_window: f64) -> Result<Self> {
        let s = Self {
            points,
            rho,
            eps,
            half_window,
        };
        if s.points.is_empty() {
            return Err(Error::Config("empty sampling set".into()));
        }
        if s.points.iter().any(|x| *x < -half_window - 1e-12 || *x >= half_window) {
            return Err(Error::Domain("sampling point outside the window".into()));
        }
        let lo = rho / (1.0 + eps);
        for (k, g) in s.gaps().iter().enumerate() {
            if *g < lo * (1.0 - 1e-12) || *g > rho * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "gap {k} = {g:.6e} outside [{lo:.6e}, {rho:.6e}]"
                )));
            }
        }
        Ok(s)
    }

    pub fn uniform(h: f64, half_window: f64) -> Result<Self> {
        let count = (2.0 * half_window / h).round() as usize;
        if ((count as f64) * h - 2.0 * half_window).abs() > 1e-9 * half_window {
            return Err(Error::Config(format!("spacing {h} does not tile the window")));
        }
        let points = (0..count).map(|k| -half_window + k as f64 * h).collect();
        Self::new(points, h, 0.0, half_window)
    }

    /// Random gaps in `[lo, hi]` rescaled to close the window.
    pub fn random_gaps(lo: f64, hi: f64, half_window: f64, seed: u64) -> Result<Self> {
        let period = 2.0 * half_window;
        let (a, b) = (lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo));
        let count = (period / (0.5 * (a + b))).round().max(1.0) as usize;
        let mut r = rng(seed);
        for _ in 0..100 {
            let raw: Vec<f64> = (0..count).map(|_| r.gen_range(a..=b)).collect();
            let s = period / raw.iter().sum::<f64>();
            let gaps: Vec<f64> = raw.iter().map(|g| g * s).collect();
            if gaps.iter().all(|g| *g >= lo && *g <= hi) {
                let mut points = Vec::with_capacity(count);
                let mut x = -half_window;
                for g in &gaps {
                    points.push(x);
                    x += g;
                }
                return Self::new(points, hi, hi / lo - 1.0, half_window);
            }
        }
        Err(Error::Config(format!("could not draw gaps in [{lo}, {hi}]")))
    }

    /// Gaps in `[rho / (1 + eps), rho]`.
    pub fn jittered(rho: f64, eps: f64, half_window: f64, seed: u64) -> Result<Self> {
        Self::random_gaps(rho / (1.0 + eps), rho, half_window, seed)
    }

    /// `x_{k+1} - x_k`, the last one wrapping around the window.
    pub fn gaps(&self) -> Vec<f64> {
        let n = self.points.len();
        (0..n)
            .map(|k| {
                if k + 1 < n {
                    self.points[k + 1] - self.points[k]
                } else {
                    self.points[0] + 2.0 * self.half_window - self.points[k]
                }
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Number of Nyquist samples `2 T omega / pi`; must be an integer.
pub fn nyquist_count(omega: f64, half_window: f64) -> Result<usize> {
    let c = 2.0 * half_window * omega / PI;
    if (c - c.round()).abs() > 1e-9 * c.max(1.0) {
        return Err(Error::Config(format!(
            "window 2T = {} is not a whole number of Nyquist steps pi/{omega}",
            2.0 * half_window
        )));
    }
    Ok(c.round() as usize)
}

/// A `PW_omega` function held by its samples at `-T + k pi / omega`.
#[derive(Clone, Debug)]
pub struct PW1D {
    pub omega: f64,
    pub half_window: f64,
    pub samples: Vec<Complex64>,
    /// Relative mass outside `[-T/2, T/2]`.
    pub leakage_tol: f64,
}

impl PW1D {
    pub fn sample_points(omega: f64, half_window: f64) -> Result<Vec<f64>> {
        let n = nyquist_count(omega, half_window)?;
        Ok((0..n).map(|k| -half_window + k as f64 * PI / omega).collect())
    }

    pub fn from_spectral(f: &SpectralFn, omega: f64) -> Result<Self> {
        let model = f.model();
        let t = half_window(model)?;
        if f.coeffs().len() > model.band_len_strict(omega)
            && f.coeffs()[model.band_len_strict(omega)..]
                .iter()
                .any(|c| *c != Complex64::new(0.0, 0.0))
        {
            return Err(Error::Precondition(format!("function is not in PW_{omega}")));
        }
        let pts: Vec<Point> = Self::sample_points(omega, t)?.into_iter().map(Point::Line).collect();
        Ok(Self {
            omega,
            half_window: t,
            samples: synthesize(f, &pts)?,
            leakage_tol: 1e-6,
        })
    }

    /// `(pi / omega) sum |f(k pi / omega)|^2`.
    pub fn discrete_norm_sqr(&self) -> f64 {
        PI / self.omega * norm_sqr(&self.samples)
    }

    /// Eigen-coefficients recovered from the samples.
    pub fn to_spectral(&self, model: &Arc<SpectralModel>) -> Result<SpectralFn> {
        let n = model.band_len_strict(self.omega);
        let pts = Self::sample_points(self.omega, self.half_window)?;
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for (x, s) in pts.iter().zip(&self.samples) {
            let u = model.eval_modes(&Point::Line(*x), n)?;
            for (ci, ui) in c.iter_mut().zip(u) {
                *ci += s * ui.conj() * (PI / self.omega);
            }
        }
        SpectralFn::new(model.clone(), c)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Pw1dReport {
    pub bounds: [f64; 2],
    /// Interval the bounds are guaranteed to fall in.
    pub theory_interval: [f64; 2],
    pub leakage: f64,
}

#[derive(Clone, Debug)]
pub struct Pw1dFrame {
    pub frame: Frame,
    pub report: Pw1dReport,
}

/// Relative `L_2` mass of `f` farther than `T/2` from `center`.
pub fn window_leakage(f: &SpectralFn, center: f64) -> Result<f64> {
    let model = f.model();
    let t = half_window(model)?;
    let v = f.to_grid();
    let w = model.weights();
    let c = Point::Line(center);
    let nodes = model.nodes();
    let total = pairwise_sum_by(nodes.len(), &|i| w[i] * v.values()[i].norm_sqr());
    let far = pairwise_sum_by(nodes.len(), &|i| {
        if model.distance(&nodes[i], &c) > 0.5 * t {
            w[i] * v.values()[i].norm_sqr()
        } else {
            0.0
        }
    });
    Ok(if total > 0.0 { far / total } else { 0.0 })
}

fn sampling_atoms(model: &SpectralModel, sampling: &SamplingSet1D, n: usize) -> Result<Vec<Atom>> {
    sampling
        .points
        .iter()
        .zip(sampling.gaps())
        .enumerate()
        .map(|(k, (x, len))| {
            let s = len.sqrt();
            Ok(Atom {
                level: 0,
                index: k,
                center: Point::Line(*x),
                coeffs: model
                    .eval_modes(&Point::Line(*x), n)?
                    .into_iter()
                    .map(|u| u.conj() * s)
                    .collect(),
            })
        })
        .collect()
}

/// Frame `sqrt|I_k|` times the reproducing kernel of `PW_omega` at `x_k`,
/// without checking the spacing hypothesis.
pub fn measure_irregular(model: &Arc<SpectralModel>, omega: f64, sampling: &SamplingSet1D) -> Result<Frame> {
    half_window(model)?;
    let n = model.band_len_strict(omega);
    let atoms = sampling_atoms(model, sampling, n)?;
    let levels = vec![LevelInfo {
        level: 0,
        band_lo: 0.0,
        band_hi: omega,
        atoms: atoms.len(),
    }];
    let mut frame = Frame::from_atoms(model.clone(), FrameKind::PwSampling, atoms, levels, omega)?;
    frame.bounds = Some(bounds_on_modes(&frame, n)?);
    Ok(frame)
}

/// Irregular-sampling frame under `rho <= eps / (3 omega)`, `omega > 1`.
pub fn pw1d_frame_irregular(
    model: &Arc<SpectralModel>,
    omega: f64,
    eps: f64,
    sampling: &SamplingSet1D,
) -> Result<Pw1dFrame> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("eps = {eps} must lie in (0, 1)")));
    }
    if omega <= 1.0 {
        return Err(Error::Hypothesis(format!("omega = {omega} must exceed 1")));
    }
    let limit = eps / (3.0 * omega);
    let max_gap = sampling.gaps().into_iter().fold(0.0, f64::max);
    if sampling.rho > limit * (1.0 + 1e-12) || max_gap > limit * (1.0 + 1e-12) {
        return Err(Error::Hypothesis(format!(
            "spacing {:.4e} exceeds eps/(3 omega) = {limit:.4e}",
            sampling.rho.max(max_gap)
        )));
    }
    let frame = measure_irregular(model, omega, sampling)?;
    let (a, b) = frame.bounds.expect("measured");
    let f0 = frame.atom_fn(0);
    let leakage = window_leakage(&f0, sampling.points[0])?;
    Ok(Pw1dFrame {
        frame,
        report: Pw1dReport {
            bounds: [a, b],
            theory_interval: [1.0 - 2.0 * eps / 3.0, (1.0 + 10.0 * eps / 3.0).powi(2)],
            leakage,
        },
    })
}

/// Shannon-based Parseval frame over levels `0..=J`: level `j` samples at
/// spacing `pi / 2^(j+1)` with atoms `sqrt(pi / 2^(j+1)) F_j(D) delta_{x_k}`.
pub fn pw1d_frame_shannon(model: &Arc<SpectralModel>, bank: &FilterBank, leakage_tol: f64) -> Result<Pw1dFrame> {
    let t = half_window(model)?;
    let levels_j = bank.levels();
    let top = f64::powi(2.0, levels_j as i32 + 1);
    if model.lambda_max() < top * (1.0 - 1e-12) - 2.0 * PI / model.volume() {
        return Err(Error::Truncation(format!(
            "levels up to {levels_j} need frequencies below {top}, model stops at {}",
            model.lambda_max()
        )));
    }
    let ev = model.eigenvalues();
    let mut atoms = Vec::new();
    let mut levels = Vec::new();
    let mut leakage = 0.0f64;
    for j in 0..=levels_j {
        let wj = f64::powi(2.0, j as i32 + 1);
        let n = model.band_len_strict(wj);
        let pts = PW1D::sample_points(wj, t)?;
        let s = (PI / wj).sqrt();
        let before = atoms.len();
        for (k, x) in pts.iter().enumerate() {
            let mut c: Vec<Complex64> = model
                .eval_modes(&Point::Line(*x), n)?
                .into_iter()
                .enumerate()
                .map(|(l, u)| u.conj() * (s * bank.f(j, ev[l])))
                .collect();
            while c.last() == Some(&Complex64::new(0.0, 0.0)) {
                c.pop();
            }
            atoms.push(Atom {
                level: j,
                index: k,
                center: Point::Line(*x),
                coeffs: c,
            });
        }
        // atoms of one level are translates of each other
        let rep = SpectralFn::new(model.clone(), atoms[before].coeffs.clone())?;
        leakage = leakage.max(window_leakage(&rep, pts[0])?);
        let (lo, hi) = level_support(j);
        levels.push(LevelInfo {
            level: j,
            band_lo: lo,
            band_hi: hi,
            atoms: atoms.len() - before,
        });
    }
    if leakage > leakage_tol {
        return Err(Error::Leakage { leakage, tol: leakage_tol });
    }
    let band = f64::powi(2.0, levels_j as i32);
    let mut frame = Frame::from_atoms(model.clone(), FrameKind::Parseval, atoms, levels, band)?;
    let (a, b) = bounds_on_modes(&frame, model.band_len(band))?;
    frame.bounds = Some((a, b));
    Ok(Pw1dFrame {
        frame,
        report: Pw1dReport {
            bounds: [a, b],
            theory_interval: [1.0, 1.0],
            leakage,
        },
    })
}

/// Cubature rule on the sampling points exact on `PW_{2 omega}` (weights by
/// projection from the cell lengths), and the Parseval frame it induces over
/// the levels with `2^(j+1) <= omega`.
pub fn pw1d_frame_cubature(
    model: &Arc<SpectralModel>,
    bank: &FilterBank,
    omega: f64,
    gamma: f64,
    sampling: &SamplingSet1D,
) -> Result<(CubatureRule, Pw1dFrame)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    let gaps = sampling.gaps();
    let rho = sampling.rho;
    let limit = gamma / (6.0 * omega);
    if rho >= limit {
        return Err(Error::Hypothesis(format!("rho = {rho:.4e} must be below gamma/(6 omega) = {limit:.4e}")));
    }
    if gaps.iter().any(|g| *g < 0.5 * rho * (1.0 - 1e-12) || *g > rho * (1.0 + 1e-12)) {
        return Err(Error::Hypothesis("gaps must lie in [rho/2, rho]".into()));
    }
    if model.lambda_max() < 2.0 * omega * (1.0 - 1e-12) - 2.0 * PI / model.volume() {
        return Err(Error::Truncation(format!(
            "exactness on PW_(2 omega) needs frequencies near {}, model stops at {}",
            2.0 * omega,
            model.lambda_max()
        )));
    }
    let points: Vec<Point> = sampling.points.iter().map(|x| Point::Line(*x)).collect();
    let proj = project_weights(model, &points, &gaps, 2.0 * omega)?;
    let rule = finish_rule(points.clone(), proj, 2.0 * omega, rho * omega)?;

    let ev = model.eigenvalues();
    let top_level = (0..=bank.levels())
        .take_while(|j| f64::powi(2.0, *j as i32 + 1) <= omega * (1.0 + 1e-12))
        .last()
        .ok_or_else(|| Error::Precondition(format!("omega = {omega} is below the first level")))?;
    let n = model.band_len_strict(omega);
    let mut atoms = Vec::new();
    let mut levels = Vec::new();
    for j in 0..=top_level {
        let before = atoms.len();
        for (k, (p, mu)) in points.iter().zip(&rule.weights).enumerate() {
            let s = mu.sqrt();
            let mut c: Vec<Complex64> = model
                .eval_modes(p, n)?
                .into_iter()
                .enumerate()
                .map(|(l, u)| u.conj() * (s * bank.f(j, ev[l])))
                .collect();
            while c.last() == Some(&Complex64::new(0.0, 0.0)) {
                c.pop();
            }
            atoms.push(Atom {
                level: j,
                index: k,
                center: *p,
                coeffs: c,
            });
        }
        let (lo, hi) = level_support(j);
        levels.push(LevelInfo {
            level: j,
            band_lo: lo,
            band_hi: hi,
            atoms: atoms.len() - before,
        });
    }
    let band = f64::powi(2.0, top_level as i32);
    let mut frame = Frame::from_atoms(model.clone(), FrameKind::Parseval, atoms, levels, band)?;
    let (a, b) = bounds_on_modes(&frame, model.band_len(band))?;
    frame.bounds = Some((a, b));
    let rep = frame.atom_fn(0);
    let leakage = window_leakage(&rep, sampling.points[0])?;
    Ok((
        rule,
        Pw1dFrame {
            frame,
            report: Pw1dReport {
                bounds: [a, b],
                theory_interval: [1.0, 1.0],
                leakage,
            },
        },
    ))
}

/// `int_{-T}^{T} f` by composite Gauss-Legendre at eight panels per Nyquist
/// step of `omega`, independent of the eigen-representation's quadrature.
pub fn oracle_integral(f: &SpectralFn, omega: f64) -> Result<Complex64> {
    let model = f.model();
    let t = half_window(model)?;
    let panels = (8.0 * 2.0 * t * omega / PI).ceil() as usize;
    let n = f.coeffs().len();
    let eval = |x: f64| -> Complex64 {
        let u = model.eval_modes(&Point::Line(x.clamp(-t, t)), n).expect("inside window");
        u.iter().zip(f.coeffs()).map(|(a, b)| a * b).sum()
    };
    let re = composite_gauss(|x| eval(x).re, -t, t, panels, 6);
    let im = composite_gauss(|x| eval(x).im, -t, t, panels, 6);
    Ok(Complex64::new(re, im))
}
