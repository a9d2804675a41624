//! The circle `S^1` with `L = -d^2/dtheta^2`, and the periodic machinery it
//! shares with the windowed line.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum_c_by;
use crate::spectral::{Geometry, ManifoldKind, Mode, Point, SpectralModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleConfig {
    pub max_degree: usize,
    pub quadrature_size: usize,
}

impl CircleConfig {
    pub fn minimal(max_degree: usize) -> Self {
        Self {
            max_degree,
            quadrature_size: 4 * max_degree + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let need = 4 * self.max_degree + 1;
        if self.quadrature_size < need {
            return Err(Error::Config(format!(
                "quadrature_size = {} must be at least 2*(2*max_degree)+1 = {need}",
                self.quadrature_size
            )));
        }
        Ok(())
    }
}

/// Signed frequency of flat index `idx`: 0, -1, 1, -2, 2, ...
pub fn index_to_frequency(idx: usize) -> i64 {
    if idx == 0 {
        0
    } else if idx % 2 == 1 {
        -(idx.div_ceil(2) as i64)
    } else {
        (idx / 2) as i64
    }
}

pub fn frequency_to_index(k: i64) -> usize {
    match k {
        0 => 0,
        k if k < 0 => (2 * (-k) - 1) as usize,
        k => (2 * k) as usize,
    }
}

pub fn circle_model(cfg: &CircleConfig) -> Result<Arc<SpectralModel>> {
    cfg.validate()?;
    let n = cfg.quadrature_size;
    let nodes = (0..n).map(|i| Point::Circle(2.0 * PI * i as f64 / n as f64)).collect();
    let weights = vec![2.0 * PI / n as f64; n];
    Ok(Arc::new(periodic_model(
        ManifoldKind::Circle,
        2.0 * PI,
        0.0,
        cfg.max_degree,
        nodes,
        weights,
    )))
}

pub(crate) fn periodic_model(
    kind: ManifoldKind,
    period: f64,
    start: f64,
    max_index: usize,
    nodes: Vec<Point>,
    weights: Vec<f64>,
) -> SpectralModel {
    let count = 2 * max_index + 1;
    let mut eigenvalues = Vec::with_capacity(count);
    let mut modes = Vec::with_capacity(count);
    for idx in 0..count {
        let k = index_to_frequency(idx);
        eigenvalues.push(2.0 * PI * k.unsigned_abs() as f64 / period);
        modes.push(Mode { degree: k.abs(), order: k });
    }
    let exact_degree = nodes.len() - 1;
    SpectralModel::from_parts(
        kind,
        Geometry::Periodic { period, start },
        eigenvalues,
        modes,
        nodes,
        weights,
        exact_degree,
        period,
    )
}

pub(crate) fn periodic_eval(period: f64, x: f64, n: usize) -> Vec<Complex64> {
    let frac = (x / period).rem_euclid(1.0);
    let scale = 1.0 / period.sqrt();
    (0..n)
        .map(|idx| {
            let k = index_to_frequency(idx) as f64;
            Complex64::from_polar(scale, 2.0 * PI * frac * k)
        })
        .collect()
}

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
        .collect()
}

pub(crate) fn periodic_synthesize(coeffs: &[Complex64], period: f64, start: f64, n_nodes: usize) -> Vec<Complex64> {
    let tw = twiddles(n_nodes);
    let scale = 1.0 / period.sqrt();
    let frac = (start / period).rem_euclid(1.0);
    let shifted: Vec<(i64, Complex64)> = coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let k = index_to_frequency(idx);
            (k, c * Complex64::from_polar(scale, 2.0 * PI * frac * k as f64))
        })
        .collect();
    let nn = n_nodes as i64;
    (0..n_nodes)
        .map(|i| {
            pairwise_sum_c_by(shifted.len(), &|j| {
                let (k, c) = shifted[j];
                c * tw[(k * i as i64).rem_euclid(nn) as usize]
            })
        })
        .collect()
}

pub(crate) fn periodic_analyze(values: &[Complex64], n: usize, period: f64, start: f64) -> Vec<Complex64> {
    let n_nodes = values.len();
    let tw = twiddles(n_nodes);
    let w = period / n_nodes as f64;
    let scale = 1.0 / period.sqrt();
    let frac = (start / period).rem_euclid(1.0);
    let nn = n_nodes as i64;
    (0..n)
        .map(|idx| {
            let k = index_to_frequency(idx);
            let s = pairwise_sum_c_by(n_nodes, &|i| values[i] * tw[(-k * i as i64).rem_euclid(nn) as usize]);
            s * Complex64::from_polar(w * scale, -2.0 * PI * frac * k as f64)
        })
        .collect()
}

/// `(1/P) sum_{|k| <= D} w_{|k|} exp(2 pi i k d / P)`, which is real.
pub(crate) fn periodic_kernel(period: f64, d: f64, w: &[f64]) -> Complex64 {
    let frac = (d / period).rem_euclid(1.0);
    let mut s = w[0];
    for (k, wk) in w.iter().enumerate().skip(1) {
        if *wk != 0.0 {
            s += 2.0 * wk * (2.0 * PI * frac * k as f64).cos();
        }
    }
    Complex64::new(s / period, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_frequency_roundtrip() {
        for idx in 0..50 {
            assert_eq!(frequency_to_index(index_to_frequency(idx)), idx);
        }
        assert_eq!(index_to_frequency(1), -1);
        assert_eq!(index_to_frequency(2), 1);
    }

    #[test]
    fn eigenvalue_at_k3_is_3() {
        let m = circle_model(&CircleConfig::minimal(5)).unwrap();
        assert_eq!(m.eigenvalue(frequency_to_index(3)), 3.0);
        assert_eq!(m.eigenvalue(frequency_to_index(-3)), 3.0);
    }

    #[test]
    fn undersized_quadrature_is_config_error() {
        let cfg = CircleConfig {
            max_degree: 8,
            quadrature_size: 20,
        };
        assert!(matches!(circle_model(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn kernel_at_coincidence() {
        let w = [1.0, 0.5, 0.25];
        let k = periodic_kernel(2.0 * PI, 0.0, &w);
        assert!((k.re - (1.0 + 2.0 * 0.5 + 2.0 * 0.25) / (2.0 * PI)).abs() < 1e-15);
    }
}
