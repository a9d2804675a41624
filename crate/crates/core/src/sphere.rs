//! The 2-sphere with real spherical harmonics.
//!
//! Harmonics are evaluated through the fully normalised associated-Legendre
//! recurrence, so no factorial ratios appear and degrees in the hundreds stay
//! finite. Quadrature is Gauss-Legendre in `cos(theta)` times a uniform
//! longitude grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, legendre_table};
use crate::spectral::{Geometry, ManifoldKind, Mode, Point, SpectralModel};

const ON_SPHERE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereConfig {
    pub max_degree: usize,
    pub gauss_latitudes: usize,
    pub longitudes: usize,
}

impl SphereConfig {
    /// Smallest grid satisfying the product-exactness invariant.
    pub fn minimal(max_degree: usize) -> Self {
        Self {
            max_degree,
            gauss_latitudes: 2 * max_degree + 1,
            longitudes: 4 * max_degree + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.max_degree;
        if self.gauss_latitudes < 2 * l + 1 {
            return Err(Error::Config(format!(
                "gauss_latitudes = {} must be at least 2*max_degree+1 = {}",
                self.gauss_latitudes,
                2 * l + 1
            )));
        }
        if self.longitudes < 4 * l + 1 {
            return Err(Error::Config(format!(
                "longitudes = {} must be at least 4*max_degree+1 = {}",
                self.longitudes,
                4 * l + 1
            )));
        }
        Ok(())
    }
}

/// Dimension of the degree-`l` harmonic space on `S^d`:
/// `(d + 2l - 1) (d + l - 2)! / (l! (d - 1)!)`.
pub fn harmonic_dimension(d: usize, l: usize) -> usize {
    assert!(d >= 1);
    if l == 0 {
        return 1;
    }
    let mut v = (d + 2 * l - 1) as f64;
    // (d+l-2)! / l!
    if d >= 2 {
        for i in (l + 1)..=(d + l - 2) {
            v *= i as f64;
        }
    } else {
        v /= l as f64;
    }
    for i in 2..d {
        v /= i as f64;
    }
    v.round() as usize
}

/// `sqrt(l (l + 1))`, the eigenvalue of the square root of the Laplace-Beltrami
/// operator on degree-`l` harmonics.
pub fn degree_eigenvalue(l: usize) -> f64 {
    ((l * (l + 1)) as f64).sqrt()
}

/// Flat index of `Y_{l,m}`: degrees ascending, orders `-l..=l` within a degree.
pub fn mode_index(l: usize, m: i64) -> usize {
    (l * l) as usize + (l as i64 + m) as usize
}

fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Fully normalised associated Legendre values including the `1/sqrt(4 pi)`
/// factor, so that `Y_{l,0} = P[l,0]`. Stored triangularly, `m <= l`.
pub(crate) fn normalized_legendre(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
    let s = (1.0 - x * x).max(0.0).sqrt();
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            p[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
        }
        if m < lmax {
            p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * p[tri(m, m)];
        }
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lm1 = lf - 1.0;
            let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

fn check_on_sphere(p: &[f64; 3]) -> Result<()> {
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    if (r2.sqrt() - 1.0).abs() > ON_SPHERE_TOL {
        return Err(Error::Domain(format!("|p| = {} is not 1", r2.sqrt())));
    }
    Ok(())
}

/// Real orthonormal spherical harmonic `Y_{l,m}` at a unit vector.
pub fn eval_sph_harm(l: usize, m: i64, p: &[f64; 3]) -> Result<f64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::Precondition(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    check_on_sphere(p)?;
    let table = normalized_legendre(l, p[2].clamp(-1.0, 1.0));
    let phi = p[1].atan2(p[0]);
    let ma = m.unsigned_abs() as usize;
    let base = table[tri(l, ma)];
    Ok(match m {
        0 => base,
        m if m > 0 => std::f64::consts::SQRT_2 * base * (ma as f64 * phi).cos(),
        _ => std::f64::consts::SQRT_2 * base * (ma as f64 * phi).sin(),
    })
}

/// All `Y_{l,m}` with flat index below `n` at a unit vector.
pub(crate) fn eval_all(n: usize, p: &[f64; 3]) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let lmax = degree_of_index(n - 1);
    let table = normalized_legendre(lmax, p[2].clamp(-1.0, 1.0));
    let phi = p[1].atan2(p[0]);
    let mut out = vec![0.0; n];
    let (mut c_prev, mut s_prev) = (1.0, 0.0);
    let (c1, s1) = (phi.cos(), phi.sin());
    let mut cs = Vec::with_capacity(lmax + 1);
    for m in 0..=lmax {
        if m > 0 {
            // angle addition keeps cos/sin(m phi) accurate to a few ulps per step
            let c = c_prev * c1 - s_prev * s1;
            let s = s_prev * c1 + c_prev * s1;
            c_prev = c;
            s_prev = s;
        }
        cs.push((c_prev, s_prev));
    }
    for l in 0..=lmax {
        for m in -(l as i64)..=(l as i64) {
            let idx = mode_index(l, m);
            if idx >= n {
                return out;
            }
            let ma = m.unsigned_abs() as usize;
            let base = table[tri(l, ma)];
            out[idx] = match m {
                0 => base,
                m if m > 0 => std::f64::consts::SQRT_2 * base * cs[ma].0,
                _ => std::f64::consts::SQRT_2 * base * cs[ma].1,
            };
        }
    }
    out
}

pub(crate) fn degree_of_index(idx: usize) -> usize {
    let mut l = (idx as f64).sqrt() as usize;
    while (l + 1) * (l + 1) <= idx {
        l += 1;
    }
    while l * l > idx {
        l -= 1;
    }
    l
}

pub fn sphere_point(theta: f64, phi: f64) -> Point {
    Point::Sphere([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
}

pub fn sphere_model(cfg: &SphereConfig) -> Result<Arc<SpectralModel>> {
    cfg.validate()?;
    let lmax = cfg.max_degree;
    let g = cfg.gauss_latitudes;
    let m = cfg.longitudes;
    let (x, w) = gauss_legendre(g);
    // nodes from north pole southwards
    let lat_cos: Vec<f64> = x.iter().rev().copied().collect();
    let lat_w: Vec<f64> = w.iter().rev().copied().collect();

    let mut nodes = Vec::with_capacity(g * m);
    let mut weights = Vec::with_capacity(g * m);
    let dphi = 2.0 * PI / m as f64;
    for (ci, wi) in lat_cos.iter().zip(&lat_w) {
        let s = (1.0 - ci * ci).max(0.0).sqrt();
        for j in 0..m {
            let phi = j as f64 * dphi;
            nodes.push(Point::Sphere([s * phi.cos(), s * phi.sin(), *ci]));
            weights.push(wi * dphi);
        }
    }

    let mut eigenvalues = Vec::with_capacity((lmax + 1) * (lmax + 1));
    let mut modes = Vec::with_capacity((lmax + 1) * (lmax + 1));
    for l in 0..=lmax {
        for mm in -(l as i64)..=(l as i64) {
            eigenvalues.push(degree_eigenvalue(l));
            modes.push(Mode { degree: l as i64, order: mm });
        }
    }
    let exact_degree = (2 * g - 1).min(m - 1);
    Ok(Arc::new(SpectralModel::from_parts(
        ManifoldKind::Sphere2,
        Geometry::Sphere {
            lat_cos,
            lat_w,
            longitudes: m,
        },
        eigenvalues,
        modes,
        nodes,
        weights,
        exact_degree,
        4.0 * PI,
    )))
}

fn trig_table(m: usize, mmax: usize) -> (Vec<f64>, Vec<f64>) {
    // cos/sin(2 pi k / m) for k in 0..m; indexed by (order * j) mod m
    let _ = mmax;
    let mut c = Vec::with_capacity(m);
    let mut s = Vec::with_capacity(m);
    for k in 0..m {
        let a = 2.0 * PI * k as f64 / m as f64;
        c.push(a.cos());
        s.push(a.sin());
    }
    (c, s)
}

/// Synthesis on the latitude-major node grid.
pub(crate) fn synthesize_grid(
    coeffs: &[Complex64],
    lat_cos: &[f64],
    longitudes: usize,
) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; lat_cos.len() * longitudes];
    if coeffs.is_empty() {
        return out;
    }
    let lmax = degree_of_index(coeffs.len() - 1);
    let (ct, st) = trig_table(longitudes, lmax);
    let sqrt2 = std::f64::consts::SQRT_2;
    let get = |l: usize, m: i64| -> Complex64 {
        let i = mode_index(l, m);
        if i < coeffs.len() {
            coeffs[i]
        } else {
            zero
        }
    };
    let mut a = vec![zero; lmax + 1];
    let mut b = vec![zero; lmax + 1];
    for (g, &x) in lat_cos.iter().enumerate() {
        let p = normalized_legendre(lmax, x);
        for m in 0..=lmax {
            let mut sa = zero;
            let mut sb = zero;
            for l in m..=lmax {
                let pl = p[tri(l, m)];
                sa += get(l, m as i64) * pl;
                if m > 0 {
                    sb += get(l, -(m as i64)) * pl;
                }
            }
            a[m] = sa;
            b[m] = sb;
        }
        let row = &mut out[g * longitudes..(g + 1) * longitudes];
        for (j, v) in row.iter_mut().enumerate() {
            let mut acc = a[0];
            for m in 1..=lmax {
                let k = (m * j) % longitudes;
                acc += (a[m] * ct[k] + b[m] * st[k]) * sqrt2;
            }
            *v = acc;
        }
    }
    out
}

/// Quadrature analysis onto the first `n` modes.
pub(crate) fn analyze_grid(
    values: &[Complex64],
    n: usize,
    lat_cos: &[f64],
    lat_w: &[f64],
    longitudes: usize,
) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; n];
    if n == 0 {
        return out;
    }
    let lmax = degree_of_index(n - 1);
    let (ct, st) = trig_table(longitudes, lmax);
    let sqrt2 = std::f64::consts::SQRT_2;
    let dphi = 2.0 * PI / longitudes as f64;
    let mut cm = vec![zero; lmax + 1];
    let mut sm = vec![zero; lmax + 1];
    for (g, (&x, &w)) in lat_cos.iter().zip(lat_w).enumerate() {
        let row = &values[g * longitudes..(g + 1) * longitudes];
        for m in 0..=lmax {
            let mut c = zero;
            let mut s = zero;
            for (j, v) in row.iter().enumerate() {
                let k = (m * j) % longitudes;
                c += v * ct[k];
                s += v * st[k];
            }
            cm[m] = c * (w * dphi);
            sm[m] = s * (w * dphi);
        }
        let p = normalized_legendre(lmax, x);
        for l in 0..=lmax {
            for m in 0..=l {
                let pl = p[tri(l, m)];
                if m == 0 {
                    let i = mode_index(l, 0);
                    if i < n {
                        out[i] += cm[0] * pl;
                    }
                } else {
                    let ip = mode_index(l, m as i64);
                    let im = mode_index(l, -(m as i64));
                    if ip < n {
                        out[ip] += cm[m] * (sqrt2 * pl);
                    }
                    if im < n {
                        out[im] += sm[m] * (sqrt2 * pl);
                    }
                }
            }
        }
    }
    out
}

/// `sum_l F(t lambda_l) (2l+1)/(4 pi) P_l(x . y)`, the addition-theorem form of
/// the spectral kernel, summed over complete degrees up to `lmax`.
pub(crate) fn zonal_kernel(lmax: usize, cos_angle: f64, weights_by_degree: &[f64]) -> f64 {
    let p = legendre_table(lmax, cos_angle.clamp(-1.0, 1.0));
    let mut s = 0.0;
    for l in 0..=lmax {
        let w = weights_by_degree[l];
        if w != 0.0 {
            s += w * (2.0 * l as f64 + 1.0) / (4.0 * PI) * p[l];
        }
    }
    s
}

pub(crate) fn geodesic(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    let d = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    let c = [
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    ];
    // atan2 stays accurate near 0 and pi where acos does not
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt().atan2(d)
}

pub(crate) fn validate_point(p: &[f64; 3]) -> Result<()> {
    check_on_sphere(p)
}
