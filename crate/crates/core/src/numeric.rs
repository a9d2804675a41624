//! Small numerical helpers shared across modules: deterministic reductions,
//! weighted L_p norms, Gauss-Legendre rules and log-log regression.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation in ascending index order.
///
/// The association tree depends only on the length, so results are
/// bit-identical regardless of how the caller parallelises around it.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_BLOCK {
        let mut s = Complex64::new(0.0, 0.0);
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
}

/// Pairwise sum of `f(i)` for `i` in `0..n` without materialising the terms.
pub fn pairwise_sum_by(n: usize, f: &impl Fn(usize) -> f64) -> f64 {
    fn go(lo: usize, hi: usize, f: &impl Fn(usize) -> f64) -> f64 {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, n, f)
}

pub fn pairwise_sum_c_by(n: usize, f: &impl Fn(usize) -> Complex64) -> Complex64 {
    fn go(lo: usize, hi: usize, f: &impl Fn(usize) -> Complex64) -> Complex64 {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut s = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                s += f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, n, f)
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr(v: &[Complex64]) -> f64 {
    pairwise_sum_by(v.len(), &|i| v[i].norm_sqr())
}

pub fn norm(v: &[Complex64]) -> f64 {
    norm_sqr(v).sqrt()
}

/// `<a, b> = sum a_i conj(b_i)` over the common prefix.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let n = a.len().min(b.len());
    pairwise_sum_c_by(n, &|i| a[i] * b[i].conj())
}

/// Weighted L_p norm `(sum w_i |v_i|^p)^(1/p)`; `p = inf` gives `max |v_i|`.
pub fn weighted_lp_norm(values: &[Complex64], weights: &[f64], p: f64) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    if p.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let s = pairwise_sum_by(values.len(), &|i| weights[i] * values[i].norm().powf(p));
    s.powf(1.0 / p)
}

/// Unweighted l_p norm of a sequence of magnitudes.
pub fn lp_seq_norm(values: impl IntoIterator<Item = f64>, p: f64) -> f64 {
    let v: Vec<f64> = values.into_iter().map(f64::abs).collect();
    if p.is_infinite() {
        return v.iter().copied().fold(0.0, f64::max);
    }
    let s = pairwise_sum_by(v.len(), &|i| v[i].powf(p));
    s.powf(1.0 / p)
}

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points for a slope");
    let n = x.len() as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let sxy = pairwise_sum_by(x.len(), &|i| (x[i] - mx) * (y[i] - my));
    let sxx = pairwise_sum_by(x.len(), &|i| (x[i] - mx) * (x[i] - mx));
    sxy / sxx
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomials `P_0(x) ..= P_lmax(x)`.
pub fn legendre_table(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; lmax + 1];
    p[0] = 1.0;
    if lmax >= 1 {
        p[1] = x;
    }
    for l in 2..=lmax {
        let lf = l as f64;
        p[l] = ((2.0 * lf - 1.0) * x * p[l - 1] - (lf - 1.0) * p[l - 2]) / lf;
    }
    p
}

/// Composite Gauss-Legendre integration of `f` over `[a, b]`.
pub fn composite_gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut terms = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            let t = lo + 0.5 * h * (xi + 1.0);
            terms.push(0.5 * h * wi * f(t));
        }
    }
    pairwise_sum(&terms)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        // exact through degree 13
        for deg in 0..=13 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "deg {deg}: {q} vs {exact}");
        }
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pairwise_matches_naive_on_small_and_large() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
        assert_eq!(pairwise_sum(&xs), pairwise_sum_by(xs.len(), &|i| xs[i]));
    }

    #[test]
    fn slope_of_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((regression_slope(&x, &y) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lp_norms() {
        let v = [Complex64::new(3.0, 4.0), Complex64::new(0.0, 1.0)];
        let w = [1.0, 1.0];
        assert!((weighted_lp_norm(&v, &w, 1.0) - 6.0).abs() < 1e-15);
        assert!((weighted_lp_norm(&v, &w, 2.0) - 26f64.sqrt()).abs() < 1e-14);
        assert_eq!(weighted_lp_norm(&v, &w, f64::INFINITY), 5.0);
    }
}
