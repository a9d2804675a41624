//! Thin wrappers over faer for the few dense factorizations needed.

use faer::{c64, Mat, Par, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Cap faer's internal parallelism; `0` or `1` means sequential.
pub fn set_threads(n: usize) {
    if n <= 1 {
        faer::set_global_parallelism(Par::Seq);
    } else {
        faer::set_global_parallelism(Par::rayon(n));
    }
}

pub struct Pinv {
    pub rank: usize,
    /// `s_max / s_min` over the retained singular values.
    pub condition: f64,
    pub solution: Vec<f64>,
}

/// Minimum-norm least-squares solution `A^+ b` from a thin SVD with relative
/// singular-value cutoff `rcond`.
pub fn pinv_solve(a: &Mat<f64>, b: &[f64], rcond: f64) -> Result<Pinv> {
    assert_eq!(a.nrows(), b.len());
    let svd = a.thin_svd().map_err(|e| Error::Linalg(format!("svd: {e:?}")))?;
    let u = svd.U();
    let v = svd.V();
    let s = svd.S().column_vector();
    let p = s.nrows();
    let smax = (0..p).map(|i| s[i]).fold(0.0, f64::max);
    let mut rank = 0;
    let mut smin = smax;
    let mut coef = vec![0.0; p];
    for i in 0..p {
        if s[i] > rcond * smax {
            rank += 1;
            smin = smin.min(s[i]);
            let mut dot = 0.0;
            for (r, bv) in b.iter().enumerate() {
                dot += u[(r, i)] * bv;
            }
            coef[i] = dot / s[i];
        }
    }
    let n = a.ncols();
    let mut x = vec![0.0; n];
    for (i, c) in coef.iter().enumerate() {
        if *c != 0.0 {
            for (k, xk) in x.iter_mut().enumerate() {
                *xk += v[(k, i)] * c;
            }
        }
    }
    Ok(Pinv {
        rank,
        condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        solution: x,
    })
}

/// Ascending eigenvalues of a Hermitian matrix given by its lower triangle.
pub fn hermitian_eigenvalues(m: &Mat<c64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigenvalues: {e:?}")))
}

pub fn real_symmetric_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigenvalues: {e:?}")))
}

/// `sum_a a a^H` for column vectors `a` of length `n` (zero padded).
pub fn outer_sum(columns: &[&[Complex64]], n: usize) -> Mat<c64> {
    let m = Mat::<c64>::from_fn(n, columns.len(), |i, j| columns[j].get(i).copied().unwrap_or_default());
    &m * m.adjoint()
}

/// Real part of `sum_a a a^H` when every column is real.
pub fn outer_sum_real(columns: &[&[Complex64]], n: usize) -> Mat<f64> {
    let m = Mat::<f64>::from_fn(n, columns.len(), |i, j| columns[j].get(i).map_or(0.0, |c| c.re));
    &m * m.transpose()
}
