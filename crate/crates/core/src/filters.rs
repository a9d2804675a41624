//! Smooth dyadic partition of unity.
//!
//! `g` is 1 on `[0, 1]`, 0 on `[2, inf)` and blends with `exp(-1/t)` in
//! between; `G_0 = g`, `G_j(l) = g(2^-j l) - g(2^(1-j) l)`, `F_j = sqrt(G_j)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Base bump.
pub fn g(lambda: f64) -> f64 {
    if lambda <= 1.0 {
        1.0
    } else if lambda >= 2.0 {
        0.0
    } else {
        let a = psi(2.0 - lambda);
        let b = psi(lambda - 1.0);
        a / (a + b)
    }
}

/// `g(l) - g(2l)`, supported in `[1/2, 2]`.
pub fn h(lambda: f64) -> f64 {
    g(lambda) - g(2.0 * lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterBank {
    levels: usize,
}

pub fn make_filter_bank(levels: usize) -> Result<FilterBank> {
    if levels < 1 {
        return Err(Error::Config("filter bank needs at least one level".into()));
    }
    Ok(FilterBank { levels })
}

impl FilterBank {
    /// `J`; levels run over `0..=J`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `G_j(lambda)`.
    pub fn big_g(&self, j: usize, lambda: f64) -> f64 {
        level_g(j, lambda)
    }

    /// `F_j(lambda)`.
    pub fn f(&self, j: usize, lambda: f64) -> f64 {
        level_f(j, lambda)
    }

    /// `sum_{j<=J} G_j(lambda)`.
    pub fn partition_sum(&self, lambda: f64) -> f64 {
        (0..=self.levels).map(|j| level_g(j, lambda)).sum()
    }
}

pub fn level_g(j: usize, lambda: f64) -> f64 {
    if j == 0 {
        g(lambda)
    } else {
        h(lambda / f64::powi(2.0, j as i32))
    }
}

pub fn level_f(j: usize, lambda: f64) -> f64 {
    level_g(j, lambda).max(0.0).sqrt()
}

/// Closed support `[lo, hi]` of `F_j`.
pub fn level_support(j: usize) -> (f64, f64) {
    if j == 0 {
        (0.0, 2.0)
    } else {
        (f64::powi(2.0, j as i32 - 1), f64::powi(2.0, j as i32 + 1))
    }
}

/// `max |sum_{j<=J} G_j(l) - g(2^-J l)|` over the grid.
pub fn partition_residual(bank: &FilterBank, grid: &[f64]) -> f64 {
    let scale = f64::powi(2.0, -(bank.levels as i32));
    grid.iter()
        .map(|&l| (bank.partition_sum(l) - g(l * scale)).abs())
        .fold(0.0, f64::max)
}

/// `max |sum_{j<=J} G_j(l) - 1|` over the grid.
pub fn unity_residual(bank: &FilterBank, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&l| (bank.partition_sum(l) - 1.0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_anchor_values() {
        assert_eq!(g(1.0), 1.0);
        assert_eq!(g(2.0), 0.0);
        assert_eq!(g(1.5), 0.5);
        assert_eq!(g(0.0), 1.0);
    }

    #[test]
    fn level_peak_is_one() {
        for j in 1..10 {
            assert_eq!(level_g(j, f64::powi(2.0, j as i32)), 1.0);
        }
    }

    #[test]
    fn h_support() {
        for i in 0..=4000 {
            let l = i as f64 * 1e-3;
            if !(0.5..=2.0).contains(&l) {
                assert_eq!(h(l), 0.0, "h({l})");
            }
        }
    }

    #[test]
    fn g_is_monotone() {
        let mut prev = g(0.0);
        for i in 1..=30000 {
            let v = g(i as f64 * 1e-4);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn support_endpoint_sums_to_zero() {
        let b = make_filter_bank(4).unwrap();
        assert_eq!(b.partition_sum(32.0), 0.0);
        assert_eq!(partition_residual(&b, &[32.0]), 0.0);
    }

    #[test]
    fn zero_levels_rejected() {
        assert!(make_filter_bank(0).is_err());
    }
}
