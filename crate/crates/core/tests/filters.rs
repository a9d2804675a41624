use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use spectral_frames::filters::{g, h, level_f, level_g, level_support, make_filter_bank, partition_residual, unity_residual};
use spectral_frames::Error;

/// `g` rebuilt from its definition with the bump written out longhand.
fn g_oracle(x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    if x >= 2.0 {
        return 0.0;
    }
    let left = f64::exp(-1.0 / (2.0 - x));
    let right = f64::exp(-1.0 / (x - 1.0));
    1.0 / (1.0 + right / left)
}

#[test]
fn base_bump_values() {
    assert_eq!(g(1.0), 1.0);
    assert_eq!(g(2.0), 0.0);
    assert_eq!(g(0.0), 1.0);
    assert_abs_diff_eq!(g(1.5), 0.5, epsilon = 1e-15);
    for i in 0..=400 {
        let x = i as f64 / 100.0;
        assert_abs_diff_eq!(g(x), g_oracle(x), epsilon = 1e-14);
    }
}

#[test]
fn level_filter_is_one_at_its_centre() {
    for j in 1..=12usize {
        assert_abs_diff_eq!(level_g(j, f64::powi(2.0, j as i32)), 1.0, epsilon = 1e-15);
    }
}

#[test]
fn partition_sum_at_3_7() {
    let s: f64 = (0..=6).map(|j| level_g(j, 3.7)).sum();
    assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14);
}

#[test]
fn level_zero_is_flat_on_the_unit_interval() {
    for i in 0..=100 {
        assert_eq!(level_f(0, i as f64 / 100.0), 1.0);
    }
}

#[test]
fn supports_are_closed_dyadic_intervals() {
    assert_eq!(level_support(0), (0.0, 2.0));
    for j in 1..10usize {
        let (lo, hi) = level_support(j);
        assert_eq!(lo, f64::powi(2.0, j as i32 - 1));
        assert_eq!(hi, f64::powi(2.0, j as i32 + 1));
        assert_eq!(level_g(j, lo), 0.0);
        assert_eq!(level_g(j, hi), 0.0);
        assert_eq!(level_g(j, lo * 0.999), 0.0);
        assert_eq!(level_g(j, hi * 1.001), 0.0);
        assert!(level_g(j, lo * 1.1) > 0.0 && level_g(j, hi * 0.95) > 0.0);
    }
}

#[test]
fn bump_is_monotone() {
    let mut prev = g(0.0);
    for i in 1..=2000 {
        let v = g(i as f64 / 1000.0);
        assert!(v <= prev);
        prev = v;
    }
}

#[test]
fn telescoping_residual_on_a_fine_grid() {
    let bank = make_filter_bank(8).unwrap();
    let grid: Vec<f64> = (0..=20000).map(|i| i as f64 * 0.05).collect();
    assert!(partition_residual(&bank, &grid) <= 1e-12);
    let below: Vec<f64> = grid.iter().copied().filter(|&l| l <= 256.0).collect();
    assert!(unity_residual(&bank, &below) <= 1e-12);
}

#[test]
fn empty_bank_is_a_config_error() {
    assert!(matches!(make_filter_bank(0), Err(Error::Config(_))));
}

proptest! {
    #[test]
    fn partition_of_unity_below_the_top_scale(l in 0.0f64..1024.0) {
        let bank = make_filter_bank(10).unwrap();
        prop_assert!((bank.partition_sum(l) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn at_most_two_levels_overlap(l in 0.0f64..4096.0) {
        let live = (0..=12).filter(|&j| level_g(j, l) > 0.0).count();
        prop_assert!(live <= 2);
    }

    #[test]
    fn filters_stay_in_the_unit_interval(j in 0usize..12, l in 0.0f64..10000.0) {
        let v = level_f(j, l);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v * v - level_g(j, l)).abs() <= 1e-15);
    }

    #[test]
    fn h_is_dilation_difference(l in 0.0f64..8.0) {
        prop_assert_eq!(h(l), g(l) - g(2.0 * l));
    }
}
