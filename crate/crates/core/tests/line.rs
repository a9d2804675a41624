use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;

use spectral_frames::circle::index_to_frequency;
use spectral_frames::filters::make_filter_bank;
use spectral_frames::frame::frame_bounds;
use spectral_frames::line::{
    default_half_window, line_model, measure_irregular, nyquist_count, oracle_integral, pw1d_frame_cubature,
    pw1d_frame_irregular, pw1d_frame_shannon, LineConfig, SamplingSet1D, PW1D,
};
use spectral_frames::numeric::rng;
use spectral_frames::spectral::{apply_multiplier, synthesize, Point, SpectralFn, SpectralModel};
use spectral_frames::{Complex64, Error};

fn model_with_window(omega: f64, t: f64) -> Arc<SpectralModel> {
    line_model(&LineConfig {
        max_frequency: omega,
        half_window: t,
        quadrature_size: None,
    })
    .unwrap()
}

/// Composite 8-point Gauss-Legendre on `[-t, t]`.
fn gauss(t: f64, panels: usize) -> (Vec<Point>, Vec<f64>) {
    const X: [f64; 4] = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
    const W: [f64; 4] = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];
    let h = 2.0 * t / panels as f64;
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for p in 0..panels {
        let c = -t + (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            for s in [-1.0, 1.0] {
                pts.push(Point::Line(c + s * x * 0.5 * h));
                wts.push(w * 0.5 * h);
            }
        }
    }
    (pts, wts)
}

#[test]
fn default_window_tiles_dyadic_grids() {
    for omega in [1.5, 3.0, 4.0, 7.3, 16.0, 100.0] {
        let t = default_half_window(omega);
        assert!(t >= 40.0 * PI / omega - 1e-12 && t >= 10.0 * PI - 1e-12);
        let q = t / (PI / 4.0);
        assert!((q - q.round()).abs() <= 1e-9);
        for j in 0..6 {
            assert!(nyquist_count(f64::powi(2.0, j + 1), t).is_ok());
        }
    }
    assert!(matches!(nyquist_count(3.3, PI), Err(Error::Config(_))));
}

#[test]
fn nyquist_sampling_is_an_isometry() {
    let omega = 4.0;
    let t = default_half_window(omega);
    let m = model_with_window(omega, t);
    let s = SamplingSet1D::uniform(PI / omega, t).unwrap();
    let frame = measure_irregular(&m, omega, &s).unwrap();
    let (a, b) = frame.bounds.unwrap();
    assert!((a - 1.0).abs() <= 1e-10 && (b - 1.0).abs() <= 1e-10, "({a}, {b})");
}

#[test]
fn nyquist_samples_carry_the_norm_and_the_coefficients() {
    let omega = 8.0;
    let t = 40.0 * PI / omega;
    let m = model_with_window(omega, t);
    let mut r = rng(31);
    let f = SpectralFn::random(m.clone(), m.band_len_strict(omega), false, &mut r).unwrap();
    let pw = PW1D::from_spectral(&f, omega).unwrap();
    assert!((pw.discrete_norm_sqr() - f.norm_sqr()).abs() <= 1e-10 * f.norm_sqr());
    let back = pw.to_spectral(&m).unwrap();
    assert!(back.axpy(-1.0, &f).norm() <= 1e-10 * f.norm());
}

#[test]
fn irregular_bounds_match_svd_oracle() {
    let omega = 4.0;
    let eps = 0.5;
    let t = default_half_window(omega);
    let m = model_with_window(omega, t);
    let s = SamplingSet1D::jittered(eps / (3.0 * omega), eps, t, 77).unwrap();
    let frame = pw1d_frame_irregular(&m, omega, eps, &s).unwrap();
    let [a, b] = frame.report.bounds;
    let [lo, hi] = frame.report.theory_interval;
    assert!((lo - 2.0 / 3.0).abs() <= 1e-4 && (hi - 7.1112).abs() <= 1e-4);
    assert!(a >= lo && b <= hi, "({a}, {b}) outside ({lo}, {hi})");

    // rows sqrt|I_k| exp(i pi k x / T) / sqrt(2T) for |k| < omega T / pi
    let freqs: Vec<i64> = (0..m.band_len_strict(omega)).map(index_to_frequency).collect();
    let gaps = s.gaps();
    let mat = Mat::<faer::c64>::from_fn(s.len(), freqs.len(), |i, l| {
        let z = Complex64::from_polar(
            (gaps[i] / (2.0 * t)).sqrt(),
            PI * freqs[l] as f64 * s.points[i] / t,
        );
        faer::c64::new(z.re, z.im)
    });
    let sv = mat.singular_values().unwrap();
    let top = sv[0] * sv[0];
    let bottom = sv[sv.len() - 1] * sv[sv.len() - 1];
    assert!((top - b).abs() <= 1e-10 && (bottom - a).abs() <= 1e-10, "({bottom}, {top}) vs ({a}, {b})");
}

#[test]
fn irregular_hypotheses_are_enforced() {
    let omega = 4.0;
    let t = default_half_window(omega);
    let m = model_with_window(omega, t);
    let coarse = SamplingSet1D::jittered(0.1, 0.5, t, 1).unwrap();
    assert!(matches!(pw1d_frame_irregular(&m, omega, 0.5, &coarse), Err(Error::Hypothesis(_))));
    let low = model_with_window(1.0, 10.0 * PI);
    let fine = SamplingSet1D::uniform(PI / 80.0, 10.0 * PI).unwrap();
    assert!(matches!(pw1d_frame_irregular(&low, 1.0, 0.5, &fine), Err(Error::Hypothesis(_))));
    assert!(matches!(pw1d_frame_irregular(&m, omega, 1.5, &fine), Err(Error::Config(_))));
}

#[test]
fn sampling_sets_validate_their_gaps() {
    assert!(matches!(SamplingSet1D::new(vec![0.0, 0.1, 0.5], 0.2, 0.1, 1.0), Err(Error::Config(_))));
    assert!(matches!(SamplingSet1D::new(vec![2.0], 5.0, 0.1, 1.0), Err(Error::Domain(_))));
    assert!(matches!(SamplingSet1D::uniform(0.3, 1.0), Err(Error::Config(_))));
    let s = SamplingSet1D::jittered(0.05, 0.25, 5.0, 3).unwrap();
    let g = s.gaps();
    assert!((g.iter().sum::<f64>() - 10.0).abs() <= 1e-12);
    assert!(g.iter().all(|x| *x >= 0.04 - 1e-12 && *x <= 0.05 + 1e-12));
}

fn shannon_setup() -> (Arc<SpectralModel>, spectral_frames::line::Pw1dFrame) {
    let omega = 4.0;
    let bank = make_filter_bank(3).unwrap();
    let m = model_with_window(16.0, 40.0 * PI / omega);
    let f = pw1d_frame_shannon(&m, &bank, 1e-4).unwrap();
    (m, f)
}

#[test]
fn shannon_single_level_energy() {
    let (m, frame) = shannon_setup();
    let bank = make_filter_bank(3).unwrap();
    let mut r = rng(32);
    let f = SpectralFn::random(m.clone(), m.band_len(8.0), false, &mut r).unwrap();
    let c = frame.frame.analysis(&f);
    for j in 0..=3 {
        let got: f64 = frame
            .frame
            .atoms()
            .iter()
            .zip(&c)
            .filter(|(a, _)| a.level == j)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        let want = apply_multiplier(|l: f64| bank.f(j, l), 1.0, &f).norm_sqr();
        assert!((got - want).abs() <= 1e-8 * f.norm_sqr(), "j = {j}: {got} vs {want}");
    }
    let zero = SpectralFn::zero(m.clone());
    assert!(frame.frame.analysis(&zero).iter().all(|v| *v == Complex64::new(0.0, 0.0)));
}

#[test]
fn shannon_reconstruction_against_dense_synthesis() {
    let (m, frame) = shannon_setup();
    let t = 10.0 * PI;
    let mut r = rng(33);
    let f = SpectralFn::random(m.clone(), m.band_len_strict(4.0), false, &mut r).unwrap();
    let back = frame.frame.apply_operator(&f);
    let (pts, wts) = gauss(t, 320);
    let fv = synthesize(&f, &pts).unwrap();
    let bv = synthesize(&back, &pts).unwrap();
    let err: f64 = fv.iter().zip(&bv).zip(&wts).map(|((a, b), w)| (a - b).norm_sqr() * w).sum();
    let norm: f64 = fv.iter().zip(&wts).map(|(a, w)| a.norm_sqr() * w).sum();
    assert!((err / norm).sqrt() <= 1e-6);
    assert!(frame.report.leakage <= 1e-4);
}

#[test]
fn shannon_refuses_a_leaky_window() {
    let bank = make_filter_bank(3).unwrap();
    let m = model_with_window(16.0, 2.0 * PI);
    let err = pw1d_frame_shannon(&m, &bank, 1e-6).unwrap_err();
    assert!(matches!(err, Error::Leakage { .. }), "{err:?}");
}

#[test]
fn uniform_cubature_weights_equal_the_spacing() {
    let omega = 4.0;
    let t = default_half_window(omega);
    let m = model_with_window(2.0 * omega, t);
    let bank = make_filter_bank(3).unwrap();
    let h = PI / 160.0;
    assert!(h < 0.5 / (6.0 * omega));
    let s = SamplingSet1D::uniform(h, t).unwrap();
    let (rule, frame) = pw1d_frame_cubature(&m, &bank, omega, 0.5, &s).unwrap();
    for w in &rule.weights {
        assert!((w - h).abs() <= 1e-12, "{w}");
    }
    let [a, b] = frame.report.bounds;
    assert!((a - 1.0).abs() <= 1e-10 && (b - 1.0).abs() <= 1e-10);
}

#[test]
fn jittered_cubature_integrates_band_limited_functions() {
    let omega = 4.0;
    let gamma = 0.5;
    let t = default_half_window(omega);
    let m = model_with_window(2.0 * omega, t);
    let bank = make_filter_bank(3).unwrap();
    let rho = 0.95 * gamma / (6.0 * omega);
    for seed in 0..3 {
        let s = SamplingSet1D::random_gaps(0.8 * rho, rho, t, 40 + seed).unwrap();
        let (rule, _) = pw1d_frame_cubature(&m, &bank, omega, gamma, &s).unwrap();
        assert!(rule.weight_ratio() <= 3.0);
        let mut r = rng(50 + seed);
        let (pts, wts) = gauss(t, 640);
        for _ in 0..20 {
            let f = SpectralFn::random(m.clone(), m.band_len_strict(omega), false, &mut r).unwrap();
            let vals = synthesize(&f, &rule.points).unwrap();
            let sum: Complex64 = vals.iter().zip(&rule.weights).map(|(v, w)| v * w).sum();
            let gv = synthesize(&f, &pts).unwrap();
            let exact: Complex64 = gv.iter().zip(&wts).map(|(v, w)| v * w).sum();
            assert!((sum - exact).norm() <= 1e-9);
            assert!((oracle_integral(&f, omega).unwrap() - exact).norm() <= 1e-9);
        }
    }
}

#[test]
fn cubature_refuses_coarse_sampling() {
    let omega = 4.0;
    let t = default_half_window(omega);
    let m = model_with_window(2.0 * omega, t);
    let bank = make_filter_bank(3).unwrap();
    let s = SamplingSet1D::uniform(PI / 40.0, t).unwrap();
    assert!(matches!(
        pw1d_frame_cubature(&m, &bank, omega, 0.5, &s),
        Err(Error::Hypothesis(_))
    ));
}

#[test]
fn sampling_frame_bounds_agree_with_frame_bounds() {
    let omega = 3.0;
    let t = default_half_window(omega);
    let m = model_with_window(omega, t);
    let s = SamplingSet1D::jittered(0.25 / (3.0 * omega), 0.25, t, 5).unwrap();
    let frame = measure_irregular(&m, omega, &s).unwrap();
    let (a, b) = frame_bounds(&frame, omega * (1.0 - 1e-9)).unwrap();
    let (ma, mb) = frame.bounds.unwrap();
    assert!((a - ma).abs() <= 1e-12 && (b - mb).abs() <= 1e-12);
}
