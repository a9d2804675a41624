use std::sync::Arc;

use spectral_frames::besov::{
    approx_error, besov_norm, best_l2_error, equivalence_report, BesovContext, BesovMode, BesovParams,
};
use spectral_frames::circle::{circle_model, frequency_to_index, CircleConfig};
use spectral_frames::cubature::{calibrate, CubatureRule};
use spectral_frames::filters::{level_g, make_filter_bank, FilterBank};
use spectral_frames::frame::{build_parseval, level_plan, Frame};
use spectral_frames::lattice::{build_cells, build_lattice, CellCover, Lattice};
use spectral_frames::numeric::rng;
use spectral_frames::spectral::{SpectralFn, SpectralModel};
use spectral_frames::sphere::{mode_index, sphere_model, SphereConfig};
use spectral_frames::Error;

const PARAMS: BesovParams = BesovParams {
    alpha: 1.5,
    p: 2.0,
    q: 2.0,
    levels: 5,
};

struct CircleSetup {
    model: Arc<SpectralModel>,
    bank: FilterBank,
    frame: Frame,
    lattices: Vec<(Lattice, CellCover)>,
}

fn circle_setup() -> CircleSetup {
    let model = circle_model(&CircleConfig::minimal(64)).unwrap();
    let bank = make_filter_bank(5).unwrap();
    let rules: Vec<CubatureRule> = level_plan(&model, &bank, 32.0)
        .iter()
        .map(|p| calibrate(&model, p.rule_band, 3, (1.0, 8.0), 6, 0.75).unwrap().rule)
        .collect();
    let refs: Vec<&CubatureRule> = rules.iter().collect();
    let frame = build_parseval(&model, &bank, &refs, 32.0).unwrap();
    let lattices = (0..=5)
        .map(|j| {
            let lat = build_lattice(&model, f64::powi(2.0, 1 - j), 4).unwrap();
            let cells = build_cells(&model, &lat);
            (lat, cells)
        })
        .collect();
    CircleSetup {
        model,
        bank,
        frame,
        lattices,
    }
}

#[test]
fn zero_has_zero_norm_in_every_mode() {
    let s = circle_setup();
    let ctx = BesovContext {
        frame: Some(&s.frame),
        lattices: Some(&s.lattices),
    };
    let zero = SpectralFn::zero(s.model.clone());
    for mode in [BesovMode::Approx, BesovMode::LpBlock, BesovMode::Frame, BesovMode::Sampling] {
        assert_eq!(besov_norm(&s.bank, &ctx, &zero, &PARAMS, mode).unwrap(), 0.0, "{mode:?}");
    }
    let sphere = sphere_model(&SphereConfig::minimal(8)).unwrap();
    let zero = SpectralFn::zero(sphere);
    assert_eq!(
        besov_norm(&s.bank, &BesovContext::default(), &zero, &PARAMS, BesovMode::SphereL2).unwrap(),
        0.0
    );
}

#[test]
fn homogeneity_in_every_mode() {
    let s = circle_setup();
    let ctx = BesovContext {
        frame: Some(&s.frame),
        lattices: Some(&s.lattices),
    };
    let mut r = rng(61);
    let family: Vec<SpectralFn> = (0..5)
        .map(|_| SpectralFn::random(s.model.clone(), s.model.band_len(32.0), false, &mut r).unwrap())
        .collect();
    let rep = equivalence_report(&s.bank, &ctx, &family, &PARAMS, 2.0).unwrap();
    assert_eq!(rep.modes.len(), 4);
    assert!(rep.homogeneity_defect <= 1e-12, "{}", rep.homogeneity_defect);
    for f in &family {
        for mode in &rep.modes {
            let a = besov_norm(&s.bank, &ctx, f, &PARAMS, *mode).unwrap();
            let b = besov_norm(&s.bank, &ctx, &f.scaled(-3.0), &PARAMS, *mode).unwrap();
            assert!((b - 3.0 * a).abs() <= 1e-12 * b, "{mode:?}");
        }
    }
}

#[test]
fn sphere_l2_norm_of_a_harmonic() {
    let m = sphere_model(&SphereConfig::minimal(12)).unwrap();
    let bank = make_filter_bank(4).unwrap();
    for (l, mm) in [(0usize, 0i64), (3, -2), (7, 7), (12, 0)] {
        let f = SpectralFn::basis(m.clone(), mode_index(l, mm)).unwrap();
        let got = besov_norm(&bank, &BesovContext::default(), &f, &PARAMS, BesovMode::SphereL2).unwrap();
        let want = ((l + 1) as f64).powf(PARAMS.alpha);
        assert!((got - want).abs() <= 1e-12 * want, "l = {l}: {got} vs {want}");
    }
}

#[test]
fn lp_block_norm_of_a_single_mode() {
    let m = sphere_model(&SphereConfig::minimal(24)).unwrap();
    let bank = make_filter_bank(5).unwrap();
    for l in [1usize, 3, 6, 11, 20] {
        let f = SpectralFn::basis(m.clone(), mode_index(l, 0)).unwrap();
        let lam = ((l * (l + 1)) as f64).sqrt();
        let live: Vec<f64> = (0..=5)
            .map(|j| f64::powf(2.0, PARAMS.alpha * j as f64) * level_g(j, lam))
            .collect();
        assert!(live.iter().filter(|v| **v > 0.0).count() <= 2);
        let want = 1.0 + live.iter().map(|v| v * v).sum::<f64>().sqrt();
        let got = besov_norm(&bank, &BesovContext::default(), &f, &PARAMS, BesovMode::LpBlock).unwrap();
        assert!((got - want).abs() <= 1e-10 * want, "l = {l}: {got} vs {want}");

        let sup = BesovParams {
            q: f64::INFINITY,
            ..PARAMS
        };
        let want = 1.0 + live.iter().copied().fold(0.0, f64::max);
        let got = besov_norm(&bank, &BesovContext::default(), &f, &sup, BesovMode::LpBlock).unwrap();
        assert!((got - want).abs() <= 1e-10 * want);
    }
}

#[test]
fn mode_and_model_mismatches_are_errors() {
    let s = circle_setup();
    let f = SpectralFn::basis(s.model.clone(), 1).unwrap();
    let none = BesovContext::default();
    for mode in [BesovMode::Frame, BesovMode::Sampling, BesovMode::SphereL2] {
        let e = besov_norm(&s.bank, &none, &f, &PARAMS, mode).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)), "{mode:?}: {e:?}");
    }
    let sphere = sphere_model(&SphereConfig::minimal(8)).unwrap();
    let y = SpectralFn::basis(sphere, 4).unwrap();
    let p1 = BesovParams { p: 1.0, ..PARAMS };
    assert!(matches!(
        besov_norm(&s.bank, &none, &y, &p1, BesovMode::SphereL2),
        Err(Error::Precondition(_))
    ));
    let bad = BesovParams { alpha: 0.0, ..PARAMS };
    assert!(matches!(
        besov_norm(&s.bank, &none, &f, &bad, BesovMode::LpBlock),
        Err(Error::Config(_))
    ));
}

#[test]
fn dyadic_shift_grows_like_two_to_the_alpha() {
    let m = circle_model(&CircleConfig::minimal(128)).unwrap();
    let bank = make_filter_bank(8).unwrap();
    let params = BesovParams { levels: 8, ..PARAMS };
    let profile = [1.0, -0.4, 0.7, 0.25];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 2..=5 {
        let mut c = vec![spectral_frames::Complex64::new(0.0, 0.0); m.len()];
        for (i, a) in profile.iter().enumerate() {
            let k = (f64::powi(2.0, j) * (1.0 + 0.25 * i as f64)).round() as i64;
            c[frequency_to_index(k)] = spectral_frames::Complex64::new(*a, 0.0);
        }
        let f = SpectralFn::new(m.clone(), c).unwrap();
        let v = besov_norm(&bank, &BesovContext::default(), &f, &params, BesovMode::LpBlock).unwrap();
        xs.push(j as f64);
        ys.push(v.log2());
    }
    let s = spectral_frames::numeric::regression_slope(&xs, &ys);
    assert!((s - PARAMS.alpha).abs() <= 0.05 * PARAMS.alpha, "slope {s}");
}

#[test]
fn approximation_error_is_sandwiched_by_best_l2_error() {
    let m = circle_model(&CircleConfig::minimal(64)).unwrap();
    let mut r = rng(62);
    let f = SpectralFn::random(m.clone(), m.len(), false, &mut r).unwrap();
    for omega in [2.0, 4.0, 8.0, 16.0, 32.0] {
        let smooth = approx_error(&f, omega, 2.0);
        assert!(best_l2_error(&f, omega) <= smooth + 1e-12);
        assert!(smooth <= best_l2_error(&f, omega / 2.0) + 1e-12);
    }
    let low = SpectralFn::basis(m.clone(), frequency_to_index(3)).unwrap();
    assert_eq!(best_l2_error(&low, 4.0), 0.0);
    assert!(approx_error(&low, 8.0, 2.0) <= 1e-15);
}
