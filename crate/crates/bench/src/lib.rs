//! Fixtures shared by the benchmarks in `benches/`.

use std::sync::Arc;

use spectral_frames::cubature::calibrate;
use spectral_frames::frame::{build_parseval, level_plan};
use spectral_frames::numeric::rng;
use spectral_frames::{make_filter_bank, sphere_model, CubatureRule, Frame, SpectralFn, SpectralModel, SphereConfig};

pub fn sphere(max_degree: usize) -> Arc<SpectralModel> {
    sphere_model(&SphereConfig::minimal(max_degree)).expect("valid degree")
}

/// Sphere with a grid fine enough for lattices at cubature radii.
pub fn fine_sphere(max_degree: usize) -> Arc<SpectralModel> {
    sphere_model(&SphereConfig {
        max_degree,
        gauss_latitudes: 4 * max_degree,
        longitudes: 8 * max_degree,
    })
    .expect("valid degree")
}

pub fn random_fn(model: &Arc<SpectralModel>, band: f64, seed: u64) -> SpectralFn {
    SpectralFn::random(model.clone(), model.band_len(band), true, &mut rng(seed)).expect("in range")
}

/// Parseval frame on `band` with one calibrated rule per distinct level band.
pub fn parseval_frame(model: &Arc<SpectralModel>, levels: usize, band: f64) -> Frame {
    let bank = make_filter_bank(levels).expect("levels");
    let plan = level_plan(model, &bank, band);
    let mut rules: Vec<(f64, CubatureRule)> = Vec::new();
    for lp in &plan {
        if !rules.iter().any(|(b, _)| *b == lp.rule_band) {
            let c = calibrate(model, lp.rule_band, 1, (1.0, 8.0), 6, 0.75).expect("calibrates");
            rules.push((lp.rule_band, c.rule));
        }
    }
    let refs: Vec<&CubatureRule> = plan
        .iter()
        .map(|lp| &rules.iter().find(|(b, _)| *b == lp.rule_band).expect("cached").1)
        .collect();
    build_parseval(model, &bank, &refs, band).expect("frame")
}
