use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{bail, Result};
use rand::Rng;
use serde_json::json;

use spectral_frames::besov::{besov_norm, equivalence_report, BesovContext, BesovMode, BesovParams};
use spectral_frames::cubature::{calibrate, CubatureRule};
use spectral_frames::filters::{level_f, make_filter_bank, FilterBank};
use spectral_frames::frame::{
    build_almost_parseval, build_parseval, build_pw_sampling_frame, dual_frame, frame_bounds, level_plan,
    product_bandwidth, Frame, Functional, SamplingParams,
};
use spectral_frames::kernel::{kernel_decay_profile, kernel_lp_norm, littlewood_paley_residual};
use spectral_frames::lattice::{build_cells, build_lattice, diagnose, lattice_csv, CellCover, Lattice};
use spectral_frames::line::{
    default_half_window, line_model, oracle_integral, pw1d_frame_cubature, pw1d_frame_irregular, pw1d_frame_shannon,
    LineConfig, SamplingSet1D,
};
use spectral_frames::numeric::{regression_slope, rng};
use spectral_frames::spectral::{apply_multiplier, synthesize, ManifoldKind, ModelConfig, Point, SpectralFn, SpectralModel};
use spectral_frames::{CircleConfig, Complex64, SphereConfig};

use crate::config::{config_error, RunConfig};
use crate::report::{Certificate, Output};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FrameChoice {
    Sampling,
    Almost,
    Parseval,
}

/// A configuration bound to one circle or sphere model.
pub struct Session<'a> {
    pub cfg: &'a RunConfig,
    pub model_cfg: ModelConfig,
    pub model: Arc<SpectralModel>,
    pub bank: FilterBank,
    parseval: Option<Frame>,
}

impl<'a> Session<'a> {
    pub fn new(cfg: &'a RunConfig, model_cfg: ModelConfig) -> Result<Self> {
        if matches!(model_cfg, ModelConfig::Line(_)) {
            bail!(config_error("this command needs a circle or sphere model"));
        }
        let model = SpectralModel::from_config(&model_cfg)?;
        if model.lambda_max() < cfg.band {
            bail!(config_error(format!(
                "band {} exceeds the model's largest eigenvalue {:.4}",
                cfg.band,
                model.lambda_max()
            )));
        }
        let bank = make_filter_bank(cfg.levels)?;
        Ok(Self {
            cfg,
            model_cfg,
            model,
            bank,
            parseval: None,
        })
    }

    fn seed(&self, offset: u64) -> u64 {
        self.cfg.seed.wrapping_add(offset)
    }

    /// Same manifold with `max_degree` and the minimal quadrature.
    fn sibling(&self, max_degree: usize) -> Result<Arc<SpectralModel>> {
        let c = match self.model_cfg {
            ModelConfig::Circle(_) => ModelConfig::Circle(CircleConfig::minimal(max_degree)),
            _ => ModelConfig::Sphere2(SphereConfig::minimal(max_degree)),
        };
        Ok(SpectralModel::from_config(&c)?)
    }

    fn random_fn(&self, model: &Arc<SpectralModel>, n: usize, r: &mut impl Rng) -> Result<SpectralFn> {
        Ok(SpectralFn::random(model.clone(), n, model.basis_is_real(), r)?)
    }

    fn calibrated(&self, band: f64, seed: u64) -> Result<spectral_frames::Calibration> {
        let l = &self.cfg.lattice;
        Ok(calibrate(
            &self.model,
            band,
            seed,
            (l.bracket[0], l.bracket[1]),
            l.steps,
            l.safety,
        )?)
    }

    /// Parseval frame on the configured band, built once per session.
    fn parseval(&mut self) -> Result<&Frame> {
        if self.parseval.is_none() {
            let plan = level_plan(&self.model, &self.bank, self.cfg.band);
            let mut rules: Vec<(f64, CubatureRule)> = Vec::new();
            let mut idx = Vec::new();
            for lp in &plan {
                if let Some(i) = rules.iter().position(|(b, _)| *b == lp.rule_band) {
                    idx.push(i);
                    continue;
                }
                let cal = self.calibrated(lp.rule_band, self.seed(lp.level as u64))?;
                idx.push(rules.len());
                rules.push((lp.rule_band, cal.rule));
            }
            let refs: Vec<&CubatureRule> = idx.iter().map(|&i| &rules[i].1).collect();
            self.parseval = Some(build_parseval(&self.model, &self.bank, &refs, self.cfg.band)?);
        }
        Ok(self.parseval.as_ref().expect("just built"))
    }

    fn sampling_params(&self) -> SamplingParams {
        SamplingParams {
            delta: self.cfg.sampling.delta,
            rate_constant: self.cfg.sampling.rate_constant,
            functional: self.cfg.sampling.functional,
        }
    }

    fn build_frame(&mut self, kind: FrameChoice) -> Result<Frame> {
        let band = self.cfg.band;
        let scale = self.cfg.sampling.radius_scale;
        match kind {
            FrameChoice::Sampling => {
                let lat = build_lattice(&self.model, scale / band, self.seed(0))?;
                let cells = build_cells(&self.model, &lat);
                Ok(build_pw_sampling_frame(&self.model, band, &lat, &cells, &self.sampling_params())?)
            }
            FrameChoice::Almost => {
                let plan = level_plan(&self.model, &self.bank, band);
                let mut lattices = Vec::with_capacity(plan.len());
                for lp in &plan {
                    let top = f64::powi(2.0, lp.level as i32 + 1).min(band);
                    let lat = build_lattice(&self.model, scale / top, self.seed(lp.level as u64))?;
                    let cells = build_cells(&self.model, &lat);
                    lattices.push((lat, cells));
                }
                Ok(build_almost_parseval(
                    &self.model,
                    &self.bank,
                    &lattices,
                    band,
                    &self.sampling_params(),
                )?)
            }
            FrameChoice::Parseval => Ok(self.parseval()?.clone()),
        }
    }

    /// Lattices at `r_j = 2^(1-j)` for the sampling Besov norm.
    fn besov_lattices(&self) -> Result<Vec<(Lattice, CellCover)>> {
        (0..=self.cfg.levels)
            .map(|j| {
                let lat = build_lattice(&self.model, f64::powi(2.0, 1 - j as i32), self.seed(0))?;
                let cells = build_cells(&self.model, &lat);
                Ok((lat, cells))
            })
            .collect()
    }

    /// Functions with random coefficients decaying like `(degree + 1)^-s`.
    fn besov_family(&self) -> Result<Vec<SpectralFn>> {
        let band = self.cfg.band;
        let mut r = rng(self.seed(11));
        let modes = self.model.modes();
        (0..self.cfg.besov.family)
            .map(|i| {
                let b = [band / 4.0, band / 2.0, band][i % 3];
                let decay = 0.5 + 0.25 * (i % 8) as f64;
                let c: Vec<Complex64> = (0..self.model.band_len(b))
                    .map(|l| {
                        let z: f64 = r.gen_range(-1.0..1.0);
                        Complex64::new(z * (modes[l].degree as f64 + 1.0).powf(-decay), 0.0)
                    })
                    .collect();
                Ok(SpectralFn::new(self.model.clone(), c)?)
            })
            .collect()
    }

    fn besov_params(&self) -> BesovParams {
        let b = &self.cfg.besov;
        BesovParams {
            alpha: b.alpha,
            p: b.p,
            q: b.q,
            levels: self.cfg.levels,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn coords(p: &Point) -> Vec<f64> {
    match p {
        Point::Circle(t) | Point::Line(t) => vec![*t],
        Point::Sphere(v) => v.to_vec(),
    }
}

fn north(model: &SpectralModel) -> Point {
    match model.kind() {
        ManifoldKind::Sphere2 => Point::Sphere([0.0, 0.0, 1.0]),
        ManifoldKind::Circle => Point::Circle(0.0),
        ManifoldKind::Line => Point::Line(0.0),
    }
}

pub fn filters_dump(cfg: &RunConfig, levels: usize, points: usize, out: &mut Output) -> Result<()> {
    if points < 2 {
        bail!(config_error("--points must be at least 2"));
    }
    let bank = make_filter_bank(levels).map_err(|e| config_error(e.to_string()))?;
    let top = f64::powi(2.0, levels as i32 - 1);
    let mut csv = String::from("lambda");
    for j in 0..=levels {
        let _ = write!(csv, ",G_{j}");
    }
    csv.push_str(",sum\n");
    let mut worst = 0.0f64;
    for i in 0..points {
        let l = top * i as f64 / (points - 1) as f64;
        let g: Vec<f64> = (0..=levels).map(|j| bank.big_g(j, l)).collect();
        let s: f64 = g.iter().sum();
        worst = worst.max((s - 1.0).abs());
        let _ = write!(csv, "{l}");
        for v in &g {
            let _ = write!(csv, ",{v}");
        }
        let _ = writeln!(csv, ",{s}");
    }
    out.file("filters.csv", csv);
    out.data("filters", json!({ "levels": levels, "points": points, "lambda_max": top }));
    out.cert(Certificate::at_most("partition_of_unity", worst, cfg.tol("partition_of_unity")));
    Ok(())
}

/// Largest number of `r/2`-separated points within `r` of a point.
fn multiplicity_bound(kind: ManifoldKind, r: f64) -> usize {
    match kind {
        ManifoldKind::Sphere2 => ((1.0 - (1.25 * r).cos()) / (1.0 - (0.25 * r).cos())).floor() as usize,
        _ => 5,
    }
}

pub fn lattice_build(s: &Session, radius: Option<f64>, out: &mut Output) -> Result<()> {
    let r = radius.unwrap_or(s.cfg.lattice.radius);
    if !(r > 0.0) {
        bail!(config_error(format!("radius {r} must be positive")));
    }
    let lat = build_lattice(&s.model, r, s.seed(0))?;
    let cells = build_cells(&s.model, &lat);
    let d = diagnose(&s.model, &lat, &cells);
    out.file("lattice.csv", lattice_csv(&lat, &cells));
    out.data("lattice", &d);
    if !lat.degenerate {
        out.cert(Certificate::at_most("lattice_covering", d.covering_radius, r / 2.0 * (1.0 + 1e-9)));
        out.cert(Certificate::at_least("lattice_separation", d.min_separation, r / 2.0 * (1.0 - 1e-9)));
    }
    out.cert(Certificate::at_most(
        "lattice_measure_sum",
        rel(d.measure_sum, s.model.volume()),
        s.cfg.tol("lattice_measure_sum"),
    ));
    out.cert(Certificate::at_most(
        "lattice_multiplicity",
        d.multiplicity as f64,
        multiplicity_bound(s.model.kind(), r).max(1) as f64,
    ));
    Ok(())
}

pub fn cubature_solve(s: &Session, band: Option<f64>, out: &mut Output) -> Result<()> {
    let band = band.unwrap_or(s.cfg.band);
    if !(band > 0.0) {
        bail!(config_error(format!("band {band} must be positive")));
    }
    let cal = s.calibrated(band, s.seed(0))?;
    let rule = &cal.rule;
    let mut csv = String::new();
    let dim = rule.points.first().map_or(1, |p| coords(p).len());
    let head: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let _ = writeln!(csv, "{},weight", head.join(","));
    csv.push_str(&rule.to_csv());
    out.file("cubature.csv", csv);
    out.data(
        "cubature",
        json!({
            "band": band,
            "calibrated_a": cal.calibrated_a,
            "used_a": cal.used_a,
            "points": rule.len(),
            "rank": rule.rank,
            "condition": rule.condition,
            "weight_sum": rule.sum(),
        }),
    );
    out.cert(Certificate::at_least("min_weight", rule.min_weight, f64::MIN_POSITIVE));
    out.cert(Certificate::at_most("moment_residual", rule.residual, s.cfg.tol("moment_residual")));
    out.cert(Certificate::at_most("weight_ratio", rule.weight_ratio(), s.cfg.tol("weight_ratio")));
    Ok(())
}

fn atoms_csv(frame: &Frame) -> String {
    let mut csv = String::new();
    let dim = frame.atoms().first().map_or(1, |a| coords(&a.center).len());
    let head: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let _ = writeln!(csv, "level,index,{},coefficients,norm", head.join(","));
    for a in frame.atoms() {
        let c: Vec<String> = coords(&a.center).iter().map(|v| format!("{v:.17e}")).collect();
        let n = a.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let _ = writeln!(csv, "{},{},{},{},{n:.17e}", a.level, a.index, c.join(","), a.coeffs.len());
    }
    csv
}

fn bounds_of(frame: &Frame) -> Result<(f64, f64)> {
    match frame.bounds {
        Some(b) => Ok(b),
        None => Ok(frame_bounds(frame, frame.band())?),
    }
}

fn frame_certificates(s: &Session, kind: FrameChoice, frame: &Frame, out: &mut Output) -> Result<()> {
    let (a, b) = bounds_of(frame)?;
    let cell_avg = s.cfg.sampling.functional == Functional::CellAverage;
    match kind {
        FrameChoice::Sampling | FrameChoice::Almost => {
            if kind == FrameChoice::Sampling {
                out.cert(Certificate::at_least("sampling_lower_bound", a, s.cfg.tol("sampling_lower_bound")));
            } else {
                out.cert(Certificate::at_least("almost_lower_bound", a, 1.0 - s.cfg.sampling.delta));
            }
            if cell_avg {
                out.cert(Certificate::at_most("upper_bound", b, 1.0 + 1e-10));
            }
        }
        FrameChoice::Parseval => {
            let mut r = rng(s.seed(1));
            let n = s.model.band_len(s.cfg.band);
            let (mut defect, mut recon) = (0.0f64, 0.0f64);
            for _ in 0..s.cfg.trials {
                let f = s.random_fn(&s.model, n, &mut r)?;
                defect = defect.max(rel(frame.energy(&f), f.norm_sqr()));
                recon = recon.max(frame.apply_operator(&f).axpy(-1.0, &f).norm() / f.norm());
            }
            out.cert(Certificate::at_most("parseval_defect", defect, s.cfg.tol("parseval_defect")));
            out.cert(Certificate::at_most("reconstruction", recon, s.cfg.tol("reconstruction")));
        }
    }
    Ok(())
}

pub fn frame_build(s: &mut Session, kind: FrameChoice, out: &mut Output) -> Result<()> {
    let frame = s.build_frame(kind)?;
    out.file("atoms.csv", atoms_csv(&frame));
    let mut text = serde_json::to_string_pretty(&frame.manifest())?;
    text.push('\n');
    out.file("frame.json", text);
    out.data("frame", frame.manifest());
    frame_certificates(s, kind, &frame, out)
}

pub fn frame_validate(s: &mut Session, kind: FrameChoice, out: &mut Output) -> Result<()> {
    let frame = s.build_frame(kind)?;
    frame_certificates(s, kind, &frame, out)?;
    let dual = dual_frame(&frame, 1e-12)?;
    let mut r = rng(s.seed(2));
    let n = s.model.band_len(s.cfg.band);
    let mut err = 0.0f64;
    for _ in 0..s.cfg.trials {
        let f = s.random_fn(&s.model, n, &mut r)?;
        err = err.max(frame.reconstruct_with(&dual, &f).axpy(-1.0, &f).norm() / f.norm());
    }
    out.cert(Certificate::at_most("dual_reconstruction", err, s.cfg.tol("dual_reconstruction")));

    // products of band/4 and band/2 functions stay inside the additive band
    let f = s.random_fn(&s.model, s.model.band_len(s.cfg.band / 4.0), &mut r)?;
    let g = s.random_fn(&s.model, s.model.band_len(s.cfg.band / 2.0), &mut r)?;
    let rep = product_bandwidth(&f, &g, s.model.lambda_max())?;
    out.cert(Certificate::at_most(
        "product_leakage",
        rep.entries[0].relative_mass,
        s.cfg.tol("product_leakage"),
    ));
    out.data(
        "validate",
        json!({
            "kind": format!("{kind:?}").to_lowercase(),
            "atoms": frame.len(),
            "bounds": bounds_of(&frame)?,
            "dual_bounds": dual.bounds,
            "product": rep,
        }),
    );
    Ok(())
}

fn kernel_ts(s: &Session) -> Vec<f64> {
    let [k0, k1] = s.cfg.kernel.t_exponents;
    (k0..=k1).map(|k| f64::powi(2.0, -(k as i32))).collect()
}

pub fn kernel_decay(s: &Session, out: &mut Output) -> Result<()> {
    let model = s.sibling(s.cfg.kernel.max_degree)?;
    let f1 = |l: f64| level_f(1, l);
    let x = north(&model);
    let prof = kernel_decay_profile(&model, &f1, &kernel_ts(s), &x, s.cfg.kernel.order)?;
    let mut csv = String::from("t,peak,envelope\n");
    // plot data: largest |K| per distance bin
    let bins = 200;
    let width = model.diameter() / bins as f64;
    let mut samples = String::from("t,distance,abs_kernel\n");
    for p in &prof {
        let _ = writeln!(csv, "{},{},{}", p.t, p.peak, p.envelope);
        let mut top = vec![f64::NAN; bins];
        for (d, k) in &p.samples {
            let b = ((d / width) as usize).min(bins - 1);
            if !(top[b] >= *k) {
                top[b] = *k;
            }
        }
        for (b, k) in top.iter().enumerate().filter(|(_, k)| !k.is_nan()) {
            let _ = writeln!(samples, "{},{},{}", p.t, (b as f64 + 0.5) * width, k);
        }
    }
    out.file("kernel_decay.csv", csv);
    out.file("kernel_samples.csv", samples);
    let env: Vec<f64> = prof.iter().map(|p| p.envelope).collect();
    let mx = env.iter().copied().fold(0.0, f64::max);
    let mn = env.iter().copied().fold(f64::INFINITY, f64::min);
    out.data("kernel_decay", &prof);
    out.cert(Certificate::at_most(
        "kernel_envelope_spread",
        mx / mn,
        s.cfg.tol("kernel_envelope_spread"),
    ));
    Ok(())
}

pub fn kernel_lpnorm(s: &Session, out: &mut Output) -> Result<()> {
    let model = s.sibling(s.cfg.kernel.max_degree)?;
    let f1 = |l: f64| level_f(1, l);
    let x = north(&model);
    let ts = kernel_ts(s);
    let lx: Vec<f64> = ts.iter().map(|t| t.log2()).collect();
    let n = model.dimension() as f64;
    let ps = [1.0, 2.0, f64::INFINITY];
    let mut table = Vec::new();
    for p in ps {
        let v: Vec<f64> = ts
            .iter()
            .map(|&t| kernel_lp_norm(&model, &f1, t, p, &x))
            .collect::<spectral_frames::Result<_>>()?;
        table.push(v);
    }
    let mut csv = String::from("t,p1,p2,pinf\n");
    for (i, t) in ts.iter().enumerate() {
        let _ = writeln!(csv, "{t},{},{},{}", table[0][i], table[1][i], table[2][i]);
    }
    out.file("kernel_lpnorm.csv", csv);
    let mut slopes = Vec::new();
    for (p, v) in ps.iter().zip(&table) {
        let target = -n * (1.0 - 1.0 / p);
        let ly: Vec<f64> = v.iter().map(|x| x.log2()).collect();
        let sl = regression_slope(&lx, &ly);
        let tag = if p.is_infinite() { "inf".to_string() } else { format!("{p}") };
        slopes.push(json!({ "p": tag, "slope": sl, "target": target }));
        out.cert(Certificate::at_most(
            format!("kernel_slope_p{tag}"),
            (sl - target).abs() / target.abs().max(1.0),
            s.cfg.tol("kernel_slope"),
        ));
    }
    out.data("kernel_lpnorm", slopes);
    Ok(())
}

pub fn lp_check(s: &Session, out: &mut Output) -> Result<()> {
    let lp = &s.cfg.lp;
    let model = s.sibling(lp.max_degree)?;
    if model.lambda_max() < lp.band {
        bail!(config_error(format!("lp.band {} exceeds the lp model", lp.band)));
    }
    let bank = make_filter_bank(lp.levels)?;
    let mut r = rng(s.seed(3));
    let limited = s.random_fn(&model, model.band_len(lp.band), &mut r)?;
    let limited = limited.scaled(1.0 / limited.norm());
    let noise = s.random_fn(&model, model.len(), &mut r)?;
    let smooth = apply_multiplier(|l: f64| (-0.002 * l * l).exp(), 1.0, &noise);
    let smooth = smooth.scaled(1.0 / smooth.norm());
    let (lg, sg) = (limited.to_grid(), smooth.to_grid());
    let js: Vec<usize> = (2.min(lp.levels)..=lp.levels).collect();
    let mut rows = vec![String::new(); js.len()];
    let mut csv = String::from("J");
    for (name, p) in [("p1", 1.0), ("p2", 2.0), ("pinf", f64::INFINITY)] {
        let _ = write!(csv, ",{name}");
        let res = littlewood_paley_residual(&bank, &lg, p, lp.levels)?;
        out.cert(Certificate::at_most(format!("lp_residual_{name}"), res, s.cfg.tol("lp_residual")));
        let seq: Vec<f64> = js
            .iter()
            .map(|&j| littlewood_paley_residual(&bank, &sg, p, j))
            .collect::<spectral_frames::Result<_>>()?;
        for (row, v) in rows.iter_mut().zip(&seq) {
            let _ = write!(row, ",{v}");
        }
        let worst = seq.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        out.cert(Certificate::at_most(format!("lp_decrease_{name}"), worst, 1.0 - f64::EPSILON));
    }
    csv.push('\n');
    for (j, row) in js.iter().zip(rows) {
        let _ = writeln!(csv, "{j}{row}");
    }
    out.file("lp.csv", csv);
    Ok(())
}

fn norms_csv(modes: &[BesovMode], norms: &[Vec<f64>]) -> String {
    let mut csv = String::from("member");
    for m in modes {
        let _ = write!(csv, ",{}", serde_json::to_value(m).expect("mode").as_str().unwrap_or(""));
    }
    csv.push('\n');
    for (i, row) in norms.iter().enumerate() {
        let _ = write!(csv, "{i}");
        for v in row {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    csv
}

pub fn besov_compute(s: &Session, out: &mut Output) -> Result<()> {
    let params = s.besov_params();
    params.validate().map_err(|e| config_error(e.to_string()))?;
    let lattices = s.besov_lattices()?;
    let ctx = BesovContext {
        frame: None,
        lattices: Some(&lattices),
    };
    let mut modes = vec![BesovMode::Approx, BesovMode::LpBlock, BesovMode::Sampling];
    if s.model.kind() == ManifoldKind::Sphere2 && params.p == 2.0 && params.q == 2.0 {
        modes.push(BesovMode::SphereL2);
    }
    let family = s.besov_family()?;
    let mut norms = Vec::new();
    let mut defect = 0.0f64;
    for f in &family {
        let mut row = Vec::new();
        for m in &modes {
            let a = besov_norm(&s.bank, &ctx, f, &params, *m)?;
            let b = besov_norm(&s.bank, &ctx, &f.scaled(-3.0), &params, *m)?;
            defect = defect.max(rel(b, 3.0 * a));
            row.push(a);
        }
        norms.push(row);
    }
    out.file("besov.csv", norms_csv(&modes, &norms));
    out.data("besov", json!({ "params": params, "modes": modes, "norms": norms }));
    out.cert(Certificate::at_most("besov_homogeneity", defect, s.cfg.tol("besov_homogeneity")));
    Ok(())
}

pub fn besov_equiv(s: &mut Session, out: &mut Output) -> Result<()> {
    let params = s.besov_params();
    params.validate().map_err(|e| config_error(e.to_string()))?;
    let lattices = s.besov_lattices()?;
    let family = s.besov_family()?;
    s.parseval()?;
    let ctx = BesovContext {
        frame: s.parseval.as_ref(),
        lattices: Some(&lattices),
    };
    let rep = equivalence_report(&s.bank, &ctx, &family, &params, 2.0)?;
    out.file("besov_equiv.csv", norms_csv(&rep.modes, &rep.norms));
    out.data(
        "besov_equiv",
        json!({ "params": params, "modes": rep.modes, "pairs": rep.pairs, "max_spread": rep.max_spread }),
    );
    out.cert(Certificate::at_most("besov_spread", rep.max_spread, s.cfg.tol("besov_spread")));
    out.cert(Certificate::at_most(
        "besov_homogeneity",
        rep.homogeneity_defect,
        s.cfg.tol("besov_homogeneity"),
    ));
    Ok(())
}

pub fn pw1d_irregular(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let l = &cfg.line;
    if !(l.eps < 1.0) || l.omega <= 1.0 {
        bail!(config_error("line.eps must lie in (0, 1) and line.omega exceed 1"));
    }
    let t = default_half_window(l.omega);
    let model = line_model(&LineConfig::for_bandwidth(l.omega, l.omega))?;
    let rho = l.eps / (3.0 * l.omega);
    let mut csv = String::from("seed,lower,upper\n");
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut interval = [0.0; 2];
    for i in 0..l.jitter_seeds as u64 {
        let seed = cfg.seed.wrapping_add(i);
        let sset = SamplingSet1D::jittered(rho, l.eps, t, seed)?;
        let f = pw1d_frame_irregular(&model, l.omega, l.eps, &sset)?;
        let [a, b] = f.report.bounds;
        interval = f.report.theory_interval;
        lo = lo.min(a);
        hi = hi.max(b);
        let _ = writeln!(csv, "{seed},{a},{b}");
    }
    out.file("pw1d_irregular.csv", csv);
    out.data(
        "pw1d_irregular",
        json!({ "omega": l.omega, "eps": l.eps, "rho": rho, "half_window": t, "theory_interval": interval }),
    );
    out.cert(Certificate::at_least("pw1d_irregular_lower", lo, interval[0]));
    out.cert(Certificate::at_most("pw1d_irregular_upper", hi, interval[1]));
    Ok(())
}

pub fn pw1d_shannon(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let omega = cfg.line.omega;
    let levels = omega.log2().round() as i64 - 1;
    if levels < 0 || f64::powi(2.0, levels as i32 + 1) != omega {
        bail!(config_error(format!("line.omega = {omega} must be a power of two, at least 2")));
    }
    let model = line_model(&LineConfig::for_bandwidth(omega, omega))?;
    let bank = make_filter_bank(levels as usize)?;
    let f = pw1d_frame_shannon(&model, &bank, cfg.line.leakage_tol)?;
    let [a, b] = f.report.bounds;
    out.file("atoms.csv", atoms_csv(&f.frame));
    out.data("pw1d_shannon", json!({ "omega": omega, "frame": f.frame.manifest(), "report": f.report }));
    out.cert(Certificate::at_most(
        "pw1d_parseval",
        (a - 1.0).abs().max((b - 1.0).abs()),
        cfg.tol("pw1d_parseval"),
    ));
    Ok(())
}

pub fn pw1d_cubature(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let l = &cfg.line;
    let omega = l.cubature_omega;
    if !(l.gamma < 1.0) {
        bail!(config_error("line.gamma must lie in (0, 1)"));
    }
    let t = default_half_window(omega);
    let model = line_model(&LineConfig::for_bandwidth(omega, 2.0 * omega))?;
    let bank = make_filter_bank(cfg.levels)?;
    let rho = 0.95 * l.gamma / (6.0 * omega);
    let n = model.band_len_strict(omega);
    let (mut min_w, mut ratio, mut resid, mut defect) = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
    let mut rows = String::from("seed,points,min_weight,weight_ratio,lower,upper\n");
    for i in 0..l.jitter_seeds as u64 {
        let seed = cfg.seed.wrapping_add(i);
        let sset = SamplingSet1D::random_gaps(0.75 * rho, rho, t, seed)?;
        let (rule, frame) = pw1d_frame_cubature(&model, &bank, omega, l.gamma, &sset)?;
        min_w = min_w.min(rule.min_weight);
        ratio = ratio.max(rule.weight_ratio());
        let [a, b] = frame.report.bounds;
        defect = defect.max((a - 1.0).abs()).max((b - 1.0).abs());
        let _ = writeln!(rows, "{seed},{},{},{},{a},{b}", rule.len(), rule.min_weight, rule.weight_ratio());
        if i == 0 {
            let mut csv = String::from("x0,weight\n");
            csv.push_str(&rule.to_csv());
            out.file("pw1d_cubature_rule.csv", csv);
        }
        let mut r = rng(seed.wrapping_add(100));
        for _ in 0..cfg.trials {
            let f = SpectralFn::random(model.clone(), n, false, &mut r)?;
            let vals = synthesize(&f, &rule.points)?;
            let sum: Complex64 = vals.iter().zip(&rule.weights).map(|(v, w)| v * w).sum();
            resid = resid.max((sum - oracle_integral(&f, omega)?).norm());
        }
    }
    out.file("pw1d_cubature.csv", rows);
    out.data("pw1d_cubature", json!({ "omega": omega, "gamma": l.gamma, "rho": rho, "half_window": t }));
    out.cert(Certificate::at_least("pw1d_min_weight", min_w, f64::MIN_POSITIVE));
    out.cert(Certificate::at_most("pw1d_weight_ratio", ratio, cfg.tol("pw1d_weight_ratio")));
    out.cert(Certificate::at_most("pw1d_integration", resid, cfg.tol("pw1d_integration")));
    out.cert(Certificate::at_most("pw1d_parseval", defect, cfg.tol("pw1d_parseval")));
    Ok(())
}

fn model_suite(cfg: &RunConfig, tag: &str, mc: ModelConfig) -> Result<Output> {
    let mut out = Output::default();
    out.set_prefix(tag);
    let mut s = Session::new(cfg, mc)?;
    lattice_build(&s, None, &mut out)?;
    cubature_solve(&s, None, &mut out)?;
    frame_build(&mut s, FrameChoice::Parseval, &mut out)?;
    frame_validate(&mut s, FrameChoice::Almost, &mut out)?;
    kernel_decay(&s, &mut out)?;
    kernel_lpnorm(&s, &mut out)?;
    lp_check(&s, &mut out)?;
    besov_equiv(&mut s, &mut out)?;
    Ok(out)
}

fn line_suite(cfg: &RunConfig) -> Result<Output> {
    let mut out = Output::default();
    out.set_prefix("line");
    pw1d_irregular(cfg, &mut out)?;
    pw1d_shannon(cfg, &mut out)?;
    pw1d_cubature(cfg, &mut out)?;
    Ok(out)
}

type Job<'a> = Box<dyn FnOnce() -> Result<Output> + Send + 'a>;

/// Every check on each configured model. Up to `threads` model suites run at
/// once; results are merged in a fixed order.
pub fn suite_all(cfg: &RunConfig, threads: usize, out: &mut Output) -> Result<()> {
    filters_dump(cfg, cfg.levels, 2001, out)?;
    let mut jobs: Vec<Job> = Vec::new();
    if let Some(c) = &cfg.suite.circle {
        jobs.push(Box::new(move || model_suite(cfg, "circle", ModelConfig::Circle(c.clone()))));
    }
    if let Some(s) = &cfg.suite.sphere {
        jobs.push(Box::new(move || model_suite(cfg, "sphere", ModelConfig::Sphere2(s.clone()))));
    }
    if cfg.suite.line {
        jobs.push(Box::new(move || line_suite(cfg)));
    }
    let mut results = Vec::new();
    let mut jobs = jobs.into_iter().peekable();
    while jobs.peek().is_some() {
        let batch: Vec<Job> = jobs.by_ref().take(threads.max(1)).collect();
        let done: Vec<Result<Output>> = std::thread::scope(|sc| {
            let handles: Vec<_> = batch.into_iter().map(|j| sc.spawn(j)).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("suite worker panicked"))))
                .collect()
        });
        results.extend(done);
    }
    for r in results {
        out.merge(r?);
    }
    Ok(())
}
