//! Discretised Besov norms `B^alpha_{p,q}` by approximation, dyadic blocks,
//! frame coefficients and lattice samples, plus the spherical `L_2` weight
//! norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{g, FilterBank};
use crate::frame::{Frame, FrameKind};
use crate::lattice::{CellCover, Lattice};
use crate::numeric::{lp_seq_norm, pairwise_sum_by};
use crate::spectral::{apply_multiplier, synthesize, ManifoldKind, SpectralFn};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub levels: usize,
}

impl BesovParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha = {} must be positive", self.alpha)));
        }
        if !(self.p >= 1.0) {
            return Err(Error::Config(format!("p = {} must be at least 1", self.p)));
        }
        if !(self.q > 0.0) {
            return Err(Error::Config(format!("q = {} must be positive", self.q)));
        }
        if self.levels < 1 {
            return Err(Error::Config("need at least one level".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BesovMode {
    Approx,
    LpBlock,
    Frame,
    Sampling,
    SphereL2,
}

impl BesovMode {
    pub const ALL: [BesovMode; 5] = [
        BesovMode::Approx,
        BesovMode::LpBlock,
        BesovMode::Frame,
        BesovMode::Sampling,
        BesovMode::SphereL2,
    ];
}

/// Optional structures some modes need.
#[derive(Clone, Copy, Default)]
pub struct BesovContext<'a> {
    pub frame: Option<&'a Frame>,
    /// Level `j` lattice at index `j`.
    pub lattices: Option<&'a [(Lattice, CellCover)]>,
}

/// `l_q` norm of the level terms; `q = inf` takes the sup.
fn lq(terms: &[f64], q: f64) -> f64 {
    lp_seq_norm(terms.iter().copied(), q)
}

/// `||f - g(2 sqrt(L) / omega) f||_p`, the band-`omega` approximation error
/// through the smoothed projector.
pub fn approx_error(f: &SpectralFn, omega: f64, p: f64) -> f64 {
    let lo = apply_multiplier(|l: f64| 1.0 - g(2.0 * l / omega), 1.0, f);
    lo.to_grid().lp_norm(p)
}

/// `||(I - P_omega) f||_2`, the exact best `L_2` approximation error.
pub fn best_l2_error(f: &SpectralFn, omega: f64) -> f64 {
    let n = f.model().band_len(omega);
    let c = f.coeffs();
    if c.len() <= n {
        return 0.0;
    }
    pairwise_sum_by(c.len() - n, &|i| c[n + i].norm_sqr()).sqrt()
}

pub fn besov_norm(
    bank: &FilterBank,
    ctx: &BesovContext<'_>,
    f: &SpectralFn,
    params: &BesovParams,
    mode: BesovMode,
) -> Result<f64> {
    params.validate()?;
    let model = f.model();
    let (alpha, p, q, levels) = (params.alpha, params.p, params.q, params.levels);
    let n = model.dimension() as f64;
    let two = |e: f64| f64::powf(2.0, e);
    match mode {
        BesovMode::Approx => {
            let terms: Vec<f64> = (0..=levels)
                .map(|j| two(alpha * j as f64) * approx_error(f, two(j as f64), p))
                .collect();
            Ok(f.to_grid().lp_norm(p) + lq(&terms, q))
        }
        BesovMode::LpBlock => {
            let terms: Vec<f64> = (0..=levels)
                .map(|j| {
                    let b = apply_multiplier(|l: f64| bank.big_g(j, l), 1.0, f);
                    two(alpha * j as f64) * b.to_grid().lp_norm(p)
                })
                .collect();
            Ok(f.to_grid().lp_norm(p) + lq(&terms, q))
        }
        BesovMode::Frame => {
            let frame = ctx
                .frame
                .ok_or_else(|| Error::Precondition("frame mode needs a frame".into()))?;
            if frame.kind() != FrameKind::Parseval {
                return Err(Error::Precondition("frame mode needs a Parseval frame".into()));
            }
            let coeffs = frame.analysis(f);
            let mut by_level: Vec<Vec<f64>> = vec![Vec::new(); levels + 1];
            for (a, c) in frame.atoms().iter().zip(&coeffs) {
                if a.level <= levels {
                    by_level[a.level].push(c.norm());
                }
            }
            let terms: Vec<f64> = by_level
                .iter()
                .enumerate()
                .map(|(j, v)| two(j as f64 * (alpha - n / p + n / 2.0)) * lp_seq_norm(v.iter().copied(), p))
                .collect();
            Ok(lq(&terms, q))
        }
        BesovMode::Sampling => {
            let lats = ctx
                .lattices
                .ok_or_else(|| Error::Precondition("sampling mode needs per-level lattices".into()))?;
            let mut terms = Vec::with_capacity(levels + 1);
            for j in 0..=levels {
                let b = apply_multiplier(|l: f64| bank.big_g(j, l), 1.0, f);
                if b.coeffs().is_empty() {
                    terms.push(0.0);
                    continue;
                }
                let (lat, _) = lats.get(j).ok_or_else(|| {
                    Error::Precondition(format!("no lattice for level {j} ({} given)", lats.len()))
                })?;
                let vals = synthesize(&b, &lat.points)?;
                terms.push(two(j as f64 * (alpha - n / p)) * lp_seq_norm(vals.iter().map(|v| v.norm()), p));
            }
            Ok(lq(&terms, q))
        }
        BesovMode::SphereL2 => {
            if model.kind() != ManifoldKind::Sphere2 {
                return Err(Error::Precondition("sphere_l2 mode needs the sphere".into()));
            }
            if p != 2.0 || q != 2.0 {
                return Err(Error::Precondition("sphere_l2 mode needs p = q = 2".into()));
            }
            let modes = model.modes();
            let c = f.coeffs();
            Ok(pairwise_sum_by(c.len(), &|l| {
                (modes[l].degree as f64 + 1.0).powf(2.0 * alpha) * c[l].norm_sqr()
            })
            .sqrt())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSpread {
    pub a: BesovMode,
    pub b: BesovMode,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub modes: Vec<BesovMode>,
    /// `norms[i][m]` for family member `i` and mode `modes[m]`.
    pub norms: Vec<Vec<f64>>,
    pub pairs: Vec<PairSpread>,
    pub max_spread: f64,
    /// Largest `|norm(c f) - |c| norm(f)| / (|c| norm(f))` over members and modes.
    pub homogeneity_defect: f64,
}

/// All applicable mode norms over the family with pairwise ratio spreads.
pub fn equivalence_report(
    bank: &FilterBank,
    ctx: &BesovContext<'_>,
    family: &[SpectralFn],
    params: &BesovParams,
    scale: f64,
) -> Result<EquivalenceReport> {
    let first = family
        .first()
        .ok_or_else(|| Error::Precondition("empty function family".into()))?;
    let model = first.model();
    let modes: Vec<BesovMode> = BesovMode::ALL
        .into_iter()
        .filter(|m| match m {
            BesovMode::Frame => ctx.frame.is_some(),
            BesovMode::Sampling => ctx.lattices.is_some(),
            BesovMode::SphereL2 => model.kind() == ManifoldKind::Sphere2 && params.p == 2.0 && params.q == 2.0,
            _ => true,
        })
        .collect();
    let mut norms = Vec::with_capacity(family.len());
    let mut defect = 0.0f64;
    for f in family {
        let row: Vec<f64> = modes
            .iter()
            .map(|m| besov_norm(bank, ctx, f, params, *m))
            .collect::<Result<_>>()?;
        let fs = f.scaled(scale);
        for (m, v) in modes.iter().zip(&row) {
            let s = besov_norm(bank, ctx, &fs, params, *m)?;
            if *v > 0.0 {
                defect = defect.max((s - scale.abs() * v).abs() / (scale.abs() * v));
            }
        }
        norms.push(row);
    }
    let mut pairs = Vec::new();
    for a in 0..modes.len() {
        for b in (a + 1)..modes.len() {
            let ratios: Vec<f64> = norms.iter().filter(|r| r[b] > 0.0).map(|r| r[a] / r[b]).collect();
            let mn = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let mx = ratios.iter().copied().fold(0.0, f64::max);
            pairs.push(PairSpread {
                a: modes[a],
                b: modes[b],
                min_ratio: mn,
                max_ratio: mx,
                spread: mx / mn,
            });
        }
    }
    let max_spread = pairs.iter().map(|p| p.spread).fold(1.0, f64::max);
    Ok(EquivalenceReport {
        modes,
        norms,
        pairs,
        max_spread,
        homogeneity_defect: defect,
    })
}
