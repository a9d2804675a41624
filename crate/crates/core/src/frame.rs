//! Frames of band-limited atoms: single-band sampling frames, multi-level
//! almost-Parseval frames and cubature-based Parseval frames.

use std::sync::Arc;

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cubature::CubatureRule;
use crate::error::{Error, Result};
use crate::filters::{level_support, FilterBank};
use crate::lattice::{CellCover, Lattice};
use crate::linalg::{hermitian_eigenvalues, outer_sum, outer_sum_real, real_symmetric_eigenvalues};
use crate::numeric::{inner, norm_sqr};
use crate::spectral::{Point, SpectralFn, SpectralModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    PwSampling,
    AlmostParseval,
    Parseval,
}

/// Point functional behind a sampling atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `sqrt(|U_k|) delta_{x_k}`.
    #[default]
    Dirac,
    /// `|U_k|^{-1/2} 1_{U_k}`; Cauchy-Schwarz caps the upper bound at 1.
    CellAverage,
}

#[derive(Clone, Debug)]
pub struct Atom {
    pub level: usize,
    pub index: usize,
    pub center: Point,
    /// Leading eigen-coefficients; the rest are zero.
    pub coeffs: Vec<Complex64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelInfo {
    pub level: usize,
    pub band_lo: f64,
    pub band_hi: f64,
    pub atoms: usize,
}

#[derive(Clone, Debug)]
pub struct Frame {
    model: Arc<SpectralModel>,
    kind: FrameKind,
    atoms: Vec<Atom>,
    levels: Vec<LevelInfo>,
    /// Band on which the frame is meant to act.
    band: f64,
    pub bounds: Option<(f64, f64)>,
}

impl Frame {
    pub fn from_atoms(
        model: Arc<SpectralModel>,
        kind: FrameKind,
        atoms: Vec<Atom>,
        levels: Vec<LevelInfo>,
        band: f64,
    ) -> Result<Self> {
        if let Some(a) = atoms.iter().find(|a| a.coeffs.len() > model.len()) {
            return Err(Error::Truncation(format!(
                "atom ({}, {}) has {} coefficients, model has {}",
                a.level,
                a.index,
                a.coeffs.len(),
                model.len()
            )));
        }
        Ok(Self {
            model,
            kind,
            atoms,
            levels,
            band,
            bounds: None,
        })
    }

    pub fn model(&self) -> &Arc<SpectralModel> {
        &self.model
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn levels(&self) -> &[LevelInfo] {
        &self.levels
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Longest coefficient vector over the atoms.
    pub fn width(&self) -> usize {
        self.atoms.iter().map(|a| a.coeffs.len()).max().unwrap_or(0)
    }

    pub fn atom_fn(&self, i: usize) -> SpectralFn {
        SpectralFn::new(self.model.clone(), self.atoms[i].coeffs.clone()).expect("checked at construction")
    }

    /// `<f, atom_i>` for every atom.
    pub fn analysis(&self, f: &SpectralFn) -> Vec<Complex64> {
        self.atoms.iter().map(|a| inner(f.coeffs(), &a.coeffs)).collect()
    }

    /// `sum_i c_i atom_i`.
    pub fn synthesis(&self, c: &[Complex64]) -> SpectralFn {
        assert_eq!(c.len(), self.atoms.len());
        let n = self.width();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (a, ci) in self.atoms.iter().zip(c) {
            for (o, v) in out.iter_mut().zip(&a.coeffs) {
                *o += ci * v;
            }
        }
        SpectralFn::new(self.model.clone(), out).expect("width within model")
    }

    /// `sum_i |<f, atom_i>|^2`.
    pub fn energy(&self, f: &SpectralFn) -> f64 {
        norm_sqr(&self.analysis(f))
    }

    /// `sum <f, atom_i> atom_i`.
    pub fn apply_operator(&self, f: &SpectralFn) -> SpectralFn {
        self.synthesis(&self.analysis(f))
    }

    /// `sum <f, self_i> other_i`; with `other` the canonical dual this
    /// reconstructs `f`.
    pub fn reconstruct_with(&self, other: &Frame, f: &SpectralFn) -> SpectralFn {
        other.synthesis(&self.analysis(f))
    }

    /// JSON manifest without the atom coefficients.
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "levels": self.levels,
            "atoms": self.atoms.len(),
            "band": self.band,
            "bounds": self.bounds.map(|(a, b)| [a, b]),
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SamplingParams {
    pub delta: f64,
    /// `c` in `r <= c delta^(1/n) / omega`; no check when absent.
    pub rate_constant: Option<f64>,
    pub functional: Functional,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            delta: 0.25,
            rate_constant: None,
            functional: Functional::Dirac,
        }
    }
}

fn check_rate(model: &SpectralModel, r: f64, omega: f64, p: &SamplingParams) -> Result<()> {
    if let Some(c) = p.rate_constant {
        let need = c * p.delta.powf(1.0 / model.dimension() as f64) / omega;
        if r > need * (1.0 + 1e-12) {
            return Err(Error::Hypothesis(format!(
                "lattice radius {r:.4e} too large, need r <= {need:.4e}"
            )));
        }
    }
    Ok(())
}

/// Coefficients of the functional at lattice point `k` on the first `n` modes,
/// before any filter.
fn functional_coeffs(
    model: &SpectralModel,
    lattice: &Lattice,
    cells: &CellCover,
    members: &[Vec<usize>],
    k: usize,
    n: usize,
    kind: Functional,
) -> Result<Vec<Complex64>> {
    match kind {
        Functional::Dirac => {
            let s = cells.measures[k].sqrt();
            Ok(model
                .eval_modes(&lattice.points[k], n)?
                .into_iter()
                .map(|u| u.conj() * s)
                .collect())
        }
        Functional::CellAverage => {
            let s = 1.0 / cells.measures[k].sqrt();
            let nodes = model.nodes();
            let w = model.weights();
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for &i in &members[k] {
                let u = model.eval_modes(&nodes[i], n)?;
                for (a, v) in acc.iter_mut().zip(u) {
                    *a += v.conj() * w[i];
                }
            }
            Ok(acc.into_iter().map(|a| a * s).collect())
        }
    }
}

fn cell_members(cells: &CellCover, k: usize) -> Vec<Vec<usize>> {
    let mut m = vec![Vec::new(); k];
    for (i, &c) in cells.assignment.iter().enumerate() {
        m[c].push(i);
    }
    m
}

/// Atoms `P_omega (sqrt|U_k| delta_{x_k})`, or the cell-average analogue.
pub fn build_pw_sampling_frame(
    model: &Arc<SpectralModel>,
    omega: f64,
    lattice: &Lattice,
    cells: &CellCover,
    params: &SamplingParams,
) -> Result<Frame> {
    check_rate(model, lattice.r, omega, params)?;
    let n = model.band_len(omega);
    let members = cell_members(cells, lattice.len());
    let mut atoms = Vec::with_capacity(lattice.len());
    for k in 0..lattice.len() {
        atoms.push(Atom {
            level: 0,
            index: k,
            center: lattice.points[k],
            coeffs: functional_coeffs(model, lattice, cells, &members, k, n, params.functional)?,
        });
    }
    let levels = vec![LevelInfo {
        level: 0,
        band_lo: 0.0,
        band_hi: omega,
        atoms: atoms.len(),
    }];
    let mut frame = Frame::from_atoms(model.clone(), FrameKind::PwSampling, atoms, levels, omega)?;
    frame.bounds = Some(frame_bounds(&frame, omega)?);
    Ok(frame)
}

/// Per-level data for a multi-level frame restricted to `band`.
#[derive(Clone, Debug, Serialize)]
pub struct LevelPlan {
    pub level: usize,
    /// Modes with `lambda <= min(2^(j+1), band)`.
    pub modes: usize,
    pub top_degree: usize,
    /// Exactness a cubature rule needs for this level: the eigenvalue of twice
    /// the top degree.
    pub rule_band: f64,
}

/// Levels of `bank` whose filter is nonzero somewhere on `band`.
pub fn level_plan(model: &SpectralModel, bank: &FilterBank, band: f64) -> Vec<LevelPlan> {
    let ev = model.eigenvalues();
    let n_band = model.band_len(band);
    let mut out = Vec::new();
    for j in 0..=bank.levels() {
        let (_, hi) = level_support(j);
        let n = model.band_len(hi.min(band)).min(n_band);
        if !(0..n).any(|l| bank.f(j, ev[l]) > 0.0) {
            continue;
        }
        let top = (0..n).rev().find(|&l| bank.f(j, ev[l]) > 0.0).unwrap_or(0);
        let top_degree = model.modes()[top].degree as usize;
        out.push(LevelPlan {
            level: j,
            modes: n,
            top_degree,
            rule_band: model.degree_eigenvalue(2 * top_degree),
        });
    }
    out
}

fn filtered_atom(
    model: &SpectralModel,
    bank: &FilterBank,
    j: usize,
    n: usize,
    point: &Point,
    scale: f64,
) -> Result<Vec<Complex64>> {
    let ev = model.eigenvalues();
    let mut c: Vec<Complex64> = model
        .eval_modes(point, n)?
        .into_iter()
        .enumerate()
        .map(|(l, u)| u.conj() * (scale * bank.f(j, ev[l])))
        .collect();
    while c.last() == Some(&Complex64::new(0.0, 0.0)) {
        c.pop();
    }
    Ok(c)
}

/// `Phi^j_k = F_j(sqrt L) (sqrt|U_{j,k}| delta_{x_{j,k}})` on `band`. One
/// lattice per planned level, in the order of `level_plan`.
pub fn build_almost_parseval(
    model: &Arc<SpectralModel>,
    bank: &FilterBank,
    lattices: &[(Lattice, CellCover)],
    band: f64,
    params: &SamplingParams,
) -> Result<Frame> {
    let plan = level_plan(model, bank, band);
    if lattices.len() < plan.len() {
        return Err(Error::Precondition(format!(
            "{} levels need lattices, {} given",
            plan.len(),
            lattices.len()
        )));
    }
    let mut atoms = Vec::new();
    let mut levels = Vec::new();
    for (lp, (lat, cells)) in plan.iter().zip(lattices) {
        let (lo, hi) = level_support(lp.level);
        let eff = hi.min(model.lambda_max());
        check_rate(model, lat.r, eff, params)?;
        let members = cell_members(cells, lat.len());
        let ev = model.eigenvalues();
        let before = atoms.len();
        for k in 0..lat.len() {
            let base = functional_coeffs(model, lat, cells, &members, k, lp.modes, params.functional)?;
            let mut c: Vec<Complex64> = base
                .into_iter()
                .enumerate()
                .map(|(l, v)| v * bank.f(lp.level, ev[l]))
                .collect();
            while c.last() == Some(&Complex64::new(0.0, 0.0)) {
                c.pop();
            }
            atoms.push(Atom {
                level: lp.level,
                index: k,
                center: lat.points[k],
                coeffs: c,
            });
        }
        levels.push(LevelInfo {
            level: lp.level,
            band_lo: lo,
            band_hi: hi.min(band),
            atoms: atoms.len() - before,
        });
    }
    let mut frame = Frame::from_atoms(model.clone(), FrameKind::AlmostParseval, atoms, levels, band)?;
    frame.bounds = Some(frame_bounds(&frame, band)?);
    Ok(frame)
}

/// `Theta^j_k = F_j(sqrt L) (sqrt(mu_{j,k}) delta_{x_{j,k}})` on `band`. One
/// rule per planned level; each must be exact on products of level functions.
pub fn build_parseval(
    model: &Arc<SpectralModel>,
    bank: &FilterBank,
    rules: &[&CubatureRule],
    band: f64,
) -> Result<Frame> {
    let plan = level_plan(model, bank, band);
    if rules.len() < plan.len() {
        return Err(Error::Precondition(format!(
            "{} levels need cubature rules, {} given",
            plan.len(),
            rules.len()
        )));
    }
    let mut atoms = Vec::new();
    let mut levels = Vec::new();
    for (lp, rule) in plan.iter().zip(rules) {
        if rule.band < lp.rule_band * (1.0 - 1e-12) {
            return Err(Error::Exactness(format!(
                "level {} needs a rule exact to band {:.6}, got {:.6}",
                lp.level, lp.rule_band, rule.band
            )));
        }
        let before = atoms.len();
        for (k, (p, mu)) in rule.points.iter().zip(&rule.weights).enumerate() {
            atoms.push(Atom {
                level: lp.level,
                index: k,
                center: *p,
                coeffs: filtered_atom(model, bank, lp.level, lp.modes, p, mu.sqrt())?,
            });
        }
        let (lo, hi) = level_support(lp.level);
        levels.push(LevelInfo {
            level: lp.level,
            band_lo: lo,
            band_hi: hi.min(band),
            atoms: atoms.len() - before,
        });
    }
    let mut frame = Frame::from_atoms(model.clone(), FrameKind::Parseval, atoms, levels, band)?;
    frame.bounds = Some(frame_bounds(&frame, band)?);
    Ok(frame)
}

fn frame_operator(frame: &Frame, n: usize) -> (Option<Mat<f64>>, Mat<c64>) {
    let cols: Vec<&[Complex64]> = frame
        .atoms
        .iter()
        .map(|a| &a.coeffs[..a.coeffs.len().min(n)])
        .collect();
    let real = frame.model.basis_is_real() && cols.iter().all(|c| c.iter().all(|v| v.im == 0.0));
    if real {
        let s = outer_sum_real(&cols, n);
        let sc = Mat::<c64>::from_fn(n, n, |i, j| c64::new(s[(i, j)], 0.0));
        (Some(s), sc)
    } else {
        (None, outer_sum(&cols, n))
    }
}

/// Extremal eigenvalues of the frame operator on the modes with
/// `lambda <= test_band`.
pub fn frame_bounds(frame: &Frame, test_band: f64) -> Result<(f64, f64)> {
    bounds_on_modes(frame, frame.model.band_len(test_band))
}

/// Extremal eigenvalues of the frame operator on the first `n` modes.
pub fn bounds_on_modes(frame: &Frame, n: usize) -> Result<(f64, f64)> {
    if frame.atoms.is_empty() {
        return Err(Error::EmptyFrame);
    }
    if n == 0 {
        return Err(Error::Precondition("test band holds no modes".into()));
    }
    let cols: Vec<&[Complex64]> = frame
        .atoms
        .iter()
        .map(|a| &a.coeffs[..a.coeffs.len().min(n)])
        .collect();
    let real = frame.model.basis_is_real() && cols.iter().all(|c| c.iter().all(|v| v.im == 0.0));
    let ev = if real {
        real_symmetric_eigenvalues(&outer_sum_real(&cols, n))?
    } else {
        hermitian_eigenvalues(&outer_sum(&cols, n))?
    };
    Ok((ev[0], ev[ev.len() - 1]))
}

/// Canonical dual atoms `S^-1 atom` by conjugate gradients on the frame
/// operator over the frame's coefficient width.
pub fn dual_frame(frame: &Frame, tol: f64) -> Result<Frame> {
    if frame.atoms.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let n = frame.width();
    let (_, s) = frame_operator(frame, n);
    let m = frame.atoms.len();
    let rhs = Mat::<c64>::from_fn(n, m, |i, j| frame.atoms[j].coeffs.get(i).copied().unwrap_or_default());
    let x = block_cg(&s, &rhs, tol, 20 * n + 100)?;
    let atoms = frame
        .atoms
        .iter()
        .enumerate()
        .map(|(j, a)| {
            // S only preserves the frame band, not each level band, so dual
            // atoms keep the full width
            let mut c: Vec<Complex64> = (0..n).map(|i| x[(i, j)]).collect();
            while c.last() == Some(&Complex64::new(0.0, 0.0)) {
                c.pop();
            }
            Atom {
                level: a.level,
                index: a.index,
                center: a.center,
                coeffs: c,
            }
        })
        .collect();
    let mut dual = Frame::from_atoms(frame.model.clone(), frame.kind, atoms, frame.levels.clone(), frame.band)?;
    dual.bounds = Some(frame_bounds(&dual, frame.band)?);
    Ok(dual)
}

/// Independent conjugate-gradient runs for each column of `b`, sharing the
/// matrix products.
fn block_cg(s: &Mat<c64>, b: &Mat<c64>, tol: f64, max_iter: usize) -> Result<Mat<c64>> {
    let n = b.nrows();
    let m = b.ncols();
    let mut x = Mat::<c64>::zeros(n, m);
    let mut r = b.clone();
    let mut p = b.clone();
    let col_norm2 = |a: &Mat<c64>, j: usize| -> f64 { (0..n).map(|i| a[(i, j)].norm_sqr()).sum() };
    let bn: Vec<f64> = (0..m).map(|j| col_norm2(b, j).sqrt()).collect();
    let mut rs: Vec<f64> = (0..m).map(|j| col_norm2(&r, j)).collect();
    let mut active: Vec<bool> = (0..m).map(|j| rs[j].sqrt() > tol * bn[j]).collect();
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for _ in 0..max_iter {
        if !active.iter().any(|&a| a) {
            return Ok(x);
        }
        let q = s * &p;
        for j in 0..m {
            if !active[j] {
                continue;
            }
            let pq: f64 = (0..n).map(|i| (p[(i, j)].conj() * q[(i, j)]).re).sum();
            if !(pq > 0.0) {
                return Err(Error::Conditioning(format!(
                    "frame operator not positive along a search direction (p^H S p = {pq:.3e})"
                )));
            }
            let alpha = rs[j] / pq;
            for i in 0..n {
                let pv = p[(i, j)];
                let qv = q[(i, j)];
                x[(i, j)] += pv * alpha;
                r[(i, j)] -= qv * alpha;
            }
            let rn = col_norm2(&r, j);
            if rn.sqrt() <= tol * bn[j] {
                active[j] = false;
            } else {
                let beta = rn / rs[j];
                for i in 0..n {
                    let rv = r[(i, j)];
                    p[(i, j)] = rv + p[(i, j)] * beta;
                }
            }
            rs[j] = rn;
        }
        let worst = (0..m)
            .filter(|&j| active[j])
            .map(|j| rs[j].sqrt() / bn[j])
            .fold(0.0, f64::max);
        if worst < best * 0.999 {
            best = worst;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 50 {
                return Err(Error::Conditioning(format!(
                    "conjugate gradients stagnated at relative residual {best:.3e}"
                )));
            }
        }
    }
    Err(Error::Conditioning(format!(
        "conjugate gradients did not reach {tol:.1e} within {max_iter} iterations"
    )))
}

#[derive(Clone, Debug, Serialize)]
pub struct LeakageEntry {
    pub name: String,
    pub threshold: f64,
    pub relative_mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductReport {
    pub band_f: f64,
    pub band_g: f64,
    pub product_band: f64,
    pub entries: Vec<LeakageEntry>,
    /// Whether the quadrature integrates the analysis exactly up to the probe band.
    pub exact: bool,
    /// Largest probe band for which the analysis is exact.
    pub certified_band: f64,
}

/// Spectral mass of the pointwise product beyond the candidate thresholds.
pub fn product_bandwidth(f: &SpectralFn, g: &SpectralFn, probe_band: f64) -> Result<ProductReport> {
    let model = f.model();
    let deg = |h: &SpectralFn| -> usize {
        let n = h.coeffs().iter().rposition(|c| *c != Complex64::new(0.0, 0.0));
        n.map_or(0, |l| model.modes()[l].degree as usize)
    };
    let (df, dg) = (deg(f), deg(g));
    let n = model.band_len(probe_band);
    let probe_deg = if n == 0 { 0 } else { model.modes()[n - 1].degree as usize };
    let exact = df + dg + probe_deg <= model.exact_degree();
    let cert_deg = model.exact_degree().saturating_sub(df + dg);
    let fv = f.to_grid();
    let gv = g.to_grid();
    let prod: Vec<Complex64> = fv.values().iter().zip(gv.values()).map(|(a, b)| a * b).collect();
    let c = model.analyze_nodes(&prod, n);
    let total = norm_sqr(&c);
    let ev = model.eigenvalues();
    let dim = model.dimension() as f64;
    let mx = f.band().max(g.band());
    let additive = model.degree_eigenvalue(df + dg);
    let mut entries = Vec::new();
    for (name, t) in [
        ("additive", additive),
        ("twice_max", 2.0 * mx),
        ("four_d_max", 4.0 * dim * mx),
    ] {
        let beyond: Vec<Complex64> = (0..n).filter(|&l| ev[l] > t * (1.0 + 1e-12)).map(|l| c[l]).collect();
        entries.push(LeakageEntry {
            name: name.to_string(),
            threshold: t,
            relative_mass: if total > 0.0 { norm_sqr(&beyond) / total } else { 0.0 },
        });
    }
    let product_band = (0..n).rev().find(|&l| c[l].norm() > 1e-13 * total.sqrt()).map_or(0.0, |l| ev[l]);
    Ok(ProductReport {
        band_f: f.band(),
        band_g: g.band(),
        product_band,
        entries,
        exact,
        certified_band: model.degree_eigenvalue(cert_deg),
    })
}
