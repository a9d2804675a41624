use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use spectral_frames::frame::Functional;
use spectral_frames::{CircleConfig, ModelConfig, SphereConfig};

/// Raised for anything wrong with the run configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    /// Filter bank depth `J`.
    pub levels: usize,
    /// Band the frames act on.
    pub band: f64,
    pub seed: u64,
    /// Random functions per reconstruction check.
    pub trials: usize,
    pub lattice: LatticeSection,
    pub sampling: SamplingSection,
    pub kernel: KernelSection,
    pub lp: LpSection,
    pub besov: BesovSection,
    pub line: LineSection,
    pub suite: SuiteSection,
    /// Overrides keyed by certificate name.
    pub tolerances: BTreeMap<String, f64>,
    pub tol_scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub radius: f64,
    /// Bisection bracket for `r * omega` when calibrating cubature.
    pub bracket: [f64; 2],
    pub steps: usize,
    pub safety: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub delta: f64,
    pub rate_constant: Option<f64>,
    pub functional: Functional,
    /// Lattice radii are `radius_scale / omega`.
    pub radius_scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub max_degree: usize,
    /// `t = 2^-k` for `k` in this inclusive range.
    pub t_exponents: [u32; 2],
    pub order: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpSection {
    pub max_degree: usize,
    pub band: f64,
    pub levels: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BesovSection {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub family: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSection {
    pub omega: f64,
    pub eps: f64,
    pub jitter_seeds: usize,
    pub cubature_omega: f64,
    pub gamma: f64,
    pub leakage_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSection {
    pub circle: Option<CircleConfig>,
    pub sphere: Option<SphereConfig>,
    pub line: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::Sphere2(fine_sphere(32)),
            levels: 5,
            band: 16.0,
            seed: 20_240_917,
            trials: 20,
            lattice: LatticeSection::default(),
            sampling: SamplingSection::default(),
            kernel: KernelSection::default(),
            lp: LpSection::default(),
            besov: BesovSection::default(),
            line: LineSection::default(),
            suite: SuiteSection::default(),
            tolerances: BTreeMap::new(),
            tol_scale: 1.0,
        }
    }
}

/// Sphere with a quadrature grid four times finer than the minimal one, so
/// lattice cells at fine radii cover several nodes.
pub fn fine_sphere(max_degree: usize) -> SphereConfig {
    SphereConfig {
        max_degree,
        gauss_latitudes: 4 * max_degree,
        longitudes: 8 * max_degree,
    }
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            radius: 0.4,
            bracket: [1.0, 8.0],
            steps: 6,
            safety: 0.75,
        }
    }
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            delta: 0.25,
            rate_constant: None,
            functional: Functional::CellAverage,
            radius_scale: 1.5,
        }
    }
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            max_degree: 256,
            t_exponents: [2, 6],
            order: 4,
        }
    }
}

impl Default for LpSection {
    fn default() -> Self {
        Self {
            max_degree: 128,
            band: 32.0,
            levels: 6,
        }
    }
}

impl Default for BesovSection {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            p: 2.0,
            q: 2.0,
            family: 12,
        }
    }
}

impl Default for LineSection {
    fn default() -> Self {
        Self {
            omega: 16.0,
            eps: 0.25,
            jitter_seeds: 5,
            cubature_omega: 4.0,
            gamma: 0.5,
            leakage_tol: 1e-4,
        }
    }
}

impl Default for SuiteSection {
    fn default() -> Self {
        Self {
            circle: Some(CircleConfig::minimal(64)),
            sphere: Some(fine_sphere(32)),
            line: true,
        }
    }
}

/// Certificate tolerances: default limit and whether `--tol-scale` applies.
pub const TOLERANCES: &[(&str, f64, bool)] = &[
    ("partition_of_unity", 1e-12, true),
    ("lattice_measure_sum", 1e-12, true),
    ("moment_residual", 1e-9, true),
    ("weight_ratio", 10.0, false),
    ("parseval_defect", 1e-8, true),
    ("reconstruction", 1e-8, true),
    ("sampling_lower_bound", 0.5, false),
    ("dual_reconstruction", 1e-8, true),
    ("product_leakage", 1e-10, true),
    ("kernel_envelope_spread", 10.0, false),
    ("kernel_slope", 0.1, false),
    ("lp_residual", 1e-10, true),
    ("besov_spread", 10.0, false),
    ("besov_homogeneity", 1e-12, true),
    ("pw1d_parseval", 1e-8, true),
    ("pw1d_weight_ratio", 3.0, false),
    ("pw1d_integration", 1e-9, true),
];

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(|e| config_error(format!("{e:#}")))?;
        serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let model_ok = match &self.model {
            ModelConfig::Circle(c) => c.validate(),
            ModelConfig::Sphere2(s) => s.validate(),
            ModelConfig::Line(l) => l.validate(),
        };
        model_ok.map_err(|e| config_error(e.to_string()))?;
        if let Some(c) = &self.suite.circle {
            c.validate().map_err(|e| config_error(e.to_string()))?;
        }
        if let Some(s) = &self.suite.sphere {
            s.validate().map_err(|e| config_error(e.to_string()))?;
        }
        let positive = [
            ("band", self.band),
            ("tol_scale", self.tol_scale),
            ("lattice.radius", self.lattice.radius),
            ("lattice.safety", self.lattice.safety),
            ("sampling.delta", self.sampling.delta),
            ("sampling.radius_scale", self.sampling.radius_scale),
            ("lp.band", self.lp.band),
            ("line.omega", self.line.omega),
            ("line.eps", self.line.eps),
            ("line.cubature_omega", self.line.cubature_omega),
            ("line.gamma", self.line.gamma),
            ("line.leakage_tol", self.line.leakage_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!(config_error(format!("{name} = {v} must be positive and finite")));
            }
        }
        if self.sampling.delta >= 1.0 {
            bail!(config_error("sampling.delta must lie in (0, 1)"));
        }
        if self.levels < 1 || self.lp.levels < 1 {
            bail!(config_error("levels must be at least 1"));
        }
        if self.trials < 1 || self.besov.family < 1 || self.line.jitter_seeds < 1 {
            bail!(config_error("trials, besov.family and line.jitter_seeds must be at least 1"));
        }
        let [lo, hi] = self.lattice.bracket;
        if !(lo > 0.0 && hi > lo) {
            bail!(config_error(format!("lattice.bracket [{lo}, {hi}] must be increasing and positive")));
        }
        let [k0, k1] = self.kernel.t_exponents;
        if k1 < k0 + 1 {
            bail!(config_error("kernel.t_exponents needs at least two values"));
        }
        for (name, v) in &self.tolerances {
            if !TOLERANCES.iter().any(|(n, _, _)| n == name) {
                bail!(config_error(format!("unknown tolerance '{name}'")));
            }
            if !(*v > 0.0 && v.is_finite()) {
                bail!(config_error(format!("tolerance {name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// Effective limit of a named certificate.
    pub fn tol(&self, name: &str) -> f64 {
        let (_, default, scaled) = TOLERANCES
            .iter()
            .find(|(n, _, _)| *n == name)
            .unwrap_or_else(|| panic!("no tolerance named {name}"));
        let base = self.tolerances.get(name).copied().unwrap_or(*default);
        if *scaled {
            base * self.tol_scale
        } else {
            base
        }
    }

    /// SHA-256 of the effective configuration.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
