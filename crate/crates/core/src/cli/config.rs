//! Run configuration: strict JSON, every section optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::mesoscopic::{ScfConfig, MIN_POINTS};
use crate::potential::PairPotential;
use crate::smoothing::MC_MIN_SAMPLES;
use crate::units::{Constants, DEFAULT_L_ANGSTROM};

use super::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub droplet: DropletConfig,
    pub kernel: KernelConfig,
    pub grid: GridConfig,
    pub scf: ScfConfig,
    pub seeds: SeedConfig,
    pub output: OutputConfig,
    pub constants: Constants,
    pub potential: PairPotential,
    pub profiles: ProfileConfig,
    pub xiscan: XiScanConfig,
    pub shortscale: ShortScaleConfig,
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DropletConfig {
    #[serde(rename = "N")]
    pub n: u64,
    pub l_angstrom: f64,
}

impl Default for DropletConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            l_angstrom: DEFAULT_L_ANGSTROM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaMode {
    Calibrate,
}

/// κ in Å per unit ξ, or "calibrate" to fit it on the calibration target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Kappa {
    Value(f64),
    Mode(KappaMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub xi: f64,
    pub kappa: Kappa,
    pub calibration: CalibrationTarget,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            xi: 0.35,
            kappa: Kappa::Mode(KappaMode::Calibrate),
            calibration: CalibrationTarget::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationTarget {
    pub xi: f64,
    pub r_min_angstrom: f64,
}

impl Default for CalibrationTarget {
    fn default() -> Self {
        Self {
            xi: 0.35,
            r_min_angstrom: 3.52,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Box radius in units of the droplet size L.
    pub r_max_factor: f64,
    pub n_points: usize,
    /// Nodes of the ṽ table (log-spaced on [0.5, 30] Å).
    pub smoothing_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_max_factor: 3.0,
            n_points: 600,
            smoothing_points: 600,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedConfig {
    pub mc_seed: u64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self { mc_seed: 1729 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

/// Sampling of the tabulated profiles (potential, smooth, fig1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub r_min_angstrom: f64,
    pub r_max_angstrom: f64,
    pub n_points: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            r_min_angstrom: 2.0,
            r_max_angstrom: 12.0,
            n_points: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XiScanConfig {
    pub xi_values: Vec<f64>,
}

impl Default for XiScanConfig {
    fn default() -> Self {
        Self {
            xi_values: vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShortScaleConfig {
    pub r_context_angstrom: f64,
    /// Defaults to half the droplet size L.
    pub s_max_angstrom: Option<f64>,
    pub intervals: usize,
    pub epsilons: Vec<f64>,
    /// Strong-coupling ε used for Ṽ* = Ṽ/ε; defaults to the droplet's ε.
    pub epsilon: Option<f64>,
    /// Radial grid of the pair eigenproblem with and without C.
    pub eigen_r_max_angstrom: f64,
    pub eigen_points: usize,
}

impl Default for ShortScaleConfig {
    fn default() -> Self {
        Self {
            r_context_angstrom: 3.52,
            s_max_angstrom: None,
            intervals: 2000,
            epsilons: vec![0.1, 0.05, 0.025],
            epsilon: None,
            eigen_r_max_angstrom: 30.0,
            eigen_points: 1500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub samples: usize,
    /// (ξ, R in Å) pairs.
    pub points: Vec<[f64; 2]>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let mut points = Vec::new();
        for xi in [0.2, 0.35, 0.6, 0.9] {
            for r in [2.2, 3.5, 8.0] {
                points.push([xi, r]);
            }
        }
        Self {
            samples: 100_000,
            points,
        }
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

fn finite_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        bad(format!("{name} must be a positive number, got {v}"))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.droplet.n < 2 {
            return bad(format!("droplet.N must be >= 2, got {}", self.droplet.n));
        }
        finite_positive("droplet.l_angstrom", self.droplet.l_angstrom)?;
        validate_xi("kernel.xi", self.kernel.xi)?;
        match self.kernel.kappa {
            Kappa::Value(k) => finite_positive("kernel.kappa", k)?,
            Kappa::Mode(KappaMode::Calibrate) => {
                finite_positive("kernel.calibration.xi", self.kernel.calibration.xi)?;
                finite_positive(
                    "kernel.calibration.r_min_angstrom",
                    self.kernel.calibration.r_min_angstrom,
                )?;
            }
        }
        if !(self.grid.r_max_factor > 1.0 && self.grid.r_max_factor.is_finite()) {
            return bad("grid.r_max_factor must exceed 1");
        }
        if self.grid.n_points < MIN_POINTS {
            return bad(format!("grid.n_points must be >= {MIN_POINTS}"));
        }
        if self.grid.smoothing_points < 16 {
            return bad("grid.smoothing_points must be >= 16");
        }
        self.scf.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.output.formats.is_empty() {
            return bad("output.formats must list at least one of json, csv");
        }
        self.constants
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.potential
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let pr = &self.profiles;
        finite_positive("profiles.r_min_angstrom", pr.r_min_angstrom)?;
        if !(pr.r_max_angstrom > pr.r_min_angstrom && pr.r_max_angstrom.is_finite()) {
            return bad("profiles.r_max_angstrom must exceed r_min_angstrom");
        }
        if pr.n_points < 2 {
            return bad("profiles.n_points must be >= 2");
        }
        if self.xiscan.xi_values.is_empty() {
            return bad("xiscan.xi_values must not be empty");
        }
        for &xi in &self.xiscan.xi_values {
            validate_xi("xiscan.xi_values", xi)?;
        }
        let ss = &self.shortscale;
        finite_positive("shortscale.r_context_angstrom", ss.r_context_angstrom)?;
        if let Some(s) = ss.s_max_angstrom {
            finite_positive("shortscale.s_max_angstrom", s)?;
        }
        if ss.intervals < 4 {
            return bad("shortscale.intervals must be >= 4");
        }
        validate_epsilons(&ss.epsilons)?;
        if let Some(e) = ss.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return bad("shortscale.epsilon must lie in (0, 1)");
            }
        }
        finite_positive("shortscale.eigen_r_max_angstrom", ss.eigen_r_max_angstrom)?;
        if ss.eigen_points < MIN_POINTS {
            return bad(format!("shortscale.eigen_points must be >= {MIN_POINTS}"));
        }
        if self.oracle.samples < MC_MIN_SAMPLES {
            return bad(format!("oracle.samples must be >= {MC_MIN_SAMPLES}"));
        }
        for &[xi, r] in &self.oracle.points {
            validate_xi("oracle.points", xi)?;
            finite_positive("oracle.points R", r)?;
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    /// SHA-256 of the canonical JSON form, with the output directory left
    /// out so that the same physics hashes the same wherever it is written.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.directory = String::new();
        let text = serde_json::to_string(&c).expect("config serialises");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn validate_xi(name: &str, xi: f64) -> Result<(), CliError> {
    if xi >= 0.0 && xi.is_finite() {
        Ok(())
    } else {
        bad(format!("{name}: xi must be >= 0, got {xi}"))
    }
}

pub fn validate_epsilons(eps: &[f64]) -> Result<(), CliError> {
    if eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return bad("epsilon values must lie in (0, 1)");
    }
    let mut d = eps.to_vec();
    d.sort_by(f64::total_cmp);
    d.dedup();
    if d.len() < 3 {
        return bad("need at least 3 distinct epsilon values");
    }
    Ok(())
}
