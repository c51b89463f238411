//! Run configuration loaded from TOML.
//!
//! A minimal file only needs a `[model]` table; every other section has
//! defaults. Example:
//!
//! ```toml
//! [model]
//! v_f = 1.0
//! v_p = 0.3
//! lambda = 1.0
//! g = 0.2
//! a = 0.1
//! L = 100.0
//!
//! [grid]
//! K = 2
//!
//! [correlator]
//! ell = 1.0
//! regulator = 1e-3
//! insertions = [
//!   { r = "+", q = -1, x = 0.0, t = 0.0 },
//!   { r = "+", q = 1, x = 0.0, t = 0.0 },
//! ]
//! x = { from = -5.0, to = 5.0, points = 101 }
//! ```

use std::path::Path;

use anyhow::{bail, Context};
use fermion_phonon::correlators::{CorrelatorSpec, InsertionPoint};
use fermion_phonon::fock::SignConvention;
use fermion_phonon::model::{validate_params, Chirality, ModelParams};
use fermion_phonon::vertex::{FiniteOptions, DEFAULT_MAX_MODES};
use fermion_phonon::Result as CoreResult;
use serde::{Deserialize, Serialize};

/// Model section; `omega0` defaults to one phonon mode spacing `2 pi v_p / L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Fermi velocity.
    pub v_f: f64,
    /// Phonon velocity.
    pub v_p: f64,
    /// Fermion-fermion coupling.
    #[serde(default)]
    pub lambda: f64,
    /// Fermion-phonon coupling.
    #[serde(default)]
    pub g: f64,
    /// Interaction range.
    pub a: f64,
    /// System size.
    #[serde(rename = "L")]
    pub l: f64,
    /// Phonon zero-mode frequency.
    #[serde(default)]
    pub omega0: Option<f64>,
}

impl ModelSection {
    /// Unvalidated model parameters.
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.v_f, self.v_p, self.lambda, self.g, self.a, self.l, self.omega0)
    }
}

/// Grid and mode-sum truncation policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Truncation parameter of the Fock laboratory and of the spectrum.
    #[serde(rename = "K", default = "default_k")]
    pub k: u32,
    /// Cap on the number of boson modes in a finite-size mode sum.
    #[serde(default = "default_max_modes")]
    pub max_modes: u64,
    /// Largest acceptable relative truncation error of a finite-size correlator.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_k() -> u32 {
    2
}

fn default_max_modes() -> u64 {
    DEFAULT_MAX_MODES
}

fn default_tolerance() -> f64 {
    1e-10
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            k: default_k(),
            max_modes: default_max_modes(),
            tolerance: default_tolerance(),
        }
    }
}

/// Ladder sign convention of the Fock laboratory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignSetting {
    /// Jordan-Wigner signs (the physical choice).
    #[default]
    JordanWigner,
    /// No ladder signs; only useful as a negative control.
    Unsigned,
}

impl From<SignSetting> for SignConvention {
    fn from(s: SignSetting) -> Self {
        match s {
            SignSetting::JordanWigner => SignConvention::JordanWigner,
            SignSetting::Unsigned => SignConvention::Unsigned,
        }
    }
}

/// Fock laboratory settings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSection {
    /// Ladder sign convention.
    #[serde(default)]
    pub sign_convention: SignSetting,
}

/// Inclusive, evenly spaced range of values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    /// First value.
    pub from: f64,
    /// Last value.
    pub to: f64,
    /// Number of values (at least 1).
    pub points: usize,
}

impl Range {
    /// A single value.
    pub fn single(v: f64) -> Self {
        Self {
            from: v,
            to: v,
            points: 1,
        }
    }

    /// The values, computed as `from + i (to - from) / (points - 1)`.
    pub fn values(&self) -> anyhow::Result<Vec<f64>> {
        if self.points == 0 {
            bail!("a range needs at least one point");
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            bail!("range bounds must be finite");
        }
        if self.points == 1 {
            return Ok(vec![self.from]);
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| if i + 1 == self.points { self.to } else { self.from + step * i as f64 })
            .collect())
    }
}

/// Evaluation mode of the `correlate` subcommand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelatorMode {
    /// Closed form of the renormalized model in the thermodynamic limit.
    #[default]
    Continuum,
    /// Finite system of size `L` with cutoff `a` and damping `regulator`.
    Finite,
}

/// Correlator section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatorSection {
    /// Renormalization length.
    #[serde(default = "default_ell")]
    pub ell: f64,
    /// Regulator standing in for `i0+`; also the damping of finite-size fields.
    #[serde(default = "default_regulator")]
    pub regulator: f64,
    /// Evaluation mode.
    #[serde(default)]
    pub mode: CorrelatorMode,
    /// In finite mode, replace each field's normalization by the renormalized one.
    #[serde(default)]
    pub renormalize: bool,
    /// Insertions; the grid point `(x, t)` is added to the first one.
    #[serde(default = "default_insertions")]
    pub insertions: Vec<InsertionPoint>,
    /// Positions scanned.
    #[serde(default = "default_x")]
    pub x: Range,
    /// Times scanned.
    #[serde(default = "default_t")]
    pub t: Range,
}

fn default_ell() -> f64 {
    1.0
}

fn default_regulator() -> f64 {
    1e-3
}

fn default_insertions() -> Vec<InsertionPoint> {
    vec![
        InsertionPoint::new(Chirality::Plus, -1, 0.0, 0.0),
        InsertionPoint::new(Chirality::Plus, 1, 0.0, 0.0),
    ]
}

fn default_x() -> Range {
    Range {
        from: 0.5,
        to: 5.0,
        points: 10,
    }
}

fn default_t() -> Range {
    Range::single(0.0)
}

impl Default for CorrelatorSection {
    fn default() -> Self {
        Self {
            ell: default_ell(),
            regulator: default_regulator(),
            mode: CorrelatorMode::default(),
            renormalize: false,
            insertions: default_insertions(),
            x: default_x(),
            t: default_t(),
        }
    }
}

impl CorrelatorSection {
    /// Spec for the grid point `(x, t)`.
    pub fn spec_at(&self, x: f64, t: f64) -> CoreResult<CorrelatorSpec> {
        let mut insertions = self.insertions.clone();
        if let Some(first) = insertions.first_mut() {
            first.x += x;
            first.t += t;
        }
        CorrelatorSpec::new(insertions, self.ell, self.regulator)
    }
}

/// Coupling scan; each axis is given either in physical units or as the
/// dimensionless coupling. Absent axes keep the model value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Values of `lambda`.
    pub lambda: Option<Range>,
    /// Values of `gamma1 = lambda / (2 pi v_f)`.
    pub gamma1: Option<Range>,
    /// Values of `g`.
    pub g: Option<Range>,
    /// Values of `gamma2 = g / (v_p sqrt(pi v_f))`.
    pub gamma2: Option<Range>,
}

/// Output preferences.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output format; each subcommand has its own default.
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    pub path: Option<std::path::PathBuf>,
}

/// Machine-readable output format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Comma-separated values with a header row.
    Csv,
    /// Pretty-printed JSON.
    Json,
}

/// Complete run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Model parameters.
    pub model: ModelSection,
    /// Grid and truncation policy.
    #[serde(default)]
    pub grid: GridSection,
    /// Fock laboratory settings.
    #[serde(default)]
    pub fock: FockSection,
    /// Correlator settings.
    #[serde(default)]
    pub correlator: CorrelatorSection,
    /// Coupling scan.
    #[serde(default)]
    pub scan: ScanSection,
    /// Output preferences.
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    /// Parses a TOML document.
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).context("invalid configuration")
    }

    /// Reads and parses a TOML file.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// Validated model parameters.
    pub fn params(&self) -> CoreResult<ModelParams> {
        validate_params(self.model.params())
    }

    /// Truncation settings of the finite-size pipeline.
    pub fn finite_options(&self) -> FiniteOptions {
        FiniteOptions {
            tolerance: self.grid.tolerance,
            max_modes: self.grid.max_modes,
            ..FiniteOptions::default()
        }
    }
}
