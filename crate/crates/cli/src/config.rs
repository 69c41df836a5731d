use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sepmap::dynamics::{DuffingParams, HbrParams};
use sepmap::mapbuild::{build_duffing_homoclinic, BetaChoice};
use sepmap::trig::{Forcing, FrequencyPreset};
use sepmap::{Error, Result};

/// Environment variable naming the output root when neither `--out` nor the config sets one.
pub const OUT_ENV: &str = "SEPMAP_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    #[default]
    Duffing,
    Hbr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Paper,
    CubicGolden,
}

impl From<Preset> for FrequencyPreset {
    fn from(p: Preset) -> Self {
        match p {
            Preset::Paper => FrequencyPreset::Paper,
            Preset::CubicGolden => FrequencyPreset::CubicGolden,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Beta {
    FirstOrder,
    Shot,
}

impl From<Beta> for BetaChoice {
    fn from(b: Beta) -> Self {
        match b {
            Beta::FirstOrder => BetaChoice::FirstOrder,
            Beta::Shot => BetaChoice::Shot,
        }
    }
}

/// Experiment description shared by every subcommand. Read from `--config`
/// and then overridden field by field by command line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub gamma: f64,
    pub beta: Beta,
    pub ix: f64,
    pub iy: f64,
    pub preset: Preset,
    /// Explicit frequencies; take precedence over `preset`.
    pub omega: Option<Vec<f64>>,
    /// Number of forcing frequencies taken from the preset.
    pub frequencies: usize,
    /// Forcing amplitudes; all ones when absent.
    pub amplitudes: Option<Vec<f64>>,
    pub eps: f64,
    pub r: f64,
    /// Iterate budget; each command has its own default.
    pub iterates: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::Duffing,
            gamma: 0.08,
            beta: Beta::FirstOrder,
            ix: 0.1,
            iy: 0.1,
            preset: Preset::Paper,
            omega: None,
            frequencies: 3,
            amplitudes: None,
            eps: 0.001,
            r: 0.1,
            iterates: None,
            seed: 1,
            out: None,
        }
    }
}

/// Flags shared by all subcommands; each one overrides the config file.
#[derive(Debug, Clone, Args, Default)]
pub struct Overrides {
    /// JSON experiment configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (defaults to $SEPMAP_OUT, then the current directory)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    /// Duffing damping
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Duffing nonlinear damping: first order balance or homoclinic shooting
    #[arg(long, global = true, value_enum)]
    pub beta: Option<Beta>,
    /// Sets both network rates I_x and I_y
    #[arg(long = "i", global = true, allow_hyphen_values = true)]
    pub i: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub ix: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub iy: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    /// Number of forcing frequencies
    #[arg(long, global = true)]
    pub frequencies: Option<usize>,
    /// Comma-separated forcing amplitudes
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub amplitudes: Option<Vec<f64>>,
    /// Forcing strength
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Section radius
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Iterate budget
    #[arg(long, global = true)]
    pub iterates: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut c = match &o.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = o.seed {
            c.seed = v;
        }
        if let Some(v) = &o.out {
            c.out = Some(v.clone());
        }
        if let Some(v) = o.model {
            c.model = v;
        }
        if let Some(v) = o.gamma {
            c.gamma = v;
        }
        if let Some(v) = o.beta {
            c.beta = v;
        }
        if let Some(v) = o.i {
            c.ix = v;
            c.iy = v;
        }
        if let Some(v) = o.ix {
            c.ix = v;
        }
        if let Some(v) = o.iy {
            c.iy = v;
        }
        if let Some(v) = o.preset {
            c.preset = v;
        }
        if let Some(v) = o.frequencies {
            c.frequencies = v;
        }
        if let Some(v) = &o.amplitudes {
            c.amplitudes = Some(v.clone());
        }
        if let Some(v) = o.eps {
            c.eps = v;
        }
        if let Some(v) = o.r {
            c.r = v;
        }
        if let Some(v) = o.iterates {
            c.iterates = Some(v);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::Config(format!("section radius must lie in (0, 1), got {}", self.r)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::Config(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::Config(format!("eps must be non-negative, got {}", self.eps)));
        }
        if self.model == ModelKind::Hbr {
            HbrParams::new(self.ix, self.iy)?;
        }
        self.forcing()?;
        Ok(())
    }

    pub fn forcing(&self) -> Result<Forcing> {
        let omega = match &self.omega {
            Some(w) => w.clone(),
            None => {
                if self.frequencies == 0 || self.frequencies > 3 {
                    return Err(Error::Config(format!(
                        "number of frequencies must be 1..=3, got {}",
                        self.frequencies
                    )));
                }
                FrequencyPreset::from(self.preset).frequencies()[..self.frequencies].to_vec()
            }
        };
        let amp = match &self.amplitudes {
            Some(a) => a.clone(),
            None => vec![1.0; omega.len()],
        };
        Forcing::new(omega, amp, self.eps)
    }

    pub fn duffing_params(&self) -> Result<DuffingParams> {
        let beta = match self.beta {
            Beta::FirstOrder => 1.25 * self.gamma,
            Beta::Shot => build_duffing_homoclinic(self.gamma, Default::default())?.beta,
        };
        DuffingParams::new(self.gamma, beta)
    }

    pub fn hbr_params(&self) -> Result<HbrParams> {
        HbrParams::new(self.ix, self.iy)
    }

    pub fn out_dir(&self) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        match std::env::var_os(OUT_ENV) {
            Some(v) => PathBuf::from(v),
            None => PathBuf::from("."),
        }
    }
}
