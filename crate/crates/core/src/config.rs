//! Run configuration and its TOML file form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sorting::OccupancyLimitMap;

/// Which environment variant to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvVariant {
    /// Belt speed only; ten actions.
    Basic,
    /// Belt speed plus sorting mode; thirty actions and a ratio sensor.
    Advanced,
}

impl EnvVariant {
    pub fn action_count(self) -> usize {
        match self {
            EnvVariant::Basic => 10,
            EnvVariant::Advanced => 30,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnvVariant::Basic => "basic",
            EnvVariant::Advanced => "advanced",
        }
    }
}

impl fmt::Display for EnvVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(EnvVariant::Basic),
            "advanced" => Ok(EnvVariant::Advanced),
            other => Err(Error::Parse(format!("unknown variant '{other}'"))),
        }
    }
}

/// Input generation mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputType {
    Random,
    Seasonal,
}

impl InputType {
    pub fn as_str(self) -> &'static str {
        match self {
            InputType::Random => "random",
            InputType::Seasonal => "seasonal",
        }
    }
}

impl fmt::Display for InputType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InputType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InputType::Random),
            "seasonal" => Ok(InputType::Seasonal),
            other => Err(Error::Parse(format!("unknown input type '{other}'"))),
        }
    }
}

/// Closed interval `[lo, hi]` used for uniform noise draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi
    }
}

/// Full parameterization of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub variant: EnvVariant,
    pub input_type: InputType,
    /// Half-width of the multiplicative observation perturbation.
    pub obs_noise_level: f64,
    /// Reward deducted on every belt speed change.
    pub action_penalty: f64,
    /// Minimum acceptable accuracy.
    pub threshold: f64,
    /// Accuracy lost per unit of occupancy above the speed's limit.
    pub lambda: f64,
    pub r_acc: f64,
    pub r_speed: f64,
    pub base_noise_range: Range,
    pub correct_mode_noise_range: Range,
    pub incorrect_mode_noise_range: Range,
    pub occupancy_limits: OccupancyLimitMap,
    pub episode_length: usize,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            variant: EnvVariant::Basic,
            input_type: InputType::Random,
            obs_noise_level: 0.0,
            action_penalty: 0.0,
            threshold: 0.7,
            lambda: 3.0,
            r_acc: 0.5,
            r_speed: 0.5,
            base_noise_range: Range::new(0.10, 0.15),
            correct_mode_noise_range: Range::new(0.0, 0.05),
            incorrect_mode_noise_range: Range::new(0.10, 0.15),
            occupancy_limits: OccupancyLimitMap::default(),
            episode_length: 50,
            seed: 42,
        }
    }
}

impl EnvConfig {
    /// Checks every field invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold must lie in (0, 1), got {}", self.threshold));
        }
        if self.episode_length == 0 {
            return bad("episode_length must be positive".into());
        }
        for (name, value) in [
            ("obs_noise_level", self.obs_noise_level),
            ("action_penalty", self.action_penalty),
            ("lambda", self.lambda),
            ("r_acc", self.r_acc),
            ("r_speed", self.r_speed),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {value}"));
            }
        }
        for (name, range) in [
            ("base_noise_range", self.base_noise_range),
            ("correct_mode_noise_range", self.correct_mode_noise_range),
            ("incorrect_mode_noise_range", self.incorrect_mode_noise_range),
        ] {
            if !range.is_valid() {
                return bad(format!("{name} must satisfy lo <= hi, got [{}, {}]", range.lo, range.hi));
            }
        }
        self.occupancy_limits.validate()
    }

    /// Parses a TOML document; missing keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: EnvConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Stable 64-bit digest of the configuration, used in trace headers.
    pub fn digest(&self) -> u64 {
        let json = serde_json::to_string(self).expect("config serializes");
        crate::rng::fnv1a64(&json)
    }
}
