//! Model constants and the flat `key = value` experiment configuration.
//!
//! Powers and thresholds are stored linearly (watts, ratios). Decibel
//! handling happens only when parsing or rendering configuration text.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::pairing::PairingAlgorithm;
use crate::scenario::{BaselineFallback, Direction, Scheme};

/// SINR thresholds swept by default, in dB.
pub const DEFAULT_BETA_SWEEP_DB: [f64; 7] = [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: cannot parse {value:?}")]
    BadValue { key: String, value: String },
    #[error("key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

/// Converts a power in dBm to linear watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Scalar constants of the network model.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// BS density, BS per km².
    pub lambda_b: f64,
    /// Probability that a user's traffic is DL.
    pub delta: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// BS transmit power, W.
    pub p_b: f64,
    /// MS transmit power, W.
    pub p_m: f64,
    /// Noise power, W.
    pub noise: f64,
    /// UL SINR threshold, linear.
    pub beta_u: f64,
    /// DL SINR threshold, linear.
    pub beta_d: f64,
    /// Side of the square observation window, km.
    pub window_side: f64,
    /// Number of Monte Carlo drops.
    pub iterations: u64,
    pub seed: u64,
}

impl Default for SystemParams {
    fn default() -> Self {
        default_paper_params()
    }
}

/// Reference parameter set: 0.02 BS/km², δ = 0.5, α = 4, 40/20 dBm,
/// −174 dBm noise, 150 km window, 10⁴ drops.
pub fn default_paper_params() -> SystemParams {
    SystemParams {
        lambda_b: 0.02,
        delta: 0.5,
        alpha: 4.0,
        p_b: dbm_to_watts(40.0),
        p_m: dbm_to_watts(20.0),
        noise: dbm_to_watts(-174.0),
        beta_u: 1.0,
        beta_d: 1.0,
        window_side: 150.0,
        iterations: 10_000,
        seed: 0x00C0_4D2F,
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &'static str, reason: &str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Invalid {
                    key,
                    reason: reason.to_string(),
                })
            }
        }
        check(
            self.lambda_b.is_finite() && self.lambda_b > 0.0,
            "lambda_b",
            "must be > 0",
        )?;
        check(
            (0.0..=1.0).contains(&self.delta),
            "delta",
            "must lie in [0, 1]",
        )?;
        check(
            self.alpha.is_finite() && self.alpha > 2.0,
            "alpha",
            "must be > 2",
        )?;
        check(
            self.p_b.is_finite() && self.p_b > 0.0,
            "pb_dbm",
            "power must be > 0 W",
        )?;
        check(
            self.p_m.is_finite() && self.p_m > 0.0,
            "pm_dbm",
            "power must be > 0 W",
        )?;
        check(
            self.noise.is_finite() && self.noise >= 0.0,
            "noise_dbm",
            "noise must be >= 0 W",
        )?;
        check(
            self.beta_u.is_finite() && self.beta_u > 0.0,
            "beta_u_db",
            "threshold must be > 0",
        )?;
        check(
            self.beta_d.is_finite() && self.beta_d > 0.0,
            "beta_d_db",
            "threshold must be > 0",
        )?;
        check(
            self.window_side.is_finite() && self.window_side > 0.0,
            "window_km",
            "must be > 0",
        )?;
        check(self.iterations >= 1, "iterations", "must be >= 1")?;
        Ok(())
    }

    /// Parses a configuration document and keeps only the model constants.
    pub fn from_config(text: &str) -> Result<SystemParams, ConfigError> {
        Ok(ExperimentConfig::parse(text)?.params)
    }

    /// Serializes the constants in the configuration format accepted by
    /// [`SystemParams::from_config`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.entries() {
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    /// Key/value pairs in rendering order, with values already formatted.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("lambda_b", self.lambda_b.to_string()),
            ("delta", self.delta.to_string()),
            ("alpha", self.alpha.to_string()),
            ("pb_dbm", watts_to_dbm(self.p_b).to_string()),
            ("pm_dbm", watts_to_dbm(self.p_m).to_string()),
            ("noise_dbm", watts_to_dbm(self.noise).to_string()),
            ("beta_u_db", linear_to_db(self.beta_u).to_string()),
            ("beta_d_db", linear_to_db(self.beta_d).to_string()),
            ("window_km", self.window_side.to_string()),
            ("iterations", self.iterations.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Single-line `key=value;...` form used in CSV metadata.
    pub fn meta_string(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Which directions an experiment reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionSelection {
    Ul,
    Dl,
    Both,
}

impl DirectionSelection {
    pub fn includes(self, direction: Direction) -> bool {
        match self {
            DirectionSelection::Both => true,
            DirectionSelection::Ul => direction == Direction::Uplink,
            DirectionSelection::Dl => direction == Direction::Downlink,
        }
    }
}

impl FromStr for DirectionSelection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ul" => Ok(DirectionSelection::Ul),
            "dl" => Ok(DirectionSelection::Dl),
            "both" => Ok(DirectionSelection::Both),
            other => Err(format!(
                "unknown direction `{other}` (expected ul, dl or both)"
            )),
        }
    }
}

impl fmt::Display for DirectionSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DirectionSelection::Ul => "ul",
            DirectionSelection::Dl => "dl",
            DirectionSelection::Both => "both",
        })
    }
}

/// Everything a configuration document can set. Keys left out keep the
/// reference defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    /// Threshold sweep in dB (`beta_db` accepts a comma list).
    pub beta_db: Vec<f64>,
    pub scheme: Scheme,
    pub pairing: PairingAlgorithm,
    pub direction: DirectionSelection,
    pub fallback: BaselineFallback,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: default_paper_params(),
            beta_db: DEFAULT_BETA_SWEEP_DB.to_vec(),
            scheme: Scheme::Comp2flex,
            pairing: PairingAlgorithm::Greedy,
            direction: DirectionSelection::Both,
            fallback: BaselineFallback::Standalone,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

/// Parses a comma-separated list of floats.
pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    let items = value
        .split(',')
        .map(|item| parse_value::<f64>(key, item))
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() || items.iter().any(|x| x.is_nan()) {
        return Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(items)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.params.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` assignment without validating the result.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let p = &mut self.params;
        let bad = |_| ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "lambda_b" => p.lambda_b = parse_value(key, value)?,
            "delta" => p.delta = parse_value(key, value)?,
            "alpha" => p.alpha = parse_value(key, value)?,
            "pb_dbm" => p.p_b = dbm_to_watts(parse_value(key, value)?),
            "pm_dbm" => p.p_m = dbm_to_watts(parse_value(key, value)?),
            "noise_dbm" => p.noise = dbm_to_watts(parse_value(key, value)?),
            "beta_db" => {
                let list = parse_list(key, value)?;
                p.beta_u = db_to_linear(list[0]);
                p.beta_d = db_to_linear(list[0]);
                self.beta_db = list;
            }
            "beta_u_db" => p.beta_u = db_to_linear(parse_value(key, value)?),
            "beta_d_db" => p.beta_d = db_to_linear(parse_value(key, value)?),
            "window_km" => p.window_side = parse_value(key, value)?,
            "iterations" => p.iterations = parse_value(key, value)?,
            "seed" => p.seed = parse_value(key, value)?,
            "scheme" => self.scheme = value.parse().map_err(bad)?,
            "pairing" => self.pairing = value.parse().map_err(bad)?,
            "direction" => self.direction = value.parse().map_err(bad)?,
            "baseline_fallback" => self.fallback = value.parse().map_err(bad)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Renders the complete resolved configuration.
    pub fn render(&self) -> String {
        let mut out = self.params.render();
        let betas = self
            .beta_db
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!("beta_db = {betas}\n"));
        out.push_str(&format!("scheme = {}\n", self.scheme));
        out.push_str(&format!("pairing = {}\n", self.pairing));
        out.push_str(&format!("direction = {}\n", self.direction));
        out.push_str(&format!("baseline_fallback = {}\n", self.fallback));
        out
    }
}
