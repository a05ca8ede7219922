//! Run configuration: flat `key = value` files, `PROJSTREAM_*` environment
//! variables and command-line overrides, applied in that order on top of the
//! defaults.
//!
//! Keys are matched case-insensitively with `_` and `-` ignored, so
//! `initialPoints`, `initial_points` and `INITIALPOINTS` are the same key.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `N` | 200 | window length |
//! | `pi` | 30 | projected dimensionality threshold |
//! | `mu` | 10 | point-count threshold |
//! | `beta` | 0.2 | outlier threshold |
//! | `xi` | 0.002 | variance threshold |
//! | `initialPoints` | 1000 | initialization buffer size |
//! | `epsilon` | 10 | radius threshold |
//! | `H` | 1 | purity horizon in windows |
//! | `rho` | 1000 | preferred-dimension weight |
//! | `alpha` | 2/(1+N) | smoothing factor |
//! | `lambda` | 0.2324 | baseline fading rate |
//! | `burstFraction` | 0.9 | burst share of a window |
//! | `decayWeight` | true | decay weights on missed points |
//! | `distanceNormalizer` | rho | `rho` or `xi` |
//! | `normalization` | minmax_initial | `minmax_initial` or `none` |
//! | `engine` | EA | `EA`, `CF` or `both` |
//! | `maxRecords` | unlimited | stop after this many input lines |
//! | `timing` | true | record per-window wall time |
//! | `input`, `output` | | input file, output directory |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::EngineKind;
use crate::params::{DistanceNormalizer, Params};

pub const ENV_PREFIX: &str = "PROJSTREAM_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngineChoice {
    EA,
    CF,
    Both,
}

impl EngineChoice {
    pub fn kinds(self) -> &'static [EngineKind] {
        match self {
            EngineChoice::EA => &[EngineKind::EA],
            EngineChoice::CF => &[EngineKind::CF],
            EngineChoice::Both => &[EngineKind::EA, EngineKind::CF],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    MinmaxInitial,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub engine: EngineChoice,
    pub params: Params,
    pub normalization: Normalization,
    pub max_records: Option<usize>,
    pub timing: bool,
    #[serde(skip)]
    alpha_explicit: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input_path: None,
            output_path: None,
            engine: EngineChoice::EA,
            params: Params::default(),
            normalization: Normalization::MinmaxInitial,
            max_records: None,
            timing: true,
            alpha_explicit: false,
        }
    }
}

fn canonical(key: &str) -> String {
    key.chars()
        .filter(|c| *c != '_' && *c != '-')
        .flat_map(char::to_lowercase)
        .collect()
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected a boolean, got {value:?}"))),
    }
}

impl RunConfig {
    /// Sets one key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.params;
        match canonical(key).as_str() {
            "n" | "nwindow" => {
                p.n_window = parse(key, value)?;
                if !self.alpha_explicit {
                    p.alpha = crate::params::smoothing_factor(p.n_window);
                }
            }
            "alpha" => {
                p.alpha = parse(key, value)?;
                self.alpha_explicit = true;
            }
            "pi" | "pidim" => p.pi_dim = parse(key, value)?,
            "mu" => p.mu = parse(key, value)?,
            "beta" => p.beta = parse(key, value)?,
            "xi" => p.xi = parse(key, value)?,
            "rho" => p.rho = parse(key, value)?,
            "epsilon" | "eps" => p.eps = parse(key, value)?,
            "h" | "horizon" => p.horizon = parse(key, value)?,
            "initialpoints" => p.initial_points = parse(key, value)?,
            "lambda" => p.lambda = parse(key, value)?,
            "burstfraction" => p.burst_fraction = parse(key, value)?,
            "decayweight" => p.decay_weight = parse_bool(key, value)?,
            "distancenormalizer" => {
                p.distance_normalizer = match value.trim().to_ascii_lowercase().as_str() {
                    "rho" => DistanceNormalizer::Rho,
                    "xi" => DistanceNormalizer::Xi,
                    _ => return Err(Error::Config(format!("`{key}`: expected rho or xi"))),
                }
            }
            "normalization" => {
                self.normalization = match canonical(value).as_str() {
                    "minmaxinitial" | "minmax" => Normalization::MinmaxInitial,
                    "none" => Normalization::None,
                    _ => {
                        return Err(Error::Config(format!(
                            "`{key}`: expected minmax_initial or none"
                        )))
                    }
                }
            }
            "engine" => {
                self.engine = match value.trim().to_ascii_lowercase().as_str() {
                    "ea" => EngineChoice::EA,
                    "cf" => EngineChoice::CF,
                    "both" => EngineChoice::Both,
                    _ => return Err(Error::Config(format!("`{key}`: expected EA, CF or both"))),
                }
            }
            "maxrecords" => {
                self.max_records = match value.trim() {
                    "" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "timing" => self.timing = parse_bool(key, value)?,
            "input" => self.input_path = Some(PathBuf::from(value.trim())),
            "output" => self.output_path = Some(PathBuf::from(value.trim())),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` document; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    /// Applies every `PROJSTREAM_<KEY>` variable of `vars`.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut matched: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|s| (s.to_owned(), v)))
            .collect();
        matched.sort();
        for (k, v) in matched {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides<'a, I>(&mut self, overrides: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a str>,
    {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.input_path.is_none() {
            return Err(Error::Config("no input file given".into()));
        }
        if self.params.initial_points == 0 {
            return Err(Error::Config("initialPoints must be positive".into()));
        }
        Ok(())
    }
}
