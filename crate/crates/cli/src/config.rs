//! Run configuration: a JSON file merged under command-line flags.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use hybridtp::hybrid::Encoding;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Bad flags, bad config file contents, or inconsistent parameters.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Parses `1.2`, `0.25pi`, `-pi/2`, `3pi/4`, `π`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().replace('π', "pi").replace(' ', "");
    let bad = || format!("cannot read {s:?} as an angle (use radians or multiples of pi, e.g. 0.25pi)");
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| bad());
    };
    let head = t[..at].trim_end_matches('*');
    let tail = &t[at + 2..];
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match tail {
        "" => 1.0,
        d => d.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).filter(|d| *d != 0.0).ok_or_else(bad)?,
    };
    let v = factor * PI / divisor;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Parses `0.6`, `0.6,0.8` (re,im), or `0.6+0.8i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim();
    if let Some((re, im)) = t.split_once(',') {
        let re = re.trim().parse::<f64>().map_err(|e| e.to_string())?;
        let im = im.trim().parse::<f64>().map_err(|e| e.to_string())?;
        return Ok(Complex64::new(re, im));
    }
    t.parse::<Complex64>().map_err(|_| format!("cannot read {s:?} as a complex number"))
}

/// Angle in a config file: a number (radians) or a string such as "0.25pi".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Angle(v)),
            Raw::Text(s) => parse_angle(&s).map(Angle).map_err(serde::de::Error::custom),
        }
    }
}

/// Complex number in a config file: a number, `[re, im]`, or a string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexValue(pub Complex64);

impl<'de> Deserialize<'de> for ComplexValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Pair([f64; 2]),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ComplexValue(Complex64::new(v, 0.0))),
            Raw::Pair([re, im]) => Ok(ComplexValue(Complex64::new(re, im))),
            Raw::Text(s) => parse_complex(&s).map(ComplexValue).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// How `θ_C` is tied to `θ_B` in a fidelity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `θ_C = θ_B`
    #[default]
    Equal,
    /// `θ_C = θ_B − π/2`
    Quadrature,
    /// independent `θ_C` axis
    Grid,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub points: Option<usize>,
}

/// Contents of a `--config` file. Every key is optional; unknown keys are an error.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub alpha: Option<f64>,
    pub zeta: Option<f64>,
    pub phi: Option<Angle>,
    pub theta_b: Option<Angle>,
    pub theta_c: Option<Angle>,
    pub theta_d: Option<Angle>,
    pub phis: Option<Vec<Angle>>,
    pub cutoff: Option<usize>,
    pub encoding: Option<Encoding>,
    pub x: Option<ComplexValue>,
    pub y: Option<ComplexValue>,
    pub steps: Option<usize>,
    pub range_min: Option<Angle>,
    pub range_max: Option<Angle>,
    pub relation: Option<Relation>,
    pub skip_numeric: Option<bool>,
    pub c_outcome: Option<String>,
    pub d_outcome: Option<usize>,
    pub grid: Option<GridConfig>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub circuit: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_error(format!("invalid config {}: {e}", path.display())))
    }
}

/// Options shared by every subcommand. Flags take precedence over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Coherent amplitude α
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Squeezing parameter; selects the squeezed-vacuum resource in wigner-grid and resource-info
    #[arg(long, global = true)]
    pub zeta: Option<f64>,
    /// Input phase φ (radians or e.g. 0.25pi)
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_b: Option<f64>,
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_c: Option<f64>,
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_d: Option<f64>,
    /// Comma-separated φ list for circuit-run
    #[arg(long, global = true, value_parser = parse_angle, value_delimiter = ',', allow_hyphen_values = true)]
    pub phis: Option<Vec<f64>>,
    /// Fock cutoff N (basis |0⟩..|N⟩)
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    #[arg(long, global = true, value_parser = parse_encoding)]
    pub encoding: Option<Encoding>,
    /// Target coefficient X (e.g. 0.6 or 0.6,0.1)
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    pub x: Option<Complex64>,
    /// Target coefficient Y
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    pub y: Option<Complex64>,
    /// Points per sweep axis
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    pub range_min: Option<f64>,
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    pub range_max: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub relation: Option<Relation>,
    /// Skip the Fock-space pipeline in fidelity-sweep
    #[arg(long, global = true)]
    pub skip_numeric: bool,
    /// Outcome on C: 0, 1, + or -
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c_outcome: Option<String>,
    /// Photon count on D: 0 or 1
    #[arg(long, global = true)]
    pub d_outcome: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q_max: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p_max: Option<f64>,
    /// Grid points per axis
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    /// RNG seed (falls back to the config file, then HYBRIDTP_SEED, then 0)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Circuit JSON to sample instead of the built-in experiment
    #[arg(long, global = true)]
    pub circuit: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

fn parse_encoding(s: &str) -> Result<Encoding, String> {
    match s.to_ascii_lowercase().as_str() {
        "fock" => Ok(Encoding::Fock),
        "qubit" => Ok(Encoding::Qubit),
        _ => Err(format!("unknown encoding {s:?} (fock or qubit)")),
    }
}

/// Flags merged over a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub alpha: Option<f64>,
    pub zeta: Option<f64>,
    pub phi: Option<f64>,
    pub theta_b: Option<f64>,
    pub theta_c: Option<f64>,
    pub theta_d: Option<f64>,
    pub phis: Option<Vec<f64>>,
    pub cutoff: Option<usize>,
    pub encoding: Option<Encoding>,
    pub x: Option<Complex64>,
    pub y: Option<Complex64>,
    pub steps: Option<usize>,
    pub range_min: Option<f64>,
    pub range_max: Option<f64>,
    pub relation: Option<Relation>,
    pub skip_numeric: bool,
    pub c_outcome: Option<String>,
    pub d_outcome: Option<usize>,
    pub grid: GridConfig,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub circuit: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

pub const SEED_ENV: &str = "HYBRIDTP_SEED";

impl Settings {
    pub fn resolve(command: &str, flags: &Flags) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(c) = &file.command {
            if c != command {
                return Err(config_error(format!("config is for command {c:?}, not {command:?}")));
            }
        }
        let angle = |a: Option<Angle>| a.map(|a| a.0);
        let g = file.grid.clone().unwrap_or_default();
        let seed = match flags.seed.or(file.seed) {
            Some(s) => Some(s),
            None => match std::env::var(SEED_ENV) {
                Ok(v) => Some(
                    v.trim().parse::<u64>().map_err(|_| config_error(format!("{SEED_ENV}={v:?} is not a seed")))?,
                ),
                Err(_) => None,
            },
        };
        Ok(Settings {
            alpha: flags.alpha.or(file.alpha),
            zeta: flags.zeta.or(file.zeta),
            phi: flags.phi.or(angle(file.phi)),
            theta_b: flags.theta_b.or(angle(file.theta_b)),
            theta_c: flags.theta_c.or(angle(file.theta_c)),
            theta_d: flags.theta_d.or(angle(file.theta_d)),
            phis: flags.phis.clone().or_else(|| file.phis.map(|v| v.into_iter().map(|a| a.0).collect())),
            cutoff: flags.cutoff.or(file.cutoff),
            encoding: flags.encoding.or(file.encoding),
            x: flags.x.or(file.x.map(|c| c.0)),
            y: flags.y.or(file.y.map(|c| c.0)),
            steps: flags.steps.or(file.steps),
            range_min: flags.range_min.or(angle(file.range_min)),
            range_max: flags.range_max.or(angle(file.range_max)),
            relation: flags.relation.or(file.relation),
            skip_numeric: flags.skip_numeric || file.skip_numeric.unwrap_or(false),
            c_outcome: flags.c_outcome.clone().or(file.c_outcome),
            d_outcome: flags.d_outcome.or(file.d_outcome),
            grid: GridConfig {
                q_min: flags.q_min.or(g.q_min),
                q_max: flags.q_max.or(g.q_max),
                p_min: flags.p_min.or(g.p_min),
                p_max: flags.p_max.or(g.p_max),
                points: flags.points.or(g.points),
            },
            shots: flags.shots.or(file.shots),
            seed,
            circuit: flags.circuit.clone().or(file.circuit),
            output: flags.output.clone().or(file.output),
            format: flags.format.or(file.format),
        })
    }

    /// Explicit `--format`, else the output extension, else JSON.
    pub fn format(&self) -> Format {
        self.format.unwrap_or_else(|| match self.output.as_ref().and_then(|p| p.extension()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        })
    }
}
