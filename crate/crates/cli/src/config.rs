//! Experiment configuration: `[section]` / `key = value` files merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use degenerate_surface::discretization::{Region, MIN_CELLS};
use degenerate_surface::evolution::Scheme;
use degenerate_surface::sturm_liouville::{ExtensionSpec, SlError};
use thiserror::Error;

/// A rejected configuration value; `field` is the `section.key` it came from.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.to_string(), message: message.into() }
}

/// Every accepted key, in echo order.
pub const KEYS: &[&str] = &[
    "run.command",
    "run.output",
    "model.alpha",
    "model.k",
    "model.extension",
    "grid.region",
    "grid.n_cells",
    "grid.x_max",
    "time.t_final",
    "time.dt",
    "time.scheme",
    "time.flow",
    "initial.data",
    "geometry.t_max",
    "geometry.steps",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Evolve,
    Probe,
    Geometry,
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classify" => Ok(Command::Classify),
            "evolve" => Ok(Command::Evolve),
            "probe" => Ok(Command::Probe),
            "geometry" => Ok(Command::Geometry),
            other => Err(format!("unknown command `{other}` (expected classify, evolve, probe or geometry)")),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Classify => "classify",
            Command::Evolve => "evolve",
            Command::Probe => "probe",
            Command::Geometry => "geometry",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Full,
    Inner,
    Outer,
}

impl RegionKind {
    pub fn region(self) -> Region<f64> {
        match self {
            RegionKind::Full => Region::Full,
            RegionKind::Inner => Region::InnerWalls,
            RegionKind::Outer => Region::OuterRegion,
        }
    }
}

impl FromStr for RegionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(RegionKind::Full),
            "inner" | "innerwalls" => Ok(RegionKind::Inner),
            "outer" | "outerregion" => Ok(RegionKind::Outer),
            other => Err(format!("unknown region `{other}` (expected full, inner or outer)")),
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionKind::Full => "full",
            RegionKind::Inner => "inner",
            RegionKind::Outer => "outer",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Heat,
    Schrodinger,
}

impl FromStr for FlowKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "heat" => Ok(FlowKind::Heat),
            "schrodinger" | "schroedinger" => Ok(FlowKind::Schrodinger),
            other => Err(format!("unknown flow `{other}` (expected heat or schrodinger)")),
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowKind::Heat => "heat",
            FlowKind::Schrodinger => "schrodinger",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
    Both,
}

impl FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Side::Plus),
            "minus" | "-" => Ok(Side::Minus),
            "both" => Ok(Side::Both),
            other => Err(format!("unknown side `{other}` (expected plus, minus or both)")),
        }
    }
}

/// Radial profile carried by a single Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Constant,
    /// `exp(-x²)`.
    Gaussian,
    /// `(1 - x²)²` on `|x| < 1`.
    Bump,
}

impl FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" => Ok(Profile::Constant),
            "gaussian" => Ok(Profile::Gaussian),
            "bump" => Ok(Profile::Bump),
            other => Err(format!("unknown profile `{other}` (expected constant, gaussian or bump)")),
        }
    }
}

impl Profile {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Profile::Constant => 1.0,
            Profile::Gaussian => (-x * x).exp(),
            Profile::Bump => {
                if x.abs() < 1.0 {
                    (1.0 - x * x).powi(2)
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Constant,
    /// `exp(-(x - x0)² / (2 σ²))`, kept only on the requested side.
    Gaussian { x0: f64, sigma: f64, side: Side },
    /// `profile(x) e^{ikθ}`.
    FourierMode { k: i64, profile: Profile },
}

impl InitialData {
    /// The single mode carrying the data.
    pub fn mode(&self) -> i64 {
        match self {
            InitialData::FourierMode { k, .. } => *k,
            _ => 0,
        }
    }

    pub fn radial(&self, x: f64) -> f64 {
        match *self {
            InitialData::Constant => 1.0,
            InitialData::Gaussian { x0, sigma, side } => {
                let keep = match side {
                    Side::Plus => x > 0.0,
                    Side::Minus => x < 0.0,
                    Side::Both => true,
                };
                if keep {
                    (-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp()
                } else {
                    0.0
                }
            }
            InitialData::FourierMode { profile, .. } => profile.eval(x),
        }
    }
}

impl FromStr for InitialData {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest.strip_suffix(')').ok_or("missing closing parenthesis")?;
                (name.trim(), inner.split(',').map(str::trim).collect::<Vec<_>>())
            }
            None => (s, Vec::new()),
        };
        let num = |v: &str, what: &str| -> Result<f64, String> {
            let x: f64 = v.parse().map_err(|_| format!("{what} `{v}` is not a number"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("{what} must be finite"))
            }
        };
        match (name.to_ascii_lowercase().as_str(), args.as_slice()) {
            ("constant", []) => Ok(InitialData::Constant),
            ("gaussian", [x0, sigma, side]) => {
                let sigma = num(sigma, "sigma")?;
                if sigma <= 0.0 {
                    return Err("sigma must be positive".into());
                }
                Ok(InitialData::Gaussian { x0: num(x0, "x0")?, sigma, side: side.parse()? })
            }
            ("fourier-mode", [k, profile]) => {
                let k: i64 = k.parse().map_err(|_| format!("mode `{k}` is not an integer"))?;
                Ok(InitialData::FourierMode { k, profile: profile.parse()? })
            }
            ("gaussian", _) => Err("expected gaussian(x0, sigma, side)".into()),
            ("fourier-mode", _) => Err("expected fourier-mode(k, profile)".into()),
            (other, _) => Err(format!("unknown initial data `{other}` (expected constant, gaussian(..) or fourier-mode(..))")),
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Constant => f.write_str("constant"),
            InitialData::Gaussian { x0, sigma, side } => {
                let side = match side {
                    Side::Plus => "plus",
                    Side::Minus => "minus",
                    Side::Both => "both",
                };
                write!(f, "gaussian({x0}, {sigma}, {side})")
            }
            InitialData::FourierMode { k, profile } => {
                let p = match profile {
                    Profile::Constant => "constant",
                    Profile::Gaussian => "gaussian",
                    Profile::Bump => "bump",
                };
                write!(f, "fourier-mode({k}, {p})")
            }
        }
    }
}

/// Fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub output: PathBuf,
    pub alpha: f64,
    pub k_min: i64,
    pub k_max: i64,
    pub extension: ExtensionSpec<f64>,
    pub region: RegionKind,
    pub n_cells: usize,
    pub x_max: f64,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub flow: FlowKind,
    pub initial: InitialData,
    pub profile_t_max: f64,
    pub profile_steps: usize,
}

/// Raw `section.key -> value` pairs, later sources overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(err(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parses `[section]` headers and `key = value` lines; `#` and `;` start comments.
    pub fn from_ini(text: &str) -> Result<Self, ConfigError> {
        let ini = ini::Ini::load_from_str(text).map_err(|e| err("config", format!("line {}: {}", e.line, e.msg)))?;
        let mut raw = RawConfig::default();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let section = section.ok_or_else(|| err(key, "key outside any [section]"))?;
                raw.set(&format!("{section}.{key}"), value)?;
            }
        }
        Ok(raw)
    }

    pub fn merge(&mut self, other: RawConfig) {
        self.values.extend(other.values);
    }

    pub fn validate(&self) -> Result<ExperimentConfig, ConfigError> {
        let command: Command = self
            .get("run.command")
            .ok_or_else(|| err("run.command", "missing (give it as the first argument or in [run])"))?
            .parse()
            .map_err(|m: String| err("run.command", m))?;
        let output = PathBuf::from(self.get("run.output").unwrap_or("dsurf-out"));
        if output.as_os_str().is_empty() {
            return Err(err("run.output", "empty path"));
        }
        let alpha = self.real("model.alpha", None)?;
        let (k_min, k_max) = parse_k_range(self.get("model.k").unwrap_or("0")).map_err(|m| err("model.k", m))?;
        let extension = parse_extension(self.get("model.extension").unwrap_or("friedrichs"))?;

        let (default_n, default_x_max, default_t, default_region) = match command {
            Command::Probe => (2048, 1e4, 1.0, RegionKind::Inner),
            Command::Geometry => (64, 4.0, 1.0, RegionKind::Full),
            _ => (2048, 10.0, 0.1, RegionKind::Inner),
        };
        let region: RegionKind =
            self.get("grid.region").map_or(Ok(default_region), str::parse).map_err(|m| err("grid.region", m))?;
        let n_cells = self.count("grid.n_cells", default_n)?;
        if n_cells < MIN_CELLS || n_cells % 2 != 0 {
            return Err(err("grid.n_cells", format!("must be even and at least {MIN_CELLS}, got {n_cells}")));
        }
        let x_max = self.real("grid.x_max", Some(default_x_max))?;
        if x_max <= 1.0 && (region == RegionKind::Outer || command == Command::Probe) {
            return Err(err("grid.x_max", format!("must exceed 1 for the outer region, got {x_max}")));
        }
        if x_max <= 0.0 {
            return Err(err("grid.x_max", format!("must be positive, got {x_max}")));
        }
        let t_final = self.real("time.t_final", Some(default_t))?;
        if t_final <= 0.0 {
            return Err(err("time.t_final", "must be positive"));
        }
        let dt = self.real("time.dt", Some(1e-4))?;
        if dt <= 0.0 || dt > t_final {
            return Err(err("time.dt", format!("must lie in (0, t_final], got {dt}")));
        }
        if t_final / dt > 1e8 {
            return Err(err("time.dt", "more than 1e8 steps requested"));
        }
        let scheme: Scheme = self.get("time.scheme").map_or(Ok(Scheme::default()), str::parse).map_err(|m| err("time.scheme", m))?;
        let flow: FlowKind = self.get("time.flow").map_or(Ok(FlowKind::Heat), str::parse).map_err(|m| err("time.flow", m))?;
        let initial: InitialData =
            self.get("initial.data").map_or(Ok(InitialData::Constant), str::parse).map_err(|m| err("initial.data", m))?;
        if command == Command::Evolve && !(k_min..=k_max).contains(&initial.mode()) {
            return Err(err(
                "initial.data",
                format!("carries mode {} outside model.k = {k_min}..{k_max}", initial.mode()),
            ));
        }
        if command == Command::Evolve && flow == FlowKind::Heat && extension.needs_complex() {
            return Err(err("model.extension", "a nonzero phase needs time.flow = schrodinger"));
        }
        let profile_t_max = self.real("geometry.t_max", Some(default_profile_t_max(alpha)))?;
        if profile_t_max <= 0.0 {
            return Err(err("geometry.t_max", "must be positive"));
        }
        let profile_steps = self.count("geometry.steps", 400)?;
        if profile_steps < 4 {
            return Err(err("geometry.steps", "must be at least 4"));
        }
        Ok(ExperimentConfig {
            command,
            output,
            alpha,
            k_min,
            k_max,
            extension,
            region,
            n_cells,
            x_max,
            t_final,
            dt,
            scheme,
            flow,
            initial,
            profile_t_max,
            profile_steps,
        })
    }

    fn real(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let Some(text) = self.get(key) else {
            return default.ok_or_else(|| err(key, "missing"));
        };
        let v: f64 = text.trim().parse().map_err(|_| err(key, format!("`{text}` is not a number")))?;
        if !v.is_finite() {
            return Err(err(key, "must be finite"));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(text) => text.trim().parse().map_err(|_| err(key, format!("`{text}` is not a nonnegative integer"))),
        }
    }
}

/// Keeps the default profile well inside the range where it is a graph over the axis.
fn default_profile_t_max(alpha: f64) -> f64 {
    if alpha < -1.0 {
        // the profile r ~ t^-a stops being a graph near |a| r^(1 + 1/a) = 1
        let r_crit = alpha.abs().powf(-alpha / (alpha + 1.0));
        0.5 * r_crit.powf(-1.0 / alpha)
    } else {
        1.0
    }
}

fn parse_k_range(text: &str) -> Result<(i64, i64), String> {
    let parse = |v: &str| v.trim().parse::<i64>().map_err(|_| format!("`{v}` is not an integer"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let k = parse(text)?;
            (k, k)
        }
    };
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    if lo.abs() > 10_000 || hi.abs() > 10_000 {
        return Err("modes beyond |k| = 10000 are not supported".into());
    }
    Ok((lo, hi))
}

fn parse_extension(text: &str) -> Result<ExtensionSpec<f64>, ConfigError> {
    let field = "model.extension";
    let spec: ExtensionSpec<f64> = text.parse().map_err(|e: SlError| match e {
        SlError::Parse { field: sub, message } => err(field, format!("`{sub}`: {message}")),
        other => err(field, other.to_string()),
    })?;
    spec.validate().map_err(|e| err(field, e.to_string()))?;
    Ok(spec)
}

impl ExperimentConfig {
    /// `key = value` lines for every field, defaults included.
    pub fn echo(&self) -> Vec<String> {
        let k = if self.k_min == self.k_max { self.k_min.to_string() } else { format!("{}..{}", self.k_min, self.k_max) };
        let scheme = match self.scheme {
            Scheme::CrankNicolson => "cn",
            Scheme::BackwardEuler => "be",
        };
        let values = [
            self.command.to_string(),
            self.output.display().to_string(),
            self.alpha.to_string(),
            k,
            self.extension.to_string(),
            self.region.to_string(),
            self.n_cells.to_string(),
            self.x_max.to_string(),
            self.t_final.to_string(),
            self.dt.to_string(),
            scheme.to_string(),
            self.flow.to_string(),
            self.initial.to_string(),
            self.profile_t_max.to_string(),
            self.profile_steps.to_string(),
        ];
        KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}")).collect()
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round().max(1.0) as usize
    }
}
