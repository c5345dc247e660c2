//! Configuration-driven runner for classification, evolution, probe and geometry reports.

pub mod config;
pub mod report;
pub mod run;

use std::path::PathBuf;

use clap::Parser;

use config::{ConfigError, ExperimentConfig, RawConfig};

/// Flags mirror the `[section] key` entries of a config file and override them.
#[derive(Debug, Parser)]
#[command(name = "dsurf", version, about = "Extensions, evolutions and Markov probes on degenerate surfaces")]
pub struct Cli {
    /// classify | evolve | probe | geometry (or `command` in [run])
    pub command: Option<String>,
    /// Config file with [run], [model], [grid], [time], [initial] and [geometry] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub output: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Mode or inclusive range, e.g. `2` or `0..3`.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// friedrichs | neumann | bridging | `disjoint c+=.. c-=..` | `mixed k11=.. k12=.. k21=.. k22=.. gamma=..`
    #[arg(long, allow_hyphen_values = true)]
    pub extension: Option<String>,
    /// full | inner | outer
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long = "n-cells")]
    pub n_cells: Option<String>,
    #[arg(long = "x-max", allow_hyphen_values = true)]
    pub x_max: Option<String>,
    #[arg(long = "t-final", allow_hyphen_values = true)]
    pub t_final: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<String>,
    /// cn | be
    #[arg(long)]
    pub scheme: Option<String>,
    /// heat | schrodinger
    #[arg(long)]
    pub flow: Option<String>,
    /// constant | `gaussian(x0, sigma, side)` | `fourier-mode(k, profile)`
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<String>,
    #[arg(long = "profile-t-max", allow_hyphen_values = true)]
    pub profile_t_max: Option<String>,
    #[arg(long = "profile-steps")]
    pub profile_steps: Option<String>,
}

impl Cli {
    /// Config file values overridden by flags, then validated.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
                    field: "config".into(),
                    message: format!("cannot read {}: {e}", path.display()),
                })?;
                RawConfig::from_ini(&text)?
            }
            None => RawConfig::default(),
        };
        let mut flags = RawConfig::default();
        let pairs = [
            ("run.command", &self.command),
            ("run.output", &self.output),
            ("model.alpha", &self.alpha),
            ("model.k", &self.k),
            ("model.extension", &self.extension),
            ("grid.region", &self.region),
            ("grid.n_cells", &self.n_cells),
            ("grid.x_max", &self.x_max),
            ("time.t_final", &self.t_final),
            ("time.dt", &self.dt),
            ("time.scheme", &self.scheme),
            ("time.flow", &self.flow),
            ("initial.data", &self.initial),
            ("geometry.t_max", &self.profile_t_max),
            ("geometry.steps", &self.profile_steps),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, v.clone())?;
            }
        }
        raw.merge(flags);
        raw.validate()
    }
}
