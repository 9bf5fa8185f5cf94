//! Effective run configuration: flags override the config file, which
//! overrides per-command defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use gindex_core::bundle::{default_profile, ProfileTriple, DEFAULT_A, DEFAULT_B};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Options shared by every command.
#[derive(Args, Clone, Debug, Default)]
pub struct Options {
    /// Grid points per axis (samples for `ellipticity`)
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Contact-form / cover degree
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// Winding of the drift coefficient
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub l: Option<i64>,
    /// Sweep over several k (comma separated)
    #[arg(long, global = true, value_delimiter = ',')]
    pub ks: Option<Vec<u32>>,
    /// Sweep over several l (comma separated)
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub ls: Option<Vec<i64>>,
    /// Start of the profile transition, in radians
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// End of the profile transition, in radians
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// Random trials for seeded suites
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Seed for randomized suites
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override of the headline tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output file; relative paths resolve against $GINDEX_OUT_DIR when set
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML file with any of the options above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    k: Option<u32>,
    l: Option<i64>,
    ks: Option<Vec<u32>>,
    ls: Option<Vec<i64>>,
    a: Option<f64>,
    b: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.to_owned(),
        source,
    })?;
    toml::from_str(&text).map_err(|source| CliError::ParseConfig {
        path: path.to_owned(),
        source,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub k: u32,
    pub l: i64,
    pub ks: Option<Vec<u32>>,
    pub ls: Option<Vec<i64>>,
    pub a: f64,
    pub b: f64,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn default_n(command: &str) -> usize {
    match command {
        "contact-check" | "reeb" => 32,
        "operator-diagnostics" => 8,
        "ellipticity" => 256,
        _ => 64,
    }
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Options) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let cfg = RunConfig {
            command: command.to_owned(),
            n: flags.n.or(file.n).unwrap_or_else(|| default_n(command)),
            k: flags.k.or(file.k).unwrap_or(1),
            l: flags.l.or(file.l).unwrap_or(1),
            ks: flags.ks.clone().or(file.ks),
            ls: flags.ls.clone().or(file.ls),
            a: flags.a.or(file.a).unwrap_or(DEFAULT_A),
            b: flags.b.or(file.b).unwrap_or(DEFAULT_B),
            trials: flags.trials.or(file.trials),
            seed: flags.seed.or(file.seed),
            tol: flags.tol.or(file.tol),
            format: flags.format.or(file.format).unwrap_or_default(),
            out: flags.out.clone().or(file.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Config(format!("tolerance must be a nonnegative number, got {t}")));
            }
        }
        if self.trials == Some(0) {
            return Err(CliError::Config("trials must be positive".into()));
        }
        if matches!(&self.ks, Some(v) if v.is_empty()) || matches!(&self.ls, Some(v) if v.is_empty()) {
            return Err(CliError::Config("sweep lists must not be empty".into()));
        }
        self.profile()?;
        Ok(())
    }

    pub fn profile(&self) -> Result<ProfileTriple, CliError> {
        Ok(default_profile(self.a, self.b)?)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config(format!("`{}` is randomized and needs --seed", self.command)))
    }

    pub fn k_values(&self) -> Vec<u32> {
        self.ks.clone().unwrap_or_else(|| vec![self.k])
    }

    pub fn l_values(&self) -> Vec<i64> {
        self.ls.clone().unwrap_or_else(|| vec![self.l])
    }

    /// Resolves `--out` against `$GINDEX_OUT_DIR`.
    pub fn output_path(&self) -> Option<PathBuf> {
        let out = self.out.as_ref()?;
        match std::env::var_os("GINDEX_OUT_DIR") {
            Some(dir) if out.is_relative() => Some(Path::new(&dir).join(out)),
            _ => Some(out.clone()),
        }
    }
}
