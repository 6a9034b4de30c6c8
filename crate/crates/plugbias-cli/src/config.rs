//! Command-line flags merged over an optional TOML config file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use crate::CliError;

/// Flags shared by every subcommand. Each may also be given in the config
/// file under the same name; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with any of the keys below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Catalog id, e.g. `central_moment:4`, `sd`, `mean_pow:-1`.
    #[arg(long)]
    pub functional: Option<String>,
    /// Orders of the estimate (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<usize>,
    /// Sample sizes (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Simulations per run.
    #[arg(long = "N")]
    pub replications: Option<usize>,
    /// Distribution, e.g. `normal:0:1`, `exp:1`, `discrete:0,1,3:0.5,0.3,0.2`;
    /// repeat for several.
    #[arg(long)]
    pub dist: Vec<String>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative precision for the planner.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Truncation bound on `|T(F_hat)|`.
    #[arg(long)]
    pub u: Option<f64>,
    /// Value used when the truncation bound is hit.
    #[arg(long)]
    pub c: Option<f64>,
    /// S, T, plus or truncated-S.
    #[arg(long)]
    pub family: Option<String>,
    /// Independent runs per cell.
    #[arg(long)]
    pub runs: Option<usize>,
    /// text, csv or markdown.
    #[arg(long)]
    pub format: Option<String>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Baselines for `simulate`: jackknife or bootstrap:B (repeatable).
    #[arg(long)]
    pub baseline: Vec<String>,
    /// Worker threads for `simulate`.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Warn when the planned N exceeds this.
    #[arg(long)]
    pub cap: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    functional: Option<String>,
    p: Option<OneOrMany<usize>>,
    n: Option<OneOrMany<usize>>,
    #[serde(rename = "N")]
    replications: Option<usize>,
    dist: Option<OneOrMany<String>>,
    seed: Option<u64>,
    eps: Option<f64>,
    u: Option<f64>,
    c: Option<f64>,
    family: Option<String>,
    runs: Option<usize>,
    format: Option<String>,
    out: Option<PathBuf>,
    baseline: Option<OneOrMany<String>>,
    workers: Option<usize>,
    cap: Option<f64>,
}

fn list<T>(flag: Vec<T>, file: Option<OneOrMany<T>>) -> Vec<T> {
    if flag.is_empty() {
        file.map(OneOrMany::into_vec).unwrap_or_default()
    } else {
        flag
    }
}

impl Flags {
    /// Fills unset flags from `--config`, if given.
    pub fn resolve(self) -> Result<Flags, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_config(&path)?;
        Ok(Flags {
            config: Some(path),
            functional: self.functional.or(file.functional),
            p: list(self.p, file.p),
            n: list(self.n, file.n),
            replications: self.replications.or(file.replications),
            dist: list(self.dist, file.dist),
            seed: self.seed.or(file.seed),
            eps: self.eps.or(file.eps),
            u: self.u.or(file.u),
            c: self.c.or(file.c),
            family: self.family.or(file.family),
            runs: self.runs.or(file.runs),
            format: self.format.or(file.format),
            out: self.out.or(file.out),
            baseline: list(self.baseline, file.baseline),
            workers: self.workers.or(file.workers),
            cap: self.cap.or(file.cap),
        })
    }

    pub fn functional(&self) -> Result<plugbias::functionals::FunctionalId, CliError> {
        let id = self
            .functional
            .as_deref()
            .ok_or_else(|| CliError::config("--functional is required"))?;
        Ok(id.parse()?)
    }
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
}
