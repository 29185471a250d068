//! Options shared by every subcommand, read from flags and an optional JSON
//! config file. Flags win over the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    /// Exact expected win-rates (the infinite-data limit).
    Population,
    /// Monte-Carlo over sampled datasets; needs --n.
    Empirical,
    /// Estimation error against the population limit over --n-grid.
    Convergence,
    /// Population distortion of the instance at every beta in --betas.
    BetaSweep,
    /// Distortion bound curves over --betas; needs no instance.
    BoundCurves,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Subcommand the config file was written for; checked when present.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Instance JSON file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<PathBuf>,
    /// Comparison counts (JSON matrix or .csv).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<PathBuf>,
    /// borda, maximal_lotteries, rlhf, nlhf (policy also accepts dpo, optimal).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Reference policy: "uniform", comma-separated probabilities, or `@file` (a saved ball or policy).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_ref: Option<String>,
    /// KL budget; defaults to log m.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Regularization strength for DPO.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Users per dataset.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// Comparisons per user.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Solver tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Ridge penalty for finite-sample reward fits.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ridge: Option<f64>,
    /// Output file (or prefix for `gen`); stdout when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<RunMode>,
    /// win_rates or borda, for convergence runs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    /// Comma-separated user counts for convergence runs.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<u64>>,
    /// Comma-separated temperatures for sweeps.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,

    // Generator parameters.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Natural log of eps, for constructions whose eps underflows.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_eps: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    /// Defaults to the maximizing value for borda-lb.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_prime: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_a: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_c: Option<f64>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Options {
    /// Config-file values overridden by any flag that was given.
    pub fn merged(command: &str, flags: &Options, config: Option<&Path>) -> Result<Options> {
        let mut base = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                let mut file: Options =
                    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
                if let Some(c) = &file.command {
                    if c != command {
                        bail!("config {} is for command {c:?}, not {command:?}", path.display());
                    }
                }
                // Relative paths in a config file are relative to the file.
                let dir = path.parent().unwrap_or(Path::new("."));
                for p in [&mut file.instance, &mut file.counts, &mut file.out].into_iter().flatten() {
                    if p.is_relative() {
                        *p = dir.join(&*p);
                    }
                }
                log::info!("config file {}: {}", path.display(), serde_json::to_string(&file)?);
                file
            }
            None => Options::default(),
        };
        base.command = Some(command.to_string());
        overlay!(
            base, flags, instance, counts, method, pi_ref, tau, lambda, n, d, trials, seed, tol, ridge, out, format, mode,
            quantity, n_grid, betas, m, beta, eps, log_eps, xi, gamma, eps_prime, mu_a, mu_c
        );
        log::info!("effective options: {}", serde_json::to_string(&base)?);
        Ok(base)
    }

    pub fn require_instance(&self) -> Result<&Path> {
        match &self.instance {
            Some(p) => Ok(p),
            None => bail!("--instance is required"),
        }
    }
}
