//! Distortion of aggregation methods against the best policy in a KL ball.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::math::derive_seed;
use crate::mle::DEFAULT_RIDGE;
use crate::model::{avg_util, avg_util_policy, expected_win_rates, Instance, PairDistribution, Policy, WinRates};
use crate::policy_opt::{nlhf_policy, optimal_policy, rlhf_policy, KLBall, RewardData, DEFAULT_POLICY_TOL};
use crate::rules::{borda_rule, borda_scores, limiting_borda, margin_matrix, maximal_lotteries, DEFAULT_TIE_TOL};
use crate::sampling::{empirical_win_rates, sample_comparisons_with, ComparisonCounts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Borda,
    MaximalLotteries,
    Rlhf,
    Nlhf,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Borda, Method::MaximalLotteries, Method::Rlhf, Method::Nlhf];

    pub fn name(self) -> &'static str {
        match self {
            Method::Borda => "borda",
            Method::MaximalLotteries => "maximal_lotteries",
            Method::Rlhf => "rlhf",
            Method::Nlhf => "nlhf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "borda" => Ok(Method::Borda),
            "maximal_lotteries" | "ml" => Ok(Method::MaximalLotteries),
            "rlhf" | "dpo" => Ok(Method::Rlhf),
            "nlhf" => Ok(Method::Nlhf),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}; expected borda, maximal_lotteries, rlhf or nlhf"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Population,
    Empirical,
}

/// Solver settings shared by the harnesses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub tie_tol: f64,
    pub ridge: f64,
    pub exec: Exec,
}

impl Default for Settings {
    fn default() -> Self {
        Self { tol: DEFAULT_POLICY_TOL, tie_tol: DEFAULT_TIE_TOL, ridge: DEFAULT_RIDGE, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub method: Method,
    pub mode: Mode,
    pub optimal_util: f64,
    /// Average utility of the method's output; the mean over trials in
    /// empirical mode.
    pub method_util: f64,
    /// `optimal_util / method_util`, or `None` when `method_util` is 0 and
    /// the ratio is infinite.
    pub ratio: Option<f64>,
    pub trials: u64,
    pub n: u64,
    pub d: u64,
    pub std_err: f64,
    pub seed: u64,
    /// The method's output in population mode.
    pub policy: Option<Policy>,
}

fn ratio(optimal: f64, achieved: f64) -> Option<f64> {
    (achieved > 0.0).then(|| optimal / achieved)
}

fn require_mu(pairs: &PairDistribution, method: Method) -> Result<()> {
    if method == Method::Borda && pairs.mu().is_none() {
        return Err(Error::UndefinedForNu { what: "the Borda rule" });
    }
    Ok(())
}

/// The method's output in the infinite-data limit.
pub fn population_policy(inst: &Instance, method: Method, ball: &KLBall, settings: &Settings) -> Result<Policy> {
    require_mu(inst.pairs(), method)?;
    let rates = expected_win_rates(inst);
    match method {
        Method::Borda => Ok(borda_rule(&limiting_borda(&rates, inst.pairs())?, settings.tie_tol)),
        Method::MaximalLotteries => maximal_lotteries(&margin_matrix(&rates), settings.tol),
        Method::Rlhf => rlhf_policy(RewardData::Population { rates: &rates, pairs: inst.pairs() }, ball, settings.tol),
        Method::Nlhf => nlhf_policy(&margin_matrix(&rates), ball, settings.tol),
    }
}

/// The method's output on a finite dataset.
pub fn empirical_policy(
    counts: &ComparisonCounts,
    pairs: &PairDistribution,
    method: Method,
    ball: &KLBall,
    settings: &Settings,
) -> Result<Policy> {
    require_mu(pairs, method)?;
    let margins = || margin_matrix(&empirical_win_rates(counts));
    match method {
        Method::Borda => Ok(borda_rule(&borda_scores(counts).scores, settings.tie_tol)),
        Method::MaximalLotteries => maximal_lotteries(&margins(), settings.tol),
        Method::Rlhf => rlhf_policy(RewardData::Counts { counts, ridge: settings.ridge }, ball, settings.tol),
        Method::Nlhf => nlhf_policy(&margins(), ball, settings.tol),
    }
}

/// Distortion in the infinite-data limit, using exact expected win-rates.
pub fn distortion_population(inst: &Instance, method: Method, ball: &KLBall, settings: &Settings) -> Result<DistortionReport> {
    check_ball(inst, ball)?;
    let optimal_util = avg_util_policy(inst, &optimal_policy(inst, ball, settings.tol)?);
    let policy = population_policy(inst, method, ball, settings)?;
    let method_util = avg_util_policy(inst, &policy);
    Ok(DistortionReport {
        method,
        mode: Mode::Population,
        optimal_util,
        method_util,
        ratio: ratio(optimal_util, method_util),
        trials: 0,
        n: 0,
        d: 0,
        std_err: 0.0,
        seed: 0,
        policy: Some(policy),
    })
}

/// Monte-Carlo distortion over `trials` independent datasets of `n` users
/// with `d` comparisons each. Trial `t` uses seed `derive_seed(seed, t)`.
#[allow(clippy::too_many_arguments)]
pub fn distortion_empirical(
    inst: &Instance,
    method: Method,
    ball: &KLBall,
    n: u64,
    d: u64,
    trials: u64,
    seed: u64,
    settings: &Settings,
) -> Result<DistortionReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    check_ball(inst, ball)?;
    require_mu(inst.pairs(), method)?;
    let optimal_util = avg_util_policy(inst, &optimal_policy(inst, ball, settings.tol)?);
    let utils = avg_util(inst);
    let per_trial = settings.exec.try_map(trials as usize, |t| -> Result<f64> {
        let counts = sample_comparisons_with(inst, n, d, derive_seed(seed, t as u64), Exec::Serial)?;
        let pi = empirical_policy(&counts, inst.pairs(), method, ball, settings)?;
        Ok(crate::math::dot(&utils, pi.probs()))
    })?;
    let (mean, std_err) = mean_and_std_err(&per_trial);
    Ok(DistortionReport {
        method,
        mode: Mode::Empirical,
        optimal_util,
        method_util: mean,
        ratio: ratio(optimal_util, mean),
        trials,
        n,
        d,
        std_err,
        seed,
        policy: None,
    })
}

fn check_ball(inst: &Instance, ball: &KLBall) -> Result<()> {
    if ball.m() != inst.m() {
        return Err(Error::InvalidArgument(format!("ball has {} alternatives, instance has {}", ball.m(), inst.m())));
    }
    Ok(())
}

/// Sample mean and the standard error of the mean (0 for a single value).
pub fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    WinRates,
    Borda,
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "win_rates" | "winrates" => Ok(Quantity::WinRates),
            "borda" => Ok(Quantity::Borda),
            _ => Err(Error::InvalidArgument(format!("unknown quantity {s:?}; expected win_rates or borda"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub mean_error: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub quantity: Quantity,
    pub d: u64,
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln(mean_error)` against `ln(n)`.
    pub slope: f64,
}

/// Max-entry error of the empirical quantity against its population limit.
pub fn estimation_error(inst: &Instance, counts: &ComparisonCounts, quantity: Quantity, rates: &WinRates) -> Result<f64> {
    Ok(match quantity {
        Quantity::WinRates => empirical_win_rates(counts).max_abs_diff(rates),
        Quantity::Borda => {
            let limit = limiting_borda(rates, inst.pairs())?;
            borda_scores(counts).scores.iter().zip(&limit).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        }
    })
}

/// Mean estimation error at each `n` in `n_grid`, over `trials` datasets.
pub fn convergence_experiment(
    inst: &Instance,
    quantity: Quantity,
    n_grid: &[u64],
    d: u64,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<ConvergenceTable> {
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid.first().is_some_and(|&n| n == 0) {
        return Err(Error::InvalidArgument("n grid must be positive and strictly increasing".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if quantity == Quantity::Borda {
        require_mu(inst.pairs(), Method::Borda)?;
    }
    let rates = expected_win_rates(inst);
    let jobs: Vec<(usize, u64)> = (0..n_grid.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let errors = exec.try_map(jobs.len(), |j| -> Result<f64> {
        let (i, t) = jobs[j];
        let counts = sample_comparisons_with(inst, n_grid[i], d, derive_seed(derive_seed(seed, i as u64), t), Exec::Serial)?;
        estimation_error(inst, &counts, quantity, &rates)
    })?;
    let rows: Vec<ConvergenceRow> = n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let (mean_error, std_err) = mean_and_std_err(&errors[i * trials as usize..(i + 1) * trials as usize]);
            ConvergenceRow { n, mean_error, std_err }
        })
        .collect();
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.n as f64).ln(), r.mean_error.ln())).collect();
    Ok(ConvergenceTable { quantity, d, trials, seed, slope: least_squares_slope(&pts), rows })
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub use crate::math::nlhf_bound;

/// Squared [`nlhf_bound`]: the Borda distortion bound.
pub fn borda_bound(beta: f64) -> f64 {
    nlhf_bound(beta).powi(2)
}
