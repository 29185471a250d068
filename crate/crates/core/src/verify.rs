//! End-to-end acceptance suites, shared by the test suite and the CLI's
//! `verify` command.
//!
//! Each criterion recomputes the quantities it checks from the model
//! (win-rates, average utilities) rather than trusting a generator's own
//! analytics, and a few use independent oracles defined here: a direct
//! minimizer of the DPO loss and a uniqueness test for matrix-game
//! equilibria. Reports contain no timings, so a fixed seed gives
//! byte-identical output.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distortion::{convergence_experiment, distortion_population, population_policy, Method, Quantity, Settings};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::instances::{
    borda_gamma_star, gen_borda_lb, gen_rlhf_lb, gen_unbounded_seq, gen_universal_lb, linearization_bounds, random_instance,
    random_margins, random_policy, reference_instance,
};
use crate::math::{derive_seed, nlhf_bound, sigmoid, softmax};
use crate::mle::{fit_bt_mle, fit_bt_mle_population, DEFAULT_MLE_TOL, DEFAULT_RIDGE};
use crate::model::{avg_util, avg_util_policy, expected_win_rates, Instance, Policy};
use crate::policy_opt::{
    dpo_policy, exploitability, kl_div, linear_max_over_ball, nlhf_solve, optimal_policy, regularized_linear_max,
    regularized_nlhf, rlhf_policy, KLBall, RewardData,
};
use crate::rules::{exploitability_simplex, maximal_lotteries, MarginMatrix};
use crate::sampling::ComparisonCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Sandwich,
    Equivalences,
    Bounds,
    Lowerbounds,
    Convergence,
    All,
}

impl Suite {
    /// Criterion ids in the suite.
    pub fn criteria(self) -> &'static [u32] {
        match self {
            Suite::Sandwich => &[1],
            Suite::Equivalences => &[10, 11, 13],
            Suite::Bounds => &[2, 3, 4, 5],
            Suite::Lowerbounds => &[6, 7, 8, 9],
            Suite::Convergence => &[12],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sandwich" => Suite::Sandwich,
            "equivalences" => Suite::Equivalences,
            "bounds" => Suite::Bounds,
            "lowerbounds" => Suite::Lowerbounds,
            "convergence" => Suite::Convergence,
            "all" => Suite::All,
            _ => return Err(Error::InvalidArgument(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    /// Individual checks, each `name: value [ok|FAIL]`.
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<u32> {
        self.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect()
    }
}

/// Collects named checks for one criterion.
struct Checks {
    id: u32,
    name: &'static str,
    items: Vec<String>,
    passed: bool,
}

impl Checks {
    fn new(id: u32, name: &'static str) -> Self {
        Self { id, name, items: Vec::new(), passed: true }
    }

    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        self.passed &= ok;
        self.items.push(format!("{} [{}]", what.as_ref(), if ok { "ok" } else { "FAIL" }));
    }

    fn error(&mut self, what: &str, e: &Error) {
        self.check(false, format!("{what}: error: {e}"));
    }

    fn finish(self) -> CriterionResult {
        CriterionResult { id: self.id, name: self.name.to_string(), passed: self.passed, checks: self.items }
    }
}

fn rng_for(seed: u64, id: u32, case: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(seed, id as u64), case))
}

/// Runs every criterion in `suite`.
pub fn run_suite(suite: Suite, seed: u64, exec: Exec) -> VerifyReport {
    let criteria: Vec<CriterionResult> = suite.criteria().iter().map(|&id| run_criterion(id, seed, exec)).collect();
    VerifyReport { suite, seed, passed: criteria.iter().all(|c| c.passed), criteria }
}

pub fn run_criterion(id: u32, seed: u64, exec: Exec) -> CriterionResult {
    match id {
        1 => sandwich(seed, exec),
        2 => nlhf_upper_bound(seed, exec),
        3 => maximal_lotteries_bound(seed, exec),
        4 => borda_upper_bound(seed, exec),
        5 => headline_constant(),
        6 => universal_lower_bound(),
        7 => borda_lower_bound(),
        8 => rlhf_lower_bound(),
        9 => unbounded_sequence(),
        10 => dpo_equivalence(seed, exec),
        11 => regularized_constrained(seed, exec),
        12 => concentration(seed, exec),
        13 => equilibrium_cross_oracle(seed, exec),
        _ => {
            let mut c = Checks::new(id, "unknown criterion");
            c.check(false, "no such criterion");
            c.finish()
        }
    }
}

/// Plain-text rendering, one line per check.
pub fn render_text(report: &VerifyReport) -> String {
    let mut out = String::new();
    for c in &report.criteria {
        let _ = writeln!(out, "criterion {:>2} {:<40} {}", c.id, c.name, if c.passed { "PASS" } else { "FAIL" });
        for item in &c.checks {
            let _ = writeln!(out, "    {item}");
        }
    }
    let _ = writeln!(out, "suite {:?} seed {}: {}", report.suite, report.seed, if report.passed { "PASS" } else { "FAIL" });
    out
}

const BOUND_SLACK: f64 = 1e-6;
const BETAS: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];
const CASES_PER_BETA: u64 = 200;

fn sandwich(seed: u64, exec: Exec) -> CriterionResult {
    let mut c = Checks::new(1, "linearization sandwich");
    const INSTANCES: u64 = 1000;
    let worst: Vec<(f64, usize)> = exec.map(INSTANCES as usize, |i| {
        let mut rng = rng_for(seed, 1, i as u64);
        let m = rng.random_range(2..=10);
        let k = rng.random_range(1..=5);
        let beta = rng.random_range(0.1..=20.0);
        let inst = random_instance(&mut rng, m, k, beta);
        let p = expected_win_rates(&inst);
        let mut worst = f64::INFINITY;
        for x in 0..m {
            for y in 0..m {
                let (lo, hi) = linearization_bounds(&inst, x, y);
                let gap = p.get(x, y) - 0.5;
                worst = worst.min(gap - lo).min(hi - gap);
            }
        }
        (worst, m * m)
    });
    let pairs: usize = worst.iter().map(|w| w.1).sum();
    let min_slack = worst.iter().map(|w| w.0).fold(f64::INFINITY, f64::min);
    c.check(min_slack >= -1e-12, format!("min slack over {INSTANCES} instances, {pairs} ordered pairs: {min_slack:.3e}"));
    c.finish()
}

/// Instance, reference policy and budget for case `i` of a bound suite.
fn bound_case(seed: u64, id: u32, beta_index: usize, i: u64) -> (Instance, KLBall) {
    let mut rng = rng_for(seed, id, beta_index as u64 * 10_000 + i);
    let m = rng.random_range(2..=8);
    let k = rng.random_range(1..=5);
    let inst = random_instance(&mut rng, m, k, BETAS[beta_index]);
    let pi_ref = random_policy(&mut rng, m);
    let tau = (1e-3f64.ln() + rng.random::<f64>() * ((m as f64).ln().ln() - 1e-3f64.ln())).exp();
    (inst, KLBall::new(pi_ref, tau).expect("positive reference"))
}

fn bound_suite(
    seed: u64,
    exec: Exec,
    id: u32,
    name: &'static str,
    method: Method,
    bound: fn(f64) -> f64,
    full_simplex: bool,
) -> CriterionResult {
    let mut c = Checks::new(id, name);
    let settings = Settings { exec: Exec::Serial, ..Settings::default() };
    for (bi, &beta) in BETAS.iter().enumerate() {
        let results: Vec<Result<f64>> = exec.map(CASES_PER_BETA as usize, |i| {
            let (inst, ball) = bound_case(seed, 2, bi, i as u64);
            let ball = if full_simplex { KLBall::full_simplex(inst.m()) } else { ball };
            let r = distortion_population(&inst, method, &ball, &settings)?;
            Ok(r.ratio.unwrap_or(f64::INFINITY))
        });
        let errors = results.iter().filter(|r| r.is_err()).count();
        if let Some(Err(e)) = results.iter().find(|r| r.is_err()) {
            c.error(&format!("beta {beta}: {errors} solver failures, first"), e);
        }
        let worst = results.iter().filter_map(|r| r.as_ref().ok()).copied().fold(0.0, f64::max);
        let b = bound(beta);
        c.check(
            worst <= b + BOUND_SLACK,
            format!("beta {beta}: max ratio {worst:.9} vs bound {b:.9} over {CASES_PER_BETA} cases"),
        );
    }
    c.finish()
}

fn nlhf_upper_bound(seed: u64, exec: Exec) -> CriterionResult {
    bound_suite(seed, exec, 2, "NLHF upper bound", Method::Nlhf, nlhf_bound, false)
}

fn maximal_lotteries_bound(seed: u64, exec: Exec) -> CriterionResult {
    bound_suite(seed, exec, 3, "maximal lotteries upper bound", Method::MaximalLotteries, nlhf_bound, true)
}

fn borda_upper_bound(seed: u64, exec: Exec) -> CriterionResult {
    bound_suite(seed, exec, 4, "Borda upper bound", Method::Borda, |b| nlhf_bound(b).powi(2), true)
}

fn headline_constant() -> CriterionResult {
    let mut c = Checks::new(5, "headline constant");
    let v = nlhf_bound(4.60);
    c.check((2.33..=2.35).contains(&v), format!("bound at beta 4.60: {v:.6}"));
    c.finish()
}

fn universal_lower_bound() -> CriterionResult {
    let mut c = Checks::new(6, "universal lower bound instance");
    let (m, beta, eps) = (200, 5.0, 1e-4);
    let g = match gen_universal_lb(m, beta, eps, 1.0) {
        Ok(g) => g,
        Err(e) => {
            c.error("generator", &e);
            return c.finish();
        }
    };
    let p = expected_win_rates(&g.instance);
    let dev = p.matrix().as_slice().iter().fold(0.0f64, |a, v| a.max((v - 0.5).abs()));
    c.check(dev <= 1e-12, format!("max |p - 1/2|: {dev:.3e}"));
    let direct = 1.0 / (1.0 / m as f64 + eps * (sigmoid(beta) - 0.5) / (sigmoid(beta * eps) - 0.5));
    c.check(
        (g.analytics.ratio_floor - direct).abs() <= 1e-12 * direct,
        format!("floor {:.6} vs direct formula {direct:.6}", g.analytics.ratio_floor),
    );
    let bound = nlhf_bound(beta);
    let rel = (direct / bound - 1.0).abs();
    c.check(rel <= 0.02, format!("floor {direct:.6} vs bound {bound:.6}: relative gap {rel:.4}"));
    // A rule that cannot tell the alternatives apart picks uniformly.
    let au = avg_util(&g.instance);
    let uniform_ratio = au[0] / avg_util_policy(&g.instance, &Policy::uniform(m));
    c.check(uniform_ratio >= direct, format!("uniform-choice ratio {uniform_ratio:.6} >= floor"));
    c.finish()
}

fn borda_lower_bound() -> CriterionResult {
    let mut c = Checks::new(7, "Borda lower bound");
    let eps = 1e-4;
    let settings = Settings::default();
    let run = |beta: f64, gamma: f64, c: &mut Checks| -> Option<f64> {
        let g = match gen_borda_lb(beta, gamma, eps, eps * eps, 1e-3, 1e-3) {
            Ok(g) => g,
            Err(e) => {
                c.error(&format!("beta {beta}: generator"), &e);
                return None;
            }
        };
        let ball = KLBall::full_simplex(3);
        let report = match distortion_population(&g.instance, Method::Borda, &ball, &settings) {
            Ok(r) => r,
            Err(e) => {
                c.error(&format!("beta {beta}: distortion"), &e);
                return None;
            }
        };
        let pi = report.policy.clone().expect("population policy");
        c.check(pi.probs()[2] == 1.0, format!("beta {beta}: Borda policy {:?} selects c", pi.probs()));
        let au = avg_util(&g.instance);
        let closed = g.analytics.ratio;
        let direct = au[0] / au[2];
        c.check(
            (direct / closed - 1.0).abs() <= 1e-9,
            format!("beta {beta}: AvgUtil(a)/AvgUtil(c) {direct:.6} vs closed form {closed:.6}"),
        );
        let realized = report.ratio.unwrap_or(f64::INFINITY);
        c.check(
            (realized / closed - 1.0).abs() <= 0.01,
            format!("beta {beta}: realized ratio {realized:.6} vs closed form {closed:.6}"),
        );
        Some(realized)
    };
    for beta in [2.0, 5.0, 10.0] {
        if let Some(realized) = run(beta, borda_gamma_star(beta), &mut c) {
            let factor = realized / nlhf_bound(beta);
            c.check(factor >= 1.05, format!("beta {beta}: realized / NLHF bound = {factor:.4}"));
        }
    }
    let beta = 50.0;
    if let Some(realized) = run(beta, (beta + 1.0f64).ln() / beta, &mut c) {
        c.check(realized >= 0.8 * beta, format!("beta 50: realized ratio {realized:.3} >= 40"));
    }
    c.finish()
}

fn rlhf_lower_bound() -> CriterionResult {
    let mut c = Checks::new(8, "RLHF exponential lower bound");
    let settings = Settings::default();
    let mut logs = Vec::new();
    for beta in [3.0, 4.0, 5.0] {
        let g = match gen_rlhf_lb(beta, None, None, None) {
            Ok(g) => g,
            Err(e) => {
                c.error(&format!("beta {beta}: generator"), &e);
                continue;
            }
        };
        let ball = g.ball.clone().expect("construction ball");
        let rates = expected_win_rates(&g.instance);
        let step = || -> Result<(Policy, Policy, Vec<f64>)> {
            let r = fit_bt_mle_population(&rates, g.instance.pairs(), DEFAULT_MLE_TOL)?;
            let rl = rlhf_policy(RewardData::Population { rates: &rates, pairs: g.instance.pairs() }, &ball, settings.tol)?;
            let opt = optimal_policy(&g.instance, &ball, settings.tol)?;
            Ok((rl, opt, r.into_inner()))
        };
        let (rl, opt, r) = match step() {
            Ok(v) => v,
            Err(e) => {
                c.error(&format!("beta {beta}: solve"), &e);
                continue;
            }
        };
        let floor = 1.0 - (-beta).exp();
        c.check(r[1] > r[0], format!("beta {beta}: r(b) - r(a) = {:.6}", r[1] - r[0]));
        c.check(rl.probs()[1] >= floor, format!("beta {beta}: RLHF mass on b {:.6} >= {floor:.6}", rl.probs()[1]));
        c.check(opt.probs()[0] >= floor, format!("beta {beta}: optimal mass on a {:.6} >= {floor:.6}", opt.probs()[0]));
        let ratio = avg_util_policy(&g.instance, &opt) / avg_util_policy(&g.instance, &rl);
        logs.push((beta, ratio.ln()));
        c.check(true, format!("beta {beta}: m {}, ln eps {}, distortion {ratio:.6}", g.analytics.m, g.analytics.log_eps));
    }
    for w in logs.windows(2) {
        let inc = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        c.check(inc >= 0.8, format!("beta {} -> {}: ln(distortion) increase {inc:.4} per unit beta", w[0].0, w[1].0));
    }
    c.finish()
}

fn unbounded_sequence() -> CriterionResult {
    let mut c = Checks::new(9, "unbounded-distortion sequence");
    let settings = Settings::default();
    let mut previous: Option<f64> = None;
    for m in [6, 10, 14] {
        let g = match gen_unbounded_seq(5.0, m, 1e-3) {
            Ok(g) => g,
            Err(e) => {
                c.error(&format!("m {m}: generator"), &e);
                continue;
            }
        };
        let au = avg_util(&g.instance);
        let p = expected_win_rates(&g.instance);
        let beta = g.instance.beta();
        c.check(au[0] == 1.0 / 3.0, format!("m {m}: AvgUtil(a_1) = {}", au[0]));
        let mut decrement_ok = true;
        let mut worst_margin = f64::INFINITY;
        for t in 1..m {
            let bound = au[t - 1] - 2.0 / (3.0 * beta) * (beta / 4.0 * au[t - 1]).tanh().powi(3).ln_1p();
            decrement_ok &= au[t] > 0.0 && au[t] <= bound + 1e-15;
            worst_margin = worst_margin.min(p.get(t, t - 1) - 0.5);
        }
        c.check(decrement_ok, format!("m {m}: 0 < AvgUtil(a_t) <= decrement bound for all t"));
        c.check(worst_margin > 0.0, format!("m {m}: min p(a_t > a_t-1) - 1/2 = {worst_margin:.3e}"));
        match fit_bt_mle_population(&p, g.instance.pairs(), DEFAULT_MLE_TOL) {
            Ok(r) => {
                let inc = r.values().windows(2).all(|w| w[1] > w[0]);
                c.check(inc, format!("m {m}: population rewards strictly increasing"));
            }
            Err(e) => c.error(&format!("m {m}: population MLE"), &e),
        }
        match distortion_population(&g.instance, Method::Rlhf, &KLBall::full_simplex(m), &settings) {
            Ok(rep) => {
                let ratio = rep.ratio.unwrap_or(f64::INFINITY);
                let ok = previous.is_none_or(|prev| ratio > prev);
                c.check(ok, format!("m {m}: RLHF distortion {ratio:.6}"));
                previous = Some(ratio);
            }
            Err(e) => c.error(&format!("m {m}: RLHF distortion"), &e),
        }
    }
    c.finish()
}

/// Minimizes the DPO loss directly over policy logits `theta`:
/// `-sum #(x>y) log sigma(lambda [(theta_x - log ref_x) - (theta_y - log ref_y)])`,
/// by cyclic one-coordinate Newton steps. Shares no code with the
/// Bradley-Terry fit.
pub fn dpo_loss_oracle(counts: &ComparisonCounts, pi_ref: &Policy, lambda: f64) -> Policy {
    let m = counts.m();
    let log_ref: Vec<f64> = pi_ref.probs().iter().map(|p| p.ln()).collect();
    let total: f64 =
        (0..m).flat_map(|x| (0..m).map(move |y| (x, y))).filter(|(x, y)| x != y).map(|(x, y)| counts.get(x, y) as f64).sum();
    let mut theta = log_ref.clone();
    for _ in 0..100_000 {
        let mut worst = 0.0f64;
        for x in 0..m {
            // Derivative and curvature of the loss in theta_x alone.
            let (mut g, mut h) = (0.0, 0.0);
            for y in (0..m).filter(|&y| y != x) {
                let (w, l) = (counts.get(x, y) as f64 / total, counts.get(y, x) as f64 / total);
                let z = lambda * ((theta[x] - log_ref[x]) - (theta[y] - log_ref[y]));
                let s = sigmoid(z);
                g += lambda * (l * s - w * (1.0 - s));
                h += lambda * lambda * (w + l) * s * (1.0 - s);
            }
            worst = worst.max(g.abs());
            if h > 0.0 {
                theta[x] -= g / h;
            }
        }
        if worst < 1e-14 {
            break;
        }
    }
    Policy::from_weights(softmax(&theta)).expect("softmax")
}

fn random_counts<R: Rng>(rng: &mut R, m: usize) -> ComparisonCounts {
    let rows = (0..m)
        .map(|x| (0..m).map(|y| if x == y { rng.random_range(0..5) } else { rng.random_range(1..=100) }).collect())
        .collect();
    ComparisonCounts::from_rows(rows).expect("square")
}

fn dpo_equivalence(seed: u64, exec: Exec) -> CriterionResult {
    let mut c = Checks::new(10, "DPO equals regularized RLHF");
    const CASES: usize = 100;
    for (li, lambda) in [0.1, 1.0, 10.0].into_iter().enumerate() {
        let res: Vec<Result<(f64, f64)>> = exec.map(CASES, |i| {
            let mut rng = rng_for(seed, 10, (li * CASES + i) as u64);
            let m = rng.random_range(2..=6);
            let counts = random_counts(&mut rng, m);
            let pi_ref = random_policy(&mut rng, m);
            let dpo = dpo_policy(&counts, &pi_ref, lambda, DEFAULT_MLE_TOL)?;
            let oracle = dpo_loss_oracle(&counts, &pi_ref, lambda);
            let rewards = fit_bt_mle(&counts, DEFAULT_RIDGE, DEFAULT_MLE_TOL)?;
            let closed = regularized_linear_max(rewards.values(), &pi_ref, lambda)?;
            Ok((dpo.tv_distance(&oracle), dpo.tv_distance(&closed)))
        });
        if let Some(Err(e)) = res.iter().find(|r| r.is_err()) {
            c.error(&format!("lambda {lambda}"), e);
        }
        let ok: Vec<(f64, f64)> = res.into_iter().filter_map(|r| r.ok()).collect();
        let worst_oracle = ok.iter().map(|v| v.0).fold(0.0, f64::max);
        let worst_closed = ok.iter().map(|v| v.1).fold(0.0, f64::max);
        c.check(worst_oracle <= 1e-6, format!("lambda {lambda}: max TV to direct DPO-loss minimizer {worst_oracle:.3e}"));
        c.check(worst_closed <= 1e-10, format!("lambda {lambda}: max TV to Gibbs policy of MLE rewards {worst_closed:.3e}"));
    }
    c.finish()
}

fn regularized_constrained(seed: u64, exec: Exec) -> CriterionResult {
    let mut c = Checks::new(11, "regularized and constrained forms agree");
    const CASES: usize = 100;
    let rlhf: Vec<Result<f64>> = exec.map(CASES, |i| {
        let mut rng = rng_for(seed, 11, i as u64);
        let m = rng.random_range(2..=8);
        let r: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let pi_ref = random_policy(&mut rng, m);
        let lambda = 10f64.powf(rng.random_range(-2.0..2.0));
        let pi = regularized_linear_max(&r, &pi_ref, lambda)?;
        let ball = KLBall::new(pi_ref.clone(), kl_div(&pi, &pi_ref))?;
        let constrained = linear_max_over_ball(&r, &ball, 1e-12)?;
        Ok((crate::math::dot(&r, pi.probs()) - crate::math::dot(&r, constrained.probs())).abs())
    });
    if let Some(Err(e)) = rlhf.iter().find(|r| r.is_err()) {
        c.error("linear round trip", e);
    }
    let worst = rlhf.iter().filter_map(|r| r.as_ref().ok()).copied().fold(0.0, f64::max);
    c.check(worst <= 1e-8, format!("linear objective: max objective gap {worst:.3e} over {CASES} cases"));

    let nlhf: Vec<Result<(f64, f64)>> = exec.map(CASES, |i| {
        let mut rng = rng_for(seed, 11, 1_000 + i as u64);
        let m = rng.random_range(2..=8);
        let margins = random_margins(&mut rng, m);
        let pi_ref = random_policy(&mut rng, m);
        let lambda = 10f64.powf(rng.random_range(-2.0..1.0));
        let pi = regularized_nlhf(&margins, &pi_ref, lambda)?;
        let ball = KLBall::new(pi_ref.clone(), kl_div(&pi, &pi_ref))?;
        let at_fixed_point = exploitability(&pi, &margins, &ball)?;
        let solved = nlhf_solve(&margins, &ball, 1e-7)?;
        Ok((at_fixed_point, solved.exploitability))
    });
    if let Some(Err(e)) = nlhf.iter().find(|r| r.is_err()) {
        c.error("game round trip", e);
    }
    let ok: Vec<(f64, f64)> = nlhf.into_iter().filter_map(|r| r.ok()).collect();
    let worst_fixed = ok.iter().map(|v| v.0).fold(0.0, f64::max);
    let worst_solved = ok.iter().map(|v| v.1).fold(0.0, f64::max);
    c.check(worst_fixed <= 1e-7, format!("game: max exploitability of regularized fixed points in their ball {worst_fixed:.3e}"));
    c.check(worst_solved <= 1e-7, format!("game: max exploitability of constrained re-solve {worst_solved:.3e}"));
    c.finish()
}

fn concentration(seed: u64, exec: Exec) -> CriterionResult {
    let mut c = Checks::new(12, "concentration slopes");
    let inst = reference_instance();
    let grid = [1_000, 10_000, 100_000, 1_000_000];
    for quantity in [Quantity::WinRates, Quantity::Borda] {
        match convergence_experiment(&inst, quantity, &grid, 2, 20, derive_seed(seed, 12), exec) {
            Ok(t) => {
                let errs: Vec<String> = t.rows.iter().map(|r| format!("{:.3e}", r.mean_error)).collect();
                c.check(
                    (-0.65..=-0.35).contains(&t.slope),
                    format!("{quantity:?}: slope {:.4}, mean errors [{}]", t.slope, errs.join(", ")),
                );
            }
            Err(e) => c.error(&format!("{quantity:?}"), &e),
        }
    }
    c.finish()
}

/// True when the equilibrium `pi` of `M` is the game's only one: strict
/// complementarity off the support and a nonsingular equalizer system on it.
pub fn equilibrium_is_unique(margins: &MarginMatrix, pi: &Policy) -> bool {
    let m = margins.m();
    let support: Vec<usize> = (0..m).filter(|&x| pi.probs()[x] > 1e-9).collect();
    let payoff = margins.apply_transpose(pi.probs());
    if (0..m).filter(|x| !support.contains(x)).any(|y| payoff[y] <= 1e-7) {
        return false;
    }
    let s = support.len();
    // [M_SS^T; 1^T] q = [0; 1] must have a unique solution.
    let mut a = DMatrix::zeros(s + 1, s);
    for (i, &y) in support.iter().enumerate() {
        for (j, &x) in support.iter().enumerate() {
            a[(i, j)] = margins.get(x, y);
        }
        a[(s, i)] = 1.0;
    }
    let sv = a.singular_values();
    sv.iter().copied().fold(f64::INFINITY, f64::min) > 1e-6
}

fn equilibrium_cross_oracle(seed: u64, exec: Exec) -> CriterionResult {
    let mut c = Checks::new(13, "equilibrium cross-oracle");
    const CASES: usize = 100;
    let res: Vec<Result<(f64, f64, Option<f64>)>> = exec.map(CASES, |i| {
        let mut rng = rng_for(seed, 13, i as u64);
        let m = rng.random_range(2..=8);
        let margins = random_margins(&mut rng, m);
        let ml = maximal_lotteries(&margins, 1e-9)?;
        let ball = KLBall::full_simplex(m);
        let nl = nlhf_solve(&margins, &ball, 1e-9)?;
        let tv = equilibrium_is_unique(&margins, &ml).then(|| ml.tv_distance(&nl.policy));
        Ok((exploitability_simplex(&ml, &margins), nl.exploitability, tv))
    });
    if let Some(Err(e)) = res.iter().find(|r| r.is_err()) {
        c.error("solve", e);
    }
    let ok: Vec<_> = res.into_iter().filter_map(|r| r.ok()).collect();
    let worst_ml = ok.iter().map(|v| v.0).fold(0.0, f64::max);
    let worst_nl = ok.iter().map(|v| v.1).fold(0.0, f64::max);
    let unique: Vec<f64> = ok.iter().filter_map(|v| v.2).collect();
    let worst_tv = unique.iter().copied().fold(0.0, f64::max);
    c.check(worst_ml <= 1e-9, format!("maximal lotteries: max exploitability {worst_ml:.3e}"));
    c.check(worst_nl <= 1e-9, format!("NLHF over the full simplex: max exploitability {worst_nl:.3e}"));
    c.check(worst_tv <= 1e-7, format!("{} verified-unique instances: max TV {worst_tv:.3e}", unique.len()));
    c.finish()
}

/// The Borda policy's selection on the lower-bound instance, used by the
/// supplementary check that smaller `mu(a) = mu(c)` let `c` win.
pub fn borda_lb_winner(beta: f64, mu: f64) -> Result<Policy> {
    let g = gen_borda_lb(beta, borda_gamma_star(beta), 1e-4, 1e-8, mu, mu)?;
    population_policy(&g.instance, Method::Borda, &KLBall::full_simplex(3), &Settings::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniqueness_oracle() {
        let rps = MarginMatrix::new(
            crate::matrix::Square::from_rows(vec![vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert!(equilibrium_is_unique(&rps, &Policy::uniform(3)));
        // Every policy is an equilibrium of the zero game.
        assert!(!equilibrium_is_unique(&MarginMatrix::zeros(3), &Policy::uniform(3)));
    }

    #[test]
    fn dpo_oracle_two_alternatives() {
        // Closed form: pi(0)/pi(1) = (ref0/ref1) (w/l)^(1/lambda).
        let counts = ComparisonCounts::from_rows(vec![vec![0, 6], vec![2, 0]]).unwrap();
        let pi_ref = Policy::new(vec![0.25, 0.75]).unwrap();
        let pi = dpo_loss_oracle(&counts, &pi_ref, 2.0);
        let odds = (0.25 / 0.75) * 3f64.sqrt();
        assert!((pi.probs()[0] - odds / (1.0 + odds)).abs() < 1e-10);
    }
}
