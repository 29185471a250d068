//! `align-distort`: generate instances, run distortion experiments and the
//! verification suites from the command line.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use align_distort::distortion::{
    borda_bound, convergence_experiment, distortion_empirical, distortion_population, empirical_policy, nlhf_bound,
    population_policy, DistortionReport, Method, Quantity, Settings,
};
use align_distort::instances::{
    borda_gamma_star, borda_lb_factor, gen_borda_lb, gen_rlhf_lb, gen_unbounded_seq, gen_universal_lb,
};
use align_distort::io::{read_counts, read_instance, write_instance};
use align_distort::mle::{fit_bt_mle, fit_bt_mle_population, log_likelihood, DEFAULT_MLE_TOL, DEFAULT_RIDGE};
use align_distort::model::{avg_util, avg_util_policy, expected_win_rates};
use align_distort::policy_opt::{dpo_policy, kl_div, optimal_policy, KLBall, DEFAULT_POLICY_TOL};
use align_distort::rules::{borda_scores, DEFAULT_TIE_TOL};
use align_distort::sampling::{empirical_win_rates, sample_comparisons_with};
use align_distort::verify::{render_text, run_suite, Suite};
use align_distort::{ComparisonCounts, Exec, Instance, Policy, WinRates};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use config::{Format, Options, RunMode};
use output::{emit, num, opt_num, pretty_json, render, Report};

#[derive(Debug, Parser)]
#[command(name = "align-distort", version, about = "Distortion of preference-aggregation and alignment methods")]
struct Cli {
    /// JSON file with any of the long options as keys; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a lower-bound construction as `<out>.instance.json` plus
    /// `<out>.analytics.json`.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[command(flatten)]
        opts: Options,
    },
    /// Distortion experiments; see --mode.
    Run {
        #[command(flatten)]
        opts: Options,
    },
    /// Run an acceptance suite; exits nonzero if any criterion fails.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteArg,
        #[command(flatten)]
        opts: Options,
    },
    /// Expected win-rates of an instance, or empirical ones from --counts
    /// (or from --n sampled users).
    Winrates {
        #[command(flatten)]
        opts: Options,
    },
    /// Bradley-Terry rewards fitted to --counts, or to the population limit of
    /// --instance.
    Mle {
        #[command(flatten)]
        opts: Options,
    },
    /// One method's output policy from --instance (population) or --counts.
    Policy {
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    UniversalLb,
    BordaLb,
    RlhfLb,
    UnboundedSeq,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Sandwich,
    Equivalences,
    Bounds,
    Lowerbounds,
    Convergence,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Sandwich => Suite::Sandwich,
            SuiteArg::Equivalences => Suite::Equivalences,
            SuiteArg::Bounds => Suite::Bounds,
            SuiteArg::Lowerbounds => Suite::Lowerbounds,
            SuiteArg::Convergence => Suite::Convergence,
            SuiteArg::All => Suite::All,
        }
    }
}

/// A command failure that has already been reported on stdout, such as a
/// failed verification.
#[derive(Debug)]
struct Reported(serde_json::Value);

impl std::fmt::Display for Reported {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for Reported {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match init_threads().and_then(|()| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = match e.downcast_ref::<Reported>() {
                Some(r) => r.0.clone(),
                None => json!({ "error": format!("{e:#}") }),
            };
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ALIGN_DISTORT_THREADS") {
        let n: usize = v.parse().with_context(|| format!("ALIGN_DISTORT_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Gen { kind, opts } => {
            let opts = Options::merged("gen", &opts, config)?;
            cmd_gen(kind, &opts)
        }
        Command::Verify { suite, opts } => {
            let opts = Options::merged("verify", &opts, config)?;
            cmd_verify(suite.into(), &opts)
        }
        Command::Run { opts } => table_command("run", &opts, config, cmd_run),
        Command::Winrates { opts } => table_command("winrates", &opts, config, cmd_winrates),
        Command::Mle { opts } => table_command("mle", &opts, config, cmd_mle),
        Command::Policy { opts } => table_command("policy", &opts, config, cmd_policy),
    }
}

fn table_command(name: &str, flags: &Options, config: Option<&Path>, f: fn(&Options) -> Result<Report>) -> Result<()> {
    let opts = Options::merged(name, flags, config)?;
    let report = f(&opts)?;
    emit(&render(&report, &opts, opts.format.unwrap_or(Format::Csv))?, opts.out.as_deref())
}

fn settings(opts: &Options) -> Settings {
    Settings {
        tol: opts.tol.unwrap_or(DEFAULT_POLICY_TOL),
        tie_tol: DEFAULT_TIE_TOL,
        ridge: opts.ridge.unwrap_or(DEFAULT_RIDGE),
        exec: Exec::Parallel,
    }
}

fn need<T: Copy>(value: Option<T>, flag: &str, what: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("--{flag} is required ({what})"))
}

/// `uniform`, comma-separated probabilities, or `@file` holding a JSON array
/// or a saved ball `{"pi_ref": [...], "tau": ...}`. `tau` defaults to the
/// saved value, then to `log m`, which covers the simplex when the reference
/// is uniform.
fn ball(opts: &Options, m: usize) -> Result<KLBall> {
    let spec = opts.pi_ref.as_deref().unwrap_or("uniform");
    let (pi_ref, saved_tau) = if spec == "uniform" {
        (Policy::uniform(m), None)
    } else if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading reference policy {path}"))?;
        match serde_json::from_str::<KLBall>(&text) {
            Ok(b) => (b.pi_ref().clone(), Some(b.tau())),
            Err(_) => {
                (serde_json::from_str::<Policy>(&text).with_context(|| format!("invalid reference policy in {path}"))?, None)
            }
        }
    } else {
        let probs = spec
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad --pi-ref entry {v:?}")))
            .collect::<Result<Vec<_>>>()?;
        (Policy::new(probs)?, None)
    };
    if pi_ref.m() != m {
        bail!("--pi-ref has {} entries but the instance has {m} alternatives", pi_ref.m());
    }
    let tau = opts.tau.or(saved_tau).unwrap_or((m as f64).ln());
    Ok(KLBall::new(pi_ref, tau)?)
}

fn methods(opts: &Options) -> Result<Vec<Method>> {
    match &opts.method {
        None => Ok(Method::ALL.to_vec()),
        Some(list) => list.split(',').map(|s| Ok(s.trim().parse::<Method>()?)).collect(),
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

const DISTORTION_COLUMNS: [&str; 16] = [
    "method",
    "mode",
    "beta",
    "tau",
    "optimal_util",
    "method_util",
    "ratio",
    "std_err",
    "n",
    "d",
    "trials",
    "seed",
    "nlhf_bound",
    "kl",
    "in_ball",
    "policy",
];

/// Borda and maximal lotteries ignore the ball, so their output can fall
/// outside it; `kl` and `in_ball` make that visible.
fn distortion_row(r: &DistortionReport, beta: f64, ball: &KLBall) -> Vec<String> {
    let kl = r.policy.as_ref().map(|p| kl_div(p, ball.pi_ref()));
    if kl.is_some_and(|kl| kl > ball.tau() + 1e-8) {
        log::warn!("{} output lies outside the KL ball (KL {:?} > tau {})", r.method, kl, ball.tau());
    }
    vec![
        r.method.to_string(),
        format!("{:?}", r.mode).to_lowercase(),
        num(beta),
        num(ball.tau()),
        num(r.optimal_util),
        num(r.method_util),
        opt_num(r.ratio),
        num(r.std_err),
        r.n.to_string(),
        r.d.to_string(),
        r.trials.to_string(),
        r.seed.to_string(),
        num(nlhf_bound(beta)),
        opt_num(kl),
        kl.map(|kl| (kl <= ball.tau() + 1e-8).to_string()).unwrap_or_default(),
        r.policy.as_ref().map(|p| join(p.probs())).unwrap_or_default(),
    ]
}

fn cmd_run(opts: &Options) -> Result<Report> {
    let mode = opts.mode.unwrap_or(RunMode::Population);
    if mode == RunMode::BoundCurves {
        return bound_curves(opts);
    }
    let inst = read_instance(opts.require_instance()?)?;
    let settings = settings(opts);
    let seed = opts.seed.unwrap_or(0);
    match mode {
        RunMode::Population | RunMode::Empirical => {
            let ball = ball(opts, inst.m())?;
            let mut results = Vec::new();
            for method in methods(opts)? {
                let r = if mode == RunMode::Population {
                    distortion_population(&inst, method, &ball, &settings)?
                } else {
                    let n = need(opts.n, "n", "users per dataset")?;
                    let d = opts.d.unwrap_or(1);
                    distortion_empirical(&inst, method, &ball, n, d, opts.trials.unwrap_or(20), seed, &settings)?
                };
                log::info!("{method}: ratio {:?}", r.ratio);
                results.push(r);
            }
            let mut report = Report::new(DISTORTION_COLUMNS.to_vec(), &results)?;
            for r in &results {
                report.row(distortion_row(r, inst.beta(), &ball));
            }
            Ok(report)
        }
        RunMode::BetaSweep => {
            let betas = opts.betas.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0]);
            let mut results = Vec::new();
            let mut rows = Vec::new();
            for &beta in &betas {
                let inst = inst.with_beta(beta)?;
                let ball = ball(opts, inst.m())?;
                for method in methods(opts)? {
                    let r = distortion_population(&inst, method, &ball, &settings)?;
                    rows.push(distortion_row(&r, beta, &ball));
                    results.push(json!({ "beta": beta, "report": r }));
                }
            }
            let mut report = Report::new(DISTORTION_COLUMNS.to_vec(), results)?;
            rows.into_iter().for_each(|r| report.row(r));
            Ok(report)
        }
        RunMode::Convergence => {
            let quantity: Quantity = opts.quantity.as_deref().unwrap_or("win_rates").parse()?;
            let grid = opts.n_grid.clone().unwrap_or_else(|| vec![100, 1_000, 10_000, 100_000]);
            let d = opts.d.unwrap_or(1);
            let table = convergence_experiment(&inst, quantity, &grid, d, opts.trials.unwrap_or(20), seed, settings.exec)?;
            let mut report = Report::new(vec!["n", "d", "trials", "mean_error", "std_err", "slope"], &table)?;
            for row in &table.rows {
                report.row(vec![
                    row.n.to_string(),
                    d.to_string(),
                    table.trials.to_string(),
                    num(row.mean_error),
                    num(row.std_err),
                    num(table.slope),
                ]);
            }
            Ok(report)
        }
        RunMode::BoundCurves => unreachable!(),
    }
}

/// Upper bound for NLHF next to the Borda lower-bound factor at its best
/// `gamma`, each also as a fraction of `beta`.
fn bound_curves(opts: &Options) -> Result<Report> {
    let betas = opts.betas.clone().unwrap_or_else(|| (1..=100).map(|i| i as f64 * 0.5).collect());
    let mut report = Report::new(
        vec!["beta", "nlhf_bound", "nlhf_bound_over_beta", "gamma_star", "borda_lb_factor", "borda_lb_over_beta", "borda_bound"],
        json!([]),
    )?;
    let mut results = Vec::new();
    for &beta in &betas {
        if beta.is_nan() || beta <= 0.0 {
            bail!("--betas must be positive, got {beta}");
        }
        let gamma = borda_gamma_star(beta);
        let (upper, lower) = (nlhf_bound(beta), borda_lb_factor(beta, gamma));
        report.row(vec![
            num(beta),
            num(upper),
            num(upper / beta),
            num(gamma),
            num(lower),
            num(lower / beta),
            num(borda_bound(beta)),
        ]);
        results.push(json!({
            "beta": beta, "nlhf_bound": upper, "gamma_star": gamma, "borda_lb_factor": lower, "borda_bound": borda_bound(beta),
        }));
    }
    report.results = json!(results);
    Ok(report)
}

/// Counts from --counts, or sampled from --instance when --n is given.
fn counts_source(opts: &Options, inst: Option<&Instance>) -> Result<Option<ComparisonCounts>> {
    if let Some(path) = &opts.counts {
        return Ok(Some(read_counts(path)?));
    }
    match (inst, opts.n) {
        (Some(inst), Some(n)) => {
            Ok(Some(sample_comparisons_with(inst, n, opts.d.unwrap_or(1), opts.seed.unwrap_or(0), Exec::Parallel)?))
        }
        _ => Ok(None),
    }
}

fn load_instance(opts: &Options) -> Result<Option<Instance>> {
    opts.instance.as_deref().map(read_instance).transpose().map_err(Into::into)
}

fn cmd_winrates(opts: &Options) -> Result<Report> {
    let inst = load_instance(opts)?;
    let (rates, scores): (WinRates, Option<Vec<f64>>) = match counts_source(opts, inst.as_ref())? {
        Some(counts) => (empirical_win_rates(&counts), Some(borda_scores(&counts).scores)),
        None => {
            let inst = inst.ok_or_else(|| anyhow!("--instance or --counts is required"))?;
            (expected_win_rates(&inst), None)
        }
    };
    let m = rates.m();
    let mut report = Report::new(vec!["x", "y", "win_rate"], json!({ "win_rates": rates, "borda_scores": scores }))?;
    for x in 0..m {
        for y in 0..m {
            report.row(vec![x.to_string(), y.to_string(), num(rates.get(x, y))]);
        }
    }
    Ok(report)
}

fn cmd_mle(opts: &Options) -> Result<Report> {
    let inst = load_instance(opts)?;
    let tol = opts.tol.unwrap_or(DEFAULT_MLE_TOL);
    let (rewards, ll) = match counts_source(opts, inst.as_ref())? {
        Some(counts) => {
            let r = fit_bt_mle(&counts, opts.ridge.unwrap_or(DEFAULT_RIDGE), tol)?;
            let ll = log_likelihood(&counts, r.values());
            (r, Some(ll))
        }
        None => {
            let inst = inst.ok_or_else(|| anyhow!("--instance or --counts is required"))?;
            (fit_bt_mle_population(&expected_win_rates(&inst), inst.pairs(), tol)?, None)
        }
    };
    let mut report = Report::new(vec!["alternative", "reward"], json!({ "rewards": rewards.values(), "log_likelihood": ll }))?;
    for (x, r) in rewards.values().iter().enumerate() {
        report.row(vec![x.to_string(), num(*r)]);
    }
    Ok(report)
}

/// `--method` also accepts `optimal` (the benchmark) and `dpo` (the
/// regularized closed form; needs --lambda and counts).
fn cmd_policy(opts: &Options) -> Result<Report> {
    let inst = load_instance(opts)?;
    let counts = counts_source(opts, inst.as_ref())?;
    let m = inst.as_ref().map(Instance::m).or(counts.as_ref().map(ComparisonCounts::m));
    let m = m.ok_or_else(|| anyhow!("--instance or --counts is required"))?;
    let ball = ball(opts, m)?;
    let settings = settings(opts);
    let name = opts.method.as_deref().ok_or_else(|| anyhow!("--method is required"))?;
    let pi = match (name, &counts, &inst) {
        ("optimal", _, Some(inst)) => optimal_policy(inst, &ball, settings.tol)?,
        ("optimal", _, None) => bail!("the optimal policy needs --instance"),
        ("dpo", Some(counts), _) => {
            let lambda = need(opts.lambda, "lambda", "DPO regularization strength")?;
            dpo_policy(counts, ball.pi_ref(), lambda, settings.tol)?
        }
        ("dpo", None, _) => bail!("dpo needs --counts or --instance with --n"),
        (_, Some(counts), _) => {
            let pairs = match &inst {
                Some(inst) => inst.pairs().clone(),
                None => align_distort::PairDistribution::uniform_mu(m),
            };
            empirical_policy(counts, &pairs, name.parse()?, &ball, &settings)?
        }
        (_, None, Some(inst)) => population_policy(inst, name.parse()?, &ball, &settings)?,
        (_, None, None) => unreachable!(),
    };
    if pi.m() != m {
        bail!("policy has {} entries, expected {m}", pi.m());
    }
    let utils = inst.as_ref().map(avg_util);
    let value = inst.as_ref().map(|inst| avg_util_policy(inst, &pi));
    let kl = kl_div(&pi, ball.pi_ref());
    let mut report = Report::new(
        vec!["alternative", "probability", "avg_util"],
        json!({ "method": name, "policy": pi, "avg_util": value, "kl": kl, "tau": ball.tau() }),
    )?;
    for (x, p) in pi.probs().iter().enumerate() {
        report.row(vec![x.to_string(), num(*p), opt_num(utils.as_ref().map(|u| u[x]))]);
    }
    Ok(report)
}

fn cmd_verify(suite: Suite, opts: &Options) -> Result<()> {
    let report = run_suite(suite, opts.seed.unwrap_or(0), Exec::Parallel);
    let bytes = match opts.format {
        Some(Format::Json) => {
            let doc = json!({ "schema_version": output::SCHEMA_VERSION, "config": opts, "results": report });
            pretty_json(&doc)?
        }
        _ => render_text(&report).into_bytes(),
    };
    emit(&bytes, opts.out.as_deref())?;
    let failures = report.failures();
    if failures.is_empty() {
        Ok(())
    } else {
        let names: Vec<_> = report.criteria.iter().filter(|c| !c.passed).map(|c| json!({ "id": c.id, "name": c.name })).collect();
        Err(Reported(json!({ "error": "verification failed", "failures": names })).into())
    }
}

fn cmd_gen(kind: GenKind, opts: &Options) -> Result<()> {
    let prefix = opts.out.clone().unwrap_or_else(|| PathBuf::from(kind_name(kind)));
    let beta = need(opts.beta, "beta", "inverse temperature")?;
    let eps = opts.eps.unwrap_or(1e-3);
    let write = |suffix: &str, bytes: Vec<u8>| -> Result<PathBuf> {
        let path = with_suffix(&prefix, suffix);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    };
    let envelope = |analytics: serde_json::Value| json!({ "schema_version": output::SCHEMA_VERSION, "config": opts, "analytics": analytics });

    let (inst, ball, analytics) = match kind {
        GenKind::UniversalLb => {
            let m = need(opts.m, "m", "number of alternatives")?;
            let g = gen_universal_lb(m, beta, eps, opts.xi.unwrap_or(1.0))?;
            (g.instance, g.ball, serde_json::to_value(g.analytics)?)
        }
        GenKind::BordaLb => {
            let gamma = opts.gamma.unwrap_or_else(|| borda_gamma_star(beta));
            let g = gen_borda_lb(
                beta,
                gamma,
                eps,
                opts.eps_prime.unwrap_or(eps * eps),
                opts.mu_a.unwrap_or(1e-3),
                opts.mu_c.unwrap_or(0.5),
            )?;
            (g.instance, g.ball, serde_json::to_value(g.analytics)?)
        }
        GenKind::RlhfLb => {
            let log_eps = opts.log_eps.or(opts.eps.map(f64::ln));
            let g = gen_rlhf_lb(beta, opts.m, log_eps, opts.tau)?;
            (g.instance, g.ball, serde_json::to_value(g.analytics)?)
        }
        GenKind::UnboundedSeq => {
            let g = gen_unbounded_seq(beta, opts.m.unwrap_or(14), eps)?;
            let mut report = Report::new(
                vec!["index", "avg_util", "dropped", "delta", "delta_prime", "avg_util_bound", "win_rate_over_previous"],
                json!([]),
            )?;
            for s in &g.analytics.steps {
                report.row(vec![
                    s.index.to_string(),
                    num(s.avg_util),
                    s.dropped.map(|k| k.to_string()).unwrap_or_default(),
                    opt_num(s.delta),
                    opt_num(s.delta_prime),
                    opt_num(s.avg_util_bound),
                    opt_num(s.win_rate_over_previous),
                ]);
            }
            write("sequence.csv", render(&report, opts, Format::Csv)?)?;
            (g.instance, g.ball, serde_json::to_value(g.analytics)?)
        }
    };

    let inst_path = with_suffix(&prefix, "instance.json");
    write_instance(&inst_path, &inst)?;
    write("analytics.json", pretty_json(&envelope(analytics.clone()))?)?;
    if let Some(ball) = &ball {
        write("ball.json", pretty_json(ball)?)?;
    }
    print!("{}", gen_summary(kind, &inst, ball.as_ref(), &analytics, &prefix));
    Ok(())
}

fn kind_name(kind: GenKind) -> &'static str {
    match kind {
        GenKind::UniversalLb => "universal-lb",
        GenKind::BordaLb => "borda-lb",
        GenKind::RlhfLb => "rlhf-lb",
        GenKind::UnboundedSeq => "unbounded-seq",
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Human-readable summary, recomputed from the instance where possible.
fn gen_summary(kind: GenKind, inst: &Instance, ball: Option<&KLBall>, analytics: &serde_json::Value, prefix: &Path) -> String {
    let rates = expected_win_rates(inst);
    let m = inst.m();
    let mut dev: f64 = 0.0;
    for x in 0..m {
        for y in 0..m {
            dev = dev.max((rates.get(x, y) - 0.5).abs());
        }
    }
    let utils = avg_util(inst);
    let mut out = format!("{}: m = {m}, beta = {}\n", kind_name(kind), inst.beta());
    out += &format!("max |p(x > y) - 1/2| = {dev:.3e}\n");
    if dev <= 1e-12 {
        out += "all expected win-rates are 1/2\n";
    }
    let shown = m.min(8);
    out += &format!(
        "average utility: {}{}\n",
        utils[..shown].iter().map(|u| format!("{u:.6}")).collect::<Vec<_>>().join(" "),
        if m > shown { " ..." } else { "" }
    );
    let pick = |key: &str| analytics.get(key).map(|v| format!("{key} = {v}\n")).unwrap_or_default();
    match kind {
        GenKind::UniversalLb => out += &pick("ratio_floor"),
        GenKind::BordaLb => {
            out += &pick("ratio");
            out += &pick("limit_factor");
            out += &pick("gamma_star");
        }
        GenKind::RlhfLb => {
            out += &pick("delta");
            out += &pick("log_eps");
            out += &pick("borda_gap_bound");
        }
        GenKind::UnboundedSeq => {
            let monotone = utils.windows(2).all(|w| w[1] < w[0]);
            out += &format!("average utility strictly decreasing: {monotone}\n");
        }
    }
    if let Some(ball) = ball {
        out += &format!("ball: tau = {}\n", ball.tau());
    }
    out += &format!("wrote {}.instance.json and {}.analytics.json\n", prefix.display(), prefix.display());
    out
}
