//! Named lower-bound constructions and random instance families.
//!
//! Each generator returns the instance together with the quantities its
//! construction predicts, so callers can check the predictions against
//! independent recomputation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{nlhf_bound, sigmoid};
use crate::matrix::Square;
use crate::mle::{fit_bt_mle_population, DEFAULT_MLE_TOL};
use crate::model::{avg_util, expected_win_rates, Component, Instance, PairDistribution, Policy, UtilityMixture, WeightedPair};
use crate::policy_opt::KLBall;
use crate::rules::MarginMatrix;

/// A generated instance, an optional KL ball, and the construction's claims.
#[derive(Debug, Clone)]
pub struct Generated<A> {
    pub instance: Instance,
    pub ball: Option<KLBall>,
    pub analytics: A,
}

/// Mixture weight of the type that loves the first alternative in the
/// universal and Borda constructions: `(s(b e) - 1/2) / (s(b) + s(b e) - 1)`.
fn balancing_weight(beta: f64, eps: f64) -> f64 {
    (sigmoid(beta * eps) - 0.5) / (sigmoid(beta) + sigmoid(beta * eps) - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalLbAnalytics {
    pub m: usize,
    pub beta: f64,
    pub eps: f64,
    pub xi: f64,
    /// Weight of the component that only values alternative 0.
    pub weight_first: f64,
    pub avg_util_first: f64,
    pub avg_util_other: f64,
    /// Lower bound on the ratio between the best alternative's utility and
    /// the utility of any rule that cannot tell the alternatives apart.
    pub ratio_floor: f64,
}

/// `m` alternatives: one type values only alternative 0, the other values
/// every other alternative at `xi * eps`. With `xi = 1` every expected
/// win-rate is exactly 1/2.
pub fn gen_universal_lb(m: usize, beta: f64, eps: f64, xi: f64) -> Result<Generated<UniversalLbAnalytics>> {
    if m < 2 {
        return Err(Error::Infeasible(format!("need m >= 2, got {m}")));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::Infeasible(format!("eps must lie in (0, 1/2], got {eps}")));
    }
    if !(1.0..2.0).contains(&xi) {
        return Err(Error::Infeasible(format!("xi must lie in [1, 2), got {xi}")));
    }
    if !(beta > 0.0) {
        return Err(Error::Infeasible(format!("beta must be positive, got {beta}")));
    }
    let w = balancing_weight(beta, eps);
    let mut first = vec![0.0; m];
    first[0] = 1.0;
    let mut rest = vec![xi * eps; m];
    rest[0] = 0.0;
    let mixture = UtilityMixture::new(vec![Component { weight: w, utils: first }, Component { weight: 1.0 - w, utils: rest }])?;
    let instance = Instance::new(mixture, beta, PairDistribution::uniform_mu(m))?;
    let ratio_floor = 1.0 / (1.0 / m as f64 + xi * eps * (sigmoid(beta) - 0.5) / (sigmoid(beta * eps) - 0.5));
    let analytics = UniversalLbAnalytics {
        m,
        beta,
        eps,
        xi,
        weight_first: w,
        avg_util_first: w,
        avg_util_other: (1.0 - w) * xi * eps,
        ratio_floor,
    };
    Ok(Generated { instance, ball: None, analytics })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BordaLbAnalytics {
    pub beta: f64,
    pub gamma: f64,
    pub eps: f64,
    pub eps_prime: f64,
    pub weights: [f64; 3],
    /// `AvgUtil(a) / AvgUtil(c)`.
    pub ratio: f64,
    /// [`borda_lb_factor`], the ratio's limit as `eps -> 0`.
    pub limit_factor: f64,
    pub gamma_star: f64,
}

/// The `gamma` that maximizes the Borda lower-bound factor.
pub fn borda_gamma_star(beta: f64) -> f64 {
    let inner = 1.0 - 4.0 * (sigmoid(beta) - 0.5) / beta;
    2.0 / beta * inner.max(0.0).sqrt().atanh()
}

/// The Borda lower-bound ratio as `eps -> 0`:
/// `nlhf_bound(beta) * (1 - gamma + (s(beta gamma) - 1/2) / (s(beta) - 1/2))`.
pub fn borda_lb_factor(beta: f64, gamma: f64) -> f64 {
    nlhf_bound(beta) * (1.0 - gamma + (sigmoid(beta * gamma) - 0.5) / (sigmoid(beta) - 0.5))
}

/// Three alternatives `(a, b, c)` where Borda's winner `c` is worth far less
/// than `a`. Types: `(1 - gamma, 1, 0)`, `(1, 0, eps)`, `(0, 0, eps + eps')`.
pub fn gen_borda_lb(
    beta: f64,
    gamma: f64,
    eps: f64,
    eps_prime: f64,
    mu_a: f64,
    mu_c: f64,
) -> Result<Generated<BordaLbAnalytics>> {
    if !(beta > 0.0) {
        return Err(Error::Infeasible(format!("beta must be positive, got {beta}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Infeasible(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Infeasible(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(eps_prime >= 0.0 && eps_prime < 1.0 - eps) {
        return Err(Error::Infeasible(format!("eps' must lie in [0, 1 - eps), got {eps_prime}")));
    }
    if !(mu_a > 0.0 && mu_c > 0.0 && mu_a + mu_c < 1.0) {
        return Err(Error::Infeasible(format!("mu(a) = {mu_a}, mu(c) = {mu_c} leave no mass for b")));
    }
    let pa = balancing_weight(beta, eps);
    let pb = pa * (sigmoid(beta * gamma) - 0.5) / (sigmoid(beta) - 0.5);
    let pc = 1.0 - pa - pb;
    if !(pc > 0.0) {
        return Err(Error::Infeasible(format!("type weights {pa} + {pb} reach 1")));
    }
    let mixture = UtilityMixture::new(vec![
        Component { weight: pa, utils: vec![1.0 - gamma, 1.0, 0.0] },
        Component { weight: pb, utils: vec![1.0, 0.0, eps] },
        Component { weight: pc, utils: vec![0.0, 0.0, eps + eps_prime] },
    ])?;
    let mu = vec![mu_a, 1.0 - mu_a - mu_c, mu_c];
    let instance = Instance::new(mixture, beta, PairDistribution::ProductOfMu { mu })?;
    let ratio = (pa * (1.0 - gamma) + pb) / (pb * eps + pc * (eps + eps_prime));
    let limit_factor = borda_lb_factor(beta, gamma);
    let analytics = BordaLbAnalytics {
        beta,
        gamma,
        eps,
        eps_prime,
        weights: [pa, pb, pc],
        ratio,
        limit_factor,
        gamma_star: borda_gamma_star(beta),
    };
    Ok(Generated { instance, ball: None, analytics })
}

/// Largest `m` the RLHF construction will build.
pub const RLHF_LB_MAX_M: usize = 5000;
/// Floor on `ln eps` for the RLHF construction; the proof's threshold can be
/// far below what a double represents.
pub const RLHF_LB_LOG_EPS_FLOOR: f64 = -500.0;

/// Smallest `m` with `m - 2 >= 4 e^beta`.
pub fn rlhf_lb_min_m(beta: f64) -> usize {
    (4.0 * beta.exp()).ceil() as usize + 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlhfLbAnalytics {
    pub beta: f64,
    pub m: usize,
    pub m_min: usize,
    pub delta: f64,
    pub tau: f64,
    /// Lower bound on `BC*(b) - BC*(a)` from the construction's chain of
    /// inequalities; the claim is that the gap is at least `1 / m`.
    pub borda_gap_bound: f64,
    pub borda_gap_claim: f64,
    /// Population MLE rewards of `a` and `b`, shifted so the `c` block is 0.
    pub reward_a: f64,
    pub reward_b: f64,
    pub avg_util_a: f64,
    pub avg_util_b: f64,
    pub eta1: f64,
    /// `None` when `AvgUtil(a) <= AvgUtil(b)`, where the bound is vacuous.
    pub eta2: Option<f64>,
    /// `-2 / min(eta1, eta2)`: the proof needs `ln eps` below this.
    pub log_eps_threshold: f64,
    pub log_eps: f64,
    /// `true` when `log_eps` was raised to the representable floor.
    pub eps_clamped: bool,
    /// `2 / ln(1 / eps)`: bound on the `c`-block mass of any ball policy.
    pub c_mass_bound: f64,
}

/// Alternatives `a, b, c_1 .. c_{m-2}` (indices 0, 1, 2..). A minority
/// (weight `delta = 10 / (10 + e^beta)`) values only `b`; the majority values
/// every `c_i` at 1 and `a` at `1 / beta`. The reference policy puts nearly
/// all mass on `a` and `b`, so RLHF is forced to choose between them, and
/// chooses `b`.
///
/// `m` defaults to the smallest admissible value, `log_eps` to the proof's
/// threshold (raised to [`RLHF_LB_LOG_EPS_FLOOR`]), `tau` to 1.
pub fn gen_rlhf_lb(beta: f64, m: Option<usize>, log_eps: Option<f64>, tau: Option<f64>) -> Result<Generated<RlhfLbAnalytics>> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Infeasible(format!("beta must be positive, got {beta}")));
    }
    if beta < 1.0 {
        return Err(Error::Infeasible(format!("beta = {beta} gives utility 1/beta above 1; use beta >= 1")));
    }
    let m_min = rlhf_lb_min_m(beta);
    if m_min > RLHF_LB_MAX_M {
        return Err(Error::Infeasible(format!(
            "beta = {beta} needs m >= {m_min} alternatives, above the supported maximum {RLHF_LB_MAX_M}; use beta <= 7"
        )));
    }
    let m = m.unwrap_or(m_min);
    if m < m_min || m > RLHF_LB_MAX_M {
        return Err(Error::Infeasible(format!("m = {m} must lie in [{m_min}, {RLHF_LB_MAX_M}] for beta = {beta}")));
    }
    let tau = tau.unwrap_or(1.0);
    let delta = 10.0 / (10.0 + beta.exp());
    let mut minority = vec![0.0; m];
    minority[1] = 1.0;
    let mut majority = vec![1.0; m];
    majority[0] = 1.0 / beta;
    majority[1] = 0.0;
    let mixture = UtilityMixture::new(vec![
        Component { weight: delta, utils: minority },
        Component { weight: 1.0 - delta, utils: majority },
    ])?;
    let pairs = PairDistribution::uniform_mu(m);
    let instance = Instance::new(mixture, beta, pairs.clone())?;

    let rewards = fit_bt_mle_population(&expected_win_rates(&instance), &pairs, DEFAULT_MLE_TOL)?;
    let r = rewards.values();
    let (ra, rb) = (r[0] - r[2], r[1] - r[2]);
    let au = avg_util(&instance);
    let (ua, ub) = (au[0], au[1]);
    let e = (-beta).exp();
    let eta1 = e / (1.0 + rb.abs() / (rb - ra).abs());
    let eta2 = (ua > ub).then(|| e / (1.0 + ua / (ua - ub)));
    let log_eps_threshold = -2.0 / eta2.map_or(eta1, |e2| eta1.min(e2));
    let (log_eps, eps_clamped) = match log_eps {
        Some(l) if l < 0.0 => (l, false),
        Some(l) => return Err(Error::Infeasible(format!("ln eps must be negative, got {l}"))),
        None if log_eps_threshold < RLHF_LB_LOG_EPS_FLOOR => (RLHF_LB_LOG_EPS_FLOOR, true),
        None => (log_eps_threshold, false),
    };
    let eps = log_eps.exp();
    let mut reference = vec![(1.0 - eps) / 2.0; 2];
    reference.extend(std::iter::repeat_n(eps / (m - 2) as f64, m - 2));
    // Normalizing keeps the sum within rounding of 1 for tiny eps.
    let ball = KLBall::new(Policy::from_weights(reference)?, tau)?;
    let mf = m as f64;
    let analytics = RlhfLbAnalytics {
        beta,
        m,
        m_min,
        delta,
        tau,
        borda_gap_bound: (mf - 2.0) / mf * delta * (1.0 / 3.0 - std::f64::consts::E / 10.0) - 1.0 / mf,
        borda_gap_claim: 1.0 / mf,
        reward_a: ra,
        reward_b: rb,
        avg_util_a: ua,
        avg_util_b: ub,
        eta1,
        eta2,
        log_eps_threshold,
        log_eps,
        eps_clamped,
        c_mass_bound: 2.0 / -log_eps,
    };
    Ok(Generated { instance, ball: Some(ball), analytics })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceStep {
    pub index: usize,
    pub avg_util: f64,
    /// The component whose utility was reset to 0 at this step.
    pub dropped: Option<usize>,
    pub delta: Option<f64>,
    pub delta_prime: Option<f64>,
    /// Upper bound on this step's average utility from the previous one.
    pub avg_util_bound: Option<f64>,
    /// `p(a_t > a_{t-1})` predicted from `delta` and `delta_prime`.
    pub win_rate_over_previous: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnboundedSeqAnalytics {
    pub beta: f64,
    pub m: usize,
    pub eps: f64,
    pub steps: Vec<SequenceStep>,
}

/// `ln((e^{d/2} + 1)^3 / (2 (e^d + 3)))`, written as
/// `d/2 - ln(1 + tanh(d/4)^3)` so it is exact for large `d`.
pub fn sequence_increment(d: f64) -> f64 {
    d / 2.0 - (d / 4.0).tanh().powi(3).ln_1p()
}

/// A chain `a_1, ..., a_m` over a uniform mixture of three types in which
/// each alternative beats its predecessor while its average utility drops.
/// Adjacent pairs carry `1 - eps` of the comparison mass.
pub fn gen_unbounded_seq(beta: f64, m: usize, eps: f64) -> Result<Generated<UnboundedSeqAnalytics>> {
    if !(beta > 0.0) || m < 2 || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Infeasible(format!("need beta > 0, m >= 2, 0 < eps < 1; got {beta}, {m}, {eps}")));
    }
    let mut utils = vec![vec![0.0; m]; 3];
    utils.iter_mut().for_each(|u| u[0] = 1.0 / 3.0);
    let mut steps = vec![SequenceStep {
        index: 0,
        avg_util: 1.0 / 3.0,
        dropped: None,
        delta: None,
        delta_prime: None,
        avg_util_bound: None,
        win_rate_over_previous: None,
    }];
    for t in 1..m {
        let prev: Vec<f64> = utils.iter().map(|u| u[t - 1]).collect();
        let top = (0..3).fold(0, |best, k| if prev[k] > prev[best] { k } else { best });
        let d = beta * prev[top];
        let dp = sequence_increment(d);
        for k in 0..3 {
            utils[k][t] = if k == top { 0.0 } else { prev[k] + dp / beta };
        }
        let prev_avg = steps[t - 1].avg_util;
        steps.push(SequenceStep {
            index: t,
            avg_util: utils.iter().map(|u| u[t]).sum::<f64>() / 3.0,
            dropped: Some(top),
            delta: Some(d),
            delta_prime: Some(dp),
            avg_util_bound: Some(prev_avg - 2.0 / (3.0 * beta) * (beta / 4.0 * prev_avg).tanh().powi(3).ln_1p()),
            win_rate_over_previous: Some((sigmoid(-d) + 2.0 * sigmoid(dp)) / 3.0),
        });
    }
    if let Some(u) = utils.iter().flatten().find(|u| **u > 1.0) {
        return Err(Error::Infeasible(format!("sequence utility {u} exceeds 1")));
    }
    let total = m * (m - 1) / 2;
    let far = total - (m - 1);
    let mut pairs = Vec::with_capacity(total);
    for x in 0..m {
        for y in x + 1..m {
            let p = if y == x + 1 {
                if far == 0 {
                    1.0 / (m - 1) as f64
                } else {
                    (1.0 - eps) / (m - 1) as f64
                }
            } else {
                eps / far as f64
            };
            pairs.push(WeightedPair { x, y, p });
        }
    }
    let instance = Instance::new(UtilityMixture::uniform(utils)?, beta, PairDistribution::GeneralNu { pairs })?;
    Ok(Generated { instance, ball: None, analytics: UnboundedSeqAnalytics { beta, m, eps, steps } })
}

/// `(lo, hi)` with `lo <= p(x > y) - 1/2 <= hi`, from the chord and tangent
/// slopes of the sigmoid.
pub fn linearization_bounds(inst: &Instance, x: usize, y: usize) -> (f64, f64) {
    let au = avg_util(inst);
    let beta = inst.beta();
    let ell = crate::math::ell_beta(beta);
    let big = crate::math::SIGMOID_SLOPE_AT_ZERO;
    (beta * (ell * au[x] - big * au[y]), beta * (big * au[x] - ell * au[y]))
}

/// Dirichlet(1, ..., 1) sample.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-300).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Policy {
    Policy::from_weights(random_simplex(rng, m)).expect("Dirichlet sample")
}

/// Random instance with `m` alternatives and `k` components: utilities
/// uniform on `[0, 1]`, Dirichlet weights and a Dirichlet product `mu`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, m: usize, k: usize, beta: f64) -> Instance {
    let weights = random_simplex(rng, k);
    let components =
        weights.into_iter().map(|w| Component { weight: w, utils: (0..m).map(|_| rng.random()).collect() }).collect();
    let mu = random_simplex(rng, m);
    Instance::new(UtilityMixture::new(components).expect("valid mixture"), beta, PairDistribution::ProductOfMu { mu })
        .expect("valid instance")
}

/// Antisymmetric matrix with independent uniform entries in `[-1, 1]`.
pub fn random_margins<R: Rng + ?Sized>(rng: &mut R, m: usize) -> MarginMatrix {
    let mut a = Square::filled(m, 0.0);
    for x in 0..m {
        for y in x + 1..m {
            let v = rng.random_range(-1.0..=1.0);
            a[(x, y)] = v;
            a[(y, x)] = -v;
        }
    }
    MarginMatrix::new(a).expect("antisymmetric")
}

/// Fixed three-alternative population with uniform `mu` used by the
/// convergence experiments.
pub fn reference_instance() -> Instance {
    let mixture = UtilityMixture::new(vec![
        Component { weight: 0.5, utils: vec![0.9, 0.4, 0.1] },
        Component { weight: 0.3, utils: vec![0.0, 1.0, 0.6] },
        Component { weight: 0.2, utils: vec![0.3, 0.0, 1.0] },
    ])
    .expect("valid mixture");
    Instance::new(mixture, 2.0, PairDistribution::uniform_mu(3)).expect("valid instance")
}
