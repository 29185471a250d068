//! Policy optimization over KL balls: the optimal benchmark, RLHF, DPO and
//! NLHF.
//!
//! All constrained solves go through a regularized family indexed by a
//! temperature `lambda`. For a linear objective `r` the family is the Gibbs
//! policy `pi_ref * exp(r / lambda)`; for NLHF it is the regularized
//! symmetric equilibrium `pi = pi_ref * exp(M pi / lambda)` (normalized).
//! A member of either family with KL equal to the budget solves the
//! constrained problem, so the solvers search over `lambda`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{dot, log_sum_exp};
use crate::mle::{fit_bt_mle, fit_bt_mle_population, Rewards, DEFAULT_MLE_TOL, DEFAULT_RIDGE};
use crate::model::{avg_util, Instance, PairDistribution, Policy, WinRates};
use crate::rules::MarginMatrix;
use crate::sampling::ComparisonCounts;

pub const LAMBDA_MIN: f64 = 1e-12;
pub const LAMBDA_MAX: f64 = 1e12;
pub const DEFAULT_POLICY_TOL: f64 = 1e-9;

/// The feasible set `{pi : KL(pi || pi_ref) <= tau}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KLBall {
    pi_ref: Policy,
    tau: f64,
}

impl KLBall {
    /// Rejects reference policies with zero entries; drop those alternatives
    /// before building the ball.
    pub fn new(pi_ref: Policy, tau: f64) -> Result<Self> {
        if let Some(x) = pi_ref.probs().iter().position(|p| *p <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reference policy has zero mass on alternative {x}; remove it from the instance first"
            )));
        }
        if !(tau >= 0.0) || tau.is_nan() {
            return Err(Error::InvalidArgument(format!("KL budget must be >= 0, got {tau}")));
        }
        Ok(Self { pi_ref, tau })
    }

    /// Uniform reference with budget `log m`, which contains every policy.
    pub fn full_simplex(m: usize) -> Self {
        Self { pi_ref: Policy::uniform(m), tau: (m as f64).ln() }
    }

    pub fn pi_ref(&self) -> &Policy {
        &self.pi_ref
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn m(&self) -> usize {
        self.pi_ref.m()
    }

    fn log_ref(&self) -> Vec<f64> {
        self.pi_ref.probs().iter().map(|p| p.ln()).collect()
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.pi_ref.clone(), tau)
    }
}

/// `KL(pi || pi_ref)` with `0 log 0 = 0`.
pub fn kl_div(pi: &Policy, pi_ref: &Policy) -> f64 {
    pi.probs().iter().zip(pi_ref.probs()).filter(|(p, _)| **p > 0.0).map(|(p, q)| p * (p / q).ln()).sum::<f64>().max(0.0)
}

/// A member of the Gibbs family, kept in log space.
struct Gibbs {
    logp: Vec<f64>,
    kl: f64,
}

fn gibbs(r: &[f64], log_ref: &[f64], lambda: f64) -> Gibbs {
    let rmax = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = r.iter().map(|v| (v - rmax) / lambda).collect();
    let z: Vec<f64> = shifted.iter().zip(log_ref).map(|(s, l)| s + l).collect();
    let lse = log_sum_exp(&z);
    let logp: Vec<f64> = z.iter().map(|v| v - lse).collect();
    // KL = E_pi[(r - rmax)/lambda] - lse, summed without forming log(pi/pi_ref).
    let kl = logp.iter().zip(&shifted).map(|(lp, s)| if *lp > -745.0 { lp.exp() * (s - lse) } else { 0.0 }).sum::<f64>();
    Gibbs { logp, kl: kl.max(0.0) }
}

fn policy_from_logp(logp: &[f64]) -> Policy {
    Policy::from_weights(logp.iter().map(|l| l.exp()).collect()).expect("log-probabilities of a policy")
}

/// `pi(x) ∝ pi_ref(x) exp(r(x) / lambda)`.
pub fn regularized_linear_max(r: &[f64], pi_ref: &Policy, lambda: f64) -> Result<Policy> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let log_ref: Vec<f64> = pi_ref.probs().iter().map(|p| p.ln()).collect();
    Ok(policy_from_logp(&gibbs(r, &log_ref, lambda).logp))
}

/// Maximizer of a linear objective over a KL ball, with the regularization
/// strength that produces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallMax {
    pub policy: Policy,
    /// Lagrange multiplier of the KL constraint: `inf` when the ball is a
    /// point or the objective is flat, `0` when the zero-temperature limit
    /// is feasible.
    pub multiplier: f64,
}

/// `argmax_{pi in ball} <r, pi>`.
pub fn linear_max_over_ball(r: &[f64], ball: &KLBall, tol: f64) -> Result<Policy> {
    linear_max_over_ball_detailed(r, ball, tol).map(|b| b.policy)
}

pub fn linear_max_over_ball_detailed(r: &[f64], ball: &KLBall, tol: f64) -> Result<BallMax> {
    let m = ball.m();
    if r.len() != m {
        return Err(Error::InvalidArgument(format!("objective has length {}, ball has {m} alternatives", r.len())));
    }
    let tau = ball.tau();
    let rmax = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rmin = r.iter().copied().fold(f64::INFINITY, f64::min);
    if tau == 0.0 || rmax == rmin {
        return Ok(BallMax { policy: ball.pi_ref().clone(), multiplier: f64::INFINITY });
    }
    // Zero-temperature limit: pi_ref restricted to the argmax set.
    let top: Vec<bool> = r.iter().map(|v| *v == rmax).collect();
    let top_mass: f64 = ball.pi_ref().probs().iter().zip(&top).filter(|(_, t)| **t).map(|(p, _)| p).sum();
    if -top_mass.ln() <= tau + tol.min(1e-12) {
        let w = ball.pi_ref().probs().iter().zip(&top).map(|(p, t)| if *t { *p } else { 0.0 }).collect();
        return Ok(BallMax { policy: Policy::from_weights(w)?, multiplier: 0.0 });
    }
    let log_ref = ball.log_ref();
    let (mut lo, mut hi) = (LAMBDA_MIN.ln(), LAMBDA_MAX.ln());
    let at_hi = gibbs(r, &log_ref, hi.exp());
    if at_hi.kl > tau {
        return Err(Error::Bracket { lambda_hi: LAMBDA_MAX, kl_hi: at_hi.kl, tau });
    }
    let at_lo = gibbs(r, &log_ref, lo.exp());
    if at_lo.kl <= tau {
        return Ok(BallMax { policy: policy_from_logp(&at_lo.logp), multiplier: LAMBDA_MIN });
    }
    let mut best = at_hi;
    while hi - lo > 1e-15 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = gibbs(r, &log_ref, mid.exp());
        if g.kl <= tau {
            hi = mid;
            best = g;
        } else {
            lo = mid;
        }
    }
    Ok(BallMax { policy: policy_from_logp(&best.logp), multiplier: hi.exp() })
}

/// Comparison data an RLHF reward model is fit on.
#[derive(Debug, Clone, Copy)]
pub enum RewardData<'a> {
    Counts { counts: &'a ComparisonCounts, ridge: f64 },
    Population { rates: &'a WinRates, pairs: &'a PairDistribution },
}

impl<'a> RewardData<'a> {
    pub fn counts(counts: &'a ComparisonCounts) -> Self {
        Self::Counts { counts, ridge: DEFAULT_RIDGE }
    }

    pub fn fit(&self) -> Result<Rewards> {
        match *self {
            Self::Counts { counts, ridge } => fit_bt_mle(counts, ridge, DEFAULT_MLE_TOL),
            Self::Population { rates, pairs } => fit_bt_mle_population(rates, pairs, DEFAULT_MLE_TOL),
        }
    }
}

/// Fits Bradley-Terry rewards, then maximizes them over the ball.
pub fn rlhf_policy(data: RewardData<'_>, ball: &KLBall, tol: f64) -> Result<Policy> {
    linear_max_over_ball(data.fit()?.values(), ball, tol)
}

/// DPO's optimum, through its closed form: the Gibbs policy of the
/// maximum-likelihood rewards at temperature `lambda`.
pub fn dpo_policy(counts: &ComparisonCounts, pi_ref: &Policy, lambda: f64, tol: f64) -> Result<Policy> {
    let r = fit_bt_mle(counts, DEFAULT_RIDGE, tol.min(DEFAULT_MLE_TOL))?;
    regularized_linear_max(r.values(), pi_ref, lambda)
}

/// Best average utility inside the ball.
pub fn optimal_policy(inst: &Instance, ball: &KLBall, tol: f64) -> Result<Policy> {
    linear_max_over_ball(&avg_util(inst), ball, tol)
}

/// `-min_{pi2 in ball} <M^T pi, pi2>`: the gain of the best feasible reply
/// against `pi`.
pub fn exploitability(pi: &Policy, margins: &MarginMatrix, ball: &KLBall) -> Result<f64> {
    let neg: Vec<f64> = margins.apply_transpose(pi.probs()).into_iter().map(|v| -v).collect();
    let best = linear_max_over_ball(&neg, ball, 0.0)?;
    Ok(dot(&neg, best.probs()))
}

/// Regularized symmetric equilibrium at one `lambda`, as log-probabilities
/// plus the normalization multiplier.
#[derive(Debug, Clone)]
struct RegPoint {
    lambda: f64,
    logp: Vec<f64>,
    shift: f64,
    kl: f64,
}

impl RegPoint {
    fn policy(&self) -> Policy {
        policy_from_logp(&self.logp)
    }
}

struct RegSolver<'a> {
    margins: &'a MarginMatrix,
    log_ref: Vec<f64>,
}

impl RegSolver<'_> {
    fn m(&self) -> usize {
        self.log_ref.len()
    }

    /// Residual of `lambda (l - log_ref) - M e^l + shift = 0`, `sum e^l = 1`.
    fn residual(&self, lambda: f64, logp: &[f64], shift: f64) -> (Vec<f64>, f64) {
        let p: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let mp = self.margins.apply(&p);
        let g = (0..self.m()).map(|x| lambda * (logp[x] - self.log_ref[x]) - mp[x] + shift).collect();
        (g, p.iter().sum::<f64>() - 1.0)
    }

    fn merit(g: &[f64], h: f64) -> f64 {
        g.iter().fold(h.abs(), |a, v| a.max(v.abs()))
    }

    fn tolerance(&self, lambda: f64, logp: &[f64]) -> f64 {
        let scale = logp.iter().chain(&self.log_ref).fold(0.0f64, |a, v| a.max(v.abs()));
        1e-14 + 4e-16 * (self.m() as f64) * (1.0 + lambda * scale)
    }

    fn finish(&self, lambda: f64, logp: Vec<f64>, shift: f64) -> RegPoint {
        let lse = log_sum_exp(&logp);
        let logp: Vec<f64> = logp.iter().map(|l| l - lse).collect();
        let kl =
            logp.iter().zip(&self.log_ref).filter(|(l, _)| **l > -745.0).map(|(l, r)| l.exp() * (l - r)).sum::<f64>().max(0.0);
        RegPoint { lambda, logp, shift, kl }
    }

    /// Damped Newton from `start`. Returns `None` if it stalls.
    fn newton(&self, lambda: f64, start: &RegPoint) -> Option<RegPoint> {
        let m = self.m();
        let mut logp = start.logp.clone();
        let mut shift = start.shift;
        let (mut g, mut h) = self.residual(lambda, &logp, shift);
        let mut merit = Self::merit(&g, h);
        for _ in 0..100 {
            if merit <= self.tolerance(lambda, &logp) {
                return Some(self.finish(lambda, logp, shift));
            }
            let p: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
            let mut jac = DMatrix::zeros(m + 1, m + 1);
            for x in 0..m {
                for z in 0..m {
                    jac[(x, z)] = -self.margins.get(x, z) * p[z];
                }
                jac[(x, x)] += lambda;
                jac[(x, m)] = 1.0;
                jac[(m, x)] = p[x];
            }
            let mut rhs = DVector::from_iterator(m + 1, g.iter().copied().chain(std::iter::once(h)));
            rhs.neg_mut();
            let step = jac.lu().solve(&rhs)?;
            if step.iter().any(|v| !v.is_finite()) {
                return None;
            }
            // Keep every probability below e^{1/2} so exp cannot overflow.
            let mut t: f64 = 1.0;
            for x in 0..m {
                if step[x] > 0.0 && logp[x] + step[x] > 0.5 {
                    t = t.min((0.5 - logp[x]) / step[x]);
                }
            }
            let mut accepted = false;
            for _ in 0..50 {
                let cand: Vec<f64> = (0..m).map(|x| logp[x] + t * step[x]).collect();
                let cshift = shift + t * step[m];
                let (cg, ch) = self.residual(lambda, &cand, cshift);
                let cm = Self::merit(&cg, ch);
                if cm.is_finite() && (cm <= (1.0 - 1e-4 * t) * merit || cm <= self.tolerance(lambda, &cand)) {
                    logp = cand;
                    shift = cshift;
                    g = cg;
                    h = ch;
                    merit = cm;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // Rounding floor: accept a point that is already very close.
                return (merit <= 1e3 * self.tolerance(lambda, &logp)).then(|| self.finish(lambda, logp, shift));
            }
        }
        None
    }

    /// Damped mirror iteration `pi <- pi^(1-eta) (pi_ref exp(M pi / lambda))^eta`
    /// with averaged iterates; used when Newton stalls.
    fn mirror(&self, lambda: f64, start: &RegPoint) -> Option<RegPoint> {
        const ETA: f64 = 0.5;
        let m = self.m();
        let mut logp = start.logp.clone();
        let mut avg = vec![0.0; m];
        for k in 1..=100_000usize {
            let p: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
            let mp = self.margins.apply(&p);
            let z: Vec<f64> = (0..m).map(|x| (1.0 - ETA) * logp[x] + ETA * (self.log_ref[x] + mp[x] / lambda)).collect();
            let lse = log_sum_exp(&z);
            logp = z.iter().map(|v| v - lse).collect();
            for (a, l) in avg.iter_mut().zip(&logp) {
                *a += (l.exp() - *a) / k as f64;
            }
            if k % 1000 == 0 {
                let cand: Vec<f64> = avg.iter().map(|a| a.max(f64::MIN_POSITIVE).ln()).collect();
                let mp = self.margins.apply(&avg);
                let shift = -(0..m).map(|x| avg[x] * (lambda * (cand[x] - self.log_ref[x]) - mp[x])).sum::<f64>();
                let point = self.finish(lambda, cand, shift);
                if let Some(polished) = self.newton(lambda, &point) {
                    return Some(polished);
                }
            }
        }
        None
    }

    fn solve(&self, lambda: f64, start: &RegPoint) -> Option<RegPoint> {
        self.newton(lambda, start).or_else(|| self.mirror(lambda, start))
    }

    fn start(&self) -> RegPoint {
        self.finish(LAMBDA_MAX, self.log_ref.clone(), 0.0)
    }

    /// Follows the regularized equilibria from `LAMBDA_MAX` down to `target`,
    /// calling `visit` at each converged point; `visit` returning `true`
    /// stops the walk early.
    fn walk(&self, target: f64, mut visit: impl FnMut(&RegPoint, &RegPoint) -> bool) -> Result<RegPoint> {
        let mut cur = self.newton(LAMBDA_MAX, &self.start()).ok_or(Error::NonConvergence {
            solver: "regularized NLHF",
            iterations: 0,
            residual: f64::NAN,
            best: None,
        })?;
        let mut factor: f64 = 0.1;
        while cur.lambda > target {
            let next_lambda = (cur.lambda * factor).max(target);
            match self.newton(next_lambda, &cur) {
                Some(next) => {
                    let stop = visit(&cur, &next);
                    cur = next;
                    if stop {
                        break;
                    }
                    factor = (factor * 0.5).max(0.01);
                }
                None if factor < 0.999 => factor = factor.sqrt(),
                None => {
                    let next = self.mirror(next_lambda, &cur).ok_or_else(|| {
                        let (g, h) = self.residual(next_lambda, &cur.logp, cur.shift);
                        Error::NonConvergence {
                            solver: "regularized NLHF continuation",
                            iterations: 0,
                            residual: Self::merit(&g, h),
                            best: Some(cur.policy().into_inner()),
                        }
                    })?;
                    let stop = visit(&cur, &next);
                    cur = next;
                    if stop {
                        break;
                    }
                }
            }
        }
        Ok(cur)
    }
}

/// Regularized symmetric equilibrium: the fixed point of
/// `pi ∝ pi_ref exp(M pi / lambda)`.
pub fn regularized_nlhf(margins: &MarginMatrix, pi_ref: &Policy, lambda: f64) -> Result<Policy> {
    if !(LAMBDA_MIN..=LAMBDA_MAX).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda must lie in [{LAMBDA_MIN:e}, {LAMBDA_MAX:e}], got {lambda}")));
    }
    let solver = RegSolver { margins, log_ref: pi_ref.probs().iter().map(|p| p.ln()).collect() };
    Ok(solver.walk(lambda, |_, _| false)?.policy())
}

/// Output of the constrained NLHF solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlhfSolution {
    pub policy: Policy,
    /// Regularization strength whose equilibrium was returned.
    pub lambda: f64,
    pub kl: f64,
    pub exploitability: f64,
}

/// KL-constrained symmetric equilibrium of the margin game.
pub fn nlhf_policy(margins: &MarginMatrix, ball: &KLBall, tol: f64) -> Result<Policy> {
    nlhf_solve(margins, ball, tol).map(|s| s.policy)
}

pub fn nlhf_solve(margins: &MarginMatrix, ball: &KLBall, tol: f64) -> Result<NlhfSolution> {
    let m = ball.m();
    if margins.m() != m {
        return Err(Error::InvalidArgument(format!("margin matrix has {} alternatives, ball has {m}", margins.m())));
    }
    let tau = ball.tau();
    let flat = margins.matrix().as_slice().iter().all(|v| *v == 0.0);
    if tau == 0.0 || flat {
        let policy = ball.pi_ref().clone();
        let exploit = exploitability(&policy, margins, ball)?;
        return Ok(NlhfSolution { policy, lambda: f64::INFINITY, kl: 0.0, exploitability: exploit });
    }
    let solver = RegSolver { margins, log_ref: ball.log_ref() };
    let mut crossing: Option<(RegPoint, RegPoint)> = None;
    let mut warned = false;
    let end = solver.walk(LAMBDA_MIN, |prev, next| {
        if next.kl < prev.kl - 1e-12 && !warned {
            log::warn!("NLHF path: KL decreased from {:e} to {:e} at lambda {:e}", prev.kl, next.kl, next.lambda);
            warned = true;
        }
        if next.kl > tau {
            crossing = Some((prev.clone(), next.clone()));
            true
        } else {
            false
        }
    })?;
    let point = match crossing {
        None => end,
        Some((mut hi, mut lo)) => {
            if hi.kl > tau {
                return Err(Error::Bracket { lambda_hi: hi.lambda, kl_hi: hi.kl, tau });
            }
            for _ in 0..200 {
                if hi.lambda * (tau - hi.kl) <= 1e-3 * tol || (hi.lambda / lo.lambda).ln() < 1e-14 {
                    break;
                }
                let mid = (hi.lambda * lo.lambda).sqrt();
                let Some(p) = solver.solve(mid, &hi).or_else(|| solver.solve(mid, &lo)) else {
                    break;
                };
                if p.kl <= tau {
                    hi = p;
                } else {
                    lo = p;
                }
            }
            hi
        }
    };
    let policy = point.policy();
    let exploit = exploitability(&policy, margins, ball)?;
    let kl = kl_div(&policy, ball.pi_ref());
    if exploit > tol || kl > tau + tol {
        return Err(Error::NonConvergence {
            solver: "NLHF",
            iterations: 0,
            residual: exploit.max(kl - tau),
            best: Some(policy.into_inner()),
        });
    }
    Ok(NlhfSolution { policy, lambda: point.lambda, kl, exploitability: exploit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sigmoid;
    use crate::matrix::Square;

    fn rps() -> MarginMatrix {
        MarginMatrix::new(Square::from_rows(vec![vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]]).unwrap())
            .unwrap()
    }

    #[test]
    fn kl_examples() {
        let q = Policy::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(kl_div(&q, &q), 0.0);
        assert!((kl_div(&Policy::point_mass(3, 1), &q) - (1.0f64 / 0.3).ln()).abs() < 1e-15);
    }

    #[test]
    fn gibbs_limits() {
        let q = Policy::new(vec![0.2, 0.3, 0.5]).unwrap();
        let r = [1.0, -0.3, 0.4];
        assert!(regularized_linear_max(&r, &q, 1e9).unwrap().tv_distance(&q) < 1e-8);
        let u = Policy::uniform(3);
        assert!(regularized_linear_max(&r, &u, 1e-9).unwrap().tv_distance(&Policy::point_mass(3, 0)) < 1e-8);
        let two = regularized_linear_max(&[1.0, 0.0], &Policy::uniform(2), 1.0).unwrap();
        assert!((two.probs()[0] - sigmoid(1.0)).abs() < 1e-15);
    }

    #[test]
    fn ball_corner_cases() {
        let q = Policy::new(vec![0.2, 0.3, 0.5]).unwrap();
        let r = [1.0, -0.3, 0.4];
        assert_eq!(linear_max_over_ball(&r, &KLBall::new(q.clone(), 0.0).unwrap(), 1e-9).unwrap(), q);
        let full = linear_max_over_ball(&r, &KLBall::full_simplex(3), 1e-9).unwrap();
        assert_eq!(full, Policy::point_mass(3, 0));
        let mid = KLBall::new(q, 0.3).unwrap();
        let sol = linear_max_over_ball_detailed(&r, &mid, 1e-9).unwrap();
        let kl = kl_div(&sol.policy, mid.pi_ref());
        assert!(kl <= 0.3 && kl > 0.3 - 1e-9);
        assert!(sol.multiplier > 0.0 && sol.multiplier.is_finite());
    }

    #[test]
    fn zero_mass_reference_is_rejected() {
        assert!(KLBall::new(Policy::new(vec![0.0, 1.0]).unwrap(), 1.0).is_err());
        assert!(KLBall::new(Policy::uniform(2), -1.0).is_err());
    }

    #[test]
    fn nlhf_trivial_cases() {
        let q = Policy::new(vec![0.2, 0.3, 0.5]).unwrap();
        let point = KLBall::new(q.clone(), 0.0).unwrap();
        assert_eq!(nlhf_policy(&rps(), &point, 1e-9).unwrap(), q);
        let ball = KLBall::new(q.clone(), 0.5).unwrap();
        assert_eq!(nlhf_policy(&MarginMatrix::zeros(3), &ball, 1e-9).unwrap(), q);
    }

    #[test]
    fn nlhf_rock_paper_scissors() {
        let sol = nlhf_solve(&rps(), &KLBall::full_simplex(3), 1e-9).unwrap();
        assert!(sol.policy.tv_distance(&Policy::uniform(3)) < 1e-9);
        let q = Policy::new(vec![0.6, 0.3, 0.1]).unwrap();
        let ball = KLBall::new(q, 0.05).unwrap();
        let sol = nlhf_solve(&rps(), &ball, 1e-9).unwrap();
        assert!(sol.exploitability <= 1e-9 && sol.kl <= 0.05 + 1e-12);
    }

    #[test]
    fn exploitability_with_point_ball() {
        let q = Policy::new(vec![0.6, 0.3, 0.1]).unwrap();
        let pi = Policy::new(vec![0.1, 0.1, 0.8]).unwrap();
        let ball = KLBall::new(q.clone(), 0.0).unwrap();
        let direct = -dot(&rps().apply_transpose(pi.probs()), q.probs());
        assert_eq!(exploitability(&pi, &rps(), &ball).unwrap(), direct);
    }
}
