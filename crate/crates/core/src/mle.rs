//! Bradley-Terry maximum-likelihood rewards.
//!
//! Both fits maximize a weighted log-likelihood
//! `sum_{x != y} w[x][y] log sigma(r(x) - r(y)) - ridge |r|^2`
//! by damped Newton steps. Finite-sample fits use observed win counts
//! divided by the number of informative comparisons, so `tol` and `ridge`
//! do not scale with the dataset size. Population fits use
//! `w[x][y] = nu({x, y}) p(x > y)` directly.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{log_sigmoid, sigmoid};
use crate::matrix::Square;
use crate::model::{PairDistribution, WinRates};
use crate::sampling::ComparisonCounts;

pub const DEFAULT_RIDGE: f64 = 1e-9;
pub const DEFAULT_MLE_TOL: f64 = 1e-10;
const MAX_NEWTON_STEPS: usize = 200;

/// Zero-mean reward vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rewards(Vec<f64>);

impl Rewards {
    /// Shifts `r` to zero mean.
    pub fn centered(mut r: Vec<f64>) -> Self {
        let mean = r.iter().sum::<f64>() / r.len().max(1) as f64;
        r.iter_mut().for_each(|v| *v -= mean);
        Self(r)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Bradley-Terry log-likelihood of the off-diagonal counts (unnormalized).
pub fn log_likelihood(counts: &ComparisonCounts, r: &[f64]) -> f64 {
    let m = counts.m();
    let mut ll = 0.0;
    for x in 0..m {
        for y in (0..m).filter(|&y| y != x) {
            let c = counts.get(x, y);
            if c > 0 {
                ll += c as f64 * log_sigmoid(r[x] - r[y]);
            }
        }
    }
    ll
}

/// Finite-sample maximum-likelihood rewards.
///
/// With `ridge == 0` the maximizer exists only when the "beat" graph is
/// strongly connected; otherwise returns [`Error::Divergent`] naming a set of
/// alternatives that never lose to the others.
pub fn fit_bt_mle(counts: &ComparisonCounts, ridge: f64, tol: f64) -> Result<Rewards> {
    if !(ridge >= 0.0) {
        return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {ridge}")));
    }
    let m = counts.m();
    let total: u64 =
        (0..m).flat_map(|x| (0..m).map(move |y| (x, y))).filter(|(x, y)| x != y).map(|(x, y)| counts.get(x, y)).sum();
    if total == 0 {
        return Ok(Rewards(vec![0.0; m]));
    }
    let wins = Square::from_fn(m, |x, y| if x == y { 0.0 } else { counts.get(x, y) as f64 / total as f64 });
    if ridge == 0.0 {
        check_connected(&wins)?;
    }
    newton(&wins, ridge, tol, "Bradley-Terry MLE").map(Rewards::centered)
}

/// Population-limit rewards: solves
/// `sum_y nu_xy sigma(r(x) - r(y)) = sum_y nu_xy p(x > y)` for every `x`.
pub fn fit_bt_mle_population(rates: &WinRates, pairs: &PairDistribution, tol: f64) -> Result<Rewards> {
    let wins = population_weights(rates, pairs)?;
    check_connected(&wins)?;
    newton(&wins, 0.0, tol, "population Bradley-Terry MLE").map(Rewards::centered)
}

/// Max-norm of the population first-order conditions at `r`.
pub fn population_residual(rates: &WinRates, pairs: &PairDistribution, r: &[f64]) -> Result<f64> {
    let wins = population_weights(rates, pairs)?;
    Ok(gradient(&wins, 0.0, r).iter().fold(0.0, |a, g| a.max(g.abs())))
}

fn population_weights(rates: &WinRates, pairs: &PairDistribution) -> Result<Square<f64>> {
    let m = rates.m();
    if let PairDistribution::ProductOfMu { mu } = pairs {
        if mu.len() != m {
            return Err(Error::InvalidArgument(format!("mu has length {}, expected {m}", mu.len())));
        }
    }
    let nu = pairs.pair_weights(m);
    Ok(Square::from_fn(m, |x, y| if x == y { 0.0 } else { nu[(x, y)] * rates.get(x, y) }))
}

fn check_connected(wins: &Square<f64>) -> Result<()> {
    let m = wins.dim();
    let mut g = DiGraph::<(), ()>::with_capacity(m, m * m);
    let nodes: Vec<_> = (0..m).map(|_| g.add_node(())).collect();
    for x in 0..m {
        for y in (0..m).filter(|&y| y != x) {
            if wins[(x, y)] > 0.0 {
                g.add_edge(nodes[x], nodes[y], ());
            }
        }
    }
    let sccs = tarjan_scc(&g);
    if sccs.len() <= 1 {
        return Ok(());
    }
    let mut comp = vec![0; m];
    for (i, scc) in sccs.iter().enumerate() {
        for n in scc {
            comp[n.index()] = i;
        }
    }
    // A component nobody outside ever beats.
    let unbeaten = (0..sccs.len())
        .find(|&c| !(0..m).any(|y| comp[y] != c && (0..m).any(|x| comp[x] == c && wins[(y, x)] > 0.0)))
        .unwrap_or(0);
    let mut alternatives: Vec<usize> = sccs[unbeaten].iter().map(|n| n.index()).collect();
    alternatives.sort_unstable();
    Err(Error::Divergent { alternatives })
}

fn objective(wins: &Square<f64>, ridge: f64, r: &[f64]) -> f64 {
    let m = wins.dim();
    let mut f = -ridge * r.iter().map(|v| v * v).sum::<f64>();
    for x in 0..m {
        for y in (0..m).filter(|&y| y != x) {
            let w = wins[(x, y)];
            if w > 0.0 {
                f += w * log_sigmoid(r[x] - r[y]);
            }
        }
    }
    f
}

fn gradient(wins: &Square<f64>, ridge: f64, r: &[f64]) -> Vec<f64> {
    let m = wins.dim();
    (0..m)
        .map(|x| {
            let mut g = -2.0 * ridge * r[x];
            for y in (0..m).filter(|&y| y != x) {
                let n = wins[(x, y)] + wins[(y, x)];
                if n > 0.0 {
                    g += wins[(x, y)] - n * sigmoid(r[x] - r[y]);
                }
            }
            g
        })
        .collect()
}

/// Negative Hessian plus a rank-one term that removes the shift null space.
fn newton_matrix(wins: &Square<f64>, ridge: f64, r: &[f64]) -> DMatrix<f64> {
    let m = wins.dim();
    let mut h = DMatrix::zeros(m, m);
    for x in 0..m {
        for y in x + 1..m {
            let n = wins[(x, y)] + wins[(y, x)];
            if n > 0.0 {
                let s = sigmoid(r[x] - r[y]);
                let c = n * s * (1.0 - s);
                h[(x, y)] -= c;
                h[(y, x)] -= c;
                h[(x, x)] += c;
                h[(y, y)] += c;
            }
        }
    }
    let scale = (0..m).map(|x| h[(x, x)]).sum::<f64>() / m as f64;
    h.add_scalar_mut(scale.max(f64::MIN_POSITIVE) / m as f64);
    for x in 0..m {
        h[(x, x)] += 2.0 * ridge;
    }
    h
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn newton(wins: &Square<f64>, ridge: f64, tol: f64, solver: &'static str) -> Result<Vec<f64>> {
    let m = wins.dim();
    let mut r = vec![0.0; m];
    let mut f = objective(wins, ridge, &r);
    let mut g = gradient(wins, ridge, &r);
    for step in 0..MAX_NEWTON_STEPS {
        let gnorm = max_norm(&g);
        if gnorm <= tol {
            return Ok(r);
        }
        let h = newton_matrix(wins, ridge, &r);
        let dir: Vec<f64> = match h.clone().cholesky() {
            Some(ch) => ch.solve(&DVector::from_column_slice(&g)).iter().copied().collect(),
            None => {
                let diag = (0..m).map(|x| h[(x, x)]).fold(0.0, f64::max).max(1e-300);
                g.iter().map(|v| v / diag).collect()
            }
        };
        let slope = crate::math::dot(&g, &dir);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = r.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let fc = objective(wins, ridge, &cand);
            let gc = gradient(wins, ridge, &cand);
            // Near the optimum objective changes drown in rounding, so a
            // halved gradient also counts as progress.
            if fc >= f + 1e-4 * t * slope || (fc.is_finite() && max_norm(&gc) <= 0.5 * gnorm) {
                r = cand;
                f = fc;
                g = gc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            log::debug!("{solver}: line search stalled at step {step} with gradient {gnorm:e}");
            return Err(Error::NonConvergence { solver, iterations: step, residual: gnorm, best: Some(r) });
        }
    }
    let residual = max_norm(&g);
    if residual <= tol {
        return Ok(r);
    }
    Err(Error::NonConvergence { solver, iterations: MAX_NEWTON_STEPS, residual, best: Some(r) })
}
