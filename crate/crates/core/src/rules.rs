//! Voting rules on comparison data: Borda and Maximal Lotteries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::solve_packing_lp;
use crate::matrix::Square;
use crate::model::{PairDistribution, Policy, WinRates};
use crate::sampling::ComparisonCounts;

/// Default absolute tie window for [`borda_rule`].
pub const DEFAULT_TIE_TOL: f64 = 1e-9;
/// Default equilibrium tolerance for [`maximal_lotteries`].
pub const DEFAULT_ML_TOL: f64 = 1e-9;

/// Normalized Borda scores together with the alternatives that never
/// appeared in a comparison (scored 1/2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BordaScores {
    pub scores: Vec<f64>,
    pub unobserved: Vec<usize>,
}

/// Fraction of comparisons involving `x` that `x` wins, with a self-pair
/// counting as one win out of two appearances.
pub fn borda_scores(counts: &ComparisonCounts) -> BordaScores {
    let m = counts.m();
    let mut scores = Vec::with_capacity(m);
    let mut unobserved = Vec::new();
    for x in 0..m {
        let own = counts.get(x, x);
        let (mut wins, mut total) = (own, 2 * own);
        for y in (0..m).filter(|&y| y != x) {
            wins += counts.get(x, y);
            total += counts.get(x, y) + counts.get(y, x);
        }
        if total == 0 {
            unobserved.push(x);
            scores.push(0.5);
        } else {
            scores.push(wins as f64 / total as f64);
        }
    }
    BordaScores { scores, unobserved }
}

/// Large-sample limit of the normalized Borda scores under a product pair
/// distribution: `mu(x)/2 + sum_{y != x} mu(y) p(x > y)`.
pub fn limiting_borda(rates: &WinRates, pairs: &PairDistribution) -> Result<Vec<f64>> {
    let mu = pairs.mu().ok_or(Error::UndefinedForNu { what: "the Borda score" })?;
    let m = rates.m();
    if mu.len() != m {
        return Err(Error::InvalidArgument(format!("mu has length {}, win-rates have {m} alternatives", mu.len())));
    }
    Ok((0..m).map(|x| 0.5 * mu[x] + (0..m).filter(|&y| y != x).map(|y| mu[y] * rates.get(x, y)).sum::<f64>()).collect())
}

/// Uniform over every alternative whose score is within `tie_tol` of the
/// maximum.
pub fn borda_rule(scores: &[f64], tie_tol: f64) -> Policy {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mask: Vec<bool> = scores.iter().map(|&s| s >= max - tie_tol).collect();
    Policy::uniform_over(&mask)
}

/// Antisymmetric payoff matrix of the preference game, entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarginMatrix(Square<f64>);

impl MarginMatrix {
    pub fn new(m: Square<f64>) -> Result<Self> {
        let n = m.dim();
        for x in 0..n {
            if m[(x, x)].abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("margin diagonal entry {x} is {}", m[(x, x)])));
            }
            for y in 0..n {
                let v = m[(x, y)];
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!("margin ({x}, {y}) = {v} outside [-1, 1]")));
                }
                if (v + m[(y, x)]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("margin matrix is not antisymmetric at ({x}, {y})")));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn zeros(m: usize) -> Self {
        Self(Square::filled(m, 0.0))
    }

    pub fn m(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0[(x, y)]
    }

    pub fn matrix(&self) -> &Square<f64> {
        &self.0
    }

    /// `c * M`, only for `0 < c <= 1` so entries stay in range.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidArgument(format!("margin scale {c} outside (0, 1]")));
        }
        Ok(Self(Square::from_fn(self.m(), |x, y| c * self.0[(x, y)])))
    }

    /// `M^T`, which for an antisymmetric matrix equals `-M`.
    pub fn transposed(&self) -> Self {
        Self(Square::from_fn(self.m(), |x, y| self.0[(y, x)]))
    }

    /// `(M pi)_x = sum_y M[x][y] pi(y)`: payoff of pure `x` against `pi`.
    pub fn apply(&self, pi: &[f64]) -> Vec<f64> {
        (0..self.m()).map(|x| crate::math::dot(self.0.row(x), pi)).collect()
    }

    /// `(M^T pi)_y = sum_x pi(x) M[x][y]`: payoff of `pi` against pure `y`.
    pub fn apply_transpose(&self, pi: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut out = vec![0.0; m];
        for (x, &p) in pi.iter().enumerate() {
            if p != 0.0 {
                for (o, v) in out.iter_mut().zip(self.0.row(x)) {
                    *o += p * v;
                }
            }
        }
        out
    }

    fn max_abs(&self) -> f64 {
        self.0.as_slice().iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// `M[x][y] = 2 p[x][y] - 1`, written as `p[x][y] - p[y][x]` so the result
/// is exactly antisymmetric.
pub fn margin_matrix(rates: &WinRates) -> MarginMatrix {
    let m = rates.m();
    let mut out = Square::filled(m, 0.0);
    for x in 0..m {
        for y in x + 1..m {
            let v = 2.0 * rates.get(x, y) - 1.0;
            out[(x, y)] = v;
            out[(y, x)] = -v;
        }
    }
    MarginMatrix(out)
}

/// `-min_y sum_x pi(x) M[x][y]`: how much the best pure reply gains against
/// `pi`. Nonnegative, and zero exactly at equilibria.
pub fn exploitability_simplex(pi: &Policy, margins: &MarginMatrix) -> f64 {
    -margins.apply_transpose(pi.probs()).into_iter().fold(f64::INFINITY, f64::min)
}

/// A maximal lottery: an equilibrium of the symmetric zero-sum game on `M`.
///
/// Solved exactly as a linear program. The zero matrix returns the uniform
/// policy. Fails if the certificate `exploitability <= tol` is not met.
pub fn maximal_lotteries(margins: &MarginMatrix, tol: f64) -> Result<Policy> {
    let m = margins.m();
    if margins.max_abs() <= 1e-14 {
        return Ok(Policy::uniform(m));
    }
    // Shifting every payoff by 2 keeps the equilibria and makes A > 0.
    let shifted = Square::from_fn(m, |x, y| margins.get(x, y) + 2.0);
    let w = solve_packing_lp(&shifted)?;
    let pi = Policy::from_weights(w)?;
    let residual = exploitability_simplex(&pi, margins);
    if residual > tol {
        return Err(Error::NonConvergence {
            solver: "maximal lotteries (simplex)",
            iterations: 1,
            residual,
            best: Some(pi.into_inner()),
        });
    }
    Ok(pi)
}

/// Averaged multiplicative-weights self-play. Converges at rate
/// `O(sqrt(log m / iterations))`, so it is only useful at loose tolerances;
/// kept as an independent check on [`maximal_lotteries`].
pub fn maximal_lotteries_mwu(margins: &MarginMatrix, iterations: usize) -> Policy {
    let m = margins.m();
    let eta = (8.0 * (m as f64).ln().max(1.0) / iterations.max(1) as f64).sqrt();
    let mut logits = vec![0.0; m];
    let mut avg = vec![0.0; m];
    for _ in 0..iterations {
        let pi = crate::math::softmax(&logits);
        for (a, p) in avg.iter_mut().zip(&pi) {
            *a += p;
        }
        for (l, g) in logits.iter_mut().zip(margins.apply(&pi)) {
            *l += eta * g;
        }
    }
    Policy::from_weights(avg).expect("average of policies")
}
