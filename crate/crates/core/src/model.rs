//! Populations, instances, expected win-rates and average utilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::matrix::Square;

/// Tolerance on "sums to one" checks for caller-supplied probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-12;

fn check_probability_vector(name: &str, v: &[f64], strictly_positive: bool) -> Result<()> {
    for (i, &p) in v.iter().enumerate() {
        if !p.is_finite() || p < 0.0 || (strictly_positive && p <= 0.0) {
            let req = if strictly_positive { "> 0" } else { ">= 0" };
            return Err(Error::InvalidInstance(format!("{name}[{i}] = {p}; entries must be finite and {req}")));
        }
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidInstance(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

/// One user type: a probability weight and a utility vector in `[0,1]^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub utils: Vec<f64>,
}

/// A finite population of utility vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMixture {
    m: usize,
    components: Vec<Component>,
}

impl UtilityMixture {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidInstance("mixture has no components".into()));
        };
        let m = first.utils.len();
        if m < 2 {
            return Err(Error::InvalidInstance(format!("need at least 2 alternatives, got {m}")));
        }
        for (k, c) in components.iter().enumerate() {
            if c.utils.len() != m {
                return Err(Error::InvalidInstance(format!("component {k} has {} utilities, expected {m}", c.utils.len())));
            }
            if let Some(u) = c.utils.iter().find(|u| !(0.0..=1.0).contains(*u)) {
                return Err(Error::InvalidInstance(format!("component {k} has utility {u} outside [0, 1]")));
            }
        }
        let weights: Vec<f64> = components.iter().map(|c| c.weight).collect();
        check_probability_vector("component weights", &weights, true)?;
        Ok(Self { m, components })
    }

    /// Mixture with equal weights over the given utility vectors.
    pub fn uniform(utils: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / utils.len().max(1) as f64;
        Self::new(utils.into_iter().map(|u| Component { weight: w, utils: u }).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }
}

/// An unordered pair of distinct alternatives with its sampling probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPair {
    pub x: usize,
    pub y: usize,
    pub p: f64,
}

/// How each comparison's pair of alternatives is drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum PairDistribution {
    /// `x` and `y` drawn independently from `mu`; `x == y` is possible.
    ProductOfMu { mu: Vec<f64> },
    /// A distribution over unordered pairs of distinct alternatives, stored
    /// with `x < y`. Every such pair has positive probability.
    GeneralNu { pairs: Vec<WeightedPair> },
}

impl PairDistribution {
    pub fn uniform_mu(m: usize) -> Self {
        Self::ProductOfMu { mu: vec![1.0 / m as f64; m] }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            Self::ProductOfMu { mu } => {
                if mu.len() != m {
                    return Err(Error::InvalidInstance(format!("mu has length {}, expected {m}", mu.len())));
                }
                check_probability_vector("mu", mu, true)
            }
            Self::GeneralNu { pairs } => {
                let mut seen = Square::filled(m, false);
                for wp in pairs {
                    let (x, y) = (wp.x.min(wp.y), wp.x.max(wp.y));
                    if y >= m {
                        return Err(Error::InvalidInstance(format!("pair ({}, {}) out of range for m = {m}", wp.x, wp.y)));
                    }
                    if x == y {
                        return Err(Error::InvalidInstance(format!("self-pair ({x}, {x}) in a general pair distribution")));
                    }
                    if !(wp.p > 0.0 && wp.p.is_finite()) {
                        return Err(Error::InvalidInstance(format!("pair ({x}, {y}) has probability {}", wp.p)));
                    }
                    if std::mem::replace(&mut seen[(x, y)], true) {
                        return Err(Error::InvalidInstance(format!("pair ({x}, {y}) listed twice")));
                    }
                }
                if pairs.len() != m * (m - 1) / 2 {
                    return Err(Error::InvalidInstance(format!(
                        "general pair distribution lists {} pairs; all {} distinct pairs need positive probability",
                        pairs.len(),
                        m * (m - 1) / 2
                    )));
                }
                let p: Vec<f64> = pairs.iter().map(|w| w.p).collect();
                check_probability_vector("nu", &p, true)
            }
        }
    }

    /// Symmetric matrix of probabilities that a comparison involves the
    /// unordered pair `{x, y}`; the diagonal holds self-pair probabilities.
    pub fn pair_weights(&self, m: usize) -> Square<f64> {
        match self {
            Self::ProductOfMu { mu } => Square::from_fn(m, |x, y| if x == y { mu[x] * mu[x] } else { 2.0 * mu[x] * mu[y] }),
            Self::GeneralNu { pairs } => {
                let mut w = Square::filled(m, 0.0);
                for wp in pairs {
                    w[(wp.x, wp.y)] = wp.p;
                    w[(wp.y, wp.x)] = wp.p;
                }
                w
            }
        }
    }

    pub fn mu(&self) -> Option<&[f64]> {
        match self {
            Self::ProductOfMu { mu } => Some(mu),
            Self::GeneralNu { .. } => None,
        }
    }
}

/// A population, a Bradley-Terry temperature and a pair distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    mixture: UtilityMixture,
    beta: f64,
    pairs: PairDistribution,
}

impl Instance {
    pub fn new(mixture: UtilityMixture, beta: f64, pairs: PairDistribution) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInstance(format!("beta must be positive and finite, got {beta}")));
        }
        pairs.validate(mixture.m())?;
        Ok(Self { mixture, beta, pairs })
    }

    pub fn m(&self) -> usize {
        self.mixture.m()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mixture(&self) -> &UtilityMixture {
        &self.mixture
    }

    pub fn pairs(&self) -> &PairDistribution {
        &self.pairs
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.mixture.clone(), beta, self.pairs.clone())
    }
}

/// Pairwise win probabilities `p[x][y]`, with `p[x][y] + p[y][x] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WinRates(Square<f64>);

impl WinRates {
    /// Wraps a matrix after checking the complement and range invariants.
    pub fn new(p: Square<f64>) -> Result<Self> {
        let m = p.dim();
        for x in 0..m {
            if p[(x, x)] != 0.5 {
                return Err(Error::InvalidArgument(format!("win-rate diagonal entry {x} is {}", p[(x, x)])));
            }
            for y in 0..m {
                let v = p[(x, y)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!("win-rate ({x}, {y}) = {v} outside [0, 1]")));
                }
                if (v + p[(y, x)] - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("win-rates ({x}, {y}) and ({y}, {x}) do not sum to 1")));
                }
            }
        }
        Ok(Self(p))
    }

    pub fn uniform(m: usize) -> Self {
        Self(Square::filled(m, 0.5))
    }

    pub(crate) fn from_upper(m: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Self {
        let mut p = Square::filled(m, 0.5);
        for x in 0..m {
            for y in x + 1..m {
                let v = upper(x, y);
                p[(x, y)] = v;
                p[(y, x)] = 1.0 - v;
            }
        }
        Self(p)
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

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &WinRates) -> f64 {
        self.0.as_slice().iter().zip(other.0.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// A probability distribution over alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Policy(Vec<f64>);

impl Policy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty policy".into()));
        }
        check_probability_vector("policy", &probs, false).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(Self(probs))
    }

    /// Scales nonnegative weights to sum to one.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if !(s > 0.0 && s.is_finite()) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidArgument(format!("cannot normalize weights with sum {s}")));
        }
        Ok(Self(weights.into_iter().map(|w| w / s).collect()))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn point_mass(m: usize, x: usize) -> Self {
        let mut p = vec![0.0; m];
        p[x] = 1.0;
        Self(p)
    }

    /// Uniform over the alternatives flagged `true`.
    pub fn uniform_over(mask: &[bool]) -> Self {
        let k = mask.iter().filter(|b| **b).count() as f64;
        Self(mask.iter().map(|&b| if b { 1.0 / k } else { 0.0 }).collect())
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn tv_distance(&self, other: &Policy) -> f64 {
        crate::math::total_variation(&self.0, &other.0)
    }
}

impl TryFrom<Vec<f64>> for Policy {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Policy> for Vec<f64> {
    fn from(p: Policy) -> Self {
        p.0
    }
}

/// Exact expected win-rates of the population.
pub fn expected_win_rates(inst: &Instance) -> WinRates {
    let beta = inst.beta();
    let comps = inst.mixture().components();
    WinRates::from_upper(inst.m(), |x, y| {
        comps.iter().map(|c| c.weight * sigmoid(beta * (c.utils[x] - c.utils[y]))).sum::<f64>().clamp(0.0, 1.0)
    })
}

/// Population-average utility of every alternative.
pub fn avg_util(inst: &Instance) -> Vec<f64> {
    let mut out = vec![0.0; inst.m()];
    for c in inst.mixture().components() {
        for (o, u) in out.iter_mut().zip(&c.utils) {
            *o += c.weight * u;
        }
    }
    out.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    out
}

pub fn avg_util_policy(inst: &Instance, pi: &Policy) -> f64 {
    crate::math::dot(&avg_util(inst), pi.probs())
}
