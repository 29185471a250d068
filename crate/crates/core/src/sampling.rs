//! Deterministic sampling of comparison datasets.
//!
//! User `u` draws from its own ChaCha stream (`seed`, stream `u`), so the
//! dataset does not depend on how users are split across threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::math::sigmoid;
use crate::matrix::Square;
use crate::model::{Instance, PairDistribution, WinRates};

/// Observed wins: `wins[x][y]` counts `x` beating `y`; the diagonal counts
/// self-pair draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComparisonCounts(Square<u64>);

impl ComparisonCounts {
    pub fn zeros(m: usize) -> Self {
        Self(Square::filled(m, 0))
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        Square::from_rows(rows).map(Self).map_err(Error::InvalidArgument)
    }

    pub fn m(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.0[(x, y)]
    }

    pub fn add(&mut self, winner: usize, loser: usize, count: u64) {
        self.0[(winner, loser)] += count;
    }

    pub fn total(&self) -> u64 {
        self.0.as_slice().iter().sum()
    }

    pub fn matrix(&self) -> &Square<u64> {
        &self.0
    }

    fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.0.as_mut_slice().iter_mut().zip(other.0.as_slice()) {
            *a += b;
        }
        self
    }
}

/// Precomputed samplers for one instance.
struct Sampler<'a> {
    inst: &'a Instance,
    key: [u8; 32],
    components: WeightedIndex<f64>,
    pairs: PairSampler,
}

enum PairSampler {
    Product(WeightedIndex<f64>),
    General(WeightedIndex<f64>, Vec<(usize, usize)>),
}

impl<'a> Sampler<'a> {
    fn new(inst: &'a Instance, seed: u64) -> Self {
        let weights = inst.mixture().components().iter().map(|c| c.weight);
        let components = WeightedIndex::new(weights).expect("validated mixture weights");
        let pairs = match inst.pairs() {
            PairDistribution::ProductOfMu { mu } => PairSampler::Product(WeightedIndex::new(mu).expect("validated mu")),
            PairDistribution::GeneralNu { pairs } => PairSampler::General(
                WeightedIndex::new(pairs.iter().map(|p| p.p)).expect("validated nu"),
                pairs.iter().map(|p| (p.x.min(p.y), p.x.max(p.y))).collect(),
            ),
        };
        Self { inst, key: ChaCha8Rng::seed_from_u64(seed).get_seed(), components, pairs }
    }

    /// Adds user `user`'s `d` comparisons to `counts`. `memo` is scratch space
    /// holding the user's label for each distinct pair seen so far.
    fn user(&self, user: u64, d: u64, counts: &mut ComparisonCounts, memo: &mut Vec<(usize, usize, bool)>) {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(user);
        let utils = &self.inst.mixture().components()[self.components.sample(&mut rng)].utils;
        let beta = self.inst.beta();
        memo.clear();
        for _ in 0..d {
            let (x, y) = match &self.pairs {
                PairSampler::Product(mu) => (mu.sample(&mut rng), mu.sample(&mut rng)),
                PairSampler::General(nu, list) => list[nu.sample(&mut rng)],
            };
            if x == y {
                counts.add(x, x, 1);
                continue;
            }
            let (lo, hi) = (x.min(y), x.max(y));
            let lo_wins = match memo.iter().find(|(a, b, _)| *a == lo && *b == hi) {
                Some(&(_, _, w)) => w,
                None => {
                    let w = rng.random::<f64>() < sigmoid(beta * (utils[lo] - utils[hi]));
                    memo.push((lo, hi, w));
                    w
                }
            };
            if lo_wins {
                counts.add(lo, hi, 1);
            } else {
                counts.add(hi, lo, 1);
            }
        }
    }
}

fn check_sizes(n: u64, d: u64) -> Result<()> {
    n.checked_mul(d).map(|_| ()).ok_or(Error::CountOverflow { users: n, per_user: d })
}

/// Samples `n` users answering `d` comparisons each.
pub fn sample_comparisons(inst: &Instance, n: u64, d: u64, seed: u64) -> Result<ComparisonCounts> {
    sample_comparisons_with(inst, n, d, seed, Exec::default())
}

pub fn sample_comparisons_with(inst: &Instance, n: u64, d: u64, seed: u64, exec: Exec) -> Result<ComparisonCounts> {
    check_sizes(n, d)?;
    let m = inst.m();
    if n == 0 || d == 0 {
        return Ok(ComparisonCounts::zeros(m));
    }
    let sampler = Sampler::new(inst, seed);
    const BLOCK: u64 = 1024;
    let blocks = n.div_ceil(BLOCK);
    let (counts, _) = exec.fold_merge(
        blocks as usize,
        || (ComparisonCounts::zeros(m), Vec::new()),
        |(mut counts, mut memo), b| {
            let start = b as u64 * BLOCK;
            for user in start..(start + BLOCK).min(n) {
                sampler.user(user, d, &mut counts, &mut memo);
            }
            (counts, memo)
        },
        |(a, memo), (b, _)| (a.merge(&b), memo),
    );
    Ok(counts)
}

/// The comparisons of a single user, exactly as they enter
/// [`sample_comparisons`] with the same seed.
pub fn sample_user(inst: &Instance, d: u64, seed: u64, user: u64) -> ComparisonCounts {
    let mut counts = ComparisonCounts::zeros(inst.m());
    Sampler::new(inst, seed).user(user, d, &mut counts, &mut Vec::new());
    counts
}

/// `#(x>y) / (#(x>y) + #(y>x))`, and 1/2 for pairs never compared.
pub fn empirical_win_rates(counts: &ComparisonCounts) -> WinRates {
    WinRates::from_upper(counts.m(), |x, y| {
        let (w, l) = (counts.get(x, y), counts.get(y, x));
        if w + l == 0 {
            0.5
        } else {
            w as f64 / (w + l) as f64
        }
    })
}
