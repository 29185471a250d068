//! Distortion of preference aggregation and alignment methods under
//! heterogeneous Bradley-Terry populations.
//!
//! A population is a finite mixture of utility vectors over `m` alternatives.
//! Users compare pairs of alternatives through individual Bradley-Terry models
//! with temperature `beta`. This crate computes exact expected win-rates,
//! samples comparison datasets, runs the aggregation rules (Borda, Maximal
//! Lotteries) and alignment methods (RLHF, DPO, NLHF) on them, and measures
//! each method's distortion: the ratio between the best average utility
//! reachable inside a KL ball around a reference policy and the average
//! utility of the method's output.
//!
//! Module map:
//!
//! - [`model`]: instances, expected win-rates, average utilities
//! - [`sampling`]: deterministic comparison sampling and empirical win-rates
//! - [`rules`]: Borda scores, margin matrices, Maximal Lotteries
//! - [`mle`]: Bradley-Terry maximum likelihood, finite-sample and population
//! - [`policy_opt`]: KL balls, RLHF, DPO, NLHF and the optimal benchmark
//! - [`instances`]: the lower-bound constructions and random instance families
//! - [`distortion`]: population and Monte-Carlo distortion harnesses
//! - [`verify`]: end-to-end acceptance suites shared by tests and the CLI

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distortion;
pub mod error;
pub mod exec;
pub mod instances;
pub mod io;
pub mod lp;
pub mod math;
pub mod matrix;
pub mod mle;
pub mod model;
pub mod policy_opt;
pub mod rules;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use matrix::Square;
pub use model::{Component, Instance, PairDistribution, Policy, UtilityMixture, WinRates};
pub use sampling::ComparisonCounts;
