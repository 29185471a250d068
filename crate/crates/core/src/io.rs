//! JSON and CSV formats for instances and comparison counts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Component, Instance, PairDistribution, UtilityMixture, WeightedPair};
use crate::sampling::ComparisonCounts;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    m: usize,
    beta: f64,
    components: Vec<Component>,
    pairs: PairsFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum PairsFile {
    Mu { mu: Vec<f64> },
    Nu { nu: Vec<WeightedPair> },
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        Self {
            m: inst.m(),
            beta: inst.beta(),
            components: inst.mixture().components().to_vec(),
            pairs: match inst.pairs() {
                PairDistribution::ProductOfMu { mu } => PairsFile::Mu { mu: mu.clone() },
                PairDistribution::GeneralNu { pairs } => PairsFile::Nu { nu: pairs.clone() },
            },
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        let mixture = UtilityMixture::new(f.components)?;
        if mixture.m() != f.m {
            return Err(Error::InvalidInstance(format!("\"m\" is {} but utilities have length {}", f.m, mixture.m())));
        }
        let pairs = match f.pairs {
            PairsFile::Mu { mu } => PairDistribution::ProductOfMu { mu },
            PairsFile::Nu { nu } => PairDistribution::GeneralNu {
                pairs: nu.into_iter().map(|p| WeightedPair { x: p.x.min(p.y), y: p.x.max(p.y), p: p.p }).collect(),
            },
        };
        Instance::new(mixture, f.beta, pairs)
    }
}

pub fn instance_to_json(inst: &Instance) -> serde_json::Value {
    serde_json::to_value(InstanceFile::from(inst)).expect("instance serializes")
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    serde_json::from_str::<InstanceFile>(text)?.try_into()
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&instance_to_json(inst))? + "\n")?;
    Ok(())
}

/// Dense matrix as CSV rows, no header.
pub fn counts_to_csv(counts: &ComparisonCounts) -> String {
    counts.matrix().to_rows().iter().map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(",") + "\n").collect()
}

pub fn counts_from_csv(text: &str) -> Result<ComparisonCounts> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|v| v.trim().parse::<u64>().map_err(|e| Error::InvalidArgument(format!("bad count {v:?}: {e}"))))
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ComparisonCounts::from_rows(rows)
}

/// Reads counts from a `.csv` file or a JSON matrix.
pub fn read_counts(path: &Path) -> Result<ComparisonCounts> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        counts_from_csv(&text)
    } else {
        Ok(serde_json::from_str(&text)?)
    }
}
