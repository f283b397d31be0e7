//! JSON instance and distribution files.
//!
//! Rationals are written as `"num/den"` strings (or `"n"` for integers) so
//! values survive a round trip exactly.
//!
//! ```json
//! {"m": 2, "system": {"kind": "uniform", "k": 1}, "scores": [[0, 1, "1"], [1, 0, "1/2"]]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::SelectionDistribution;
use crate::scores::ScoreMatrix;
use crate::subset::{AgentSubset, MAX_AGENTS};
use crate::systems::{ExplicitSystem, GraphicMatroid, IndependenceSystem, Instance, KnapsackSystem, PartitionMatroid};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub system: SystemSpec,
    /// Sparse `[voter, target, score]` triplets; omitted entries are zero.
    pub scores: Vec<(usize, usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemSpec {
    Uniform { k: usize },
    Partition { blocks: Vec<Vec<usize>>, capacities: Vec<usize> },
    Graphic { vertices: usize, edges: Vec<(usize, usize)>, simple: bool },
    Knapsack { sizes: Vec<String>, capacity: String },
    /// Listed sets and all their subsets are independent.
    Explicit { independent: Vec<Vec<usize>> },
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("{s:?} is not a rational of the form \"num/den\""));
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (n.trim().parse::<i128>().map_err(|_| bad())?, d.trim().parse::<i128>().map_err(|_| bad())?),
        None => (s.trim().parse::<i128>().map_err(|_| bad())?, 1),
    };
    if d == 0 {
        return Err(Error::Parse(format!("{s:?} has a zero denominator")));
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(q: Rational) -> String {
    q.to_string()
}

fn subset(m: usize, members: &[usize], what: &str) -> Result<AgentSubset> {
    if let Some(i) = members.iter().find(|&&i| i >= m) {
        return Err(Error::Parse(format!("{what} lists agent {i}, outside 0..{m}")));
    }
    Ok(members.iter().copied().collect())
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        let m = instance.m();
        let system = match &instance.system {
            IndependenceSystem::Uniform(u) => SystemSpec::Uniform { k: u.k },
            IndependenceSystem::Partition(p) => SystemSpec::Partition {
                blocks: p.blocks().iter().map(|b| b.to_vec()).collect(),
                capacities: p.capacities().to_vec(),
            },
            IndependenceSystem::Graphic(g) => SystemSpec::Graphic {
                vertices: g.vertex_count(),
                edges: g.edges().to_vec(),
                simple: g.is_simple(),
            },
            IndependenceSystem::Knapsack(k) => SystemSpec::Knapsack {
                sizes: k.sizes().iter().map(|s| format_rational(*s)).collect(),
                capacity: format_rational(k.capacity()),
            },
            IndependenceSystem::Explicit(e) => {
                SystemSpec::Explicit { independent: e.maximal_sets().iter().map(|s| s.to_vec()).collect() }
            }
        };
        let scores = instance.scores.triplets().map(|(i, j, v)| (i, j, format_rational(v))).collect();
        InstanceFile { m, system, scores }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let m = self.m;
        if m > MAX_AGENTS {
            return Err(Error::Parse(format!("m = {m} exceeds {MAX_AGENTS}")));
        }
        let system = match &self.system {
            SystemSpec::Uniform { k } => IndependenceSystem::uniform(m, *k),
            SystemSpec::Partition { blocks, capacities } => {
                let blocks = blocks.iter().map(|b| subset(m, b, "partition block")).collect::<Result<_>>()?;
                IndependenceSystem::Partition(PartitionMatroid::new(m, blocks, capacities.clone())?)
            }
            SystemSpec::Graphic { vertices, edges, simple } => {
                IndependenceSystem::Graphic(GraphicMatroid::new(*vertices, edges.clone(), *simple)?)
            }
            SystemSpec::Knapsack { sizes, capacity } => {
                let sizes = sizes.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
                IndependenceSystem::Knapsack(KnapsackSystem::new(sizes, parse_rational(capacity)?)?)
            }
            SystemSpec::Explicit { independent } => {
                let sets: Vec<_> = independent.iter().map(|s| subset(m, s, "independent set")).collect::<Result<_>>()?;
                IndependenceSystem::Explicit(ExplicitSystem::from_maximal(m, &sets)?)
            }
        };
        if system.ground_size() != m {
            return Err(Error::GroundMismatch { expected: m, found: system.ground_size() });
        }
        let mut triplets = Vec::with_capacity(self.scores.len());
        for (i, j, v) in &self.scores {
            let value = parse_rational(v).map_err(|e| {
                let why = match e {
                    Error::Parse(why) => why,
                    e => e.to_string(),
                };
                Error::Parse(format!("score triplet [{i}, {j}, {v:?}]: {why}"))
            })?;
            triplets.push((*i, *j, value));
        }
        let w = ScoreMatrix::from_triplets(m, triplets)?;
        Instance::new(system, w)
    }
}

pub fn parse_instance(json: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_instance()
}

/// Pretty JSON with a trailing newline.
pub fn instance_to_json(instance: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(instance)).expect("serializable");
    s.push('\n');
    s
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    std::fs::write(path, instance_to_json(instance)).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub support: Vec<SupportEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportEntry {
    pub set: Vec<usize>,
    pub p: String,
}

impl DistributionFile {
    pub fn from_distribution(d: &SelectionDistribution) -> Self {
        DistributionFile {
            support: d.support().iter().map(|(s, p)| SupportEntry { set: s.to_vec(), p: format_rational(*p) }).collect(),
        }
    }

    pub fn to_distribution(&self, m: usize) -> Result<SelectionDistribution> {
        let entries = self
            .support
            .iter()
            .map(|e| Ok((subset(m, &e.set, "support set")?, parse_rational(&e.p)?)))
            .collect::<Result<Vec<_>>>()?;
        SelectionDistribution::new(entries)
    }
}

pub fn read_distribution(path: &Path, m: usize) -> Result<SelectionDistribution> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file: DistributionFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    file.to_distribution(m)
}
