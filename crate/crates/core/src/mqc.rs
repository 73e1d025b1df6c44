//! Multi Qubit Correction.
//!
//! Two runs are merged by splitting the vertices they disagree on into
//! tunnels (connected components of the disagreement set) and, tunnel by
//! tunnel, keeping whichever run's spins contribute less energy given the
//! spins both runs agree on. A set of runs is reduced to one by repeated
//! pairing and merging, one level at a time.
//!
//! A merge never produces an energy above the better of its two inputs, so
//! a reduction never ends above the best run it started from.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, parameter, Error, Result};
use crate::ising::{IsingProblem, Spin, SpinConfiguration, Tunnel};
use crate::topology::{ComponentScratch, OUTSIDE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingStrategy {
    /// `(0,1), (2,3), …` in the order received.
    Sequential,
    /// Stable ascending energy sort, then adjacent runs are paired.
    RankOrder,
    /// Greedily pair the two remaining runs with the largest Hamming distance.
    MaxDifference,
}

impl PairingStrategy {
    pub const ALL: [PairingStrategy; 3] = [
        PairingStrategy::Sequential,
        PairingStrategy::RankOrder,
        PairingStrategy::MaxDifference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairingStrategy::Sequential => "sequential",
            PairingStrategy::RankOrder => "rank_order",
            PairingStrategy::MaxDifference => "max_difference",
        }
    }
}

impl fmt::Display for PairingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PairingStrategy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| parameter(format!("unknown pairing strategy `{s}`")))
    }
}

/// Pairs of run indices for one reduction level, plus the run carried over
/// unchanged when the level has odd size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub leftover: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Run1,
    Run2,
}

/// How one tunnel was resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelChoice {
    pub size: usize,
    pub contribution_run1: f64,
    pub contribution_run2: f64,
    pub chosen: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub run1: usize,
    pub run2: usize,
    pub energy: f64,
    pub tunnels: Vec<TunnelChoice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub size: usize,
    pub pairs: Vec<PairRecord>,
    pub carried: Option<usize>,
}

/// Per-level record of a reduction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub levels: Vec<LevelRecord>,
}

impl ReductionTrace {
    /// Total number of tunnels resolved across all levels.
    pub fn tunnel_count(&self) -> usize {
        self.levels
            .iter()
            .flat_map(|l| &l.pairs)
            .map(|p| p.tunnels.len())
            .sum()
    }
}

fn check_same_len(a: &[Spin], b: &[Spin]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Number of positions where the two runs differ.
pub fn hamming_distance(run1: &[Spin], run2: &[Spin]) -> Result<usize> {
    check_same_len(run1, run2)?;
    Ok(run1.iter().zip(run2).filter(|(a, b)| a != b).count())
}

/// Spins packed one bit per vertex (`+1` ↦ 1) for fast Hamming distances.
fn pack(spins: &[Spin]) -> Vec<u64> {
    let mut words = vec![0u64; spins.len().div_ceil(64)];
    for (v, &s) in spins.iter().enumerate() {
        if s > 0 {
            words[v / 64] |= 1 << (v % 64);
        }
    }
    words
}

fn packed_distance(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as usize).sum()
}

/// Forms the pairs for one reduction level.
pub fn pair_runs(runs: &[SpinConfiguration], strategy: PairingStrategy) -> Result<Pairing> {
    if runs.is_empty() {
        return Err(input("cannot pair an empty run set"));
    }
    for r in &runs[1..] {
        check_same_len(&runs[0], r)?;
    }
    let order: Vec<usize> = match strategy {
        PairingStrategy::Sequential => (0..runs.len()).collect(),
        PairingStrategy::RankOrder => {
            let mut idx: Vec<usize> = (0..runs.len()).collect();
            idx.sort_by(|&a, &b| runs[a].energy().total_cmp(&runs[b].energy()).then(a.cmp(&b)));
            idx
        }
        PairingStrategy::MaxDifference => return Ok(max_difference_pairs(runs)),
    };
    let pairs = order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let leftover = (order.len() % 2 == 1).then(|| order[order.len() - 1]);
    Ok(Pairing { pairs, leftover })
}

/// Greedy maximum-distance pairing: repeatedly take the unpaired couple with
/// the largest Hamming distance, ties to the smallest `(i, j)`.
fn max_difference_pairs(runs: &[SpinConfiguration]) -> Pairing {
    let n = runs.len();
    let packed: Vec<Vec<u64>> = runs.iter().map(|r| pack(r)).collect();
    let mut candidates: Vec<(usize, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            candidates.push((packed_distance(&packed[i], &packed[j]), i, j));
        }
    }
    candidates.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(n / 2);
    for (_, i, j) in candidates {
        if pairs.len() == n / 2 {
            break;
        }
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            pairs.push((i, j));
        }
    }
    let leftover = used.iter().position(|&u| !u);
    Pairing { pairs, leftover }
}

/// Tunnels of a run pair: maximal connected components of the disagreement set.
pub fn find_tunnels(problem: &IsingProblem, run1: &[Spin], run2: &[Spin]) -> Result<Vec<Tunnel>> {
    check_same_len(run1, run2)?;
    if run1.len() != problem.vertex_count() {
        return Err(Error::Dimension {
            expected: problem.vertex_count(),
            found: run1.len(),
        });
    }
    let disagree: Vec<usize> = (0..run1.len()).filter(|&v| run1[v] != run2[v]).collect();
    let mut scratch = ComponentScratch::default();
    Ok(scratch
        .label(problem, &disagree)
        .into_iter()
        .map(Tunnel::from_sorted)
        .collect())
}

fn merge_with(
    problem: &IsingProblem,
    run1: &SpinConfiguration,
    run2: &SpinConfiguration,
    scratch: &mut ComponentScratch,
) -> (SpinConfiguration, Vec<TunnelChoice>) {
    let disagree: Vec<usize> = (0..run1.len()).filter(|&v| run1[v] != run2[v]).collect();
    if disagree.is_empty() {
        return (run1.clone(), Vec::new());
    }
    let tunnels = scratch.label(problem, &disagree);
    let labels = scratch.labels();
    let h = problem.h();

    let mut spins = run1.spins().to_vec();
    let mut choices = Vec::with_capacity(tunnels.len());
    for tunnel in &tunnels {
        let mut c1 = 0.0;
        let mut c2 = 0.0;
        for &a in tunnel {
            let (s1, s2) = (f64::from(run1[a]), f64::from(run2[a]));
            c1 += h[a] * s1;
            c2 += h[a] * s2;
            // Any disagreeing neighbor belongs to this same tunnel, so the
            // exterior of the tunnel is exactly the agreement set.
            for &(b, j) in problem.neighbors(a) {
                if labels[b] == OUTSIDE {
                    let sb = f64::from(run1[b]);
                    c1 += j * s1 * sb;
                    c2 += j * s2 * sb;
                }
            }
        }
        let chosen = if c2 < c1 { Side::Run2 } else { Side::Run1 };
        if chosen == Side::Run2 {
            for &a in tunnel {
                spins[a] = run2[a];
            }
        }
        choices.push(TunnelChoice {
            size: tunnel.len(),
            contribution_run1: c1,
            contribution_run2: c2,
            chosen,
        });
    }

    let merged = SpinConfiguration::new(problem, spins).expect("merged spins keep the problem's length");
    let floor = if run2.energy() < run1.energy() { run2 } else { run1 };
    if merged.energy() > floor.energy() {
        // Only reachable through rounding in near-tied tunnels.
        return (floor.clone(), choices);
    }
    (merged, choices)
}

fn check_run(problem: &IsingProblem, run: &[Spin]) -> Result<()> {
    if run.len() != problem.vertex_count() {
        return Err(Error::Dimension {
            expected: problem.vertex_count(),
            found: run.len(),
        });
    }
    Ok(())
}

/// Merges two runs tunnel by tunnel; `run1` wins tied tunnels.
pub fn mqc_pair(
    problem: &IsingProblem,
    run1: &SpinConfiguration,
    run2: &SpinConfiguration,
) -> Result<SpinConfiguration> {
    mqc_pair_traced(problem, run1, run2).map(|(c, _)| c)
}

/// [`mqc_pair`] that also reports how every tunnel was resolved.
pub fn mqc_pair_traced(
    problem: &IsingProblem,
    run1: &SpinConfiguration,
    run2: &SpinConfiguration,
) -> Result<(SpinConfiguration, Vec<TunnelChoice>)> {
    check_run(problem, run1)?;
    check_run(problem, run2)?;
    Ok(merge_with(problem, run1, run2, &mut ComponentScratch::default()))
}

/// Reduces `runs` to a single configuration.
///
/// Each level re-applies `strategy` to the current runs, merges every pair
/// (pairs are disjoint, so merging runs in parallel), and appends the
/// leftover run, if any, unchanged after the merged results.
pub fn mqc_reduce(
    problem: &IsingProblem,
    runs: &[SpinConfiguration],
    strategy: PairingStrategy,
) -> Result<(SpinConfiguration, ReductionTrace)> {
    if runs.is_empty() {
        return Err(input("cannot reduce an empty run set"));
    }
    for r in runs {
        check_run(problem, r)?;
    }
    let mut trace = ReductionTrace::default();
    let mut current: Vec<SpinConfiguration> = runs.to_vec();
    while current.len() > 1 {
        let pairing = pair_runs(&current, strategy)?;
        let merged: Vec<(SpinConfiguration, PairRecord)> = pairing
            .pairs
            .par_iter()
            .map_init(ComponentScratch::default, |scratch, &(i, j)| {
                let (config, tunnels) = merge_with(problem, &current[i], &current[j], scratch);
                let record = PairRecord {
                    run1: i,
                    run2: j,
                    energy: config.energy(),
                    tunnels,
                };
                (config, record)
            })
            .collect();

        let mut next = Vec::with_capacity(merged.len() + 1);
        let mut records = Vec::with_capacity(merged.len());
        for (config, record) in merged {
            next.push(config);
            records.push(record);
        }
        if let Some(k) = pairing.leftover {
            next.push(current[k].clone());
        }
        trace.levels.push(LevelRecord {
            size: current.len(),
            pairs: records,
            carried: pairing.leftover,
        });
        current = next;
    }
    let result = current.pop().expect("reduction leaves exactly one run");
    Ok((result, trace))
}
