//! Sample persistence: fix spins that most runs agree on, fold them into the
//! remaining problem, and re-sample what is left.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{input, parameter, Error, Result};
use crate::ising::{IsingProblem, Spin, SpinConfiguration};
use crate::rng::sub_seed;
use crate::samplers::{sample, SamplerKind, SamplerParams};

/// Fixed spins plus the problem over the vertices still free.
///
/// Free vertex `free_vertices[i]` is vertex `i` of `reduced_problem`, whose
/// linear term absorbs every coupling to a fixed vertex. `offset` is the
/// energy of the fixed vertices among themselves, so that
/// `reduced energy + offset` equals the full energy of any extension.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedAssignment {
    pub assignments: BTreeMap<usize, Spin>,
    pub free_vertices: Vec<usize>,
    pub reduced_problem: IsingProblem,
    pub offset: f64,
}

impl FixedAssignment {
    /// Builds the reduction for `fixed[v] = Some(σ_v)`.
    pub fn new(problem: &IsingProblem, fixed: &[Option<Spin>]) -> Result<Self> {
        let n = problem.vertex_count();
        if fixed.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: fixed.len(),
            });
        }
        if fixed.iter().flatten().any(|&s| s != 1 && s != -1) {
            return Err(input("fixed spins must be ±1"));
        }
        let mut local = vec![usize::MAX; n];
        let mut free_vertices = Vec::new();
        for v in 0..n {
            if fixed[v].is_none() {
                local[v] = free_vertices.len();
                free_vertices.push(v);
            }
        }

        let mut h: Vec<f64> = free_vertices.iter().map(|&v| problem.h()[v]).collect();
        let mut offset: f64 = fixed
            .iter()
            .zip(problem.h())
            .filter_map(|(s, &hv)| s.map(|s| hv * f64::from(s)))
            .sum();
        let mut couplings = Vec::new();
        for c in problem.couplings() {
            match (fixed[c.a], fixed[c.b]) {
                (None, None) => couplings.push((local[c.a], local[c.b], c.value)),
                (None, Some(sb)) => h[local[c.a]] += c.value * f64::from(sb),
                (Some(sa), None) => h[local[c.b]] += c.value * f64::from(sa),
                (Some(sa), Some(sb)) => offset += c.value * f64::from(sa * sb),
            }
        }
        let reduced_problem = IsingProblem::new(free_vertices.len(), h, couplings)?;
        let assignments = fixed
            .iter()
            .enumerate()
            .filter_map(|(v, s)| s.map(|s| (v, s)))
            .collect();
        Ok(Self {
            assignments,
            free_vertices,
            reduced_problem,
            offset,
        })
    }

    /// True when no vertex is left free.
    pub fn is_complete(&self) -> bool {
        self.free_vertices.is_empty()
    }

    /// Full spin vector from the fixed spins and `free` spins of the reduced problem.
    pub fn expand(&self, free: &[Spin]) -> Result<Vec<Spin>> {
        if free.len() != self.free_vertices.len() {
            return Err(Error::Dimension {
                expected: self.free_vertices.len(),
                found: free.len(),
            });
        }
        let n = self.free_vertices.len() + self.assignments.len();
        let mut spins = vec![0 as Spin; n];
        for (&v, &s) in &self.assignments {
            spins[v] = s;
        }
        for (&v, &s) in self.free_vertices.iter().zip(free) {
            spins[v] = s;
        }
        Ok(spins)
    }
}

/// Fixes vertex `v` to `s` when at least a `threshold` fraction of `runs` has `σ_v = s`.
pub fn persistence_fix(problem: &IsingProblem, runs: &[SpinConfiguration], threshold: f64) -> Result<FixedAssignment> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(parameter(format!("threshold must lie in (0.5, 1], got {threshold}")));
    }
    if runs.len() < 2 {
        return Err(input(format!("persistence needs at least two runs, got {}", runs.len())));
    }
    let n = problem.vertex_count();
    for r in runs {
        if r.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: r.len(),
            });
        }
    }
    let total = runs.len() as f64;
    let fixed: Vec<Option<Spin>> = (0..n)
        .map(|v| {
            let up = runs.iter().filter(|r| r[v] > 0).count() as f64;
            if up / total >= threshold - 1e-12 {
                Some(1)
            } else if (total - up) / total >= threshold - 1e-12 {
                Some(-1)
            } else {
                None
            }
        })
        .collect();
    FixedAssignment::new(problem, &fixed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceRound {
    pub free_before: usize,
    pub newly_fixed: usize,
    pub best_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceOutcome {
    pub config: SpinConfiguration,
    pub rounds: Vec<PersistenceRound>,
}

/// Iterated sample persistence.
///
/// Round 0 samples the full problem with `params` as given; round `k > 0`
/// samples the current reduced problem with seed `sub_seed(params.seed, k)`.
/// After each round the spins that meet `threshold` are fixed. The loop ends
/// after `rounds` rounds or once every vertex is fixed. The result is the
/// lowest-energy full configuration assembled along the way, earliest on ties.
pub fn sample_persistence(
    problem: &IsingProblem,
    kind: SamplerKind,
    params: &SamplerParams,
    threshold: f64,
    rounds: usize,
) -> Result<PersistenceOutcome> {
    if rounds == 0 {
        return Err(parameter("rounds must be positive"));
    }
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(parameter(format!("threshold must lie in (0.5, 1], got {threshold}")));
    }
    let n = problem.vertex_count();
    let mut fixed: Vec<Option<Spin>> = vec![None; n];
    let mut best: Option<SpinConfiguration> = None;
    let mut history = Vec::new();
    let offer = |best: &mut Option<SpinConfiguration>, spins: Vec<Spin>| -> Result<()> {
        let candidate = SpinConfiguration::new(problem, spins)?;
        if best.as_ref().is_none_or(|b| candidate.energy() < b.energy()) {
            *best = Some(candidate);
        }
        Ok(())
    };

    for round in 0..rounds {
        let reduction = FixedAssignment::new(problem, &fixed)?;
        if reduction.is_complete() {
            break;
        }
        let round_params = if round == 0 {
            params.clone()
        } else {
            params.clone().with_seed(sub_seed(params.seed, round as u64))
        };
        let set = sample(&reduction.reduced_problem, kind, &round_params)?;
        for run in &set.runs {
            offer(&mut best, reduction.expand(run)?)?;
        }

        let mut newly_fixed = 0;
        if set.len() >= 2 {
            let next = persistence_fix(&reduction.reduced_problem, &set.runs, threshold)?;
            for (&local, &s) in &next.assignments {
                fixed[reduction.free_vertices[local]] = Some(s);
                newly_fixed += 1;
            }
        }
        history.push(PersistenceRound {
            free_before: reduction.free_vertices.len(),
            newly_fixed,
            best_energy: best.as_ref().map_or(f64::INFINITY, |b| b.energy()),
        });
        if fixed.iter().all(Option::is_some) {
            let complete = FixedAssignment::new(problem, &fixed)?;
            offer(&mut best, complete.expand(&[])?)?;
            if let Some(last) = history.last_mut() {
                last.best_energy = best.as_ref().map_or(f64::INFINITY, |b| b.energy());
            }
            break;
        }
    }

    let config = best.ok_or_else(|| input("sample persistence produced no configuration"))?;
    Ok(PersistenceOutcome {
        config,
        rounds: history,
    })
}
