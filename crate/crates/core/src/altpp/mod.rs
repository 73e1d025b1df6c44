//! Post-processors MQC is compared against: local optimization over
//! low-width regions, and sample persistence.

mod decompose;
mod eliminate;
mod persistence;

pub use decompose::{decompose_low_treewidth, min_degree_order, Subgraph};
pub use eliminate::{optimize_subgraph, MAX_ELIMINATION_WIDTH};
pub use persistence::{
    persistence_fix, sample_persistence, FixedAssignment, PersistenceOutcome, PersistenceRound,
};

use rayon::prelude::*;

use crate::error::{input, Result};
use crate::ising::{IsingProblem, SpinConfiguration};
use crate::samplers::{Provenance, RunSet};
use eliminate::EliminationPlan;

/// Default region width; a Chimera unit cell `K_{4,4}` has width 4.
pub const DEFAULT_WIDTH_CAP: usize = 4;

/// Passes `run` through every region in order; later regions see earlier updates.
///
/// With `until_stable`, passes repeat until one leaves the energy unchanged.
pub fn optimize_run(
    problem: &IsingProblem,
    run: &SpinConfiguration,
    regions: &[Subgraph],
    until_stable: bool,
) -> Result<SpinConfiguration> {
    let plans = plans(problem, regions)?;
    if run.len() != problem.vertex_count() {
        return Err(crate::error::Error::Dimension {
            expected: problem.vertex_count(),
            found: run.len(),
        });
    }
    Ok(pass(problem, run, &plans, until_stable))
}

fn plans(problem: &IsingProblem, regions: &[Subgraph]) -> Result<Vec<EliminationPlan>> {
    regions
        .iter()
        .map(|region| {
            eliminate::validate_subgraph(problem, region)?;
            Ok(EliminationPlan::new(problem, region))
        })
        .collect()
}

fn pass(problem: &IsingProblem, run: &SpinConfiguration, plans: &[EliminationPlan], until_stable: bool) -> SpinConfiguration {
    let mut current = run.clone();
    loop {
        let before = current.energy();
        for plan in plans {
            current = plan.apply(problem, &current);
        }
        if !until_stable || current.energy() >= before {
            return current;
        }
    }
}

/// Local-optimization post-processing with an explicit decomposition.
pub fn builtin_opt_pp_with(
    problem: &IsingProblem,
    runset: &RunSet,
    regions: &[Subgraph],
    until_stable: bool,
) -> Result<RunSet> {
    if runset.is_empty() {
        return Err(input("cannot post-process an empty run set"));
    }
    let plans = plans(problem, regions)?;
    if let Some(run) = runset.runs.iter().find(|r| r.len() != problem.vertex_count()) {
        return Err(crate::error::Error::Dimension {
            expected: problem.vertex_count(),
            found: run.len(),
        });
    }
    let runs = runset
        .runs
        .par_iter()
        .map(|run| pass(problem, run, &plans, until_stable))
        .collect();
    Ok(RunSet {
        problem_id: runset.problem_id.clone(),
        provenance: Provenance {
            sampler: format!("{}+builtin_pp", runset.provenance.sampler),
            ..runset.provenance.clone()
        },
        runs,
    })
}

/// Decomposes the graph into regions of width at most `width_cap` and passes
/// every run once through all of them.
pub fn builtin_opt_pp(problem: &IsingProblem, runset: &RunSet, width_cap: usize) -> Result<RunSet> {
    if runset.is_empty() {
        return Err(input("cannot post-process an empty run set"));
    }
    let regions = decompose_low_treewidth(problem, width_cap)?;
    builtin_opt_pp_with(problem, runset, &regions, false)
}
