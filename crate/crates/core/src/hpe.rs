//! High precision enhancement: sample scaled, precision-limited copies of a
//! problem and merge the runs with MQC against the original coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{input, parameter, Result};
use crate::ising::{IsingProblem, SpinConfiguration};
use crate::mqc::{mqc_reduce, PairingStrategy};
use crate::rng::sub_seed;
use crate::samplers::{best_run, sample, RunSet, SamplerKind, SamplerParams};
use crate::topology::Interval;

/// Uniform coefficient grids standing in for limited hardware precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrecisionModel {
    pub h_clip: Interval,
    pub j_clip: Interval,
    /// Grid points per interval, endpoints included.
    pub levels: usize,
}

impl Default for PrecisionModel {
    fn default() -> Self {
        Self {
            h_clip: Interval::new(-2.0, 2.0),
            j_clip: Interval::new(-1.0, 1.0),
            levels: 17,
        }
    }
}

impl PrecisionModel {
    pub fn validate(&self) -> Result<()> {
        self.h_clip.validate("h_clip")?;
        self.j_clip.validate("j_clip")?;
        if self.levels < 2 {
            return Err(parameter(format!("levels must be at least 2, got {}", self.levels)));
        }
        Ok(())
    }

    pub fn quantize_h(&self, x: f64) -> f64 {
        snap(x, self.h_clip, self.levels)
    }

    pub fn quantize_j(&self, x: f64) -> f64 {
        snap(x, self.j_clip, self.levels)
    }
}

/// Clips `x` to `range`, then rounds to the nearest of `levels` evenly spaced points.
fn snap(x: f64, range: Interval, levels: usize) -> f64 {
    if range.hi == range.lo {
        return range.lo;
    }
    let step = (range.hi - range.lo) / (levels - 1) as f64;
    let k = ((x.clamp(range.lo, range.hi) - range.lo) / step).round();
    let k = k.clamp(0.0, (levels - 1) as f64);
    range.lo + k * step
}

/// Scaling factors and how many runs to draw at each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleSet {
    scales: Vec<f64>,
    runs_per_scale: usize,
}

impl ScaleSet {
    /// Scales are sorted ascending; they must be finite, positive and distinct.
    pub fn new(mut scales: Vec<f64>, runs_per_scale: usize) -> Result<Self> {
        if scales.is_empty() {
            return Err(parameter("scale set is empty"));
        }
        if let Some(&l) = scales.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(parameter(format!("scales must be positive, got {l}")));
        }
        scales.sort_by(f64::total_cmp);
        if scales.windows(2).any(|w| w[0] == w[1]) {
            return Err(parameter("scales must be distinct"));
        }
        if runs_per_scale == 0 {
            return Err(parameter("runs_per_scale must be positive"));
        }
        Ok(Self { scales, runs_per_scale })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn runs_per_scale(&self) -> usize {
        self.runs_per_scale
    }
}

impl Default for ScaleSet {
    fn default() -> Self {
        Self {
            scales: vec![1.0, 2.0, 4.0, 8.0],
            runs_per_scale: 16,
        }
    }
}

/// Multiplies every coefficient by `l`.
pub fn scale_problem(problem: &IsingProblem, l: f64) -> Result<IsingProblem> {
    if !(l.is_finite() && l > 0.0) {
        return Err(parameter(format!("scale must be positive, got {l}")));
    }
    Ok(problem.map_coefficients(|h| h * l, |j| j * l))
}

/// Snaps every coefficient onto the model's grid.
pub fn quantize_problem(problem: &IsingProblem, model: &PrecisionModel) -> Result<IsingProblem> {
    model.validate()?;
    Ok(problem.map_coefficients(|h| model.quantize_h(h), |j| model.quantize_j(j)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpeReport {
    pub scales: Vec<f64>,
    /// Lowest full-precision energy among each scale's runs.
    pub scale_best: Vec<f64>,
    /// Energy of each index-aligned group after its merge.
    pub group_energies: Vec<f64>,
    pub final_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HpeOutcome {
    pub config: SpinConfiguration,
    pub report: HpeReport,
}

/// Merges per-scale run sets, one per entry of `scales`, with full-precision MQC.
///
/// Group `i` holds run `i` of every set in scale order and is reduced to one
/// run; the group results are then reduced to the final configuration. Every
/// energy and tunnel decision is taken on `problem` itself.
pub fn hpe_from_runs(problem: &IsingProblem, scales: &[f64], runsets: &[RunSet]) -> Result<HpeOutcome> {
    if runsets.is_empty() {
        return Err(input("no run sets to merge"));
    }
    if scales.len() != runsets.len() {
        return Err(input(format!("{} scales but {} run sets", scales.len(), runsets.len())));
    }
    let n = runsets[0].len();
    if n == 0 {
        return Err(input("run sets are empty"));
    }
    if let Some(bad) = runsets.iter().find(|r| r.len() != n) {
        return Err(input(format!("run sets differ in size: {n} vs {}", bad.len())));
    }

    let full: Vec<Vec<SpinConfiguration>> = runsets
        .iter()
        .map(|set| {
            set.runs
                .iter()
                .map(|r| SpinConfiguration::new(problem, r.spins().to_vec()))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let scale_best = full
        .iter()
        .map(|runs| best_run(runs).map_or(f64::INFINITY, SpinConfiguration::energy))
        .collect();

    let mut groups = Vec::with_capacity(n);
    for i in 0..n {
        let group: Vec<SpinConfiguration> = full.iter().map(|runs| runs[i].clone()).collect();
        groups.push(mqc_reduce(problem, &group, PairingStrategy::Sequential)?.0);
    }
    let group_energies = groups.iter().map(SpinConfiguration::energy).collect();
    let (config, _) = mqc_reduce(problem, &groups, PairingStrategy::Sequential)?;
    Ok(HpeOutcome {
        report: HpeReport {
            scales: scales.to_vec(),
            scale_best,
            group_energies,
            final_energy: config.energy(),
        },
        config,
    })
}

/// Samples `quantize(scale(problem, l))` for every `l`, then merges with [`hpe_from_runs`].
///
/// Scale `k` (in ascending order) is sampled with seed `sub_seed(params.seed, k)`
/// and `runs_per_scale` runs.
pub fn hpe(
    problem: &IsingProblem,
    scaleset: &ScaleSet,
    model: &PrecisionModel,
    kind: SamplerKind,
    params: &SamplerParams,
) -> Result<HpeOutcome> {
    model.validate()?;
    let runsets = scaleset
        .scales
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let target = quantize_problem(&scale_problem(problem, l)?, model)?;
            let p = params
                .clone()
                .with_seed(sub_seed(params.seed, k as u64))
                .with_runs(scaleset.runs_per_scale);
            sample(&target, kind, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    hpe_from_runs(problem, &scaleset.scales, &runsets)
}
