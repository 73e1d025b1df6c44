//! Classical stand-ins for the quantum optimizer: simulated annealing (raw
//! mode), single-site Gibbs sampling at fixed β (sampling mode), uniform random
//! runs, and exhaustive enumeration as a ground-truth oracle.
//!
//! Every sampler is a pure function of `(problem, params)`. Run `i` of an
//! annealing or random set draws from its own stream seeded with
//! `sub_seed(seed, i)`, so runs can be generated in parallel without changing
//! the output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};
use crate::ising::{IsingProblem, Spin, SpinConfiguration, ENERGY_TOLERANCE};
use crate::rng::{random_spin, rng_from_seed, sub_seed, unit_f64, StdRng};

/// Largest problem [`exact_ground_state`] will enumerate.
pub const MAX_EXACT_VERTICES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Geometric,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerParams {
    pub num_runs: usize,
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub interpolation: Interpolation,
    /// Inverse temperature of the Gibbs chain.
    pub fixed_beta: Option<f64>,
    /// Gibbs sweeps discarded before the first sample.
    pub burn_in: usize,
    /// Gibbs sweeps between consecutive samples.
    pub thinning: usize,
    pub seed: u64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            num_runs: 100,
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 5.0,
            interpolation: Interpolation::Geometric,
            fixed_beta: Some(1.0),
            burn_in: 1000,
            thinning: 10,
            seed: 0,
        }
    }
}

impl SamplerParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_runs(mut self, num_runs: usize) -> Self {
        self.num_runs = num_runs;
        self
    }

    fn validate_schedule(&self) -> Result<()> {
        if self.num_runs == 0 {
            return Err(parameter("num_runs must be positive"));
        }
        if self.sweeps == 0 {
            return Err(parameter("sweeps must be positive"));
        }
        let ok = |b: f64| b.is_finite() && b > 0.0;
        if !ok(self.beta_start) || !ok(self.beta_end) {
            return Err(parameter(format!(
                "betas must be positive, got {} and {}",
                self.beta_start, self.beta_end
            )));
        }
        if self.beta_start > self.beta_end {
            return Err(parameter(format!(
                "beta_start {} exceeds beta_end {}",
                self.beta_start, self.beta_end
            )));
        }
        Ok(())
    }

    /// Inverse temperature used on annealing sweep `sweep` (0-based).
    pub fn beta_at(&self, sweep: usize) -> f64 {
        let t = if self.sweeps > 1 {
            sweep as f64 / (self.sweeps - 1) as f64
        } else {
            1.0
        };
        match self.interpolation {
            Interpolation::Geometric => self.beta_start * (self.beta_end / self.beta_start).powf(t),
            Interpolation::Linear => self.beta_start + (self.beta_end - self.beta_start) * t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Anneal,
    Gibbs,
    Random,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Anneal => "anneal",
            SamplerKind::Gibbs => "gibbs",
            SamplerKind::Random => "random",
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anneal" => Ok(SamplerKind::Anneal),
            "gibbs" => Ok(SamplerKind::Gibbs),
            "random" => Ok(SamplerKind::Random),
            other => Err(parameter(format!("unknown sampler `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub sampler: String,
    pub params: SamplerParams,
    pub seed: u64,
}

/// Ordered runs for one problem plus where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSet {
    pub problem_id: String,
    pub provenance: Provenance,
    pub runs: Vec<SpinConfiguration>,
}

impl RunSet {
    pub fn new(problem: &IsingProblem, provenance: Provenance, runs: Vec<SpinConfiguration>) -> Self {
        Self {
            problem_id: problem.fingerprint(),
            provenance,
            runs,
        }
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Lowest-energy run; the earliest one on ties.
    pub fn best(&self) -> Option<&SpinConfiguration> {
        best_run(&self.runs)
    }

    pub fn validate(&self, problem: &IsingProblem) -> Result<()> {
        for run in &self.runs {
            run.validate(problem)?;
        }
        Ok(())
    }
}

/// Lowest-energy configuration in `runs`; the earliest one on ties.
pub fn best_run(runs: &[SpinConfiguration]) -> Option<&SpinConfiguration> {
    runs.iter()
        .reduce(|best, r| if r.energy() < best.energy() { r } else { best })
}

fn random_spins(rng: &mut StdRng, n: usize) -> Vec<Spin> {
    (0..n).map(|_| random_spin(rng)).collect()
}

/// Independent Metropolis single-spin-flip anneals.
///
/// Each run starts from uniform random spins and performs `sweeps` passes over
/// the vertices in index order; a flip of `v` is accepted with probability
/// `min(1, exp(−β ΔE))`.
pub fn simulated_anneal(problem: &IsingProblem, params: &SamplerParams) -> Result<RunSet> {
    params.validate_schedule()?;
    let n = problem.vertex_count();
    let betas: Vec<f64> = (0..params.sweeps).map(|s| params.beta_at(s)).collect();
    let runs = (0..params.num_runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(sub_seed(params.seed, i as u64));
            let mut spins = random_spins(&mut rng, n);
            for &beta in &betas {
                for v in 0..n {
                    let delta = problem.flip_delta(v, &spins);
                    if delta <= 0.0 || unit_f64(&mut rng) < (-beta * delta).exp() {
                        spins[v] = -spins[v];
                    }
                }
            }
            SpinConfiguration::new(problem, spins)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunSet::new(
        problem,
        Provenance {
            sampler: SamplerKind::Anneal.name().into(),
            params: params.clone(),
            seed: params.seed,
        },
        runs,
    ))
}

/// Heat-bath update of spin `v` at inverse temperature `beta`.
#[inline]
fn gibbs_update(problem: &IsingProblem, spins: &mut [Spin], v: usize, beta: f64, rng: &mut StdRng) {
    // P(σ_v = +1) = e^{−β f} / (e^{−β f} + e^{β f}) with f the local field.
    let field = problem.local_field(v, spins);
    let p_up = 1.0 / (1.0 + (2.0 * beta * field).exp());
    spins[v] = if unit_f64(rng) < p_up { 1 } else { -1 };
}

/// States from one single-site Gibbs chain targeting `P(σ) ∝ exp(−β E(σ))`.
///
/// The chain starts from uniform random spins, runs `burn_in` sweeps, then
/// records a state after every `thinning` further sweeps.
pub fn gibbs_sample(problem: &IsingProblem, params: &SamplerParams) -> Result<RunSet> {
    let beta = params
        .fixed_beta
        .ok_or_else(|| parameter("gibbs sampling requires fixed_beta"))?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(parameter(format!("fixed_beta must be positive, got {beta}")));
    }
    if params.num_runs == 0 {
        return Err(parameter("num_runs must be positive"));
    }
    if params.thinning == 0 {
        return Err(parameter("thinning must be at least one sweep"));
    }
    let n = problem.vertex_count();
    let mut rng = rng_from_seed(params.seed);
    let mut spins = random_spins(&mut rng, n);
    let sweep = |spins: &mut [Spin], rng: &mut StdRng| {
        for v in 0..n {
            gibbs_update(problem, spins, v, beta, rng);
        }
    };
    for _ in 0..params.burn_in {
        sweep(&mut spins, &mut rng);
    }
    let mut runs = Vec::with_capacity(params.num_runs);
    for _ in 0..params.num_runs {
        for _ in 0..params.thinning {
            sweep(&mut spins, &mut rng);
        }
        runs.push(SpinConfiguration::new(problem, spins.clone())?);
    }
    Ok(RunSet::new(
        problem,
        Provenance {
            sampler: SamplerKind::Gibbs.name().into(),
            params: params.clone(),
            seed: params.seed,
        },
        runs,
    ))
}

/// `count` i.i.d. uniform configurations. `count = 0` yields an empty set,
/// which every post-processor rejects.
pub fn random_runs(problem: &IsingProblem, count: usize, seed: u64) -> RunSet {
    let n = problem.vertex_count();
    let runs = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(sub_seed(seed, i as u64));
            SpinConfiguration::new(problem, random_spins(&mut rng, n))
                .expect("spins are ±1 with the problem's length")
        })
        .collect();
    RunSet::new(
        problem,
        Provenance {
            sampler: SamplerKind::Random.name().into(),
            params: SamplerParams {
                num_runs: count,
                seed,
                ..SamplerParams::default()
            },
            seed,
        },
        runs,
    )
}

/// Dispatches to the sampler named by `kind`.
pub fn sample(problem: &IsingProblem, kind: SamplerKind, params: &SamplerParams) -> Result<RunSet> {
    match kind {
        SamplerKind::Anneal => simulated_anneal(problem, params),
        SamplerKind::Gibbs => gibbs_sample(problem, params),
        SamplerKind::Random => {
            if params.num_runs == 0 {
                return Err(parameter("num_runs must be positive"));
            }
            Ok(random_runs(problem, params.num_runs, params.seed))
        }
    }
}

/// Minimum-energy configuration by exhaustive enumeration.
///
/// States are visited in Gray-code order with O(degree) energy updates. Ties
/// (within [`ENERGY_TOLERANCE`]) go to the lexicographically smallest spin
/// vector with `−1 < +1`. The returned energy is re-evaluated from scratch.
pub fn exact_ground_state(problem: &IsingProblem) -> Result<(SpinConfiguration, f64)> {
    let n = problem.vertex_count();
    if n > MAX_EXACT_VERTICES {
        return Err(Error::Size {
            vertices: n,
            limit: MAX_EXACT_VERTICES,
        });
    }
    // bit v of `mask` set <=> σ_v = +1; `lex_key` puts vertex 0 in the top bit.
    let lex_key = |mask: u32| -> u32 { (0..n).fold(0u32, |k, v| (k << 1) | ((mask >> v) & 1)) };

    let mut spins: Vec<Spin> = vec![-1; n];
    let mut mask = 0u32;
    let mut current = problem.energy_unchecked(&spins);
    let mut best = (current, lex_key(0), 0u32);
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        current += problem.flip_delta(v, &spins);
        spins[v] = -spins[v];
        mask ^= 1 << v;
        if current < best.0 - ENERGY_TOLERANCE {
            best = (current, lex_key(mask), mask);
        } else if current <= best.0 + ENERGY_TOLERANCE {
            let key = lex_key(mask);
            if key < best.1 {
                best = (current.min(best.0), key, mask);
            }
        }
    }
    let ground: Vec<Spin> = (0..n)
        .map(|v| if (best.2 >> v) & 1 == 1 { 1 } else { -1 })
        .collect();
    let config = SpinConfiguration::new(problem, ground)?;
    let energy = config.energy();
    Ok((config, energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{chimera_graph, complete_graph, random_problem, ChimeraSpec, Graph, ProblemGenSpec};

    fn problem_on(graph: &Graph, seed: u64) -> IsingProblem {
        random_problem(graph, &ProblemGenSpec { seed, ..Default::default() }).unwrap()
    }

    #[test]
    fn anneal_finds_unique_single_spin_minimum() {
        let p = IsingProblem::new(1, vec![2.0], []).unwrap();
        let params = SamplerParams { num_runs: 8, sweeps: 50, ..Default::default() };
        let set = simulated_anneal(&p, &params).unwrap();
        assert_eq!(set.len(), 8);
        assert!(set.runs.iter().all(|r| r.spins() == [-1]));
    }

    #[test]
    fn anneal_is_deterministic_and_validates() {
        let g = chimera_graph(ChimeraSpec::new(1, 2, 4)).unwrap();
        let p = problem_on(&g, 7);
        let params = SamplerParams { num_runs: 10, sweeps: 30, seed: 99, ..Default::default() };
        let a = simulated_anneal(&p, &params).unwrap();
        let b = simulated_anneal(&p, &params).unwrap();
        assert_eq!(a, b);
        a.validate(&p).unwrap();
        let c = simulated_anneal(&p, &params.clone().with_seed(100)).unwrap();
        assert_ne!(a.runs, c.runs);
    }

    #[test]
    fn anneal_rejects_bad_schedules() {
        let p = IsingProblem::new(1, vec![1.0], []).unwrap();
        for params in [
            SamplerParams { beta_start: 3.0, beta_end: 1.0, ..Default::default() },
            SamplerParams { beta_start: 0.0, ..Default::default() },
            SamplerParams { sweeps: 0, ..Default::default() },
            SamplerParams { num_runs: 0, ..Default::default() },
        ] {
            assert!(matches!(simulated_anneal(&p, &params), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn schedule_endpoints() {
        for interpolation in [Interpolation::Geometric, Interpolation::Linear] {
            let params = SamplerParams { sweeps: 11, beta_start: 0.5, beta_end: 8.0, interpolation, ..Default::default() };
            assert!((params.beta_at(0) - 0.5).abs() < 1e-12);
            assert!((params.beta_at(10) - 8.0).abs() < 1e-12);
            assert!(params.beta_at(5) > params.beta_at(4));
        }
    }

    #[test]
    fn gibbs_requires_beta() {
        let p = IsingProblem::new(1, vec![1.0], []).unwrap();
        let params = SamplerParams { fixed_beta: None, ..Default::default() };
        assert!(matches!(gibbs_sample(&p, &params), Err(Error::Parameter(_))));
    }

    #[test]
    fn gibbs_is_deterministic() {
        let p = problem_on(&complete_graph(5).unwrap(), 3);
        let params = SamplerParams { num_runs: 50, burn_in: 10, seed: 4, ..Default::default() };
        assert_eq!(gibbs_sample(&p, &params).unwrap(), gibbs_sample(&p, &params).unwrap());
    }

    #[test]
    fn random_runs_reproducible_and_balanced() {
        let p = problem_on(&complete_graph(4).unwrap(), 1);
        assert_eq!(random_runs(&p, 20, 5), random_runs(&p, 20, 5));
        assert!(random_runs(&p, 0, 5).is_empty());

        let q = IsingProblem::new(1, vec![0.0], []).unwrap();
        let set = random_runs(&q, 100_000, 11);
        let mean: f64 = set.runs.iter().map(|r| f64::from(r.spins()[0])).sum::<f64>() / 100_000.0;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn exact_two_vertex() {
        let p = IsingProblem::new(2, vec![1.0, -1.0], [(0, 1, 0.5)]).unwrap();
        let (c, e) = exact_ground_state(&p).unwrap();
        assert_eq!(c.spins(), [-1, 1]);
        assert_eq!(e, -2.5);
    }

    #[test]
    fn exact_ties_prefer_lexicographically_smallest() {
        // Ferromagnetic pair without field: [-1,-1] and [+1,+1] tie.
        let p = IsingProblem::new(2, vec![0.0, 0.0], [(0, 1, -1.0)]).unwrap();
        let (c, _) = exact_ground_state(&p).unwrap();
        assert_eq!(c.spins(), [-1, -1]);
    }

    #[test]
    fn exact_degenerate_under_global_flip_without_field() {
        let p = problem_on(&complete_graph(9).unwrap(), 5).map_coefficients(|_| 0.0, |j| j);
        let (c, e) = exact_ground_state(&p).unwrap();
        let neg: Vec<Spin> = c.spins().iter().map(|s| -s).collect();
        assert!((p.energy(&neg).unwrap() - e).abs() < 1e-12);
        assert_eq!(c.spins()[0], -1);
    }

    #[test]
    fn exact_rejects_large_problems() {
        let g = crate::topology::path_graph(26).unwrap();
        let p = problem_on(&g, 1);
        assert!(matches!(exact_ground_state(&p), Err(Error::Size { vertices: 26, limit: 25 })));
    }

    #[test]
    fn exact_beats_random_sampling() {
        let g = chimera_graph(ChimeraSpec::new(2, 1, 4)).unwrap();
        let p = problem_on(&g, 16);
        let (_, ground) = exact_ground_state(&p).unwrap();
        let set = random_runs(&p, 10_000, 2);
        assert!(set.runs.iter().all(|r| r.energy() >= ground - 1e-12));
    }

    #[test]
    fn best_run_prefers_earliest_on_tie() {
        let p = IsingProblem::new(1, vec![0.0], []).unwrap();
        let runs = vec![
            SpinConfiguration::new(&p, vec![1]).unwrap(),
            SpinConfiguration::new(&p, vec![-1]).unwrap(),
        ];
        assert_eq!(best_run(&runs).unwrap().spins(), [1]);
    }
}
