//! Wall-time scaling of sequential MQC reduction with the number of runs.

use std::time::Instant;

use serde::Serialize;

use mqc_core::rng::sub_seed;
use mqc_core::{mqc_reduce, random_problem, random_runs, PairingStrategy, ProblemGenSpec};

use crate::config::ExperimentConfig;
use crate::report::render_grid;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchPoint {
    pub runs: usize,
    /// Fastest of the repeated reductions.
    pub seconds: f64,
    /// Time relative to the previous size; absent for the first.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub repeats: usize,
    pub points: Vec<BenchPoint>,
    pub total_seconds: f64,
}

impl BenchReport {
    pub fn max_ratio(&self) -> f64 {
        self.points.iter().filter_map(|p| p.ratio).fold(0.0, f64::max)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "sequential MQC reduction on {} vertices / {} edges, best of {}\n",
            self.vertex_count, self.edge_count, self.repeats
        );
        let body: Vec<[String; 3]> = self
            .points
            .iter()
            .map(|p| {
                [
                    p.runs.to_string(),
                    format!("{:.6}", p.seconds),
                    p.ratio.map_or_else(|| "-".into(), |r| format!("{r:.2}")),
                ]
            })
            .collect();
        render_grid(&mut out, &["runs", "seconds", "ratio"], &body);
        out
    }
}

/// Times `mqc_reduce` with the sequential strategy on the configuration's
/// first problem, for every size in `config.bench.sizes`.
///
/// Inputs are uniform random runs seeded from `config.bench.seed`; each size
/// is reduced `repeats` times and the fastest time is kept.
pub fn bench(config: &ExperimentConfig) -> Result<BenchReport> {
    config.validate()?;
    let graph = config.topology.graph()?;
    let spec = ProblemGenSpec {
        h_range: config.h_range,
        j_range: config.j_range,
        seed: sub_seed(config.gen_seed, 0),
    };
    let problem = random_problem(&graph, &spec)?;
    let started = Instant::now();
    let mut points: Vec<BenchPoint> = Vec::new();
    for &n in &config.bench.sizes {
        let runs = random_runs(&problem, n, sub_seed(config.bench.seed, n as u64));
        mqc_reduce(&problem, &runs.runs, PairingStrategy::Sequential)?;
        let mut best = f64::INFINITY;
        for _ in 0..config.bench.repeats {
            let t = Instant::now();
            let out = mqc_reduce(&problem, &runs.runs, PairingStrategy::Sequential)?;
            best = best.min(t.elapsed().as_secs_f64());
            std::hint::black_box(out);
        }
        let ratio = points.last().map(|prev| best / prev.seconds);
        points.push(BenchPoint { runs: n, seconds: best, ratio });
    }
    Ok(BenchReport {
        vertex_count: problem.vertex_count(),
        edge_count: problem.edge_count(),
        repeats: config.bench.repeats,
        points,
        total_seconds: started.elapsed().as_secs_f64(),
    })
}
