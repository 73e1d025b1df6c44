//! Problem generation, per-method evaluation and the two experiment drivers.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use mqc_core::altpp::{builtin_opt_pp_with, decompose_low_treewidth};
use mqc_core::io::{to_json, write_text};
use mqc_core::rng::sub_seed;
use mqc_core::{
    exact_ground_state, hpe, mqc_reduce, random_problem, sample, sample_persistence, IsingProblem,
    ProblemGenSpec, RunSet, SamplerParams,
};

use crate::config::{sampler_seed, ExperimentConfig, Method, Mode};
use crate::report::{build_report, compare, records_to_jsonl, render_grid, ComparisonReport, ResultRecord};
use crate::Result;

/// One generated problem and the seed it came from.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub index: usize,
    pub seed: u64,
    pub problem: IsingProblem,
}

/// Problem `p` is drawn with seed `sub_seed(gen_seed, p)`.
pub fn generate_problems(config: &ExperimentConfig) -> Result<Vec<ProblemInstance>> {
    let graph = config.topology.graph()?;
    (0..config.problems)
        .map(|index| {
            let seed = sub_seed(config.gen_seed, index as u64);
            let spec = ProblemGenSpec {
                h_range: config.h_range,
                j_range: config.j_range,
                seed,
            };
            Ok(ProblemInstance {
                index,
                seed,
                problem: random_problem(&graph, &spec)?,
            })
        })
        .collect()
}

/// Parameters and runs for one problem, mode and run count.
pub fn sample_mode(
    config: &ExperimentConfig,
    instance: &ProblemInstance,
    mode: Mode,
    run_count: usize,
) -> Result<(SamplerParams, RunSet)> {
    let ms = config.mode_sampler(mode);
    let params = ms
        .params
        .clone()
        .with_seed(sampler_seed(instance.seed, mode, run_count))
        .with_runs(run_count);
    let runs = sample(&instance.problem, ms.sampler, &params)?;
    Ok((params, runs))
}

fn evaluate(config: &ExperimentConfig, instance: &ProblemInstance, methods: &[Method]) -> Result<Vec<ResultRecord>> {
    let problem = &instance.problem;
    let ground_energy = if config.oracle {
        Some(exact_ground_state(problem)?.1)
    } else {
        None
    };
    let regions = if methods.contains(&Method::BuiltinPp) {
        decompose_low_treewidth(problem, config.width_cap)?
    } else {
        Vec::new()
    };
    let problem_id = problem.fingerprint();

    let mut records = Vec::new();
    for &run_count in &config.run_counts {
        for &mode in &config.modes {
            let (params, runs) = sample_mode(config, instance, mode, run_count)?;
            let kind = config.mode_sampler(mode).sampler;
            let best_run_energy = runs.best().expect("run counts are positive").energy();
            for &method in methods {
                let energy = match method {
                    Method::MqcSequential | Method::MqcRank | Method::MqcMaxdiff => {
                        let strategy = method.strategy().expect("MQC methods carry a strategy");
                        mqc_reduce(problem, &runs.runs, strategy)?.0.energy()
                    }
                    Method::BuiltinPp => {
                        let out = builtin_opt_pp_with(problem, &runs, &regions, false)?;
                        out.best().expect("output keeps every run").energy()
                    }
                    Method::SamplePersistence => {
                        let p = &config.persistence;
                        sample_persistence(problem, kind, &params, p.threshold, p.rounds)?.config.energy()
                    }
                    Method::Hpe => {
                        let scales = config.scale_set(run_count)?;
                        hpe(problem, &scales, &config.hpe.precision, kind, &params)?.config.energy()
                    }
                };
                records.push(ResultRecord {
                    problem: instance.index,
                    problem_seed: instance.seed,
                    problem_id: problem_id.clone(),
                    run_count,
                    mode,
                    method,
                    sampler_seed: params.seed,
                    energy,
                    best_run_energy,
                    ground_energy,
                });
            }
        }
    }
    Ok(records)
}

/// Records for every problem, in problem order regardless of scheduling.
pub fn collect_records(config: &ExperimentConfig, methods: &[Method]) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let problems = generate_problems(config)?;
    let per_problem = problems
        .par_iter()
        .map(|instance| evaluate(config, instance, methods))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_problem.into_iter().flatten().collect())
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<ResultRecord>,
    pub report: ComparisonReport,
}

/// File names written by [`run_experiment`].
pub const RESULTS_FILE: &str = "results.jsonl";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.toml";

/// Runs every configured method and writes results, report and the resolved
/// configuration into `out_dir`. Fails if a report invariant does not hold.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput> {
    let records = collect_records(config, &config.methods)?;
    let report = build_report(&records)?;
    write_text(&out_dir.join(CONFIG_FILE), &config.to_toml())?;
    write_text(&out_dir.join(RESULTS_FILE), &records_to_jsonl(&records))?;
    write_text(&out_dir.join(REPORT_TEXT_FILE), &report.render())?;
    write_text(&out_dir.join(REPORT_JSON_FILE), &report.to_json())?;
    report.check_invariants()?;
    Ok(ExperimentOutput { records, report })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SensitivityRow {
    pub run_count: usize,
    pub mode: Mode,
    pub a: Method,
    pub b: Method,
    pub equal: usize,
    pub less: usize,
    pub greater: usize,
}

/// An instance where the three pairing strategies disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityInstance {
    pub problem: usize,
    pub problem_seed: u64,
    pub run_count: usize,
    pub mode: Mode,
    pub sequential: f64,
    pub rank_order: f64,
    pub max_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub problem_count: usize,
    pub rows: Vec<SensitivityRow>,
    pub differing: Vec<SensitivityInstance>,
}

const STRATEGY_METHODS: [Method; 3] = [Method::MqcSequential, Method::MqcRank, Method::MqcMaxdiff];

/// Reduces identical run sets under all three pairing strategies and
/// tabulates every strategy pair for every run count and mode.
pub fn sensitivity_report(config: &ExperimentConfig) -> Result<SensitivityReport> {
    let records = collect_records(config, &STRATEGY_METHODS)?;
    let energy_of = |problem: usize, rc: usize, mode: Mode, method: Method| {
        records
            .iter()
            .find(|r| r.problem == problem && r.run_count == rc && r.mode == mode && r.method == method)
            .expect("every strategy is evaluated for every instance")
    };

    let mut rows = Vec::new();
    let mut differing = Vec::new();
    for &rc in &config.run_counts {
        for &mode in &config.modes {
            for (i, &a) in STRATEGY_METHODS.iter().enumerate() {
                for &b in &STRATEGY_METHODS[i + 1..] {
                    let mut row = SensitivityRow {
                        run_count: rc,
                        mode,
                        a,
                        b,
                        equal: 0,
                        less: 0,
                        greater: 0,
                    };
                    for p in 0..config.problems {
                        match compare(energy_of(p, rc, mode, a).energy, energy_of(p, rc, mode, b).energy) {
                            std::cmp::Ordering::Equal => row.equal += 1,
                            std::cmp::Ordering::Less => row.less += 1,
                            std::cmp::Ordering::Greater => row.greater += 1,
                        }
                    }
                    rows.push(row);
                }
            }
        }
    }
    for p in 0..config.problems {
        for &rc in &config.run_counts {
            for &mode in &config.modes {
                let [s, r, m] = STRATEGY_METHODS.map(|method| energy_of(p, rc, mode, method));
                let all_equal = compare(s.energy, r.energy).is_eq() && compare(s.energy, m.energy).is_eq();
                if !all_equal {
                    differing.push(SensitivityInstance {
                        problem: p,
                        problem_seed: s.problem_seed,
                        run_count: rc,
                        mode,
                        sequential: s.energy,
                        rank_order: r.energy,
                        max_difference: m.energy,
                    });
                }
            }
        }
    }
    Ok(SensitivityReport {
        problem_count: config.problems,
        rows,
        differing,
    })
}

impl SensitivityReport {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn render(&self) -> String {
        let mut out = format!("problems: {}\n\nPairing-strategy sensitivity\n", self.problem_count);
        let header = ["runs", "mode", "comparison", "=", "<", ">"];
        let body: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.run_count.to_string(),
                    r.mode.to_string(),
                    format!("{} vs {}", r.a, r.b),
                    r.equal.to_string(),
                    r.less.to_string(),
                    r.greater.to_string(),
                ]
            })
            .collect();
        render_grid(&mut out, &header, &body);
        out.push_str(&format!("\ninstances where the strategies disagree: {}\n", self.differing.len()));
        for d in &self.differing {
            out.push_str(&format!(
                "  problem {} (seed {}), {} runs, {}: sequential {}, rank_order {}, max_difference {}\n",
                d.problem, d.problem_seed, d.run_count, d.mode, d.sequential, d.rank_order, d.max_difference
            ));
        }
        out
    }
}
