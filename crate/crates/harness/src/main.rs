use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mqc_core::altpp::{builtin_opt_pp, sample_persistence};
use mqc_core::io::{problem_to_json, read_problem, read_runset, runset_to_json, to_json, write_text};
use mqc_core::{hpe_from_runs, mqc_reduce, RunSet, SamplerKind};
use mqc_harness::experiment::{sample_mode, ProblemInstance, REPORT_JSON_FILE, REPORT_TEXT_FILE};
use mqc_harness::report::records_from_jsonl;
use mqc_harness::{
    bench, build_report, generate_problems, run_experiment, sensitivity_report, ExperimentConfig, HarnessError, Method,
    Mode, Result,
};

/// Multi qubit correction experiments on Ising problems.
#[derive(Parser)]
#[command(name = "mqc", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for the command's random choices.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the configuration and the environment.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured problems as JSON files.
    Gen,
    /// Sample a run set for one problem file.
    Sample {
        #[arg(long)]
        problem: PathBuf,
        /// Which configured sampler to use.
        #[arg(long, default_value = "raw")]
        mode: Mode,
        /// Overrides the configured sampler kind.
        #[arg(long)]
        sampler: Option<SamplerKind>,
        /// Number of runs; defaults to the first configured run count.
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Apply one post-processor to run set files.
    Pp {
        #[arg(long)]
        problem: PathBuf,
        /// Run set file; `hpe` takes one per configured scale, in ascending scale order.
        #[arg(long, required = true, num_args = 1..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        method: Method,
    },
    /// Build comparison tables from a results file.
    Compare {
        /// Results file; defaults to `results.jsonl` in the output directory.
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Time sequential MQC reduction across the configured run counts.
    Bench,
    /// Run the full experiment and write results and tables.
    Run,
    /// Compare the three pairing strategies on identical run sets.
    Sensitivity,
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    match &common.config {
        Some(path) => ExperimentConfig::load(path),
        None => Ok(ExperimentConfig::default()),
    }
}

fn out_dir(common: &Common, config: &ExperimentConfig) -> PathBuf {
    common.out.clone().unwrap_or_else(|| config.resolved_output_dir())
}

fn emit(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    write_text(&path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn gen(common: &Common) -> Result<()> {
    let mut config = load_config(common)?;
    if let Some(seed) = common.seed {
        config.gen_seed = seed;
    }
    let dir = out_dir(common, &config).join("problems");
    for ProblemInstance { index, problem, .. } in generate_problems(&config)? {
        write_text(&dir.join(format!("problem_{index:03}.json")), &problem_to_json(&problem))?;
    }
    eprintln!("wrote {} problems to {}", config.problems, dir.display());
    Ok(())
}

fn sample_cmd(common: &Common, problem: &Path, mode: Mode, sampler: Option<SamplerKind>, runs: Option<usize>) -> Result<()> {
    let mut config = load_config(common)?;
    let problem = read_problem(problem)?;
    if let Some(kind) = sampler {
        match mode {
            Mode::Raw => config.raw.sampler = kind,
            Mode::Sampling => config.sampling.sampler = kind,
        }
    }
    let run_count = runs.unwrap_or(config.run_counts[0]);
    let instance = ProblemInstance {
        index: 0,
        seed: common.seed.unwrap_or(config.gen_seed),
        problem,
    };
    let (_, set) = sample_mode(&config, &instance, mode, run_count)?;
    emit(&out_dir(common, &config), "runs.json", &runset_to_json(&set))
}

fn pp(common: &Common, problem_path: &Path, run_paths: &[PathBuf], method: Method) -> Result<()> {
    let config = load_config(common)?;
    let problem = read_problem(problem_path)?;
    let sets = run_paths
        .iter()
        .map(|p| read_runset(p, &problem))
        .collect::<mqc_core::Result<Vec<_>>>()?;
    let dir = out_dir(common, &config);
    let first = &sets[0];
    if method != Method::Hpe && sets.len() != 1 {
        return Err(HarnessError::Config(format!("{method} takes exactly one run set, got {}", sets.len())));
    }
    let single = |config: mqc_core::SpinConfiguration| RunSet {
        problem_id: first.problem_id.clone(),
        provenance: mqc_core::Provenance {
            sampler: format!("{}+{method}", first.provenance.sampler),
            ..first.provenance.clone()
        },
        runs: vec![config],
    };
    let output = match method {
        Method::MqcSequential | Method::MqcRank | Method::MqcMaxdiff => {
            let strategy = method.strategy().expect("MQC methods carry a strategy");
            let (best, trace) = mqc_reduce(&problem, &first.runs, strategy)?;
            emit(&dir, "trace.json", &to_json(&trace))?;
            single(best)
        }
        Method::BuiltinPp => builtin_opt_pp(&problem, first, config.width_cap)?,
        Method::SamplePersistence => {
            let kind: SamplerKind = first.provenance.sampler.parse()?;
            let p = &config.persistence;
            let out = sample_persistence(&problem, kind, &first.provenance.params, p.threshold, p.rounds)?;
            emit(&dir, "persistence.json", &to_json(&out.rounds))?;
            single(out.config)
        }
        Method::Hpe => {
            let out = hpe_from_runs(&problem, config.scale_set(1)?.scales(), &sets)?;
            emit(&dir, "hpe_report.json", &to_json(&out.report))?;
            single(out.config)
        }
    };
    emit(&dir, &format!("{method}.json"), &runset_to_json(&output))
}

fn compare_cmd(common: &Common, results: Option<&Path>) -> Result<()> {
    let config = load_config(common)?;
    let dir = out_dir(common, &config);
    let path = results.map_or_else(|| dir.join(mqc_harness::experiment::RESULTS_FILE), Path::to_path_buf);
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    let report = build_report(&records_from_jsonl(&text)?)?;
    emit(&dir, REPORT_TEXT_FILE, &report.render())?;
    emit(&dir, REPORT_JSON_FILE, &report.to_json())?;
    print!("{}", report.render());
    report.check_invariants()
}

fn bench_cmd(common: &Common) -> Result<()> {
    let mut config = load_config(common)?;
    if let Some(seed) = common.seed {
        config.bench.seed = seed;
    }
    let report = bench(&config)?;
    emit(&out_dir(common, &config), "bench.json", &to_json(&report))?;
    print!("{}", report.render());
    Ok(())
}

fn run(common: &Common) -> Result<()> {
    let mut config = load_config(common)?;
    if let Some(seed) = common.seed {
        config.gen_seed = seed;
    }
    let dir = out_dir(common, &config);
    let out = run_experiment(&config, &dir)?;
    print!("{}", out.report.render());
    eprintln!("wrote results and report to {}", dir.display());
    Ok(())
}

fn sensitivity(common: &Common) -> Result<()> {
    let mut config = load_config(common)?;
    if let Some(seed) = common.seed {
        config.gen_seed = seed;
    }
    let report = sensitivity_report(&config)?;
    let dir = out_dir(common, &config);
    emit(&dir, "sensitivity.txt", &report.render())?;
    emit(&dir, "sensitivity.json", &report.to_json())?;
    print!("{}", report.render());
    Ok(())
}

fn main() -> ExitCode {
    let Cli { common, command } = Cli::parse();
    let common = &common;
    let result = match &command {
        Command::Gen => gen(common),
        Command::Sample {
            problem,
            mode,
            sampler,
            runs,
        } => sample_cmd(common, problem, *mode, *sampler, *runs),
        Command::Pp { problem, runs, method } => pp(common, problem, runs, *method),
        Command::Compare { results } => compare_cmd(common, results.as_deref()),
        Command::Bench => bench_cmd(common),
        Command::Run => run(common),
        Command::Sensitivity => sensitivity(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mqc: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
