use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mqc_core::io::{read_problem, read_runset, runset_to_json};
use mqc_core::RunSet;
use mqc_harness::{ExperimentConfig, Topology, OUT_DIR_ENV};

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn mqc(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mqc"));
    cmd.args(args).env_remove(OUT_DIR_ENV);
    cmd
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn one_line_failure(out: &Output) -> String {
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("mqc: "), "{err}");
    err
}

fn small_config(dir: &Path) -> String {
    let config = ExperimentConfig {
        topology: Topology::Chimera { rows: 2, cols: 2, shore: 4 },
        problems: 2,
        run_counts: vec![8],
        ..Default::default()
    };
    let path = dir.join("config.toml");
    std::fs::write(&path, config.to_toml()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_honours_seed_and_out() {
    let dir = scratch("gen");
    let config = small_config(&dir);
    run(&mut mqc(&["gen", "--config", &config, "--out", s(&dir.join("a"))]));
    run(&mut mqc(&["gen", "--config", &config, "--seed", "7", "--out", s(&dir.join("b"))]));
    let a = std::fs::read(dir.join("a/problems/problem_001.json")).unwrap();
    let b = std::fs::read(dir.join("b/problems/problem_001.json")).unwrap();
    assert_ne!(a, b);
    assert!(!dir.join("a/problems/problem_002.json").exists());
}

#[test]
fn out_flag_beats_environment() {
    let dir = scratch("env");
    let config = small_config(&dir);
    run(mqc(&["gen", "--config", &config]).env(OUT_DIR_ENV, dir.join("from_env")));
    assert!(dir.join("from_env/problems/problem_000.json").exists());
    run(mqc(&["gen", "--config", &config, "--out", s(&dir.join("from_flag"))]).env(OUT_DIR_ENV, dir.join("ignored")));
    assert!(dir.join("from_flag/problems/problem_000.json").exists());
    assert!(!dir.join("ignored").exists());
}

#[test]
fn mqc_on_a_single_run_returns_it() {
    let dir = scratch("single");
    let config = small_config(&dir);
    run(&mut mqc(&["gen", "--config", &config, "--out", s(&dir)]));
    let problem_path = dir.join("problems/problem_000.json");
    run(&mut mqc(&["sample", "--config", &config, "--problem", s(&problem_path), "--runs", "1", "--out", s(&dir)]));
    let problem = read_problem(&problem_path).unwrap();
    let input = read_runset(&dir.join("runs.json"), &problem).unwrap();
    assert_eq!(input.len(), 1);
    run(&mut mqc(&[
        "pp",
        "--problem",
        s(&problem_path),
        "--runs",
        s(&dir.join("runs.json")),
        "--method",
        "mqc_sequential",
        "--out",
        s(&dir),
    ]));
    let output = read_runset(&dir.join("mqc_sequential.json"), &problem).unwrap();
    assert_eq!(output.runs, input.runs);
}

#[test]
fn pp_rejects_an_empty_run_set() {
    let dir = scratch("empty_runs");
    let config = small_config(&dir);
    run(&mut mqc(&["gen", "--config", &config, "--out", s(&dir)]));
    let problem_path = dir.join("problems/problem_000.json");
    let problem = read_problem(&problem_path).unwrap();
    let empty = RunSet::new(&problem, mqc_core::Provenance {
        sampler: "anneal".into(),
        params: Default::default(),
        seed: 0,
    }, Vec::new());
    std::fs::write(dir.join("empty.json"), runset_to_json(&empty)).unwrap();
    let out = mqc(&["pp", "--problem", s(&problem_path), "--runs", s(&dir.join("empty.json")), "--method", "builtin_pp", "--out", s(&dir)])
        .output()
        .unwrap();
    one_line_failure(&out);
}

#[test]
fn compare_fails_on_empty_results() {
    let dir = scratch("compare_empty");
    std::fs::write(dir.join("results.jsonl"), "").unwrap();
    let out = mqc(&["compare", "--results", s(&dir.join("results.jsonl")), "--out", s(&dir)]).output().unwrap();
    let err = one_line_failure(&out);
    assert!(err.contains("no result records"), "{err}");
}

#[test]
fn compare_rebuilds_the_report_of_a_run() {
    let dir = scratch("compare");
    let config = small_config(&dir);
    run(&mut mqc(&["run", "--config", &config, "--out", s(&dir.join("run"))]));
    run(&mut mqc(&["compare", "--results", s(&dir.join("run/results.jsonl")), "--out", s(&dir.join("cmp"))]));
    for file in ["report.txt", "report.json"] {
        assert_eq!(
            std::fs::read(dir.join("run").join(file)).unwrap(),
            std::fs::read(dir.join("cmp").join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn config_errors_name_the_line() {
    let dir = scratch("bad_config");
    std::fs::write(dir.join("bad.toml"), "problems = 3\nrun_counts = \"many\"\n").unwrap();
    let out = mqc(&["gen", "--config", s(&dir.join("bad.toml"))]).output().unwrap();
    let err = one_line_failure(&out);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn bench_writes_its_table() {
    let dir = scratch("bench");
    std::fs::write(dir.join("bench.toml"), "[bench]\nsizes = [16, 32]\nrepeats = 1\n").unwrap();
    let out = run(&mut mqc(&["bench", "--config", s(&dir.join("bench.toml")), "--out", s(&dir)]));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("ratio"), "{table}");
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("bench.json")).unwrap()).unwrap();
    assert_eq!(json["points"].as_array().unwrap().len(), 2);
}
