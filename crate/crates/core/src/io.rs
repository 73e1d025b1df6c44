//! JSON encodings of problems, run sets and diagnostic records.
//!
//! A problem file looks like
//!
//! ```json
//! { "vertex_count": 3, "h": [[0, 0.5]], "J": [[0, 1, -1.0], [1, 2, 0.25]] }
//! ```
//!
//! and a runs file is either a bare array of `{"spins": "+-+", "energy": -0.75}`
//! records or an object with `problem_id`, `provenance` and `runs`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{IsingProblem, Spin, SpinConfiguration, ENERGY_TOLERANCE};
use crate::samplers::{Provenance, RunSet, SamplerParams};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    vertex_count: usize,
    #[serde(default)]
    h: Vec<(usize, f64)>,
    #[serde(rename = "J", default)]
    j: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    spins: String,
    energy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSetDoc {
    problem_id: String,
    provenance: Provenance,
    runs: Vec<RunDoc>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RunsInput {
    Bare(Vec<RunDoc>),
    Full(RunSetDoc),
}

fn parse_err(what: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

/// Pretty-printed JSON for any serializable record.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize to JSON");
    s.push('\n');
    s
}

pub fn problem_to_json(problem: &IsingProblem) -> String {
    let doc = ProblemDoc {
        vertex_count: problem.vertex_count(),
        h: problem
            .h()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect(),
        j: problem.couplings().iter().map(|c| (c.a, c.b, c.value)).collect(),
    };
    to_json(&doc)
}

pub fn problem_from_json(text: &str) -> Result<IsingProblem> {
    let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| parse_err("problem", e))?;
    let n = doc.vertex_count;
    let mut h = vec![0.0; n];
    let mut seen = vec![false; n];
    for (k, &(v, value)) in doc.h.iter().enumerate() {
        if v >= n {
            return Err(Error::Parse(format!("h[{k}]: vertex {v} out of range for {n} vertices")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::Parse(format!("h[{k}]: vertex {v} listed twice")));
        }
        h[v] = value;
    }
    IsingProblem::new(n, h, doc.j).map_err(|e| Error::Parse(format!("J: {e}")))
}

/// `'+'` for `+1`, `'-'` for `-1`.
pub fn spins_to_string(spins: &[Spin]) -> String {
    spins.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

pub fn spins_from_str(s: &str) -> Result<Vec<Spin>> {
    s.chars()
        .enumerate()
        .map(|(i, c)| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            other => Err(Error::Parse(format!("character {i}: expected '+' or '-', found {other:?}"))),
        })
        .collect()
}

pub fn runset_to_json(set: &RunSet) -> String {
    let doc = RunSetDoc {
        problem_id: set.problem_id.clone(),
        provenance: set.provenance.clone(),
        runs: set
            .runs
            .iter()
            .map(|r| RunDoc {
                spins: spins_to_string(r.spins()),
                energy: r.energy(),
            })
            .collect(),
    };
    to_json(&doc)
}

/// Reads a runs file for `problem`, checking every stored energy against a
/// fresh evaluation.
pub fn runset_from_json(text: &str, problem: &IsingProblem) -> Result<RunSet> {
    let input: RunsInput = serde_json::from_str(text).map_err(|e| parse_err("runs", e))?;
    let (problem_id, provenance, docs) = match input {
        RunsInput::Bare(runs) => (
            problem.fingerprint(),
            Provenance {
                sampler: "external".into(),
                params: SamplerParams::default(),
                seed: 0,
            },
            runs,
        ),
        RunsInput::Full(doc) => (doc.problem_id, doc.provenance, doc.runs),
    };
    let mut runs = Vec::with_capacity(docs.len());
    for (k, doc) in docs.iter().enumerate() {
        let spins = spins_from_str(&doc.spins).map_err(|e| Error::Parse(format!("runs[{k}].spins: {e}")))?;
        let config =
            SpinConfiguration::new(problem, spins).map_err(|e| Error::Parse(format!("runs[{k}].spins: {e}")))?;
        if (config.energy() - doc.energy).abs() > ENERGY_TOLERANCE {
            return Err(Error::Parse(format!(
                "runs[{k}].energy: stored {} but the spins evaluate to {}",
                doc.energy,
                config.energy()
            )));
        }
        runs.push(config);
    }
    Ok(RunSet {
        problem_id,
        provenance,
        runs,
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn read_problem(path: &Path) -> Result<IsingProblem> {
    problem_from_json(&read(path)?).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_runset(path: &Path, problem: &IsingProblem) -> Result<RunSet> {
    runset_from_json(&read(path)?, problem).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Writes `contents`, creating parent directories as needed.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::random_runs;
    use crate::topology::{chimera_graph, random_problem, ChimeraSpec, ProblemGenSpec};

    fn problem() -> IsingProblem {
        let g = chimera_graph(ChimeraSpec::new(1, 2, 4)).unwrap();
        random_problem(&g, &ProblemGenSpec::default()).unwrap()
    }

    #[test]
    fn problem_round_trip() {
        let p = problem();
        assert_eq!(problem_from_json(&problem_to_json(&p)).unwrap(), p);
    }

    #[test]
    fn runset_round_trip() {
        let p = problem();
        let set = random_runs(&p, 5, 3);
        let text = runset_to_json(&set);
        assert_eq!(runset_from_json(&text, &p).unwrap(), set);
    }

    #[test]
    fn bare_run_array() {
        let p = IsingProblem::new(2, vec![1.0, -1.0], [(0, 1, 0.5)]).unwrap();
        let set = runset_from_json(r#"[{"spins": "-+", "energy": -2.5}]"#, &p).unwrap();
        assert_eq!(set.runs[0].spins(), [-1, 1]);
    }

    #[test]
    fn errors_name_the_field() {
        let p = IsingProblem::new(2, vec![1.0, -1.0], [(0, 1, 0.5)]).unwrap();
        let e = runset_from_json(r#"[{"spins": "-+", "energy": 0.0}]"#, &p).unwrap_err();
        assert!(e.to_string().contains("runs[0].energy"), "{e}");
        let e = runset_from_json(r#"[{"spins": "-x", "energy": 0.0}]"#, &p).unwrap_err();
        assert!(e.to_string().contains("runs[0].spins"), "{e}");
        let e = problem_from_json(r#"{"vertex_count": 2, "h": [[5, 1.0]], "J": []}"#).unwrap_err();
        assert!(e.to_string().contains("h[0]"), "{e}");
        let e = problem_from_json("{\n\"vertex_count\": 2,\n\"h\": [[0, \"a\"]]}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn spin_strings() {
        assert_eq!(spins_to_string(&[1, -1, -1]), "+--");
        assert_eq!(spins_from_str("+--").unwrap(), vec![1, -1, -1]);
        assert!(spins_from_str("+0").is_err());
    }
}
