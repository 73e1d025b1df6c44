//! Result records and the =/</> comparison tables built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use mqc_core::ENERGY_TOLERANCE;

use crate::config::{Method, Mode};
use crate::{HarnessError, Result};

/// Final energy of one method on one problem, run count and mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub problem: usize,
    pub problem_seed: u64,
    pub problem_id: String,
    pub run_count: usize,
    pub mode: Mode,
    pub method: Method,
    pub sampler_seed: u64,
    pub energy: f64,
    /// Lowest energy among the mode's input runs.
    pub best_run_energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_energy: Option<f64>,
}

pub fn records_to_jsonl(records: &[ResultRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn records_from_jsonl(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| HarnessError::Parse(format!("results line {}: {e}", i + 1)))
        })
        .collect()
}

/// Three-way comparison with the global equality tolerance.
pub fn compare(a: f64, b: f64) -> std::cmp::Ordering {
    if (a - b).abs() <= ENERGY_TOLERANCE {
        std::cmp::Ordering::Equal
    } else if a < b {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Greater
    }
}

/// Side of a comparison: a method under a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Arm {
    pub method: Method,
    pub mode: Mode,
}

impl Arm {
    fn label(&self, with_mode: bool) -> String {
        if with_mode {
            format!("{} ({})", self.method, self.mode)
        } else {
            self.method.to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub run_count: usize,
    pub mode: Option<Mode>,
    pub a: Arm,
    pub b: Arm,
    pub equal: usize,
    pub less: usize,
    pub greater: usize,
}

impl ComparisonRow {
    pub fn total(&self) -> usize {
        self.equal + self.less + self.greater
    }

    fn label(&self) -> String {
        let with_mode = self.a.mode != self.b.mode;
        format!("{} vs {}", self.a.label(with_mode), self.b.label(with_mode))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonTable {
    pub title: String,
    pub rows: Vec<ComparisonRow>,
}

/// An instance where some method ended above the best input run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceViolation {
    pub problem: usize,
    pub run_count: usize,
    pub mode: Mode,
    pub method: Method,
    pub energy: f64,
    pub best_run_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub problem_count: usize,
    pub tables: Vec<ComparisonTable>,
    pub dominance_violations: Vec<DominanceViolation>,
}

type Key = (usize, Mode, Method);

struct Index {
    problems: BTreeSet<usize>,
    run_counts: BTreeSet<usize>,
    modes: BTreeSet<Mode>,
    methods: BTreeSet<Method>,
    energy: BTreeMap<(usize, Key), f64>,
}

impl Index {
    fn new(records: &[ResultRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(HarnessError::Structure("no result records".into()));
        }
        let mut index = Index {
            problems: BTreeSet::new(),
            run_counts: BTreeSet::new(),
            modes: BTreeSet::new(),
            methods: BTreeSet::new(),
            energy: BTreeMap::new(),
        };
        for r in records {
            index.problems.insert(r.problem);
            index.run_counts.insert(r.run_count);
            index.modes.insert(r.mode);
            index.methods.insert(r.method);
            let key = (r.problem, (r.run_count, r.mode, r.method));
            if index.energy.insert(key, r.energy).is_some() {
                return Err(HarnessError::Structure(format!(
                    "duplicate record for problem {} ({} runs, {}, {})",
                    r.problem, r.run_count, r.mode, r.method
                )));
            }
        }
        Ok(index)
    }

    fn row(&self, run_count: usize, mode: Option<Mode>, a: Arm, b: Arm) -> Result<ComparisonRow> {
        let mut row = ComparisonRow {
            run_count,
            mode,
            a,
            b,
            equal: 0,
            less: 0,
            greater: 0,
        };
        for &p in &self.problems {
            let get = |arm: Arm| {
                self.energy.get(&(p, (run_count, arm.mode, arm.method))).copied().ok_or_else(|| {
                    HarnessError::Structure(format!(
                        "problem {p} has no {} record for {} runs in {} mode",
                        arm.method, run_count, arm.mode
                    ))
                })
            };
            match compare(get(a)?, get(b)?) {
                std::cmp::Ordering::Equal => row.equal += 1,
                std::cmp::Ordering::Less => row.less += 1,
                std::cmp::Ordering::Greater => row.greater += 1,
            }
        }
        Ok(row)
    }

    fn has(&self, method: Method) -> bool {
        self.methods.contains(&method)
    }
}

/// Comparisons of `base` against each of `others` under every run count and mode.
fn per_mode_table(index: &Index, title: &str, base: Method, others: &[Method]) -> Result<Option<ComparisonTable>> {
    let others: Vec<Method> = others.iter().copied().filter(|&m| index.has(m)).collect();
    if !index.has(base) || others.is_empty() {
        return Ok(None);
    }
    let mut rows = Vec::new();
    for &rc in &index.run_counts {
        for &mode in &index.modes {
            for &other in &others {
                rows.push(index.row(rc, Some(mode), Arm { method: base, mode }, Arm { method: other, mode })?);
            }
        }
    }
    Ok(Some(ComparisonTable { title: title.into(), rows }))
}

/// Builds the comparison tables from result records.
///
/// Every problem must carry a record for every (run count, mode, method)
/// that appears anywhere in `records`.
pub fn build_report(records: &[ResultRecord]) -> Result<ComparisonReport> {
    let index = Index::new(records)?;
    let mut tables = Vec::new();

    if index.has(Method::MqcSequential) && index.modes.contains(&Mode::Raw) && index.modes.contains(&Mode::Sampling) {
        let method = Method::MqcSequential;
        let rows = index
            .run_counts
            .iter()
            .map(|&rc| index.row(rc, None, Arm { method, mode: Mode::Raw }, Arm { method, mode: Mode::Sampling }))
            .collect::<Result<_>>()?;
        tables.push(ComparisonTable {
            title: "MQC on raw runs vs MQC on sampling runs".into(),
            rows,
        });
    }
    let base = Method::MqcSequential;
    let groups: [(&str, &[Method]); 3] = [
        ("MQC vs built-in optimization post-processing", &[Method::BuiltinPp]),
        ("Standard MQC vs MQC with pairing heuristics", &[Method::MqcRank, Method::MqcMaxdiff]),
        ("MQC vs sample persistence and precision enhancement", &[Method::SamplePersistence, Method::Hpe]),
    ];
    for (title, others) in groups {
        tables.extend(per_mode_table(&index, title, base, others)?);
    }

    let mut dominance_violations = Vec::new();
    for r in records {
        if r.method.strategy().is_some() && r.energy > r.best_run_energy + ENERGY_TOLERANCE {
            dominance_violations.push(DominanceViolation {
                problem: r.problem,
                run_count: r.run_count,
                mode: r.mode,
                method: r.method,
                energy: r.energy,
                best_run_energy: r.best_run_energy,
            });
        }
    }

    Ok(ComparisonReport {
        problem_count: index.problems.len(),
        tables,
        dominance_violations,
    })
}

impl ComparisonReport {
    /// Rows that fail to sum to the problem count, and MQC results above the best input run.
    pub fn check_invariants(&self) -> Result<()> {
        for t in &self.tables {
            for row in &t.rows {
                if row.total() != self.problem_count {
                    return Err(HarnessError::Invariant(format!(
                        "{}: row `{}` sums to {} instead of {}",
                        t.title,
                        row.label(),
                        row.total(),
                        self.problem_count
                    )));
                }
            }
        }
        if let Some(v) = self.dominance_violations.first() {
            return Err(HarnessError::Invariant(format!(
                "{} on problem {} ({} runs, {}) ended at {} above its best input run {}",
                v.method, v.problem, v.run_count, v.mode, v.energy, v.best_run_energy
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        mqc_core::io::to_json(self)
    }

    /// Aligned plain-text tables.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problems: {}", self.problem_count);
        for t in &self.tables {
            let _ = writeln!(out, "\n{}", t.title);
            let header = ["runs", "mode", "comparison", "=", "<", ">"];
            let body: Vec<[String; 6]> = t
                .rows
                .iter()
                .map(|r| {
                    [
                        r.run_count.to_string(),
                        r.mode.map_or_else(|| "-".into(), |m| m.to_string()),
                        r.label(),
                        r.equal.to_string(),
                        r.less.to_string(),
                        r.greater.to_string(),
                    ]
                })
                .collect();
            render_grid(&mut out, &header, &body);
        }
        let _ = writeln!(
            out,
            "\nMQC results above the best input run: {}",
            self.dominance_violations.len()
        );
        out
    }
}

pub(crate) fn render_grid<const N: usize>(out: &mut String, header: &[&str; N], body: &[[String; N]]) {
    let mut widths = header.map(str::len);
    for row in body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |out: &mut String, cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i == 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join(" | ").trim_end());
    };
    line(out, header.to_vec());
    let _ = writeln!(out, "{}", widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("-+-"));
    for row in body {
        line(out, row.iter().map(String::as_str).collect());
    }
}
