//! Exact conditional minimization of a region by min-sum variable elimination.

use crate::altpp::decompose::{elimination_width, Subgraph};
use crate::error::{parameter, Error, Result};
use crate::ising::{IsingProblem, Spin, SpinConfiguration};

/// Widest region [`optimize_subgraph`] accepts; tables hold `2^(width+1)` entries.
pub const MAX_ELIMINATION_WIDTH: usize = 20;

/// One elimination: `inputs` are factor ids, each with the bit position of
/// its variables within `scope ++ [var]`. Bit `i` of a table index is the
/// spin of the factor's `i`-th variable (`1` ↦ `+1`).
#[derive(Debug, Clone)]
struct Step {
    var: usize,
    scope: Vec<usize>,
    inputs: Vec<(usize, Vec<usize>)>,
}

/// The run-independent part of eliminating one region.
///
/// Factor ids `0..k` are the region's unary terms, then come its internal
/// couplings, then one factor per step.
#[derive(Debug, Clone)]
pub(crate) struct EliminationPlan {
    vertices: Vec<usize>,
    /// Couplings from each local variable to vertices outside the region.
    boundary: Vec<Vec<(usize, f64)>>,
    couplings: Vec<f64>,
    steps: Vec<Step>,
}

impl EliminationPlan {
    /// Builds the plan for a region already accepted by [`validate_subgraph`].
    pub(crate) fn new(problem: &IsingProblem, sub: &Subgraph) -> Self {
        let k = sub.vertices.len();
        let local = |v: usize| sub.vertices.binary_search(&v).ok();
        let mut scopes: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        let mut boundary = vec![Vec::new(); k];
        let mut couplings = Vec::new();
        for (i, &a) in sub.vertices.iter().enumerate() {
            for &(b, j) in problem.neighbors(a) {
                match local(b) {
                    Some(m) if m > i => {
                        scopes.push(vec![i, m]);
                        couplings.push(j);
                    }
                    Some(_) => {}
                    None => boundary[i].push((b, j)),
                }
            }
        }

        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (id, scope) in scopes.iter().enumerate() {
            for &u in scope {
                touching[u].push(id);
            }
        }
        let mut consumed = vec![false; scopes.len()];
        let mut steps = Vec::with_capacity(k);
        for &v in &sub.elimination_order {
            let x = local(v).expect("order validated with the region");
            let ids: Vec<usize> = std::mem::take(&mut touching[x])
                .into_iter()
                .filter(|&id| !std::mem::replace(&mut consumed[id], true))
                .collect();
            let mut scope: Vec<usize> = ids.iter().flat_map(|&id| scopes[id].iter().copied()).filter(|&u| u != x).collect();
            scope.sort_unstable();
            scope.dedup();
            let inputs = ids
                .iter()
                .map(|&id| {
                    let pos = scopes[id]
                        .iter()
                        .map(|&u| if u == x { scope.len() } else { scope.binary_search(&u).unwrap() })
                        .collect();
                    (id, pos)
                })
                .collect();
            let out = scopes.len();
            for &u in &scope {
                touching[u].push(out);
            }
            scopes.push(scope.clone());
            consumed.push(false);
            steps.push(Step { var: x, scope, inputs });
        }
        Self {
            vertices: sub.vertices.clone(),
            boundary,
            couplings,
            steps,
        }
    }

    /// Minimizes the region with every outside spin of `config` held fixed.
    pub(crate) fn apply(&self, problem: &IsingProblem, config: &SpinConfiguration) -> SpinConfiguration {
        let k = self.vertices.len();
        if k == 0 {
            return config.clone();
        }
        let mut tables: Vec<Vec<f64>> = Vec::with_capacity(k + self.couplings.len() + self.steps.len());
        for (i, &a) in self.vertices.iter().enumerate() {
            let field = self.boundary[i]
                .iter()
                .fold(problem.h()[a], |acc, &(b, j)| acc + j * f64::from(config[b]));
            tables.push(vec![-field, field]);
        }
        for &j in &self.couplings {
            tables.push(vec![j, -j, -j, j]);
        }

        let mut up: Vec<Vec<bool>> = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let width = step.scope.len();
            let size = 1usize << width;
            let mut table = Vec::with_capacity(size);
            let mut choice = Vec::with_capacity(size);
            for assignment in 0..size {
                let mut value = [0.0f64; 2];
                for (bit, slot) in value.iter_mut().enumerate() {
                    let full = assignment | (bit << width);
                    for (id, pos) in &step.inputs {
                        let idx = pos.iter().enumerate().fold(0, |acc, (q, &p)| acc | (((full >> p) & 1) << q));
                        *slot += tables[*id][idx];
                    }
                }
                let choose_up = value[1] <= value[0];
                choice.push(choose_up);
                table.push(if choose_up { value[1] } else { value[0] });
            }
            up.push(choice);
            tables.push(table);
        }

        let mut assigned = vec![0usize; k];
        for (step, choice) in self.steps.iter().zip(&up).rev() {
            let idx = step.scope.iter().enumerate().fold(0, |acc, (q, &u)| acc | (assigned[u] << q));
            assigned[step.var] = usize::from(choice[idx]);
        }

        let mut spins: Vec<Spin> = config.spins().to_vec();
        for (i, &a) in self.vertices.iter().enumerate() {
            spins[a] = if assigned[i] == 1 { 1 } else { -1 };
        }
        let result = SpinConfiguration::new(problem, spins).expect("spins stay valid");
        if result.energy() > config.energy() {
            return config.clone();
        }
        result
    }
}

/// Reassigns the region's spins to their exact minimum given every spin outside it.
///
/// Conditioning folds the outside spins into the region's linear terms; the
/// region is then eliminated along `sub.elimination_order`, taking `+1` on ties,
/// and decoded in reverse. Outside spins are untouched. If rounding would make
/// the result worse than the input, the input is returned.
pub fn optimize_subgraph(problem: &IsingProblem, config: &SpinConfiguration, sub: &Subgraph) -> Result<SpinConfiguration> {
    validate_subgraph(problem, sub)?;
    if config.len() != problem.vertex_count() {
        return Err(Error::Dimension {
            expected: problem.vertex_count(),
            found: config.len(),
        });
    }
    Ok(EliminationPlan::new(problem, sub).apply(problem, config))
}

/// Checks that `sub` names sorted in-range vertices and that its order stays within its width.
pub(crate) fn validate_subgraph(problem: &IsingProblem, sub: &Subgraph) -> Result<()> {
    let n = problem.vertex_count();
    if let Some(&v) = sub.vertices.iter().find(|&&v| v >= n) {
        return Err(Error::Index { index: v, bound: n });
    }
    if !sub.vertices.windows(2).all(|w| w[0] < w[1]) {
        return Err(parameter("subgraph vertices must be sorted and distinct"));
    }
    let width = elimination_width(problem, &sub.vertices, &sub.elimination_order)?;
    if width > sub.width || width > MAX_ELIMINATION_WIDTH {
        return Err(parameter(format!(
            "elimination width {width} exceeds the subgraph's cap {}",
            sub.width.min(MAX_ELIMINATION_WIDTH)
        )));
    }
    Ok(())
}
