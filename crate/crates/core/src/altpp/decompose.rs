//! Splitting a problem graph into overlapping low-width regions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};
use crate::ising::IsingProblem;

/// A vertex region together with an elimination order certifying its width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    pub elimination_order: Vec<usize>,
    /// Largest neighbor count of a vertex at the moment it is eliminated.
    pub width: usize,
}

impl Subgraph {
    /// Region over `vertices` with a min-degree elimination order.
    pub fn new(problem: &IsingProblem, mut vertices: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        if let Some(&v) = vertices.iter().find(|&&v| v >= problem.vertex_count()) {
            return Err(Error::Index {
                index: v,
                bound: problem.vertex_count(),
            });
        }
        let (elimination_order, width) = min_degree_order(problem, &vertices);
        Ok(Self {
            vertices,
            elimination_order,
            width,
        })
    }

    /// Like [`Subgraph::new`], refusing regions whose width exceeds `cap`.
    pub fn with_cap(problem: &IsingProblem, vertices: Vec<usize>, cap: usize) -> Result<Self> {
        let sub = Self::new(problem, vertices)?;
        if sub.width > cap {
            return Err(parameter(format!(
                "subgraph width {} exceeds cap {cap}",
                sub.width
            )));
        }
        Ok(sub)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Induced adjacency over `vertices`, in local indices.
fn local_adjacency(problem: &IsingProblem, vertices: &[usize]) -> Vec<BTreeSet<usize>> {
    vertices
        .iter()
        .map(|&v| {
            problem
                .neighbors(v)
                .iter()
                .filter_map(|&(u, _)| vertices.binary_search(&u).ok())
                .collect()
        })
        .collect()
}

/// Width of eliminating `vertices` (sorted) in `order` on the induced graph.
pub(crate) fn elimination_width(problem: &IsingProblem, vertices: &[usize], order: &[usize]) -> Result<usize> {
    let mut adj = local_adjacency(problem, vertices);
    let mut eliminated = vec![false; vertices.len()];
    let mut width = 0;
    for &v in order {
        let x = vertices
            .binary_search(&v)
            .map_err(|_| parameter(format!("elimination order names vertex {v} outside the subgraph")))?;
        if std::mem::replace(&mut eliminated[x], true) {
            return Err(parameter(format!("vertex {v} eliminated twice")));
        }
        width = width.max(eliminate(&mut adj, x));
    }
    if eliminated.iter().any(|e| !e) {
        return Err(parameter("elimination order does not cover the subgraph"));
    }
    Ok(width)
}

/// Removes `x`, turning its neighborhood into a clique. Returns its degree.
fn eliminate(adj: &mut [BTreeSet<usize>], x: usize) -> usize {
    let nbrs: Vec<usize> = std::mem::take(&mut adj[x]).into_iter().collect();
    for &a in &nbrs {
        adj[a].remove(&x);
        for &b in &nbrs {
            if a != b {
                adj[a].insert(b);
            }
        }
    }
    nbrs.len()
}

/// Min-degree elimination on the subgraph induced by sorted `vertices`; ties go
/// to the lowest vertex index. Returns the order and its width.
pub fn min_degree_order(problem: &IsingProblem, vertices: &[usize]) -> (Vec<usize>, usize) {
    let mut adj = local_adjacency(problem, vertices);
    let mut alive: BTreeSet<(usize, usize)> = adj.iter().enumerate().map(|(i, n)| (n.len(), i)).collect();
    let mut order = Vec::with_capacity(vertices.len());
    let mut width = 0;
    while let Some((deg, x)) = alive.pop_first() {
        let nbrs: Vec<usize> = adj[x].iter().copied().collect();
        for &a in &nbrs {
            alive.remove(&(adj[a].len(), a));
        }
        eliminate(&mut adj, x);
        for &a in &nbrs {
            alive.insert((adj[a].len(), a));
        }
        width = width.max(deg);
        order.push(vertices[x]);
    }
    (order, width)
}

/// Covers the problem graph with regions whose min-degree width is at most `width_cap`.
///
/// A new region is seeded at the lowest vertex whose neighborhood does not yet
/// lie inside a single region. It grows one neighbor at a time, trying
/// candidates with the most edges into the region first, then those fewest
/// hops from the seed, then the lowest index, and keeps an addition only if
/// the width stays within the cap. A rejected candidate is not retried for
/// that region. Regions may overlap.
pub fn decompose_low_treewidth(problem: &IsingProblem, width_cap: usize) -> Result<Vec<Subgraph>> {
    if width_cap == 0 {
        return Err(parameter("width_cap must be at least 1"));
    }
    let n = problem.vertex_count();
    let mut covered = vec![false; n];
    let mut regions = Vec::new();
    let mut in_region = vec![false; n];
    let mut rejected = vec![false; n];
    let mut links = vec![0usize; n];
    let mut depth = vec![usize::MAX; n];

    for seed in 0..n {
        if covered[seed] {
            continue;
        }
        let mut members = vec![seed];
        in_region[seed] = true;
        depth[seed] = 0;
        let mut frontier: BTreeSet<usize> = BTreeSet::new();
        for &(u, _) in problem.neighbors(seed) {
            links[u] += 1;
            depth[u] = 1;
            frontier.insert(u);
        }
        let mut current = (vec![seed], 0);

        loop {
            let mut candidates: Vec<usize> = frontier.iter().copied().filter(|&c| !rejected[c]).collect();
            candidates.sort_by_key(|&c| (std::cmp::Reverse(links[c]), depth[c], c));
            let mut added = None;
            for c in candidates {
                let mut trial = members.clone();
                trial.push(c);
                trial.sort_unstable();
                let (order, width) = min_degree_order(problem, &trial);
                if width <= width_cap {
                    members = trial;
                    current = (order, width);
                    added = Some(c);
                    break;
                }
                rejected[c] = true;
            }
            let Some(c) = added else { break };
            in_region[c] = true;
            frontier.remove(&c);
            for &(u, _) in problem.neighbors(c) {
                if !in_region[u] {
                    links[u] += 1;
                    depth[u] = depth[u].min(depth[c] + 1);
                    frontier.insert(u);
                }
            }
        }

        for &v in &members {
            if problem.neighbors(v).iter().all(|&(u, _)| in_region[u]) {
                covered[v] = true;
            }
        }
        for &v in &members {
            in_region[v] = false;
            depth[v] = usize::MAX;
            for &(u, _) in problem.neighbors(v) {
                links[u] = 0;
                depth[u] = usize::MAX;
                rejected[u] = false;
            }
        }
        let (elimination_order, width) = current;
        regions.push(Subgraph {
            vertices: members,
            elimination_order,
            width,
        });
    }
    Ok(regions)
}
