//! Problem graphs, seeded coefficient generation and connected components.

use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};
use crate::ising::{IsingProblem, Tunnel};
use crate::rng::{rng_stream, uniform};

/// Anything that can enumerate the neighbors of a vertex.
pub trait Neighbors {
    fn vertex_count(&self) -> usize;
    fn for_each_neighbor(&self, v: usize, f: impl FnMut(usize));
}

impl Neighbors for IsingProblem {
    fn vertex_count(&self) -> usize {
        IsingProblem::vertex_count(self)
    }

    fn for_each_neighbor(&self, v: usize, mut f: impl FnMut(usize)) {
        for &(u, _) in self.neighbors(v) {
            f(u);
        }
    }
}

/// Undirected simple graph as a sorted edge list plus adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::Index {
                        index: v,
                        bound: vertex_count,
                    });
                }
            }
            if a == b {
                return Err(Error::Input(format!("self-loop on vertex {a}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(a, b) in &list {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        Ok(Self {
            vertex_count,
            edges: list,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Subgraph induced on vertices `0..n`.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.vertex_count {
            return Err(parameter(format!(
                "prefix of {n} vertices from a graph with {}",
                self.vertex_count
            )));
        }
        Self::new(n, self.edges.iter().copied().filter(|&(_, b)| b < n))
    }

    /// Topology of an existing problem.
    pub fn of_problem(problem: &IsingProblem) -> Self {
        Self::new(
            problem.vertex_count(),
            problem.couplings().iter().map(|c| (c.a, c.b)),
        )
        .expect("problem couplings are already valid")
    }

    /// Problem on this graph with every coefficient zero.
    pub fn zero_problem(&self) -> IsingProblem {
        IsingProblem::new(
            self.vertex_count,
            vec![0.0; self.vertex_count],
            self.edges.iter().map(|&(a, b)| (a, b, 0.0)),
        )
        .expect("graph edges are already valid")
    }
}

impl Neighbors for Graph {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn for_each_neighbor(&self, v: usize, mut f: impl FnMut(usize)) {
        for &u in &self.adjacency[v] {
            f(u);
        }
    }
}

/// Chimera lattice: `rows × cols` unit cells, each a `K_{shore,shore}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraSpec {
    pub rows: usize,
    pub cols: usize,
    pub shore: usize,
}

impl ChimeraSpec {
    pub const fn new(rows: usize, cols: usize, shore: usize) -> Self {
        Self { rows, cols, shore }
    }

    pub fn vertex_count(&self) -> usize {
        self.rows * self.cols * 2 * self.shore
    }

    pub fn edge_count(&self) -> usize {
        let (m, n, s) = (self.rows, self.cols, self.shore);
        m * n * s * s + s * (n * (m - 1) + m * (n - 1))
    }

    /// Index of shore `side` (0 = vertical, 1 = horizontal), position `k`, in cell `(row, col)`.
    pub fn vertex(&self, row: usize, col: usize, side: usize, k: usize) -> usize {
        ((row * self.cols + col) * 2 + side) * self.shore + k
    }

    /// Cell `(row, col)` holding vertex `v`.
    pub fn cell_of(&self, v: usize) -> (usize, usize) {
        let cell = v / (2 * self.shore);
        (cell / self.cols, cell % self.cols)
    }
}

/// Edges of a Chimera graph.
///
/// Within a cell every vertical-shore vertex couples to every horizontal-shore
/// vertex. Vertical-shore vertex `k` couples to vertical-shore vertex `k` of the
/// cell below; horizontal-shore vertex `k` to horizontal-shore `k` of the cell
/// to the right.
pub fn chimera_graph(spec: ChimeraSpec) -> Result<Graph> {
    if spec.rows == 0 || spec.cols == 0 || spec.shore == 0 {
        return Err(parameter(format!(
            "chimera dimensions must be positive, got ({}, {}, {})",
            spec.rows, spec.cols, spec.shore
        )));
    }
    let mut edges = Vec::with_capacity(spec.edge_count());
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            for i in 0..spec.shore {
                for k in 0..spec.shore {
                    edges.push((spec.vertex(row, col, 0, i), spec.vertex(row, col, 1, k)));
                }
            }
            for k in 0..spec.shore {
                if row + 1 < spec.rows {
                    edges.push((spec.vertex(row, col, 0, k), spec.vertex(row + 1, col, 0, k)));
                }
                if col + 1 < spec.cols {
                    edges.push((spec.vertex(row, col, 1, k), spec.vertex(row, col + 1, 1, k)));
                }
            }
        }
    }
    Graph::new(spec.vertex_count(), edges)
}

/// Complete graph `K_n`.
pub fn complete_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(parameter(format!("complete graph needs at least 2 vertices, got {n}")));
    }
    Graph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
}

/// Path `0 – 1 – … – (n−1)`.
pub fn path_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(parameter("path graph needs at least one vertex"));
    }
    Graph::new(n, (1..n).map(|v| (v - 1, v)))
}

/// `rows × cols` square lattice in row-major order.
pub fn grid_graph(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(parameter("grid dimensions must be positive"));
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::new(rows * cols, edges)
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(parameter(format!("{what} interval [{}, {}] is empty", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemGenSpec {
    pub h_range: Interval,
    pub j_range: Interval,
    pub seed: u64,
}

impl Default for ProblemGenSpec {
    fn default() -> Self {
        Self {
            h_range: Interval::new(-2.0, 2.0),
            j_range: Interval::new(-1.0, 1.0),
            seed: 316,
        }
    }
}

/// Draws uniform coefficients on `graph`.
///
/// ChaCha8 keyed by `spec.seed`: stream 0 supplies `h` in vertex order, stream 1
/// supplies `J` in sorted edge order. Each value is `lo + (hi − lo)·u` with
/// `u` built from the top 53 bits of one 64-bit output.
pub fn random_problem(graph: &Graph, spec: &ProblemGenSpec) -> Result<IsingProblem> {
    spec.h_range.validate("h")?;
    spec.j_range.validate("J")?;
    let mut h_rng = rng_stream(spec.seed, 0);
    let mut j_rng = rng_stream(spec.seed, 1);
    let h = (0..graph.vertex_count())
        .map(|_| uniform(&mut h_rng, spec.h_range.lo, spec.h_range.hi))
        .collect();
    let j: Vec<_> = graph
        .edges()
        .iter()
        .map(|&(a, b)| (a, b, uniform(&mut j_rng, spec.j_range.lo, spec.j_range.hi)))
        .collect();
    IsingProblem::new(graph.vertex_count(), h, j)
}

/// Reusable scratch space for labeling components of a vertex subset.
#[derive(Debug, Default, Clone)]
pub(crate) struct ComponentScratch {
    label: Vec<u32>,
    stack: Vec<usize>,
}

pub(crate) const UNLABELED: u32 = u32::MAX;
pub(crate) const OUTSIDE: u32 = u32::MAX - 1;

impl ComponentScratch {
    /// Labels each vertex of `subset` with its component index; vertices outside
    /// the subset are labeled [`OUTSIDE`]. Components are numbered in order of
    /// their smallest vertex. Returns the components with sorted members.
    pub(crate) fn label<G: Neighbors>(&mut self, graph: &G, subset: &[usize]) -> Vec<Vec<usize>> {
        let n = graph.vertex_count();
        self.label.clear();
        self.label.resize(n, OUTSIDE);
        for &v in subset {
            self.label[v] = UNLABELED;
        }
        let mut members: Vec<usize> = subset.to_vec();
        members.sort_unstable();
        members.dedup();

        let mut components = Vec::new();
        for &seed in &members {
            if self.label[seed] != UNLABELED {
                continue;
            }
            let id = components.len() as u32;
            let mut comp = vec![seed];
            self.label[seed] = id;
            self.stack.clear();
            self.stack.push(seed);
            while let Some(v) = self.stack.pop() {
                let label = &mut self.label;
                let stack = &mut self.stack;
                graph.for_each_neighbor(v, |u| {
                    if label[u] == UNLABELED {
                        label[u] = id;
                        stack.push(u);
                        comp.push(u);
                    }
                });
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }

    pub(crate) fn labels(&self) -> &[u32] {
        &self.label
    }
}

/// Maximal connected components of the subgraph induced by `subset`.
///
/// Components come out ordered by their smallest vertex, each with ascending
/// members. Uses an explicit stack, so depth is not limited by recursion.
pub fn connected_components<G: Neighbors>(subset: &[usize], graph: &G) -> Result<Vec<Tunnel>> {
    let n = graph.vertex_count();
    if let Some(&v) = subset.iter().find(|&&v| v >= n) {
        return Err(Error::Index { index: v, bound: n });
    }
    let mut scratch = ComponentScratch::default();
    Ok(scratch
        .label(graph, subset)
        .into_iter()
        .map(Tunnel::from_sorted)
        .collect())
}
