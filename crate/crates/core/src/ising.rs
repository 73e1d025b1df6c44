//! Ising problems, spin configurations and the energy arithmetic everything
//! else builds on.
//!
//! The energy of a configuration `σ ∈ {−1,+1}^n` is
//!
//! ```text
//! E(σ) = Σ_a h_a σ_a + Σ_{a<b} J_ab σ_a σ_b
//! ```
//!
//! Problems are immutable once built. Configurations carry their energy, and
//! every mutation goes through a method that recomputes it.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// A spin value, always `-1` or `+1`.
pub type Spin = i8;

/// Absolute tolerance used for every energy equality decision.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

/// One quadratic coefficient. Always stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub a: usize,
    pub b: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    vertex_count: usize,
    h: Vec<f64>,
    couplings: Vec<Coupling>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl IsingProblem {
    /// Builds a problem from a dense linear term and a list of `(a, b, J_ab)` couplings.
    ///
    /// Pairs may be given in either orientation; they are normalized to `a < b`
    /// and sorted. Self-loops, duplicate pairs and out-of-range indices are rejected.
    pub fn new(
        vertex_count: usize,
        h: Vec<f64>,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if h.len() != vertex_count {
            return Err(Error::Dimension {
                expected: vertex_count,
                found: h.len(),
            });
        }
        if let Some(bad) = h.iter().find(|x| !x.is_finite()) {
            return Err(input(format!("non-finite linear coefficient {bad}")));
        }

        let mut list = Vec::new();
        for (a, b, value) in couplings {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::Index {
                        index: v,
                        bound: vertex_count,
                    });
                }
            }
            if a == b {
                return Err(input(format!("self-loop on vertex {a}")));
            }
            if !value.is_finite() {
                return Err(input(format!("non-finite coupling on ({a}, {b})")));
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            list.push(Coupling { a, b, value });
        }
        list.sort_by_key(|c| (c.a, c.b));
        if let Some(w) = list.windows(2).find(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(input(format!("duplicate coupling ({}, {})", w[0].a, w[0].b)));
        }

        let mut adjacency = vec![Vec::new(); vertex_count];
        for c in &list {
            adjacency[c.a].push((c.b, c.value));
            adjacency[c.b].push((c.a, c.value));
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(v, _)| v);
        }

        Ok(Self {
            vertex_count,
            h,
            couplings: list,
            adjacency,
        })
    }

    /// Builds a problem from sparse `(vertex, h_a)` entries; unlisted vertices get `h_a = 0`.
    pub fn from_sparse(
        vertex_count: usize,
        h: impl IntoIterator<Item = (usize, f64)>,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut dense = vec![0.0; vertex_count];
        let mut seen = vec![false; vertex_count];
        for (v, value) in h {
            if v >= vertex_count {
                return Err(Error::Index {
                    index: v,
                    bound: vertex_count,
                });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(input(format!("duplicate linear coefficient for vertex {v}")));
            }
            dense[v] = value;
        }
        Self::new(vertex_count, dense, couplings)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.couplings.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    /// Neighbors of `v` with their coupling, sorted by neighbor index.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Coupling between `a` and `b`, if the edge exists.
    pub fn coupling(&self, a: usize, b: usize) -> Option<f64> {
        let row = self.adjacency.get(a)?;
        row.binary_search_by_key(&b, |&(v, _)| v)
            .ok()
            .map(|i| row[i].1)
    }

    /// Same graph with every coefficient passed through `f`.
    pub fn map_coefficients(&self, mut fh: impl FnMut(f64) -> f64, mut fj: impl FnMut(f64) -> f64) -> Self {
        let h = self.h.iter().map(|&x| fh(x)).collect();
        let couplings: Vec<Coupling> = self
            .couplings
            .iter()
            .map(|c| Coupling {
                value: fj(c.value),
                ..*c
            })
            .collect();
        let mut adjacency = vec![Vec::new(); self.vertex_count];
        for c in &couplings {
            adjacency[c.a].push((c.b, c.value));
            adjacency[c.b].push((c.a, c.value));
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(v, _)| v);
        }
        Self {
            vertex_count: self.vertex_count,
            h,
            couplings,
            adjacency,
        }
    }

    fn check_len(&self, spins: &[Spin]) -> Result<()> {
        if spins.len() != self.vertex_count {
            return Err(Error::Dimension {
                expected: self.vertex_count,
                found: spins.len(),
            });
        }
        Ok(())
    }

    /// Energy of `spins`: linear terms in vertex order, then couplings in `(a, b)` order.
    pub fn energy(&self, spins: &[Spin]) -> Result<f64> {
        self.check_len(spins)?;
        Ok(self.energy_unchecked(spins))
    }

    pub(crate) fn energy_unchecked(&self, spins: &[Spin]) -> f64 {
        let linear: f64 = self
            .h
            .iter()
            .zip(spins)
            .map(|(&h, &s)| h * f64::from(s))
            .sum();
        let quadratic: f64 = self
            .couplings
            .iter()
            .map(|c| c.value * f64::from(spins[c.a] * spins[c.b]))
            .sum();
        linear + quadratic
    }

    /// `h_v + Σ_b J_vb σ_b`.
    #[inline]
    pub fn local_field(&self, v: usize, spins: &[Spin]) -> f64 {
        self.h[v]
            + self.adjacency[v]
                .iter()
                .map(|&(b, j)| j * f64::from(spins[b]))
                .sum::<f64>()
    }

    /// Energy change from negating spin `v`: `−2 σ_v (h_v + Σ_b J_vb σ_b)`.
    #[inline]
    pub fn flip_delta(&self, v: usize, spins: &[Spin]) -> f64 {
        -2.0 * f64::from(spins[v]) * self.local_field(v, spins)
    }

    /// Stable 64-bit FNV-1a digest of the coefficients, rendered as hex.
    pub fn fingerprint(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                hash ^= u64::from(b);
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(&(self.vertex_count as u64).to_le_bytes());
        for h in &self.h {
            feed(&h.to_bits().to_le_bytes());
        }
        for c in &self.couplings {
            feed(&(c.a as u64).to_le_bytes());
            feed(&(c.b as u64).to_le_bytes());
            feed(&c.value.to_bits().to_le_bytes());
        }
        format!("{hash:016x}")
    }
}

/// Energy of `spins` under `problem`.
pub fn energy(problem: &IsingProblem, spins: &[Spin]) -> Result<f64> {
    problem.energy(spins)
}

/// One ±1 assignment per vertex together with its cached energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfiguration {
    spins: Vec<Spin>,
    energy: f64,
}

impl SpinConfiguration {
    pub fn new(problem: &IsingProblem, spins: Vec<Spin>) -> Result<Self> {
        problem.check_len(&spins)?;
        if let Some(pos) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(input(format!("spin {pos} has value {}, expected ±1", spins[pos])));
        }
        let energy = problem.energy_unchecked(&spins);
        Ok(Self { spins, energy })
    }

    /// Every vertex set to `spin`.
    pub fn uniform(problem: &IsingProblem, spin: Spin) -> Result<Self> {
        Self::new(problem, vec![spin; problem.vertex_count()])
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn into_spins(self) -> Vec<Spin> {
        self.spins
    }

    /// Overwrites the listed vertices and refreshes the cached energy.
    pub fn assign(&mut self, problem: &IsingProblem, values: &[(usize, Spin)]) -> Result<()> {
        problem.check_len(&self.spins)?;
        for &(v, s) in values {
            if v >= self.spins.len() {
                return Err(Error::Index {
                    index: v,
                    bound: self.spins.len(),
                });
            }
            if s != 1 && s != -1 {
                return Err(input(format!("spin value {s} for vertex {v}")));
            }
        }
        for &(v, s) in values {
            self.spins[v] = s;
        }
        self.energy = problem.energy_unchecked(&self.spins);
        Ok(())
    }

    /// Negates the listed vertices and refreshes the cached energy.
    pub fn negate(&mut self, problem: &IsingProblem, vertices: &[usize]) -> Result<()> {
        let values: Vec<(usize, Spin)> = vertices
            .iter()
            .map(|&v| (v, self.spins.get(v).map_or(1, |s| -s)))
            .collect();
        self.assign(problem, &values)
    }

    /// Checks length and that the cached energy matches a fresh evaluation.
    pub fn validate(&self, problem: &IsingProblem) -> Result<()> {
        let fresh = problem.energy(&self.spins)?;
        if (fresh - self.energy).abs() > ENERGY_TOLERANCE {
            return Err(input(format!(
                "cached energy {} differs from evaluated {}",
                self.energy, fresh
            )));
        }
        Ok(())
    }
}

impl Deref for SpinConfiguration {
    type Target = [Spin];

    fn deref(&self) -> &[Spin] {
        &self.spins
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.spins {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// A nonempty, sorted set of vertices on which two runs disagree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tunnel {
    vertices: Vec<usize>,
}

impl Tunnel {
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(input("tunnel must contain at least one vertex"));
        }
        vertices.sort_unstable();
        vertices.dedup();
        Ok(Self { vertices })
    }

    /// Caller guarantees `vertices` is sorted, deduplicated and nonempty.
    pub(crate) fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Self { vertices }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Energy attributable to `tunnel` under `spins`: its linear terms plus every
/// coupling from a tunnel vertex to a vertex outside the tunnel.
///
/// Couplings internal to the tunnel are left out; they do not change when the
/// whole tunnel is negated.
pub fn tunnel_contribution(problem: &IsingProblem, spins: &[Spin], tunnel: &Tunnel) -> Result<f64> {
    problem.check_len(spins)?;
    if let Some(&v) = tunnel.vertices().iter().find(|&&v| v >= problem.vertex_count()) {
        return Err(Error::Index {
            index: v,
            bound: problem.vertex_count(),
        });
    }
    let mut total = 0.0;
    for &a in tunnel.vertices() {
        let sa = f64::from(spins[a]);
        total += problem.h[a] * sa;
        for &(b, j) in problem.neighbors(a) {
            if !tunnel.contains(b) {
                total += j * sa * f64::from(spins[b]);
            }
        }
    }
    Ok(total)
}
