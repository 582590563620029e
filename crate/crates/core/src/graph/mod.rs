//! Configuration-model digraphs in compressed adjacency form.

mod io;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::degrees::BiDegreeSequence;
use crate::error::{Error, Result};
use crate::rng::Seed;

/// A directed multigraph on nodes `0..n` with forward and reverse adjacency.
///
/// Node ids are `u32`; edge `e` of node `u` is `out_targets[out_offsets[u] + e]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
    simple: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub self_loops: usize,
    /// Edges minus distinct ordered pairs.
    pub multi_edge_excess: usize,
    pub max_in_degree: usize,
    pub max_out_degree: usize,
}

impl Digraph {
    /// Builds a graph from an edge list; multiplicities and loops are kept.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u as usize >= n || v as usize >= n) {
            return Err(Error::NodeOutOfRange {
                node: u.max(v) as usize,
                n,
            });
        }
        let mut out_offsets = vec![0usize; n + 1];
        for &(u, _) in edges {
            out_offsets[u as usize + 1] += 1;
        }
        prefix_sum(&mut out_offsets);
        let mut cursor = out_offsets.clone();
        let mut out_targets = vec![0u32; edges.len()];
        for &(u, v) in edges {
            out_targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
        }
        let mut g = Self::from_forward(n, out_offsets, out_targets);
        let st = g.stats();
        g.simple = st.self_loops == 0 && st.multi_edge_excess == 0;
        Ok(g)
    }

    fn from_forward(n: usize, out_offsets: Vec<usize>, out_targets: Vec<u32>) -> Self {
        let mut in_offsets = vec![0usize; n + 1];
        for &v in &out_targets {
            in_offsets[v as usize + 1] += 1;
        }
        prefix_sum(&mut in_offsets);
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0u32; out_targets.len()];
        for u in 0..n {
            for &v in &out_targets[out_offsets[u]..out_offsets[u + 1]] {
                in_sources[cursor[v as usize]] = u as u32;
                cursor[v as usize] += 1;
            }
        }
        Digraph {
            n,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            simple: false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn is_multigraph(&self) -> bool {
        !self.simple
    }

    #[inline]
    pub fn out_neighbors(&self, u: usize) -> &[u32] {
        &self.out_targets[self.out_offsets[u]..self.out_offsets[u + 1]]
    }

    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_offsets[u + 1] - self.out_offsets[u]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// Edges in source order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n).flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u as u32, v)))
    }

    /// The graph with every edge reversed.
    pub fn transpose(&self) -> Digraph {
        Digraph {
            n: self.n,
            out_offsets: self.in_offsets.clone(),
            out_targets: self.in_sources.clone(),
            in_offsets: self.out_offsets.clone(),
            in_sources: self.out_targets.clone(),
            simple: self.simple,
        }
    }

    /// The in/out degrees as a sequence.
    pub fn degree_sequence(&self) -> BiDegreeSequence {
        let d_minus = (0..self.n).map(|v| self.in_degree(v) as u32).collect();
        let d_plus = (0..self.n).map(|u| self.out_degree(u) as u32).collect();
        BiDegreeSequence::new(d_minus, d_plus).expect("a graph's degree sums agree")
    }

    /// Counts loops, parallel edges and maximum degrees in one pass.
    pub fn stats(&self) -> GraphStats {
        let mut self_loops = 0;
        let mut excess = 0;
        let mut scratch: Vec<u32> = Vec::new();
        for u in 0..self.n {
            scratch.clear();
            scratch.extend_from_slice(self.out_neighbors(u));
            scratch.sort_unstable();
            self_loops += scratch.iter().filter(|&&v| v as usize == u).count();
            excess += scratch.windows(2).filter(|w| w[0] == w[1]).count();
        }
        GraphStats {
            nodes: self.n,
            edges: self.edge_count(),
            self_loops,
            multi_edge_excess: excess,
            max_in_degree: (0..self.n).map(|v| self.in_degree(v)).max().unwrap_or(0),
            max_out_degree: (0..self.n).map(|u| self.out_degree(u)).max().unwrap_or(0),
        }
    }
}

fn prefix_sum(v: &mut [usize]) {
    for i in 1..v.len() {
        v[i] += v[i - 1];
    }
}

/// Uniform pairing of stubs.
///
/// Out-stubs are laid out by owner, so after a Fisher-Yates shuffle of the
/// in-stub owners the shuffled array is already the forward target list.
pub fn pair_stubs(seq: &BiDegreeSequence, seed: Seed) -> Digraph {
    let n = seq.n();
    let mut out_offsets = vec![0usize; n + 1];
    for (i, &d) in seq.d_plus().iter().enumerate() {
        out_offsets[i + 1] = out_offsets[i] + d as usize;
    }
    let mut targets: Vec<u32> = Vec::with_capacity(seq.total() as usize);
    for (i, &d) in seq.d_minus().iter().enumerate() {
        targets.extend(std::iter::repeat_n(i as u32, d as usize));
    }
    let mut rng = seed.rng();
    for i in (1..targets.len()).rev() {
        let j = rng.random_range(0..=i);
        targets.swap(i, j);
    }
    Digraph::from_forward(n, out_offsets, targets)
}

/// Drops self-loops and merges parallel edges.
pub fn erase(g: &Digraph) -> Digraph {
    let mut out_offsets = vec![0usize; g.n + 1];
    let mut targets = Vec::with_capacity(g.edge_count());
    for u in 0..g.n {
        let start = targets.len();
        targets.extend(g.out_neighbors(u).iter().copied().filter(|&v| v as usize != u));
        targets[start..].sort_unstable();
        let mut w = start;
        for r in start..targets.len() {
            if r == start || targets[r] != targets[w - 1] {
                targets[w] = targets[r];
                w += 1;
            }
        }
        targets.truncate(w);
        out_offsets[u + 1] = targets.len();
    }
    let mut h = Digraph::from_forward(g.n, out_offsets, targets);
    h.simple = true;
    h
}

pub fn graph_stats(g: &Digraph) -> GraphStats {
    g.stats()
}
