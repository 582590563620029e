//! Strongly connected components and reachability through the giant one.

use rand::Rng;

use super::bfs::UNREACHED;
use crate::graph::Digraph;
use crate::rng::Seed;

/// Component id of every node (Kosaraju, iterative) and the component count.
pub fn strongly_connected_components(g: &Digraph) -> (Vec<u32>, usize) {
    let n = g.n();
    // pass 1: finishing order on the forward graph
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack: Vec<(u32, usize)> = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push((s as u32, 0));
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            let out = g.out_neighbors(u as usize);
            if let Some(&v) = out.get(*next) {
                *next += 1;
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    // pass 2: reverse graph in decreasing finishing time
    let mut comp = vec![UNREACHED; n];
    let mut count = 0u32;
    let mut todo: Vec<u32> = Vec::new();
    for &s in order.iter().rev() {
        if comp[s as usize] != UNREACHED {
            continue;
        }
        comp[s as usize] = count;
        todo.push(s);
        while let Some(u) = todo.pop() {
            for &v in g.in_neighbors(u as usize) {
                if comp[v as usize] == UNREACHED {
                    comp[v as usize] = count;
                    todo.push(v);
                }
            }
        }
        count += 1;
    }
    (comp, count as usize)
}

/// Answers "is there a directed path from i to j" using the largest strongly
/// connected component `C`, its out-set `out(C)` and in-set `in(C)`.
///
/// Anything reachable from a node of `out(C)` lies in `out(C)`. Hence
/// `i ∈ in(C), j ∈ out(C)` is always a yes, `i ∈ out(C), j ∉ out(C)` always a
/// no, and a path from `i ∈ in(C)` to `j ∉ out(C)` never enters `out(C)`.
/// The remaining searches avoid the giant and stay small.
pub struct Reachability<'g> {
    g: &'g Digraph,
    out_of_giant: Vec<bool>,
    into_giant: Vec<bool>,
    giant_size: usize,
    mark: Vec<u32>,
    stamp: u32,
    stack: Vec<u32>,
}

impl<'g> Reachability<'g> {
    pub fn new(g: &'g Digraph) -> Self {
        let n = g.n();
        let (comp, count) = strongly_connected_components(g);
        let mut sizes = vec![0usize; count];
        for &c in &comp {
            sizes[c as usize] += 1;
        }
        let (giant, giant_size) = sizes
            .iter()
            .enumerate()
            .max_by_key(|&(i, &s)| (s, std::cmp::Reverse(i)))
            .map(|(i, &s)| (i as u32, s))
            .unwrap_or((0, 0));
        let seeds: Vec<u32> = (0..n as u32).filter(|&v| comp[v as usize] == giant).collect();
        let out_of_giant = flood(n, &seeds, |u| g.out_neighbors(u));
        let into_giant = flood(n, &seeds, |u| g.in_neighbors(u));
        Reachability {
            g,
            out_of_giant,
            into_giant,
            giant_size,
            mark: vec![0; n],
            stamp: 0,
            stack: Vec::new(),
        }
    }

    pub fn giant_size(&self) -> usize {
        self.giant_size
    }

    pub fn out_of_giant(&self) -> &[bool] {
        &self.out_of_giant
    }

    pub fn into_giant(&self) -> &[bool] {
        &self.into_giant
    }

    pub fn reachable(&mut self, i: usize, j: usize) -> bool {
        if i == j || (self.into_giant[i] && self.out_of_giant[j]) {
            return true;
        }
        if self.out_of_giant[i] && !self.out_of_giant[j] {
            return false;
        }
        // i either reaches C, and then j is outside out(C), or it does not,
        // and then everything i reaches is off the giant; both searches stay small
        self.search(i, j, self.into_giant[i])
    }

    fn search(&mut self, i: usize, j: usize, avoid_out: bool) -> bool {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.fill(0);
            self.stamp = 1;
        }
        self.stack.clear();
        self.stack.push(i as u32);
        self.mark[i] = self.stamp;
        while let Some(u) = self.stack.pop() {
            for &v in self.g.out_neighbors(u as usize) {
                if v as usize == j {
                    return true;
                }
                if !(avoid_out && self.out_of_giant[v as usize]) && self.mark[v as usize] != self.stamp {
                    self.mark[v as usize] = self.stamp;
                    self.stack.push(v);
                }
            }
        }
        false
    }

    /// Fraction of `num_pairs` uniform ordered pairs `i != j` joined by a
    /// directed path, with the count of such pairs.
    pub fn sample_finite_fraction(&mut self, num_pairs: usize, seed: Seed) -> (usize, f64) {
        let n = self.g.n();
        if n < 2 || num_pairs == 0 {
            return (0, 0.0);
        }
        let mut rng = seed.rng();
        let mut hits = 0;
        for _ in 0..num_pairs {
            let (i, j) = distinct_pair(n, &mut rng);
            hits += self.reachable(i, j) as usize;
        }
        (hits, hits as f64 / num_pairs as f64)
    }
}

fn flood<'a, F: Fn(usize) -> &'a [u32]>(n: usize, seeds: &[u32], next: F) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = seeds.to_vec();
    for &s in seeds {
        seen[s as usize] = true;
    }
    while let Some(u) = stack.pop() {
        for &v in next(u as usize) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// A uniform ordered pair of distinct nodes.
pub fn distinct_pair<R: Rng>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}
