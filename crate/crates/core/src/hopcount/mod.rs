//! Hopcount distributions: exact searches, sampled pairs and HyperLogLog
//! neighborhood functions.

mod bfs;
pub mod hll;
mod nf;
mod scc;

pub use bfs::{bfs_distance, Bfs, UNREACHED};
pub use hll::{HllArray, HllCounter};
pub use nf::{hopcount_pmf_from_nf, neighborhood_function, NeighborhoodFunction, NfMode};
pub use scc::{distinct_pair, strongly_connected_components, Reachability};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::graph::Digraph;
use crate::par::Execution;
use crate::rng::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramMode {
    ExactAllPairs,
    SampledPairs,
    HllEstimate,
}

/// Counts of ordered pairs `(i, j)`, `i != j`, by directed distance.
///
/// Counts are reals so HyperLogLog estimates fit the same type; `counts[0]`
/// is always zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopcountHistogram {
    pub mode: HistogramMode,
    pub counts: Vec<f64>,
    pub finite_pairs: f64,
    pub total_pairs: f64,
    pub seed: Option<Seed>,
    pub p: Option<u8>,
    pub t_max: Option<usize>,
}

impl HopcountHistogram {
    pub fn empty(mode: HistogramMode) -> Self {
        HopcountHistogram {
            mode,
            counts: vec![0.0],
            finite_pairs: 0.0,
            total_pairs: 0.0,
            seed: None,
            p: None,
            t_max: None,
        }
    }

    fn add_distance(&mut self, t: usize, weight: f64) {
        if self.counts.len() <= t {
            self.counts.resize(t + 1, 0.0);
        }
        self.counts[t] += weight;
        self.finite_pairs += weight;
    }

    /// Pools the pairs of another histogram into this one.
    pub fn absorb(&mut self, other: &HopcountHistogram) {
        for (t, &c) in other.counts.iter().enumerate().skip(1) {
            if c != 0.0 {
                self.add_distance(t, c);
            }
        }
        self.total_pairs += other.total_pairs;
    }

    pub fn finite_fraction(&self) -> f64 {
        if self.total_pairs > 0.0 {
            self.finite_pairs / self.total_pairs
        } else {
            0.0
        }
    }

    /// Distance pmf conditioned on finiteness (empty if no finite pairs).
    pub fn pmf(&self) -> Vec<f64> {
        if self.finite_pairs <= 0.0 {
            return Vec::new();
        }
        self.counts.iter().map(|c| c / self.finite_pairs).collect()
    }

    /// `P(H <= t | H < ∞)`.
    pub fn cdf(&self, t: i64) -> f64 {
        if t < 1 || self.finite_pairs <= 0.0 {
            return 0.0;
        }
        let upto = (t as usize).min(self.counts.len() - 1);
        (self.counts[..=upto].iter().sum::<f64>() / self.finite_pairs).min(1.0)
    }

    pub fn max_distance(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0.0).unwrap_or(0)
    }

    /// `t,count` rows for `t >= 1`.
    pub fn write_csv<W: Write>(&self, w: W) -> crate::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "count"])?;
        for (t, c) in self.counts.iter().enumerate().skip(1) {
            out.serialize((t, c))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode,
            "seed": self.seed,
            "p": self.p,
            "t_max": self.t_max,
            "finite_pairs": self.finite_pairs,
            "total_pairs": self.total_pairs,
        })
    }
}

const SOURCES_PER_TASK: usize = 64;

/// Distances between all ordered pairs, one search per source.
pub fn exact_all_pairs(g: &Digraph, exec: Execution) -> HopcountHistogram {
    let n = g.n();
    let tasks = n.div_ceil(SOURCES_PER_TASK);
    let partial: Vec<Vec<u64>> = exec.map_range(tasks, |task| {
        let mut bfs = Bfs::new(n);
        let mut counts = vec![0u64; 1];
        for s in task * SOURCES_PER_TASK..((task + 1) * SOURCES_PER_TASK).min(n) {
            bfs.run(g, s);
            for &v in bfs.visited().iter().skip(1) {
                let d = bfs.dist(v as usize) as usize;
                if counts.len() <= d {
                    counts.resize(d + 1, 0);
                }
                counts[d] += 1;
            }
        }
        counts
    });
    let mut h = HopcountHistogram::empty(HistogramMode::ExactAllPairs);
    let len = partial.iter().map(Vec::len).max().unwrap_or(1);
    let mut total = vec![0u64; len];
    for p in &partial {
        for (t, &c) in p.iter().enumerate() {
            total[t] += c;
        }
    }
    for (t, &c) in total.iter().enumerate().skip(1) {
        h.add_distance(t, c as f64);
    }
    h.total_pairs = n as f64 * (n as f64 - 1.0);
    h
}

/// Distances of `num_pairs` independent uniform ordered pairs `i != j`.
pub fn sample_hopcounts(g: &Digraph, num_pairs: usize, seed: Seed) -> HopcountHistogram {
    let n = g.n();
    let mut h = HopcountHistogram::empty(HistogramMode::SampledPairs);
    h.seed = Some(seed);
    if n < 2 {
        return h;
    }
    let mut rng = seed.rng();
    let mut bfs = Bfs::new(n);
    for _ in 0..num_pairs {
        let (i, j) = distinct_pair(n, &mut rng);
        if let Some(v) = bfs.run_until(g, i, |v| v == j) {
            h.add_distance(bfs.dist(v) as usize, 1.0);
        }
    }
    h.total_pairs = num_pairs as f64;
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_and_empty_graphs() {
        let k3 = Digraph::from_edges(3, &[(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]).unwrap();
        let h = sample_hopcounts(&k3, 500, Seed(1));
        assert_eq!(h.counts, vec![0.0, 500.0]);
        let e = Digraph::from_edges(4, &[]).unwrap();
        let h = sample_hopcounts(&e, 100, Seed(1));
        assert_eq!(h.finite_pairs, 0.0);
        assert_eq!(h.total_pairs, 100.0);
        assert!(h.pmf().is_empty());
    }

    #[test]
    fn exact_histogram_of_a_path() {
        let g = Digraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let h = exact_all_pairs(&g, Execution::Parallel);
        assert_eq!(h.counts, vec![0.0, 2.0, 1.0]);
        assert_eq!(h.total_pairs, 6.0);
        assert_eq!(h.cdf(1), 2.0 / 3.0);
        assert_eq!(h.cdf(10), 1.0);
        let mut twice = h.clone();
        twice.absorb(&h);
        assert_eq!(twice.pmf(), h.pmf());
        assert_eq!(twice.total_pairs, 12.0);
    }
}
