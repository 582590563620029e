//! Neighborhood functions `N(t) = #{(u, v) : u != v, dist(u, v) <= t}`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::hll::{estimate_words, hash_node, merge_words, HllArray};
use super::{exact_all_pairs, HistogramMode, HopcountHistogram};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::par::Execution;
use crate::rng::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NfMode {
    Exact,
    Hll { p: u8 },
}

/// `values[t] = N(t)` for `t = 0..=t_max` (`N(0) = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodFunction {
    pub mode: NfMode,
    pub n: usize,
    pub values: Vec<f64>,
    /// First `t` after which nothing changes, if reached within `t_max`.
    pub stable_at: Option<usize>,
    pub seed: Option<Seed>,
}

impl NeighborhoodFunction {
    pub fn t_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `N(t_max)`: the (estimated) number of finitely separated pairs.
    pub fn finite_pairs(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Pairs at finite distance at least `t`: `N(t_max) - N(t - 1)`.
    pub fn at_least(&self, t: usize) -> f64 {
        if t == 0 {
            return self.finite_pairs();
        }
        self.finite_pairs() - self.values[(t - 1).min(self.t_max())]
    }

    pub fn to_histogram(&self) -> HopcountHistogram {
        let mode = match self.mode {
            NfMode::Exact => HistogramMode::ExactAllPairs,
            NfMode::Hll { .. } => HistogramMode::HllEstimate,
        };
        let mut h = HopcountHistogram::empty(mode);
        h.counts = std::iter::once(0.0)
            .chain(self.values.windows(2).map(|w| w[1] - w[0]))
            .collect();
        while h.counts.len() > 1 && *h.counts.last().unwrap() == 0.0 {
            h.counts.pop();
        }
        h.finite_pairs = self.finite_pairs();
        h.total_pairs = self.n as f64 * (self.n as f64 - 1.0);
        h.seed = self.seed;
        h.t_max = Some(self.t_max());
        if let NfMode::Hll { p } = self.mode {
            h.p = Some(p);
        }
        h
    }

    /// `t,within,at_least` for `t = 1..=t_max`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "within", "at_least"])?;
        for t in 1..self.values.len() {
            out.serialize((t, self.values[t], self.at_least(t)))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Differences of a cumulative pair count into a distance pmf.
///
/// `nf[i]` is `N(i + 1)`. The result is indexed by distance with a zero at 0;
/// an all-zero input gives an empty pmf.
pub fn hopcount_pmf_from_nf(nf: &[f64]) -> Result<Vec<f64>> {
    let mut prev = 0.0;
    for (i, &v) in nf.iter().enumerate() {
        if v < prev {
            return Err(Error::NonMonotoneInput { t: i + 1 });
        }
        prev = v;
    }
    let total = prev;
    if total <= 0.0 {
        return Ok(Vec::new());
    }
    let mut pmf = vec![0.0];
    let mut last = 0.0;
    for &v in nf {
        pmf.push((v - last) / total);
        last = v;
    }
    Ok(pmf)
}

const NODES_PER_TASK: usize = 256;

pub fn neighborhood_function(g: &Digraph, mode: NfMode, t_max: usize, seed: Seed, exec: Execution) -> NeighborhoodFunction {
    let t_max = t_max.max(1);
    match mode {
        NfMode::Exact => {
            let h = exact_all_pairs(g, exec);
            let mut values = vec![0.0; t_max + 1];
            let mut acc = 0.0;
            for (t, v) in values.iter_mut().enumerate().skip(1) {
                acc += h.counts.get(t).copied().unwrap_or(0.0);
                *v = acc;
            }
            let diameter = h.max_distance();
            NeighborhoodFunction {
                mode,
                n: g.n(),
                values,
                stable_at: (diameter <= t_max).then_some(diameter),
                seed: None,
            }
        }
        NfMode::Hll { p } => hll_neighborhood(g, p, t_max, seed, exec),
    }
}

/// Iterated counter propagation: the counter of `v` after round `t` is the
/// union of the counters of `v` and its out-neighbours after round `t - 1`,
/// i.e. a sketch of the ball of radius `t` around `v`.
///
/// A neighbour that did not change in the previous round has nothing new to
/// contribute, so only changed ones are merged. Each node's estimate is kept
/// as a running maximum so `N(t)` is nondecreasing despite estimator noise.
fn hll_neighborhood(g: &Digraph, p: u8, t_max: usize, seed: Seed, exec: Execution) -> NeighborhoodFunction {
    let n = g.n();
    let mut cur = HllArray::new(n, p);
    for v in 0..n {
        cur.add_hash(v, hash_node(v as u64, seed.0));
    }
    let words = cur.words_per_counter();
    let mut est: Vec<f64> = (0..n).map(|v| cur.estimate(v)).collect();
    // pairs exclude (v, v): subtract the sketch's own estimate of {v}, which
    // also removes its small-range bias and keeps isolated nodes at exactly 0
    let own = est.clone();
    let mut changed = vec![true; n];
    let mut values = vec![0.0; t_max + 1];
    let mut stable_at = None;
    for t in 1..=t_max {
        let mut next = cur.clone();
        let updates: Vec<Vec<Option<f64>>> = {
            let prev = &cur;
            let changed = &changed;
            let est = &est;
            exec.map_chunks_mut(next.data_mut(), NODES_PER_TASK * words, |task, slab| {
                let base = task * NODES_PER_TASK;
                slab.chunks_mut(words)
                    .enumerate()
                    .map(|(k, dst)| {
                        let v = base + k;
                        let mut any = false;
                        for &w in g.out_neighbors(v) {
                            if changed[w as usize] {
                                any |= merge_words(dst, prev.counter(w as usize));
                            }
                        }
                        any.then(|| estimate_words(dst, p).max(est[v]))
                    })
                    .collect()
            })
        };
        let mut any_change = false;
        for (v, u) in updates.into_iter().flatten().enumerate() {
            changed[v] = u.is_some();
            if let Some(e) = u {
                est[v] = e;
                any_change = true;
            }
        }
        cur = next;
        values[t] = crate::par::chunked_sum(exec, n, 4096, |v| (est[v] - own[v]).max(0.0));
        if !any_change {
            stable_at = Some(t - 1);
            for s in t + 1..=t_max {
                values[s] = values[t];
            }
            break;
        }
    }
    NeighborhoodFunction {
        mode: NfMode::Hll { p },
        n,
        values,
        stable_at,
        seed: Some(seed),
    }
}
