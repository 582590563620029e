//! Finite-`n` hopcount tails by alternating lazy exploration.

use rand::Rng;
use serde::Serialize;

use crate::degrees::BiDegreeSequence;
use crate::hopcount::distinct_pair;
use crate::par::Execution;
use crate::rng::{LabRng, Seed};

/// Probability that none of `a` out-stubs is paired with one of `b` marked
/// in-stubs when `l` in-stubs are available:
/// `1(a + b ≤ l) ∏_{s<a} (1 - b/(l - s))`, accumulated as a sum of logs.
pub fn survival_product_p(a: u64, b: u64, l: u64) -> f64 {
    if a.checked_add(b).is_none_or(|s| s > l) {
        return 0.0;
    }
    if a == 0 || b == 0 {
        return 1.0;
    }
    let b = b as f64;
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for s in 0..a {
        // Kahan summation keeps long products accurate
        let y = (-b / (l - s) as f64).ln_1p() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum.exp()
}

/// Estimates of `P_n(H_n > k')` for `k' = 0..=k`.
#[derive(Clone, Debug, Serialize)]
pub struct TailEstimate {
    pub tail: Vec<f64>,
    pub std_error: Vec<f64>,
    pub reps: usize,
    pub seed: Seed,
}

const NONE: u32 = u32::MAX;
const REPS_PER_TASK: usize = 256;

/// Unpaired stubs of one kind, with O(1) removal and uniform draws.
struct StubPool {
    owner: Vec<u32>,
    first: Vec<usize>,
    pool: Vec<u32>,
    pos: Vec<u32>,
}

impl StubPool {
    fn new(degrees: &[u32]) -> Self {
        let mut first = Vec::with_capacity(degrees.len() + 1);
        let mut owner = Vec::new();
        first.push(0);
        for (v, &d) in degrees.iter().enumerate() {
            owner.extend(std::iter::repeat_n(v as u32, d as usize));
            first.push(owner.len());
        }
        let len = owner.len();
        StubPool {
            owner,
            first,
            pool: Vec::with_capacity(len),
            pos: vec![NONE; len],
        }
    }

    fn reset(&mut self) {
        self.pool.clear();
        self.pool.extend(0..self.owner.len() as u32);
        for (i, p) in self.pos.iter_mut().enumerate() {
            *p = i as u32;
        }
    }

    fn remove(&mut self, stub: u32) {
        let at = self.pos[stub as usize] as usize;
        let last = *self.pool.last().unwrap();
        self.pool.swap_remove(at);
        if last != stub {
            self.pos[last as usize] = at as u32;
        }
        self.pos[stub as usize] = NONE;
    }

    fn unpaired_of(&self, v: usize) -> impl Iterator<Item = u32> + '_ {
        (self.first[v]..self.first[v + 1]).map(|s| s as u32).filter(|&s| self.pos[s as usize] != NONE)
    }

    /// A uniform unpaired stub whose owner is not on side `avoid`, given that
    /// `blocked` of the unpaired stubs are.
    fn draw(&self, side: &[u8], avoid: u8, blocked: usize, rng: &mut LabRng) -> u32 {
        let open = self.pool.len() - blocked;
        if 2 * blocked <= self.pool.len() {
            loop {
                let s = self.pool[rng.random_range(0..self.pool.len())];
                if side[self.owner[s as usize] as usize] != avoid {
                    return s;
                }
            }
        }
        let k = rng.random_range(0..open);
        *self.pool
            .iter()
            .filter(|&&s| side[self.owner[s as usize] as usize] != avoid)
            .nth(k)
            .unwrap()
    }
}

/// Alternating exploration from a source (side 1, outward) and a target
/// (side 2, inward) over a pairing revealed one stub at a time.
struct Explorer {
    outs: StubPool,
    ins: StubPool,
    side: Vec<u8>,
    touched: Vec<u32>,
}

impl Explorer {
    fn new(seq: &BiDegreeSequence) -> Self {
        Explorer {
            outs: StubPool::new(seq.d_plus()),
            ins: StubPool::new(seq.d_minus()),
            side: vec![0; seq.n()],
            touched: Vec::new(),
        }
    }

    fn unpaired_outs(&self, v: usize) -> usize {
        self.outs.unpaired_of(v).count()
    }

    fn unpaired_ins(&self, v: usize) -> usize {
        self.ins.unpaired_of(v).count()
    }

    /// Adds the weights `P(H > k' | path)` for `k' = 1..=k` to `acc`.
    ///
    /// The balls of radius `⌈i/2⌉` around the source and `⌊i/2⌋` around the
    /// target are disjoint exactly when `H > i`. Each revealed stub is drawn
    /// conditionally on keeping them disjoint, and the probability of that
    /// condition multiplies the weight.
    fn run(&mut self, src: usize, dst: usize, k: usize, rng: &mut LabRng, acc: &mut [f64], acc_sq: &mut [f64]) {
        for &v in &self.touched {
            self.side[v as usize] = 0;
        }
        self.touched.clear();
        self.outs.reset();
        self.ins.reset();
        self.side[src] = 1;
        self.side[dst] = 2;
        self.touched.extend([src as u32, dst as u32]);
        // unpaired out-stubs on side 1, unpaired in-stubs on side 2
        let mut blocked_out = self.unpaired_outs(src);
        let mut blocked_in = self.unpaired_ins(dst);
        let mut front1 = vec![src as u32];
        let mut front2 = vec![dst as u32];
        let mut weight = 1.0;
        let mut scratch = Vec::new();
        for i in 1..=k {
            if weight > 0.0 {
                let mut next = Vec::new();
                if i % 2 == 1 {
                    for &u in &front1 {
                        scratch.clear();
                        scratch.extend(self.outs.unpaired_of(u as usize));
                        for &o in &scratch {
                            self.outs.remove(o);
                            blocked_out -= 1;
                            let avail = self.ins.pool.len();
                            if blocked_in == avail {
                                weight = 0.0;
                                break;
                            }
                            weight *= 1.0 - blocked_in as f64 / avail as f64;
                            let s = self.ins.draw(&self.side, 2, blocked_in, rng);
                            self.ins.remove(s);
                            let v = self.ins.owner[s as usize] as usize;
                            if self.side[v] == 0 {
                                self.side[v] = 1;
                                self.touched.push(v as u32);
                                blocked_out += self.unpaired_outs(v);
                                next.push(v as u32);
                            }
                        }
                        if weight == 0.0 {
                            break;
                        }
                    }
                    front1 = next;
                } else {
                    for &x in &front2 {
                        scratch.clear();
                        scratch.extend(self.ins.unpaired_of(x as usize));
                        for &s in &scratch {
                            self.ins.remove(s);
                            blocked_in -= 1;
                            let avail = self.outs.pool.len();
                            if blocked_out == avail {
                                weight = 0.0;
                                break;
                            }
                            weight *= 1.0 - blocked_out as f64 / avail as f64;
                            let o = self.outs.draw(&self.side, 1, blocked_out, rng);
                            self.outs.remove(o);
                            let w = self.outs.owner[o as usize] as usize;
                            if self.side[w] == 0 {
                                self.side[w] = 2;
                                self.touched.push(w as u32);
                                blocked_in += self.unpaired_ins(w);
                                next.push(w as u32);
                            }
                        }
                        if weight == 0.0 {
                            break;
                        }
                    }
                    front2 = next;
                }
            }
            acc[i] += weight;
            acc_sq[i] += weight * weight;
        }
    }
}

/// Monte-Carlo estimate of `P_n(H_n > k')`, `k' = 0..=k`, for a uniform
/// pairing of `seq` and a uniform ordered pair of distinct nodes.
///
/// Each replicate explores alternately outward from the source and inward
/// from the target, pairing stubs only as they are reached; the estimator is
/// unbiased and its weights are products of `1 - B/(L - s)` factors.
pub fn exact_tail_smalln(seq: &BiDegreeSequence, k: usize, reps: usize, seed: Seed, exec: Execution) -> TailEstimate {
    let n = seq.n();
    let mut tail = vec![0.0; k + 1];
    let mut sq = vec![0.0; k + 1];
    if n >= 2 && reps > 0 {
        let tasks = reps.div_ceil(REPS_PER_TASK);
        let parts = exec.map_range(tasks, |task| {
            let mut rng = seed.derive(task as u64).rng();
            let mut ex = Explorer::new(seq);
            let mut acc = vec![0.0; k + 1];
            let mut acc_sq = vec![0.0; k + 1];
            let count = REPS_PER_TASK.min(reps - task * REPS_PER_TASK);
            for _ in 0..count {
                let (i, j) = distinct_pair(n, &mut rng);
                ex.run(i, j, k, &mut rng, &mut acc, &mut acc_sq);
            }
            (acc, acc_sq)
        });
        for (a, b) in parts {
            for t in 1..=k {
                tail[t] += a[t];
                sq[t] += b[t];
            }
        }
    }
    let r = reps.max(1) as f64;
    let mut std_error = vec![0.0; k + 1];
    for t in 1..=k {
        tail[t] /= r;
        let var = (sq[t] / r - tail[t] * tail[t]).max(0.0) * r / (r - 1.0).max(1.0);
        std_error[t] = (var / r).sqrt();
    }
    tail[0] = 1.0;
    TailEstimate { tail, std_error, reps, seed }
}
