//! The joint construction of graph exploration and branching process from
//! shared uniforms, and measurements of how long the two agree.

mod fenwick;
mod rate;
mod trace;

pub use rate::{coupling_failure_rate, CouplingConfig, FailureRates};
pub use trace::{coupled_exploration, coupled_exploration_with, CoupledTrace, ExplorationOptions, StepRecord};

use rand::Rng;

use self::fenwick::Fenwick;
use crate::branching::Direction;
use crate::degrees::{BiDegreeSequence, DiscreteLaw};
use crate::error::{Error, Result};
use crate::rng::LabRng;

/// `inf{k : cdf[k] >= u}` for a nondecreasing `cdf` indexed by value; values
/// past the end map to `cdf.len()`.
pub fn pseudo_inverse_sample(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c < u)
}

/// Outcome of one traversed stub.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Traversal {
    /// Number of new stubs discovered (`χ`).
    pub chi: u32,
    /// The node newly activated, if any.
    pub node: Option<u32>,
}

/// Graph side of the exploration in one direction.
///
/// For `Out`, traversed stubs are outbound and are paired with inbound stubs;
/// a newly reached node contributes its out-degree as offspring. `In` swaps
/// the roles. Nodes are kept sorted by offspring degree in a Fenwick tree
/// weighted by the pairing-side degree of inactive nodes, so a degree class
/// is a contiguous range and both the pseudo-inverse of `H` and the choice of
/// node within a class are prefix searches.
#[derive(Clone, Debug)]
pub struct ExplorationState<'s> {
    direction: Direction,
    own: &'s [u32],
    other: &'s [u32],
    order: Vec<u32>,
    rank: Vec<u32>,
    /// Distinct offspring degrees and the end of their range in `order`.
    values: Vec<u32>,
    ends: Vec<usize>,
    weights: Fenwick,
    active: Vec<bool>,
    traversed: u64,
    total: u64,
    unexplored_active: u64,
    active_joint: f64,
}

impl<'s> ExplorationState<'s> {
    pub fn new(seq: &'s BiDegreeSequence, direction: Direction) -> Self {
        let (own, other) = match direction {
            Direction::Out => (seq.d_plus(), seq.d_minus()),
            Direction::In => (seq.d_minus(), seq.d_plus()),
        };
        let n = seq.n();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by_key(|&v| (own[v as usize], v));
        let mut rank = vec![0u32; n];
        for (p, &v) in order.iter().enumerate() {
            rank[v as usize] = p as u32;
        }
        let mut values = Vec::new();
        let mut ends = Vec::new();
        for (p, &v) in order.iter().enumerate() {
            let d = own[v as usize];
            if values.last() != Some(&d) {
                if !values.is_empty() {
                    ends.push(p);
                }
                values.push(d);
            }
        }
        if !values.is_empty() {
            ends.push(n);
        }
        let w: Vec<u64> = order.iter().map(|&v| other[v as usize] as u64).collect();
        ExplorationState {
            direction,
            own,
            other,
            order,
            rank,
            values,
            ends,
            weights: Fenwick::new(&w),
            active: vec![false; n],
            traversed: 0,
            total: seq.total(),
            unexplored_active: 0,
            active_joint: 0.0,
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Stubs traversed so far (`T`).
    pub fn traversed(&self) -> u64 {
        self.traversed
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Unpaired pairing-side stubs on active nodes (`V`).
    pub fn unexplored_active(&self) -> u64 {
        self.unexplored_active
    }

    pub fn is_active(&self, v: usize) -> bool {
        self.active[v]
    }

    /// `ℐ_r(T)` for every node.
    pub fn inactive(&self) -> Vec<bool> {
        self.active.iter().map(|a| !a).collect()
    }

    /// `Σ_r (1 - ℐ_r) D⁺_r D⁻_r`.
    pub fn active_joint_moment(&self) -> f64 {
        self.active_joint
    }

    /// Recomputes `L - Σ_r D_r ℐ_r(T) - T` from scratch and compares with
    /// the maintained `V`.
    pub fn v_identity_holds(&self) -> bool {
        let inactive: u64 = (0..self.own.len())
            .filter(|&r| !self.active[r])
            .map(|r| self.other[r] as u64)
            .sum();
        self.total - inactive - self.traversed == self.unexplored_active
    }

    fn activate(&mut self, v: usize) {
        debug_assert!(!self.active[v]);
        self.active[v] = true;
        self.weights.sub(self.rank[v] as usize, self.other[v] as u64);
        self.unexplored_active += self.other[v] as u64;
        self.active_joint += self.own[v] as f64 * self.other[v] as f64;
    }

    fn class_range(&self, class: usize) -> (usize, usize) {
        (if class == 0 { 0 } else { self.ends[class - 1] }, self.ends[class])
    }

    /// Weight of inactive nodes with offspring degree 0.
    fn zero_weight(&self) -> u64 {
        match self.values.first() {
            Some(0) => self.weights.prefix(self.ends[0]),
            _ => 0,
        }
    }

    /// First step: `G_n^{-1}(u)` gives the root's offspring degree; the root
    /// is uniform among the nodes of that degree. Returns `(χ, root)`.
    pub fn start(&mut self, u: f64, rng: &mut LabRng) -> (u32, u32) {
        assert!(self.traversed == 0 && !self.active.iter().any(|&a| a), "start called twice");
        let n = self.order.len();
        let at = ((u * n as f64).ceil() as usize).clamp(1, n) - 1;
        let degree = self.own[self.order[at] as usize];
        let class = self.values.binary_search(&degree).expect("degree present");
        let (lo, hi) = self.class_range(class);
        let root = self.order[rng.random_range(lo..hi)] as usize;
        self.activate(root);
        (degree, root as u32)
    }

    /// `H^{-1}(u)` for the current state, without changing it.
    pub fn pseudo_inverse(&self, u: f64) -> Result<u32> {
        let open = self.open_stubs()?;
        let x = ((u * open as f64).ceil() as u64).clamp(1, open);
        let zero = self.zero_weight() + self.unexplored_active;
        if x <= zero {
            return Ok(0);
        }
        let pos = self.weights.lower_bound(x - self.unexplored_active);
        Ok(self.own[self.order[pos] as usize])
    }

    fn open_stubs(&self) -> Result<u64> {
        if self.traversed >= self.total {
            return Err(Error::ExhaustedStubs {
                traversed: self.traversed,
                total: self.total,
            });
        }
        Ok(self.total - self.traversed)
    }

    /// Traverses one stub with offspring `χ = H^{-1}(u)`, pairing it with a
    /// uniform unpaired stub of the matching class.
    pub fn traverse(&mut self, u: f64, rng: &mut LabRng) -> Result<Traversal> {
        let chi = self.pseudo_inverse(u)?;
        let node = if chi == 0 {
            let w0 = self.zero_weight();
            let y = rng.random_range(1..=w0 + self.unexplored_active);
            if y <= w0 {
                Some(self.order[self.weights.lower_bound(y)] as usize)
            } else {
                None
            }
        } else {
            let class = self.values.binary_search(&chi).expect("class present");
            let (lo, hi) = self.class_range(class);
            let before = self.weights.prefix(lo);
            let y = rng.random_range(1..=self.weights.prefix(hi) - before);
            Some(self.order[self.weights.lower_bound(before + y)] as usize)
        };
        if let Some(v) = node {
            self.activate(v);
        }
        // the consumed stub now belongs to an active node
        self.unexplored_active -= 1;
        self.traversed += 1;
        Ok(Traversal {
            chi,
            node: node.map(|v| v as u32),
        })
    }
}

/// The pmf `h` of the next stub's offspring, materialized in O(n).
pub fn dynamic_offspring_law(state: &ExplorationState<'_>) -> Result<DiscreteLaw> {
    let open = state.open_stubs()? as f64;
    let max = state.values.last().copied().unwrap_or(0) as usize;
    let mut pmf = vec![0.0; max + 1];
    for (r, &a) in state.active.iter().enumerate() {
        if !a {
            pmf[state.own[r] as usize] += state.other[r] as f64;
        }
    }
    pmf[0] += state.unexplored_active as f64;
    for p in &mut pmf {
        *p /= open;
    }
    DiscreteLaw::from_pmf(pmf)
}

/// `ℰ(t) = (4/(νn)) Σ_r (1 - ℐ_r(t)) D⁺_r D⁻_r + 4μt/(νn) + 3 n^{-ε}`,
/// valid for `t ≤ νn/2`.
pub fn error_bound_e(t: u64, seq: &BiDegreeSequence, inactive: &[bool], nu: f64, mu: f64, eps: f64) -> Result<f64> {
    let joint: f64 = seq
        .d_plus()
        .iter()
        .zip(seq.d_minus())
        .zip(inactive)
        .filter(|(_, &i)| !i)
        .map(|((&p, &m), _)| p as f64 * m as f64)
        .sum();
    error_bound_from(t, joint, seq.n(), nu, mu, eps)
}

pub(crate) fn error_bound_from(t: u64, active_joint: f64, n: usize, nu: f64, mu: f64, eps: f64) -> Result<f64> {
    let nf = n as f64;
    let limit = nu / 2.0 * nf;
    if t as f64 > limit {
        return Err(Error::OutOfValidityWindow { t, limit });
    }
    Ok(4.0 / (nu * nf) * active_joint + 4.0 * mu * t as f64 / (nu * nf) + 3.0 * nf.powf(-eps))
}
