//! Running the coupled construction generation by generation.

use std::io::Write;

use rand::distr::OpenClosed01;
use rand::Rng;
use serde::Serialize;

use super::{error_bound_from, ExplorationState};
use crate::branching::{Direction, GWSpec};
use crate::degrees::BiDegreeSequence;
use crate::error::{Error, Result};
use crate::rng::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExplorationOptions {
    pub k_max: usize,
    /// `ε` in the error-function overlay.
    pub eps: f64,
    /// Keep `(T, χ, χ̂)` for every traversed stub.
    pub record_steps: bool,
    /// Largest generation (graph ∪ tree labels) before giving up.
    pub label_cap: usize,
}

impl ExplorationOptions {
    pub fn new(k_max: usize) -> Self {
        ExplorationOptions {
            k_max,
            eps: 0.1,
            record_steps: false,
            label_cap: 50_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub t: u64,
    pub chi: u32,
    pub chi_hat: u32,
}

/// Per-generation comparison of the graph exploration `Z` and the tree `Ẑ`.
///
/// Index `m` runs over `0..=k_max`; `Z_0 = Ẑ_0 = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupledTrace {
    pub direction: Direction,
    pub z: Vec<u64>,
    pub z_hat: Vec<u64>,
    /// `|Â_m ∩ A_mᶜ|`: tree labels missing from the graph.
    pub deficit_tree_only: Vec<u64>,
    /// `|A_m ∩ Â_mᶜ|`: graph labels missing from the tree.
    pub deficit_graph_only: Vec<u64>,
    pub first_divergence: Option<usize>,
    /// Stubs traversed once generation `m` is complete.
    pub traversed: Vec<u64>,
    /// `ℰ(T)` at the start of traversing generation `m`, when `T` is inside
    /// the validity window.
    pub error_bound: Vec<Option<f64>>,
    pub eps: f64,
    /// First generation during which every stub had been traversed.
    pub exhausted_at: Option<usize>,
    #[serde(skip)]
    pub steps: Vec<StepRecord>,
    pub seed: Seed,
}

impl CoupledTrace {
    /// `Ẑ_m - |Â_m ∩ A_mᶜ| ≤ Z_m ≤ Ẑ_m + |A_m ∩ Â_mᶜ|` for every generation.
    pub fn sandwich_holds(&self) -> bool {
        (0..self.z.len()).all(|m| {
            let lo = self.z_hat[m].saturating_sub(self.deficit_tree_only[m]);
            let hi = self.z_hat[m] + self.deficit_graph_only[m];
            lo <= self.z[m] && self.z[m] <= hi
        })
    }

    /// Both deficits at most `Ẑ_m r` for `m = 1..=k`.
    pub fn deficits_within(&self, k: usize, r: f64) -> bool {
        (1..=k.min(self.z.len() - 1)).all(|m| {
            let cap = self.z_hat[m] as f64 * r;
            self.deficit_tree_only[m] as f64 <= cap && self.deficit_graph_only[m] as f64 <= cap
        })
    }

    /// `Ẑ_m (1 - r) ≤ Z_m ≤ Ẑ_m (1 + r)` for `m = 1..=k`.
    pub fn ratio_within(&self, k: usize, r: f64) -> bool {
        (1..=k.min(self.z.len() - 1)).all(|m| {
            let (z, zh) = (self.z[m] as f64, self.z_hat[m] as f64);
            zh * (1.0 - r) <= z && z <= zh * (1.0 + r)
        })
    }

    /// `m,z,z_hat,deficit_tree_only,deficit_graph_only,error_bound`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["m", "z", "z_hat", "deficit_tree_only", "deficit_graph_only", "error_bound"])?;
        for m in 0..self.z.len() {
            out.serialize((
                m,
                self.z[m],
                self.z_hat[m],
                self.deficit_tree_only[m],
                self.deficit_graph_only[m],
                self.error_bound[m],
            ))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "direction": self.direction,
            "k_max": self.z.len() - 1,
            "first_divergence": self.first_divergence,
            "exhausted_at": self.exhausted_at,
            "eps": self.eps,
            "seed": self.seed,
        })
    }
}

pub fn coupled_exploration(seq: &BiDegreeSequence, law: &GWSpec, direction: Direction, k_max: usize, seed: Seed) -> Result<CoupledTrace> {
    coupled_exploration_with(seq, law, direction, ExplorationOptions::new(k_max), seed)
}

/// Drives the graph exploration and the delayed branching process with one
/// uniform per label, labels taken in lexicographic order (a FIFO per
/// generation, children in index order).
///
/// A label is in the graph tree when its parent is and its index is at most
/// the parent's `χ`, and in the branching tree likewise with `χ̂`; labels in
/// only one of them still carry their own uniform. After the graph runs out
/// of stubs the tree continues alone.
pub fn coupled_exploration_with(seq: &BiDegreeSequence, law: &GWSpec, direction: Direction, opts: ExplorationOptions, seed: Seed) -> Result<CoupledTrace> {
    if opts.k_max == 0 {
        return Err(Error::ParameterOutOfRange("k_max must be at least 1".into()));
    }
    if seq.n() == 0 || seq.total() == 0 {
        return Err(Error::EmptyGraph);
    }
    let (n, nu, mu) = (seq.n(), law.nu, law.mu);
    let mut st = ExplorationState::new(seq, direction);
    let mut rng = seed.rng();
    let mut trace = CoupledTrace {
        direction,
        z: vec![1],
        z_hat: vec![1],
        deficit_tree_only: vec![0],
        deficit_graph_only: vec![0],
        first_divergence: None,
        traversed: vec![0],
        error_bound: vec![error_bound_from(0, 0.0, n, nu, mu, opts.eps).ok()],
        eps: opts.eps,
        exhausted_at: None,
        steps: Vec::new(),
        seed,
    };

    let u: f64 = rng.sample(OpenClosed01);
    let (chi, _) = st.start(u, &mut rng);
    let chi_hat = law.g.quantile(u) as u32;
    let mut generation = Vec::new();
    push_children(&mut generation, true, chi, true, chi_hat);

    for m in 1..=opts.k_max {
        record(&mut trace, &generation, &st, m, n, nu, mu, opts.eps);
        if m == opts.k_max {
            break;
        }
        let mut next = Vec::new();
        for &(in_graph, in_tree) in &generation {
            let u: f64 = rng.sample(OpenClosed01);
            let mut chi = 0;
            if in_graph {
                let t = st.traversed();
                chi = st.traverse(u, &mut rng)?.chi;
                if opts.record_steps {
                    let chi_hat = law.f.quantile(u) as u32;
                    trace.steps.push(StepRecord { t, chi, chi_hat });
                }
                if st.traversed() == st.total() && trace.exhausted_at.is_none() {
                    trace.exhausted_at = Some(m);
                }
            }
            let chi_hat = if in_tree { law.f.quantile(u) as u32 } else { 0 };
            push_children(&mut next, in_graph, chi, in_tree, chi_hat);
            if next.len() > opts.label_cap {
                return Err(Error::PopulationOverflow { cap: opts.label_cap as u64 });
            }
        }
        generation = next;
    }
    Ok(trace)
}

fn push_children(out: &mut Vec<(bool, bool)>, in_graph: bool, chi: u32, in_tree: bool, chi_hat: u32) {
    let a = if in_graph { chi } else { 0 };
    let b = if in_tree { chi_hat } else { 0 };
    out.extend((1..=a.max(b)).map(|c| (c <= a, c <= b)));
}

#[allow(clippy::too_many_arguments)]
fn record(trace: &mut CoupledTrace, generation: &[(bool, bool)], st: &ExplorationState<'_>, m: usize, n: usize, nu: f64, mu: f64, eps: f64) {
    let (mut z, mut zh, mut tree_only, mut graph_only) = (0, 0, 0, 0);
    for &(a, b) in generation {
        z += a as u64;
        zh += b as u64;
        tree_only += (b && !a) as u64;
        graph_only += (a && !b) as u64;
    }
    trace.z.push(z);
    trace.z_hat.push(zh);
    trace.deficit_tree_only.push(tree_only);
    trace.deficit_graph_only.push(graph_only);
    if trace.first_divergence.is_none() && tree_only + graph_only > 0 {
        trace.first_divergence = Some(m);
    }
    trace.traversed.push(st.traversed());
    trace
        .error_bound
        .push(error_bound_from(st.traversed(), st.active_joint_moment(), n, nu, mu, eps).ok());
}
