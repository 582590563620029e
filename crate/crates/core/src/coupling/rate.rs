//! How often the coupling leaves its guaranteed regime.

use serde::{Deserialize, Serialize};

use super::trace::{coupled_exploration_with, ExplorationOptions};
use crate::branching::{Direction, GWSpec};
use crate::degrees::{sample_iid_bidegree, IidParams, JointDegreeLaw};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rng::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub n: usize,
    /// Window exponent: `k ≤ (1 - δ) log_μ n`.
    pub delta: f64,
    /// Tolerance exponent: deficits compared with `Ẑ_m n^{-γ}`.
    pub gamma: f64,
    pub k: usize,
    pub reps: usize,
    pub eps: f64,
    /// Defaults to the law's own κ.
    pub kappa: Option<f64>,
}

impl CouplingConfig {
    /// Largest admissible `k` for `n`, `δ` and the law's `μ`.
    pub fn max_k(n: usize, delta: f64, mu: f64) -> usize {
        ((1.0 - delta) * (n as f64).ln() / mu.ln() + 1e-9).floor().max(0.0) as usize
    }

    pub fn validate(&self, law: &JointDegreeLaw) -> Result<f64> {
        law.validate()?;
        let mu = law.mu();
        if !(mu > 1.0) {
            return Err(Error::ParameterOutOfRange(format!("μ = {mu}: the coupling needs a supercritical law")));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("δ = {} outside (0, 1)", self.delta)));
        }
        let kappa = self.kappa.unwrap_or_else(|| law.default_kappa());
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::ParameterOutOfRange(format!("κ = {kappa} outside (0, 1]")));
        }
        let gamma_max = (self.delta * kappa).min(self.eps);
        if !(self.gamma > 0.0 && self.gamma < gamma_max) {
            return Err(Error::ParameterOutOfRange(format!("γ = {} outside (0, min(δκ, ε)) = (0, {gamma_max})", self.gamma)));
        }
        let k_max = Self::max_k(self.n, self.delta, mu);
        if self.k == 0 || self.k > k_max {
            return Err(Error::ParameterOutOfRange(format!("k = {} outside 1..={k_max} = (1 - δ) log_μ n", self.k)));
        }
        Ok(kappa)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRates {
    /// Some `m ≤ k` with a deficit above `Ẑ_m n^{-γ}`, in either direction.
    pub freq_any_deficit_exceeds: f64,
    /// Some `m ≤ k` with `Z_m` outside `Ẑ_m (1 ± n^{-γ})`, in either direction.
    pub freq_ratio_bound_fails: f64,
    pub reps: usize,
}

/// Fresh degree sequences and couplings in both directions, `reps` times.
/// `Ok(None)` when `reps = 0`.
pub fn coupling_failure_rate(law: &JointDegreeLaw, cfg: &CouplingConfig, seed: Seed, exec: Execution) -> Result<Option<FailureRates>> {
    let kappa = cfg.validate(law)?;
    if cfg.reps == 0 {
        return Ok(None);
    }
    let limits = law.limit_laws()?;
    let specs = [
        (Direction::Out, GWSpec::from_limits(&limits, Direction::Out)),
        (Direction::In, GWSpec::from_limits(&limits, Direction::In)),
    ];
    let params = IidParams::new(cfg.n, JointDegreeLaw::default_delta(kappa));
    let r = (cfg.n as f64).powf(-cfg.gamma);
    let mut opts = ExplorationOptions::new(cfg.k);
    opts.eps = cfg.eps;
    let outcomes = exec.map_range(cfg.reps, |rep| -> Result<(bool, bool)> {
        let s = seed.derive(rep as u64);
        let seq = sample_iid_bidegree(law, params, s.derive(0))?;
        let (mut deficit_fail, mut ratio_fail) = (false, false);
        for (i, (dir, spec)) in specs.iter().enumerate() {
            let tr = coupled_exploration_with(&seq, spec, *dir, opts, s.derive(1 + i as u64))?;
            deficit_fail |= !tr.deficits_within(cfg.k, r);
            ratio_fail |= !tr.ratio_within(cfg.k, r);
        }
        Ok((deficit_fail, ratio_fail))
    });
    let (mut d, mut q) = (0usize, 0usize);
    for o in outcomes {
        let (a, b) = o?;
        d += a as usize;
        q += b as usize;
    }
    let reps = cfg.reps as f64;
    Ok(Some(FailureRates {
        freq_any_deficit_exceeds: d as f64 / reps,
        freq_ratio_bound_fails: q as f64 / reps,
        reps: cfg.reps,
    }))
}
