//! Delayed Galton-Watson processes and their martingale limits.

mod pool;

pub use pool::{population_dynamics, PoolOptions, WPool};

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::degrees::{DiscreteLaw, LimitLaws};
use crate::error::{Error, Result};
use crate::rng::Seed;

/// Which way edges are followed: `Out` explores successors, `In` predecessors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Out,
    In,
}

/// Root law `g` and offspring law `f` of a delayed branching process.
#[derive(Clone, Debug)]
pub struct GWSpec {
    pub g: DiscreteLaw,
    pub f: DiscreteLaw,
    pub nu: f64,
    pub mu: f64,
}

impl GWSpec {
    pub fn new(g: DiscreteLaw, f: DiscreteLaw) -> Self {
        let (nu, mu) = (g.mean(), f.mean());
        GWSpec { g, f, nu, mu }
    }

    /// The process that approximates out- (`g⁺`, `f⁺`) or in-exploration.
    pub fn from_limits(limits: &LimitLaws, dir: Direction) -> Self {
        match dir {
            Direction::Out => Self::new(limits.g_plus.clone(), limits.f_plus.clone()),
            Direction::In => Self::new(limits.g_minus.clone(), limits.f_minus.clone()),
        }
    }
}

/// Generation sizes `Ẑ_0 = 1, Ẑ_1, ...` and the normalized sizes
/// `W_k = Ẑ_k / (ν μ^{k-1})`; `w[0]` is set to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GWPath {
    pub z: Vec<u64>,
    pub w: Vec<f64>,
}

pub const DEFAULT_POPULATION_CAP: u64 = 1_000_000_000;

pub fn simulate_delayed_gw(spec: &GWSpec, generations: usize, seed: Seed) -> Result<GWPath> {
    simulate_delayed_gw_capped(spec, generations, DEFAULT_POPULATION_CAP, seed)
}

pub fn simulate_delayed_gw_capped(spec: &GWSpec, generations: usize, cap: u64, seed: Seed) -> Result<GWPath> {
    if generations == 0 {
        return Err(Error::ParameterOutOfRange("need at least one generation".into()));
    }
    let mut rng = seed.rng();
    let root = spec.g.sampler();
    let offspring = spec.f.sampler();
    let mut z = Vec::with_capacity(generations + 1);
    z.push(1u64);
    let mut current = root.sample(&mut rng);
    for _ in 0..generations {
        if current > cap {
            return Err(Error::PopulationOverflow { cap });
        }
        z.push(current);
        let mut next = 0u64;
        for _ in 0..current {
            next += offspring.sample(&mut rng);
        }
        current = next;
    }
    let w = z
        .iter()
        .enumerate()
        .map(|(k, &zk)| {
            if k == 0 {
                1.0
            } else {
                zk as f64 / (spec.nu * spec.mu.powi(k as i32 - 1))
            }
        })
        .collect();
    Ok(GWPath { z, w })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extinction {
    pub q: f64,
    pub iterations: u64,
    /// Set when every point of [0, 1] is a fixed point (f = δ₁).
    pub degenerate: bool,
}

pub const EXTINCTION_TOL: f64 = 1e-12;
const EXTINCTION_MAX_ITER: u64 = 1_000_000;

/// Smallest fixed point of the pgf of `f` on [0, 1], by iterating from 0.
pub fn extinction_probability(f: &DiscreteLaw, tol: f64) -> Extinction {
    let degenerate = f.pmf(1) == 1.0;
    let mut s = 0.0;
    let mut iterations = 0;
    while iterations < EXTINCTION_MAX_ITER {
        let next = f.pgf(s).min(1.0);
        iterations += 1;
        let done = (next - s).abs() < tol;
        s = next;
        if done {
            break;
        }
    }
    Extinction { q: s, iterations, degenerate }
}

/// `1 - Σ_t g(t) q^t`, the chance the delayed process never dies out.
pub fn survival_probability(g: &DiscreteLaw, q: f64) -> f64 {
    if q >= 1.0 {
        return 0.0;
    }
    (1.0 - g.pgf(q)).clamp(0.0, 1.0)
}

const TILT_NORM_TOL: f64 = 1e-9;

/// The laws of the process conditioned on extinction:
/// `g̃(i) ∝ g(i) q^i` and `f̃(i) = f(i) q^{i-1}`.
///
/// `f̃` sums to `pgf_f(q)/q`, which is 1 only up to the accuracy of `q`; a
/// deficit beyond `1e-9` is an error, smaller ones are normalized away.
pub fn tilted_laws(g: &DiscreteLaw, f: &DiscreteLaw, q: f64) -> Result<(DiscreteLaw, DiscreteLaw)> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::UndefinedTilt(format!("q = {q}: the offspring tilt divides by q")));
    }
    if q == 1.0 {
        return Ok((g.clone(), f.clone()));
    }
    let powers: Vec<f64> = (0..g.support_len().max(f.support_len())).scan(1.0, |acc, _| {
        let cur = *acc;
        *acc *= q;
        Some(cur)
    }).collect();
    let gw: Vec<f64> = g.pmf_slice().iter().zip(&powers).map(|(p, qi)| p * qi).collect();
    let fw: Vec<f64> = f.pmf_slice().iter().zip(&powers).map(|(p, qi)| p * qi / q).collect();
    let g_sum: f64 = gw.iter().sum();
    if g_sum <= 0.0 {
        return Err(Error::UndefinedTilt("the root law puts no mass on extinction".into()));
    }
    let f_sum: f64 = fw.iter().sum();
    if (f_sum - 1.0).abs() > TILT_NORM_TOL {
        return Err(Error::UndefinedTilt(format!("offspring tilt sums to {f_sum}; is q a fixed point?")));
    }
    Ok((DiscreteLaw::from_weights(&gw)?, DiscreteLaw::from_weights(&fw)?))
}
