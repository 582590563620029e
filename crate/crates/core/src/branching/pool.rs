//! Population dynamics for the martingale limit `W`.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::GWSpec;
use crate::degrees::AliasSampler;
use crate::error::Result;
use crate::par::Execution;
use crate::rng::Seed;

const CHUNK: usize = 1 << 14;
/// Positive samples below this are counted as truncation artefacts.
pub const NEAR_ZERO: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolOptions {
    pub pool_size: usize,
    pub generations: usize,
}

impl Default for PoolOptions {
    fn default() -> Self {
        PoolOptions {
            pool_size: 100_000,
            generations: 30,
        }
    }
}

/// Approximate draws of `W = lim Ẑ_k / (ν μ^{k-1})`, exact zeros for extinction.
#[derive(Clone, Debug, PartialEq)]
pub struct WPool {
    pub samples: Vec<f64>,
    pub zero_fraction: f64,
    pub generations: usize,
    pub pool_size: usize,
    pub seed: Seed,
}

#[derive(Debug, Serialize, Deserialize)]
struct PoolSidecar {
    pool_size: usize,
    generations: usize,
    seed: Seed,
    zero_fraction: f64,
    mean: f64,
    truncation_bias: f64,
}

impl WPool {
    fn from_samples(samples: Vec<f64>, generations: usize, seed: Seed) -> Self {
        let zeros = samples.iter().filter(|&&w| w == 0.0).count();
        let pool_size = samples.len();
        WPool {
            zero_fraction: zeros as f64 / pool_size.max(1) as f64,
            samples,
            generations,
            pool_size,
            seed,
        }
    }

    /// A pool whose every sample equals `value`.
    pub fn constant(value: f64, pool_size: usize) -> Self {
        Self::from_samples(vec![value; pool_size], 0, Seed(0))
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.pool_size.max(1) as f64
    }

    /// Standard error of [`WPool::mean`].
    pub fn std_error(&self) -> f64 {
        let m = self.mean();
        let n = self.pool_size as f64;
        let var = self.samples.iter().map(|w| (w - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }

    /// The samples conditioned on `W > 0`.
    pub fn positive(&self) -> Vec<f64> {
        self.samples.iter().copied().filter(|&w| w > 0.0).collect()
    }

    /// Fraction of samples in `(0, 1e-6)`: lineages that a deeper recursion
    /// would likely have sent to zero.
    pub fn truncation_bias(&self) -> f64 {
        let near = self.samples.iter().filter(|&&w| w > 0.0 && w < NEAR_ZERO).count();
        near as f64 / self.pool_size.max(1) as f64
    }

    /// One sample per line under a `w` header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["w"])?;
        for s in &self.samples {
            out.serialize(s)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::to_value(PoolSidecar {
            pool_size: self.pool_size,
            generations: self.generations,
            seed: self.seed,
            zero_fraction: self.zero_fraction,
            mean: self.mean(),
            truncation_bias: self.truncation_bias(),
        })
        .expect("plain struct serializes")
    }

    /// Writes `<stem>.csv` and `<stem>.json` next to each other.
    pub fn save(&self, stem: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(stem.with_extension("csv"))?)?;
        let json = serde_json::to_string_pretty(&self.sidecar_json())?;
        std::fs::write(stem.with_extension("json"), json)?;
        Ok(())
    }
}

/// Bootstraps the fixed point `𝒲 = Σ_{i=1}^{N_f} 𝒲_i / μ` from a pool of
/// ones for `generations` rounds, then applies the delayed root step
/// `W = Σ_{i=1}^{N_g} 𝒲_i / ν`.
///
/// Each round reads the previous pool only; chunk `c` of round `r` draws from
/// its own stream derived from `(r, c)`, so the result does not depend on
/// the execution mode.
pub fn population_dynamics(spec: &GWSpec, opts: PoolOptions, seed: Seed, exec: Execution) -> WPool {
    let size = opts.pool_size;
    let offspring = spec.f.sampler();
    let root = spec.g.sampler();
    let mut old = vec![1.0f64; size];
    let mut new = vec![0.0f64; size];
    let step = |old: &[f64], new: &mut [f64], round: usize, law: &AliasSampler, scale: f64| {
        exec.for_each_chunk_mut(new, CHUNK, |c, out| {
            let mut rng = seed.derive2(round as u64, c as u64).rng();
            for slot in out.iter_mut() {
                let k = law.sample(&mut rng);
                let mut acc = 0.0;
                for _ in 0..k {
                    acc += old[rng.random_range(0..size)];
                }
                *slot = acc / scale;
            }
        });
    };
    if size > 0 {
        for round in 0..opts.generations {
            step(&old, &mut new, round, &offspring, spec.mu);
            std::mem::swap(&mut old, &mut new);
        }
        step(&old, &mut new, opts.generations, &root, spec.nu);
    }
    WPool::from_samples(new, opts.generations, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::DiscreteLaw;

    #[test]
    fn dregular_pool_is_all_ones() {
        let spec = GWSpec::new(DiscreteLaw::point(3), DiscreteLaw::point(3));
        let pool = population_dynamics(&spec, PoolOptions { pool_size: 1000, generations: 10 }, Seed(2), Execution::Parallel);
        assert!(pool.samples.iter().all(|&w| w == 1.0));
        assert_eq!(pool.zero_fraction, 0.0);
    }

    #[test]
    fn modes_are_bit_identical() {
        let f = DiscreteLaw::from_pmf(vec![0.2, 0.2, 0.3, 0.3]).unwrap();
        let spec = GWSpec::new(f.clone(), f);
        let opts = PoolOptions { pool_size: 40_000, generations: 8 };
        let a = population_dynamics(&spec, opts, Seed(11), Execution::Sequential);
        let b = population_dynamics(&spec, opts, Seed(11), Execution::Parallel);
        assert_eq!(a, b);
        assert!(a.zero_fraction > 0.0);
    }

    #[test]
    fn csv_has_one_line_per_sample() {
        let p = WPool::constant(1.0, 3);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "w\n1.0\n1.0\n1.0\n");
        assert_eq!(p.sidecar_json()["pool_size"], 3);
    }
}
