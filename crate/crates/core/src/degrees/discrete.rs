//! Probability mass functions on the nonnegative integers.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A pmf on `{0, 1, 2, ...}` stored up to a cutoff.
///
/// Infinite-support laws are truncated: mass at values `>= support_len()` is
/// not renormalized away but kept as `tail_mass`, together with its first
/// moment `tail_moment`. For CDF evaluation, quantiles and distances the tail
/// is treated as an atom at `support_len()`; [`DiscreteLaw::tail_excess`]
/// is the transport cost of that lumping.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLaw {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
    retained_mean: f64,
    tail_mass: f64,
    tail_moment: f64,
}

const MASS_TOL: f64 = 1e-9;

impl DiscreteLaw {
    /// A finitely supported pmf. Must sum to one within `1e-9`.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        Self::with_tail(pmf, 0.0, 0.0)
    }

    /// A truncated pmf whose missing mass and first moment are known.
    pub fn with_tail(mut pmf: Vec<f64>, tail_mass: f64, tail_moment: f64) -> Result<Self> {
        if let Some(k) = pmf.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidLaw(format!("pmf({k}) = {} is not a probability", pmf[k])));
        }
        if !(tail_mass >= 0.0 && tail_moment >= 0.0) {
            return Err(Error::InvalidLaw("negative tail mass or moment".into()));
        }
        while pmf.len() > 1 && *pmf.last().unwrap() == 0.0 && tail_mass == 0.0 {
            pmf.pop();
        }
        if pmf.is_empty() {
            return Err(Error::InvalidLaw("empty pmf".into()));
        }
        let total: f64 = pmf.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidLaw(format!("total mass {total} differs from 1")));
        }
        Ok(Self::build(pmf, tail_mass, tail_moment))
    }

    fn build(pmf: Vec<f64>, tail_mass: f64, tail_moment: f64) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc.min(1.0)
            })
            .collect();
        if tail_mass == 0.0 {
            // finite support: the last atom closes the CDF exactly
            *cdf.last_mut().unwrap() = 1.0;
        }
        let retained_mean = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        DiscreteLaw {
            pmf,
            cdf,
            retained_mean,
            tail_mass,
            tail_moment,
        }
    }

    /// Normalizes nonnegative weights (at least one positive).
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidLaw("weights must have a positive finite sum".into()));
        }
        Self::from_pmf(weights.iter().map(|w| w / total).collect())
    }

    /// Empirical law from integer counts indexed by value.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidLaw("all counts are zero".into()));
        }
        let t = total as f64;
        Self::from_pmf(counts.iter().map(|&c| c as f64 / t).collect())
    }

    pub fn point(value: usize) -> Self {
        let mut pmf = vec![0.0; value + 1];
        pmf[value] = 1.0;
        Self::build(pmf, 0.0, 0.0)
    }

    /// Number of retained atoms; the tail (if any) starts here.
    pub fn support_len(&self) -> usize {
        self.pmf.len()
    }

    pub fn pmf(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn pmf_slice(&self) -> &[f64] {
        &self.pmf
    }

    /// CDF with the tail lumped at `support_len()`.
    pub fn cdf(&self, k: usize) -> f64 {
        self.cdf.get(k).copied().unwrap_or(1.0)
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn tail_moment(&self) -> f64 {
        self.tail_moment
    }

    /// `E[(D - K)^+]` for `K = support_len()`: the d1 cost of lumping the tail.
    pub fn tail_excess(&self) -> f64 {
        (self.tail_moment - self.support_len() as f64 * self.tail_mass).max(0.0)
    }

    /// Mean over the retained support only.
    pub fn retained_mean(&self) -> f64 {
        self.retained_mean
    }

    /// Full mean, including the recorded tail moment.
    pub fn mean(&self) -> f64 {
        self.retained_mean + self.tail_moment
    }

    /// `sum_k pmf(k) k^p` over the retained support.
    pub fn retained_moment(&self, p: f64) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, q)| q * (k as f64).powf(p))
            .sum()
    }

    /// Pseudo-inverse `inf{k : F(k) >= u}` of the (tail-lumped) CDF.
    pub fn quantile(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c < u)
    }

    /// Probability generating function; the tail contributes `tail_mass * s^K`.
    pub fn pgf(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for p in self.pmf.iter().rev() {
            acc = acc * s + p;
        }
        acc + self.tail_mass * s.powi(self.support_len() as i32)
    }

    /// Derivative of the pgf over the retained support.
    pub fn pgf_derivative(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, p) in self.pmf.iter().enumerate().skip(1).rev() {
            acc = acc * s + k as f64 * p;
        }
        acc
    }

    /// Alias-table sampler. The tail, if any, becomes one atom placed at its
    /// conditional mean so the sampled law keeps the full mean.
    pub fn sampler(&self) -> AliasSampler {
        let mut weights = self.pmf.clone();
        let k = self.support_len() as u64;
        let mut tail_value = k;
        if self.tail_mass > 0.0 {
            weights.push(self.tail_mass);
            tail_value = ((self.tail_moment / self.tail_mass).round() as u64).max(k);
        }
        AliasSampler {
            alias: WeightedAliasIndex::new(weights).expect("pmf has positive mass"),
            tail_index: k,
            tail_value,
        }
    }
}

/// O(1) sampling from a [`DiscreteLaw`].
#[derive(Clone, Debug)]
pub struct AliasSampler {
    alias: WeightedAliasIndex<f64>,
    tail_index: u64,
    tail_value: u64,
}

impl Distribution<u64> for AliasSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let i = self.alias.sample(rng) as u64;
        if i == self.tail_index {
            self.tail_value
        } else {
            i
        }
    }
}

/// A Kantorovich-Rubinstein distance together with its truncation error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct W1 {
    pub value: f64,
    pub error_bound: f64,
}

impl W1 {
    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }
}

/// `d1(p, q) = sum_k |F_p(k) - F_q(k)|` for laws on the integers.
///
/// Exact for finitely supported laws. For truncated laws the tail is lumped
/// and `error_bound` is the sum of both tails' lumping costs.
pub fn wasserstein1(p: &DiscreteLaw, q: &DiscreteLaw) -> W1 {
    let len = p.support_len().max(q.support_len());
    let value = (0..len).map(|k| (p.cdf(k) - q.cdf(k)).abs()).sum();
    W1 {
        value,
        error_bound: p.tail_excess() + q.tail_excess(),
    }
}
