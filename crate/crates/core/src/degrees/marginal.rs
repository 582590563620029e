//! One-dimensional degree laws used as building blocks for joint laws.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::discrete::{AliasSampler, DiscreteLaw};
use super::quadrature::integrate_to_infinity;
use crate::error::{Error, Result};

/// Truncate infinite supports once the remaining mass drops below this.
pub const TAIL_TOL: f64 = 1e-12;
/// Hard cap on the retained support of heavy-tailed laws.
pub const MAX_SUPPORT: usize = 1 << 20;

/// Largest degree a sampler will emit; larger draws are clamped.
pub const DEGREE_CAP: u64 = 1 << 31;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum MarginalLaw {
    /// Point mass at `value`.
    Dirac { value: u32 },
    Poisson { rate: f64 },
    /// Poisson with a Pareto(shape, scale) random rate.
    PoissonPareto { shape: f64, scale: f64 },
    /// `P(D = t) ∝ t^{-exponent}` on `{1, ..., corpus}`.
    Zipf { exponent: f64, corpus: u32 },
    /// Explicit pmf indexed by value.
    Table { pmf: Vec<f64> },
}

impl MarginalLaw {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidLaw(msg));
        match *self {
            MarginalLaw::Dirac { .. } => Ok(()),
            MarginalLaw::Poisson { rate } if !(rate.is_finite() && rate >= 0.0) => {
                bad(format!("poisson rate {rate} must be finite and nonnegative"))
            }
            MarginalLaw::PoissonPareto { shape, scale } if !(shape > 1.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) => {
                bad(format!("poisson-pareto needs shape > 1 and scale > 0 (got {shape}, {scale})"))
            }
            MarginalLaw::Zipf { exponent, corpus } if !(exponent.is_finite() && corpus >= 1) => {
                bad(format!("zipf needs a finite exponent and corpus >= 1 (got {exponent}, {corpus})"))
            }
            MarginalLaw::Table { ref pmf } => DiscreteLaw::from_pmf(pmf.clone()).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Exact mean.
    pub fn mean(&self) -> f64 {
        match self {
            MarginalLaw::Dirac { value } => *value as f64,
            MarginalLaw::Poisson { rate } => *rate,
            MarginalLaw::PoissonPareto { shape, scale } => shape * scale / (shape - 1.0),
            MarginalLaw::Zipf { exponent, corpus } => zipf_sum(exponent - 1.0, *corpus) / zipf_sum(*exponent, *corpus),
            MarginalLaw::Table { pmf } => pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum(),
        }
    }

    /// Exact `E[D^2]`; infinite for Pareto mixtures with shape <= 2.
    pub fn second_moment(&self) -> f64 {
        match self {
            MarginalLaw::Dirac { value } => (*value as f64).powi(2),
            MarginalLaw::Poisson { rate } => rate * rate + rate,
            MarginalLaw::PoissonPareto { shape, scale } => {
                if *shape <= 2.0 {
                    f64::INFINITY
                } else {
                    shape * scale * scale / (shape - 2.0) + shape * scale / (shape - 1.0)
                }
            }
            MarginalLaw::Zipf { exponent, corpus } => zipf_sum(exponent - 2.0, *corpus) / zipf_sum(*exponent, *corpus),
            MarginalLaw::Table { pmf } => pmf.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum(),
        }
    }

    /// Supremum of `p` with `E[D^p] < ∞`, ignoring any finite corpus.
    pub fn moment_index(&self) -> f64 {
        match self {
            MarginalLaw::PoissonPareto { shape, .. } => *shape,
            MarginalLaw::Zipf { exponent, .. } => exponent - 1.0,
            _ => f64::INFINITY,
        }
    }

    /// The pmf, truncated at `TAIL_TOL` (or `MAX_SUPPORT`) for infinite supports.
    pub fn to_law(&self) -> Result<DiscreteLaw> {
        self.validate()?;
        match self {
            MarginalLaw::Dirac { value } => Ok(DiscreteLaw::point(*value as usize)),
            MarginalLaw::Poisson { rate } => poisson_law(*rate),
            MarginalLaw::PoissonPareto { shape, scale } => Ok(poisson_pareto_law(*shape, *scale)),
            MarginalLaw::Zipf { exponent, corpus } => {
                let w: Vec<f64> = (0..=*corpus as usize)
                    .map(|t| if t == 0 { 0.0 } else { (t as f64).powf(-exponent) })
                    .collect();
                DiscreteLaw::from_weights(&w)
            }
            MarginalLaw::Table { pmf } => DiscreteLaw::from_pmf(pmf.clone()),
        }
    }

    /// The law of `D` under size-biasing by `D` itself: `t g(t) / E[D]`.
    pub fn size_biased(&self) -> Result<DiscreteLaw> {
        let m = self.mean();
        if m <= 0.0 {
            return Err(Error::DegenerateLaw("size-biasing a law with zero mean".into()));
        }
        match self {
            MarginalLaw::Zipf { exponent, corpus } => MarginalLaw::Zipf {
                exponent: exponent - 1.0,
                corpus: *corpus,
            }
            .to_law(),
            MarginalLaw::PoissonPareto { .. } if !self.second_moment().is_finite() => Err(Error::InvalidLaw(
                "size-biased poisson-pareto law has infinite mean".into(),
            )),
            _ => {
                let base = self.to_law()?;
                let w: Vec<f64> = base.pmf_slice().iter().enumerate().map(|(k, p)| k as f64 * p).collect();
                DiscreteLaw::from_weights(&w)
            }
        }
    }

    pub fn sampler(&self) -> Result<MarginalSampler> {
        self.validate()?;
        Ok(match *self {
            MarginalLaw::Dirac { value } => MarginalSampler::Point(value as u64),
            MarginalLaw::Poisson { rate } if rate == 0.0 => MarginalSampler::Point(0),
            MarginalLaw::Poisson { rate } => MarginalSampler::Poisson(Poisson::new(rate).map_err(|e| Error::InvalidLaw(e.to_string()))?),
            MarginalLaw::PoissonPareto { shape, scale } => MarginalSampler::PoissonPareto { shape, scale },
            _ => MarginalSampler::Alias(self.to_law()?.sampler()),
        })
    }
}

/// `sum_{t=1}^{corpus} t^{-s}`.
fn zipf_sum(s: f64, corpus: u32) -> f64 {
    (1..=corpus).map(|t| (t as f64).powf(-s)).sum()
}

fn poisson_law(rate: f64) -> Result<DiscreteLaw> {
    if rate == 0.0 {
        return Ok(DiscreteLaw::point(0));
    }
    // Multiplying up from p(0) underflows for large rates; start at the mode
    // in log space and walk outward instead.
    let mode = rate.floor() as usize;
    let ln_mode = mode as f64 * rate.ln() - rate - ln_factorial(mode);
    let mut below = vec![ln_mode.exp()];
    for k in (1..=mode).rev() {
        let prev = *below.last().unwrap();
        below.push(prev * k as f64 / rate);
    }
    below.reverse();
    let mut pmf = below;
    let mut mass: f64 = pmf.iter().sum();
    let mut k = mode;
    while 1.0 - mass >= TAIL_TOL && pmf.len() < MAX_SUPPORT {
        k += 1;
        let next = pmf[k - 1] * rate / k as f64;
        pmf.push(next);
        mass += next;
        if next == 0.0 {
            break;
        }
    }
    let tail = (1.0 - mass).max(0.0);
    let retained: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    DiscreteLaw::with_tail(pmf, tail, (rate - retained).max(0.0))
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// pmf of the Poisson mixture with Pareto(shape a, scale s) rate.
///
/// `p_k = a s^a Γ(k - a, s) / k!`; with `I_k = Γ(k - a, s) / k!` the upper
/// incomplete gamma recurrence gives `I_k = (k-1-a)/k I_{k-1} + s^{k-1-a} e^{-s} / k!`,
/// and `I_0 = ∫_s^∞ x^{-a-1} e^{-x} dx` is done by quadrature.
pub fn poisson_pareto_law(shape: f64, scale: f64) -> DiscreteLaw {
    let a = shape;
    let s = scale;
    let c = a * s.powf(a);
    let mut i_k = integrate_to_infinity(|x| x.powf(-a - 1.0) * (-x).exp(), s, 1e-15);
    let mut t_k = s.powf(-a) * (-s).exp();
    let mut pmf = vec![c * i_k];
    let mut mass = pmf[0];
    let mut first = 0.0;
    let mut k = 0usize;
    while 1.0 - mass >= TAIL_TOL && pmf.len() < MAX_SUPPORT {
        k += 1;
        if k > 1 {
            t_k *= s / k as f64;
        }
        i_k = (k as f64 - 1.0 - a) / k as f64 * i_k + t_k;
        let p = c * i_k;
        pmf.push(p);
        mass += p;
        first += k as f64 * p;
    }
    let mean = a * s / (a - 1.0);
    DiscreteLaw::with_tail(pmf, (1.0 - mass).max(0.0), (mean - first).max(0.0))
        .expect("poisson-pareto recurrence yields a valid pmf")
}

/// Draws degrees from a [`MarginalLaw`].
#[derive(Clone, Debug)]
pub enum MarginalSampler {
    Point(u64),
    Poisson(Poisson<f64>),
    PoissonPareto { shape: f64, scale: f64 },
    Alias(AliasSampler),
}

impl Distribution<u64> for MarginalSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let v = match self {
            MarginalSampler::Point(v) => *v,
            MarginalSampler::Poisson(p) => p.sample(rng) as u64,
            MarginalSampler::PoissonPareto { shape, scale } => {
                // inverse CDF of the Pareto rate; 1 - U lies in (0, 1]
                let u: f64 = 1.0 - rng.random::<f64>();
                let rate = scale * u.powf(-1.0 / shape);
                if rate > DEGREE_CAP as f64 {
                    DEGREE_CAP
                } else {
                    Poisson::new(rate).expect("positive rate").sample(rng) as u64
                }
            }
            MarginalSampler::Alias(a) => a.sample(rng),
        };
        v.min(DEGREE_CAP)
    }
}
