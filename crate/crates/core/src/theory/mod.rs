//! The limiting hopcount law, the connectivity probability and
//! Kolmogorov-Smirnov comparison against measured histograms.

mod exact;

pub use exact::{exact_tail_smalln, survival_product_p, TailEstimate};

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::branching::{extinction_probability, population_dynamics, survival_probability, Direction, GWSpec, PoolOptions, WPool, EXTINCTION_TOL};
use crate::degrees::{JointDegreeLaw, LimitLaws};
use crate::error::{Error, Result};
use crate::hopcount::HopcountHistogram;
use crate::par::{chunked_sum, Execution};
use crate::rng::Seed;

/// Half-width of the comparison lattice around `⌊log_μ n⌋`.
pub const LATTICE_HALF_WIDTH: i64 = 40;

/// `⌊log_μ n⌋`, guarded against rounding at exact powers.
///
/// When the floating logarithm is within `1e-9` of an integer `r`, the answer
/// is decided by comparing `μ^r` with `n` directly (in integers when `μ` is an
/// integer).
pub fn floor_log(mu: f64, n: u64) -> i64 {
    assert!(mu > 1.0 && n >= 1, "floor_log needs mu > 1 and n >= 1");
    let l = (n as f64).ln() / mu.ln();
    let r = l.round();
    if (l - r).abs() >= 1e-9 {
        return l.floor() as i64;
    }
    let r = r as i64;
    let fits = if mu.fract() == 0.0 && mu < 4_294_967_296.0 && r >= 0 {
        match (mu as u128).checked_pow(r as u32) {
            Some(p) => p <= n as u128,
            None => false,
        }
    } else {
        mu.powi(r as i32) <= n as f64
    };
    if fits {
        r
    } else {
        r - 1
    }
}

/// Limit law of `H_n - ⌊log_μ n⌋` conditioned on `H_n < ∞`.
#[derive(Clone, Debug)]
pub struct TheoreticalHopcountLaw {
    pub n: u64,
    pub nu: f64,
    pub mu: f64,
    pub floor_log: i64,
    pub w_plus: WPool,
    pub w_minus: WPool,
    /// `W⁺_i W⁻_i` over the indices where both factors are positive.
    pub conditioned_products: Vec<f64>,
}

impl TheoreticalHopcountLaw {
    /// Pairs the two (independent) pools index by index.
    pub fn new(n: u64, nu: f64, mu: f64, w_plus: WPool, w_minus: WPool) -> Result<Self> {
        if !(mu > 1.0) {
            return Err(Error::ParameterOutOfRange(format!("μ = {mu}: the hopcount law needs μ > 1")));
        }
        if n < 2 {
            return Err(Error::ParameterOutOfRange("n must be at least 2".into()));
        }
        let conditioned_products = w_plus
            .samples
            .iter()
            .zip(&w_minus.samples)
            .map(|(a, b)| a * b)
            .filter(|&p| p > 0.0)
            .collect();
        Ok(TheoreticalHopcountLaw {
            n,
            nu,
            mu,
            floor_log: floor_log(mu, n),
            w_plus,
            w_minus,
            conditioned_products,
        })
    }

    /// Builds both pools by population dynamics (constant pools for d-regular
    /// laws, where `W ≡ 1`).
    pub fn for_law(law: &JointDegreeLaw, n: u64, opts: PoolOptions, seed: Seed, exec: Execution) -> Result<Self> {
        let limits = law.limit_laws()?;
        let (w_plus, w_minus) = match law {
            JointDegreeLaw::DRegular { .. } => (WPool::constant(1.0, opts.pool_size), WPool::constant(1.0, opts.pool_size)),
            _ => (
                population_dynamics(&GWSpec::from_limits(&limits, Direction::Out), opts, seed.derive(0), exec),
                population_dynamics(&GWSpec::from_limits(&limits, Direction::In), opts, seed.derive(1), exec),
            ),
        };
        Self::new(n, limits.nu, limits.mu, w_plus, w_minus)
    }

    /// `ν μ^{⌊log_μ n⌋ + j} / ((μ - 1) n)` for an integer offset `j`.
    fn rate(&self, j: i64) -> f64 {
        let e = self.floor_log + j;
        let scale = if e.unsigned_abs() < 1000 {
            self.mu.powi(e as i32)
        } else {
            (e as f64 * self.mu.ln()).exp()
        };
        self.nu / (self.mu - 1.0) * scale / self.n as f64
    }

    fn cdf_over(products: &[f64], rate: f64, exec: Execution) -> f64 {
        let m = products.len();
        chunked_sum(exec, m, 8192, |i| -(-rate * products[i]).exp_m1()) / m as f64
    }

    /// `P(H_n - ⌊log_μ n⌋ ≤ x | H_n < ∞)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.cdf_with(x, Execution::Sequential)
    }

    pub fn cdf_with(&self, x: f64, exec: Execution) -> Result<f64> {
        if self.conditioned_products.is_empty() {
            return Err(Error::NoSurvivingMass);
        }
        if x.is_nan() {
            return Err(Error::ParameterOutOfRange("x is NaN".into()));
        }
        if x == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        if x == f64::INFINITY {
            return Ok(1.0);
        }
        Ok(Self::cdf_over(&self.conditioned_products, self.rate(x.floor() as i64), exec))
    }

    /// `P(H_n ≤ t | H_n < ∞)` for an integer hopcount `t`.
    pub fn hopcount_cdf(&self, t: i64, exec: Execution) -> Result<f64> {
        self.cdf_with((t - self.floor_log) as f64, exec)
    }

    /// Percentile bootstrap interval for the CDF at each lattice offset,
    /// resampling the conditioned products.
    pub fn bootstrap_cdf(&self, offsets: &[i64], reps: usize, level: f64, seed: Seed, exec: Execution) -> Result<Vec<(f64, f64)>> {
        if self.conditioned_products.is_empty() {
            return Err(Error::NoSurvivingMass);
        }
        let curves = self.bootstrap_curves(offsets, reps, seed, exec);
        Ok((0..offsets.len())
            .map(|j| percentile_interval(curves.iter().map(|c| c[j]).collect(), level))
            .collect())
    }

    fn bootstrap_curves(&self, offsets: &[i64], reps: usize, seed: Seed, exec: Execution) -> Vec<Vec<f64>> {
        let m = self.conditioned_products.len();
        let rates: Vec<f64> = offsets.iter().map(|&j| self.rate(j)).collect();
        exec.map_range(reps, |r| {
            let mut rng = seed.derive(r as u64).rng();
            let sample: Vec<f64> = (0..m).map(|_| self.conditioned_products[rng.random_range(0..m)]).collect();
            rates.iter().map(|&rate| Self::cdf_over(&sample, rate, Execution::Sequential)).collect()
        })
    }
}

fn percentile_interval(mut v: Vec<f64>, level: f64) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    v.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let at = |q: f64| v[((q * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
    (at(alpha), at(1.0 - alpha))
}

/// Convenience wrapper for [`TheoreticalHopcountLaw::cdf`].
pub fn theoretical_cdf(law: &TheoreticalHopcountLaw, x: f64) -> Result<f64> {
    law.cdf(x)
}

/// `1 - exp(-d^{⌊log_d n⌋ + ⌊x⌋ + 1} / ((d - 1) n))`, the d-regular limit
/// where `W⁺ = W⁻ = 1`.
pub fn dregular_cdf(d: u32, n: u64, x: f64) -> f64 {
    assert!(d >= 2, "d-regular closed form needs d >= 2");
    let e = floor_log(d as f64, n) + x.floor() as i64 + 1;
    let rate = (d as f64).powi(e as i32) / ((d as f64 - 1.0) * n as f64);
    -(-rate).exp_m1()
}

/// Limit of `P(H_n < ∞)`.
pub fn prob_finite(s_plus: f64, s_minus: f64) -> f64 {
    s_plus * s_minus
}

/// `(s⁺, s⁻)`: survival probabilities of the out- and in-exploration limits.
pub fn survival_pair(limits: &LimitLaws) -> (f64, f64) {
    let s = |g, f| survival_probability(g, extinction_probability(f, EXTINCTION_TOL).q);
    (s(&limits.g_plus, &limits.f_plus), s(&limits.g_minus, &limits.f_minus))
}

/// Hopcounts `⌊log_μ n⌋ - 40 ..= ⌊log_μ n⌋ + 40`.
pub fn comparison_lattice(floor_log: i64) -> impl Iterator<Item = i64> {
    floor_log - LATTICE_HALF_WIDTH..=floor_log + LATTICE_HALF_WIDTH
}

fn ks_with_curve(empirical: &HopcountHistogram, law: &TheoreticalHopcountLaw, curve: &[f64]) -> (f64, i64) {
    comparison_lattice(law.floor_log)
        .zip(curve)
        .map(|(t, &c)| ((empirical.cdf(t) - c).abs(), t))
        .fold((0.0, law.floor_log), |best, cur| if cur.0 > best.0 { cur } else { best })
}

fn lattice_curve(law: &TheoreticalHopcountLaw, exec: Execution) -> Vec<f64> {
    (-LATTICE_HALF_WIDTH..=LATTICE_HALF_WIDTH)
        .map(|j| TheoreticalHopcountLaw::cdf_over(&law.conditioned_products, law.rate(j), exec))
        .collect()
}

/// Largest CDF gap over the integer lattice, both sides conditioned on
/// finite distances.
pub fn ks_distance(empirical: &HopcountHistogram, law: &TheoreticalHopcountLaw) -> Result<f64> {
    if empirical.finite_pairs <= 0.0 {
        return Err(Error::EmptyEmpirical);
    }
    if law.conditioned_products.is_empty() {
        return Err(Error::NoSurvivingMass);
    }
    Ok(ks_with_curve(empirical, law, &lattice_curve(law, Execution::Parallel)).0)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub t: i64,
    pub empirical_pmf: f64,
    pub theoretical_pmf: f64,
}

/// Everything needed to redraw one comparison panel.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub ks: f64,
    /// Percentile bootstrap interval of the KS distance over the theory's
    /// Monte-Carlo error (degenerate when the pools are constant).
    pub ks_ci: (f64, f64),
    pub ks_at: i64,
    pub n: u64,
    pub nu: f64,
    pub mu: f64,
    pub floor_log: i64,
    pub finite_fraction: f64,
    pub w_plus_pool: usize,
    pub w_minus_pool: usize,
    pub conditioned_products: usize,
    pub w_plus_seed: u64,
    pub w_minus_seed: u64,
    #[serde(skip)]
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    /// `t,empirical_pmf,theoretical_pmf`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain struct serializes")
    }
}

pub fn compare(empirical: &HopcountHistogram, law: &TheoreticalHopcountLaw, bootstrap_reps: usize, seed: Seed, exec: Execution) -> Result<ComparisonReport> {
    if empirical.finite_pairs <= 0.0 {
        return Err(Error::EmptyEmpirical);
    }
    if law.conditioned_products.is_empty() {
        return Err(Error::NoSurvivingMass);
    }
    let curve = lattice_curve(law, exec);
    let (ks, ks_at) = ks_with_curve(empirical, law, &curve);
    let offsets: Vec<i64> = (-LATTICE_HALF_WIDTH..=LATTICE_HALF_WIDTH).collect();
    let boot: Vec<f64> = law
        .bootstrap_curves(&offsets, bootstrap_reps, seed, exec)
        .iter()
        .map(|c| ks_with_curve(empirical, law, c).0)
        .collect();
    let ks_ci = if boot.is_empty() { (ks, ks) } else { percentile_interval(boot, 0.95) };
    let rows = comparison_lattice(law.floor_log)
        .enumerate()
        .filter(|&(_, t)| t >= 0)
        .map(|(j, t)| ComparisonRow {
            t,
            empirical_pmf: empirical.cdf(t) - empirical.cdf(t - 1),
            theoretical_pmf: curve[j] - if j > 0 { curve[j - 1] } else { 0.0 },
        })
        .collect();
    Ok(ComparisonReport {
        ks,
        ks_ci,
        ks_at,
        n: law.n,
        nu: law.nu,
        mu: law.mu,
        floor_log: law.floor_log,
        finite_fraction: empirical.finite_fraction(),
        w_plus_pool: law.w_plus.pool_size,
        w_minus_pool: law.w_minus.pool_size,
        conditioned_products: law.conditioned_products.len(),
        w_plus_seed: law.w_plus.seed.0,
        w_minus_seed: law.w_minus.seed.0,
        rows,
    })
}
