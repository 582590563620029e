//! Empirical and size-biased degree distributions of a sequence.

use super::discrete::DiscreteLaw;
use super::sequence::BiDegreeSequence;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct EmpiricalDegreeDistributions {
    pub g_plus: DiscreteLaw,
    pub g_minus: DiscreteLaw,
    /// `f_n⁺(t) = (1/L_n) Σ_r 1(D⁺_r = t) D⁻_r`
    pub f_plus: DiscreteLaw,
    pub f_minus: DiscreteLaw,
    /// `L_n / n`
    pub nu_n: f64,
    /// `(1/L_n) Σ_r D⁻_r D⁺_r`
    pub mu_n: f64,
}

pub fn empirical_distributions(seq: &BiDegreeSequence) -> Result<EmpiricalDegreeDistributions> {
    let total = seq.total();
    if total == 0 {
        return Err(Error::EmptyGraph);
    }
    let (dm, dp) = (seq.d_minus(), seq.d_plus());
    let mut count_plus = vec![0u64; seq.max_out() as usize + 1];
    let mut count_minus = vec![0u64; seq.max_in() as usize + 1];
    let mut weight_plus = vec![0u64; count_plus.len()];
    let mut weight_minus = vec![0u64; count_minus.len()];
    let mut cross: u128 = 0;
    for (&a, &b) in dm.iter().zip(dp) {
        count_plus[b as usize] += 1;
        count_minus[a as usize] += 1;
        weight_plus[b as usize] += a as u64;
        weight_minus[a as usize] += b as u64;
        cross += a as u128 * b as u128;
    }
    let f_plus = law_or_point_zero(&weight_plus)?;
    let f_minus = law_or_point_zero(&weight_minus)?;
    Ok(EmpiricalDegreeDistributions {
        g_plus: DiscreteLaw::from_counts(&count_plus)?,
        g_minus: DiscreteLaw::from_counts(&count_minus)?,
        f_plus,
        f_minus,
        nu_n: total as f64 / seq.n() as f64,
        mu_n: cross as f64 / total as f64,
    })
}

// If no node has both in- and out-stubs the size-biased weights vanish
// everywhere except at 0; the law is then the point mass at 0.
fn law_or_point_zero(weights: &[u64]) -> Result<DiscreteLaw> {
    if weights.iter().all(|&w| w == 0) {
        Ok(DiscreteLaw::point(0))
    } else {
        DiscreteLaw::from_counts(weights)
    }
}
