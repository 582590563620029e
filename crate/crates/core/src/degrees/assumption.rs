//! Checking a sequence against its limit laws.

use serde::{Deserialize, Serialize};

use super::discrete::{wasserstein1, W1};
use super::empirical::empirical_distributions;
use super::joint::{JointDegreeLaw, LimitLaws};
use super::sequence::BiDegreeSequence;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionParams {
    pub eps: f64,
    pub kappa: f64,
    pub k_kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub d1_g_plus: W1,
    pub d1_g_minus: W1,
    pub d1_f_plus: W1,
    pub d1_f_minus: W1,
    /// `n^{-ε}`
    pub eps_threshold: f64,
    /// `Σ_r ((D⁻_r)^κ + (D⁺_r)^κ) D⁺_r D⁻_r`
    pub moment_sum: f64,
    /// `K_κ n`
    pub moment_bound: f64,
    pub omega_n_holds: bool,
}

impl AssumptionReport {
    pub fn distances(&self) -> [W1; 4] {
        [self.d1_g_plus, self.d1_g_minus, self.d1_f_plus, self.d1_f_minus]
    }
}

pub fn check_assumption(seq: &BiDegreeSequence, law: &JointDegreeLaw, params: AssumptionParams) -> Result<AssumptionReport> {
    check_against(seq, &law.limit_laws()?, params)
}

/// As [`check_assumption`] with precomputed limits. A distance passes only if
/// it does so with its truncation error added.
pub fn check_against(seq: &BiDegreeSequence, limits: &LimitLaws, params: AssumptionParams) -> Result<AssumptionReport> {
    let emp = empirical_distributions(seq)?;
    let n = seq.n() as f64;
    let k = params.kappa;
    let moment_sum: f64 = seq
        .d_minus()
        .iter()
        .zip(seq.d_plus())
        .map(|(&a, &b)| {
            let (a, b) = (a as f64, b as f64);
            (a.powf(k) + b.powf(k)) * a * b
        })
        .sum();
    let d1_g_plus = wasserstein1(&emp.g_plus, &limits.g_plus);
    let d1_g_minus = wasserstein1(&emp.g_minus, &limits.g_minus);
    let d1_f_plus = wasserstein1(&emp.f_plus, &limits.f_plus);
    let d1_f_minus = wasserstein1(&emp.f_minus, &limits.f_minus);
    let eps_threshold = n.powf(-params.eps);
    let moment_bound = params.k_kappa * n;
    let omega_n_holds = [d1_g_plus, d1_g_minus, d1_f_plus, d1_f_minus]
        .iter()
        .all(|d| d.upper() <= eps_threshold)
        && moment_sum <= moment_bound;
    Ok(AssumptionReport {
        d1_g_plus,
        d1_g_minus,
        d1_f_plus,
        d1_f_minus,
        eps_threshold,
        moment_sum,
        moment_bound,
        omega_n_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::sequence::{sample_iid_bidegree, IidParams};
    use crate::rng::Seed;

    #[test]
    fn dregular_passes() {
        let law = JointDegreeLaw::DRegular { d: 3 };
        let seq = sample_iid_bidegree(&law, IidParams::new(500, 0.25), Seed(3)).unwrap();
        let rep = check_assumption(&seq, &law, AssumptionParams { eps: 0.1, kappa: 1.0, k_kappa: 100.0 }).unwrap();
        assert!(rep.distances().iter().all(|d| d.value == 0.0 && d.error_bound == 0.0));
        assert_eq!(rep.moment_sum, 54.0 * 500.0);
        assert!(rep.omega_n_holds);
        let tight = check_assumption(&seq, &law, AssumptionParams { eps: 0.1, kappa: 1.0, k_kappa: 50.0 }).unwrap();
        assert!(!tight.omega_n_holds);
    }
}
