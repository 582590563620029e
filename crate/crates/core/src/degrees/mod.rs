//! Degree laws, bi-degree sequences and their empirical distributions.

mod assumption;
mod discrete;
mod empirical;
mod joint;
mod marginal;
pub mod quadrature;
mod sequence;

pub use assumption::{check_against, check_assumption, AssumptionParams, AssumptionReport};
pub use discrete::{wasserstein1, AliasSampler, DiscreteLaw, W1};
pub use empirical::{empirical_distributions, EmpiricalDegreeDistributions};
pub use joint::{JointDegreeLaw, JointSampler, LimitLaws};
pub use marginal::{poisson_pareto_law, MarginalLaw, MarginalSampler, MAX_SUPPORT, TAIL_TOL};
pub use sequence::{sample_iid_bidegree, BiDegreeSequence, IidParams, Provenance, Side};

/// `(f⁺, f⁻)` of a joint law.
pub fn size_biased_law(law: &JointDegreeLaw) -> crate::error::Result<(DiscreteLaw, DiscreteLaw)> {
    law.size_biased()
}
