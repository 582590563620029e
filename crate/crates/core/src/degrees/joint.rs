//! Joint in/out-degree laws.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::discrete::DiscreteLaw;
use super::marginal::{MarginalLaw, MarginalSampler};
use crate::error::{Error, Result};

const MEAN_TOL: f64 = 1e-9;

/// The law of a pair `(D⁻, D⁺)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JointDegreeLaw {
    /// Every node has `d` in- and `d` out-stubs.
    DRegular { d: u32 },
    Independent { in_law: MarginalLaw, out_law: MarginalLaw },
    /// `D⁻ = D⁺` drawn from `law`.
    Equal { law: MarginalLaw },
    /// `table[x][y] = P(D⁻ = x, D⁺ = y)`.
    Explicit { table: Vec<Vec<f64>> },
}

/// The four limit pmfs a bi-degree sequence is compared with.
#[derive(Clone, Debug)]
pub struct LimitLaws {
    pub g_minus: DiscreteLaw,
    pub g_plus: DiscreteLaw,
    pub f_minus: DiscreteLaw,
    pub f_plus: DiscreteLaw,
    pub nu: f64,
    pub mu: f64,
}

impl JointDegreeLaw {
    /// Checks parameters and the equal-means requirement.
    pub fn validate(&self) -> Result<()> {
        match self {
            JointDegreeLaw::DRegular { .. } => Ok(()),
            JointDegreeLaw::Independent { in_law, out_law } => {
                in_law.validate()?;
                out_law.validate()?;
                let (a, b) = (in_law.mean(), out_law.mean());
                if (a - b).abs() > MEAN_TOL * a.max(1.0) {
                    return Err(Error::InvalidLaw(format!("marginal means differ: E[D-] = {a}, E[D+] = {b}")));
                }
                Ok(())
            }
            JointDegreeLaw::Equal { law } => law.validate(),
            JointDegreeLaw::Explicit { table } => {
                let flat: Vec<f64> = table.iter().flatten().copied().collect();
                if flat.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::InvalidLaw("joint table has a negative or non-finite entry".into()));
                }
                let total: f64 = flat.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidLaw(format!("joint table sums to {total}")));
                }
                let (a, b) = (self.marginal_mean_in(), self.marginal_mean_out());
                if (a - b).abs() > MEAN_TOL {
                    return Err(Error::InvalidLaw(format!("marginal means differ: E[D-] = {a}, E[D+] = {b}")));
                }
                Ok(())
            }
        }
    }

    fn explicit_cells(table: &[Vec<f64>]) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        table
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().enumerate().map(move |(y, &p)| (x as f64, y as f64, p)))
    }

    fn marginal_mean_in(&self) -> f64 {
        match self {
            JointDegreeLaw::Explicit { table } => Self::explicit_cells(table).map(|(x, _, p)| x * p).sum(),
            _ => self.nu(),
        }
    }

    fn marginal_mean_out(&self) -> f64 {
        match self {
            JointDegreeLaw::Explicit { table } => Self::explicit_cells(table).map(|(_, y, p)| y * p).sum(),
            _ => self.nu(),
        }
    }

    /// `ν = E[D⁺] = E[D⁻]`.
    pub fn nu(&self) -> f64 {
        match self {
            JointDegreeLaw::DRegular { d } => *d as f64,
            JointDegreeLaw::Independent { out_law, .. } => out_law.mean(),
            JointDegreeLaw::Equal { law } => law.mean(),
            JointDegreeLaw::Explicit { .. } => self.marginal_mean_out(),
        }
    }

    /// `μ = E[D⁻ D⁺] / ν`.
    pub fn mu(&self) -> f64 {
        match self {
            JointDegreeLaw::DRegular { d } => *d as f64,
            JointDegreeLaw::Independent { in_law, out_law } => in_law.mean() * out_law.mean() / self.nu(),
            JointDegreeLaw::Equal { law } => law.second_moment() / law.mean(),
            JointDegreeLaw::Explicit { table } => Self::explicit_cells(table).map(|(x, y, p)| x * y * p).sum::<f64>() / self.nu(),
        }
    }

    pub fn is_supercritical(&self) -> bool {
        self.mu() > 1.0
    }

    /// A κ in (0, 1] for which `E[((D⁻)^κ + (D⁺)^κ) D⁺ D⁻]` is finite, taken as
    /// 80% of the supremum and capped at 1.
    pub fn default_kappa(&self) -> f64 {
        let sup = match self {
            JointDegreeLaw::DRegular { .. } | JointDegreeLaw::Explicit { .. } => f64::INFINITY,
            JointDegreeLaw::Independent { in_law, out_law } => (in_law.moment_index() - 1.0).min(out_law.moment_index() - 1.0),
            JointDegreeLaw::Equal { law } => law.moment_index() - 2.0,
        };
        (0.8 * sup).min(1.0)
    }

    /// The exponent δ of the i.i.d. algorithm's acceptance window `n^{1-δ}`:
    /// `0.9 κ / (1 + κ)` for κ < 1 and `1/4` otherwise.
    pub fn default_delta(kappa: f64) -> f64 {
        if kappa < 1.0 {
            0.9 * kappa / (1.0 + kappa)
        } else {
            0.25
        }
    }

    /// `E[((D⁻)^κ + (D⁺)^κ) D⁻ D⁺]` over the retained supports, the
    /// population counterpart of the moment sum in the regularity event.
    pub fn joint_moment(&self, kappa: f64) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            JointDegreeLaw::DRegular { d } => 2.0 * (*d as f64).powf(kappa + 2.0),
            JointDegreeLaw::Independent { in_law, out_law } => {
                let (a, b) = (in_law.to_law()?, out_law.to_law()?);
                a.retained_moment(kappa + 1.0) * b.retained_mean() + a.retained_mean() * b.retained_moment(kappa + 1.0)
            }
            JointDegreeLaw::Equal { law } => 2.0 * law.to_law()?.retained_moment(kappa + 2.0),
            JointDegreeLaw::Explicit { table } => Self::explicit_cells(table)
                .map(|(x, y, p)| p * (x.powf(kappa) + y.powf(kappa)) * x * y)
                .sum(),
        })
    }

    /// `(g⁻, g⁺)`.
    pub fn marginals(&self) -> Result<(DiscreteLaw, DiscreteLaw)> {
        self.validate()?;
        match self {
            JointDegreeLaw::DRegular { d } => Ok((DiscreteLaw::point(*d as usize), DiscreteLaw::point(*d as usize))),
            JointDegreeLaw::Independent { in_law, out_law } => Ok((in_law.to_law()?, out_law.to_law()?)),
            JointDegreeLaw::Equal { law } => {
                let g = law.to_law()?;
                Ok((g.clone(), g))
            }
            JointDegreeLaw::Explicit { table } => {
                let cols = table.iter().map(Vec::len).max().unwrap_or(0);
                let g_minus: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
                let g_plus: Vec<f64> = (0..cols).map(|y| table.iter().map(|row| row.get(y).copied().unwrap_or(0.0)).sum()).collect();
                Ok((DiscreteLaw::from_weights(&g_minus)?, DiscreteLaw::from_weights(&g_plus)?))
            }
        }
    }

    /// `(f⁺, f⁻)` with `f⁺(t) = E[1(D⁺ = t) D⁻] / ν` and symmetrically.
    pub fn size_biased(&self) -> Result<(DiscreteLaw, DiscreteLaw)> {
        self.validate()?;
        if self.nu() <= 0.0 {
            return Err(Error::DegenerateLaw("ν = 0: no stubs to size-bias by".into()));
        }
        match self {
            JointDegreeLaw::DRegular { d } => Ok((DiscreteLaw::point(*d as usize), DiscreteLaw::point(*d as usize))),
            // independence: the opposite degree averages out to ν
            JointDegreeLaw::Independent { in_law, out_law } => Ok((out_law.to_law()?, in_law.to_law()?)),
            JointDegreeLaw::Equal { law } => {
                let f = law.size_biased()?;
                Ok((f.clone(), f))
            }
            JointDegreeLaw::Explicit { table } => {
                let cols = table.iter().map(Vec::len).max().unwrap_or(0);
                let mut f_plus = vec![0.0; cols];
                let mut f_minus = vec![0.0; table.len()];
                for (x, y, p) in Self::explicit_cells(table) {
                    f_plus[y as usize] += x * p;
                    f_minus[x as usize] += y * p;
                }
                Ok((DiscreteLaw::from_weights(&f_plus)?, DiscreteLaw::from_weights(&f_minus)?))
            }
        }
    }

    pub fn limit_laws(&self) -> Result<LimitLaws> {
        let (g_minus, g_plus) = self.marginals()?;
        let (f_plus, f_minus) = self.size_biased()?;
        Ok(LimitLaws {
            g_minus,
            g_plus,
            f_minus,
            f_plus,
            nu: self.nu(),
            mu: self.mu(),
        })
    }

    pub fn sampler(&self) -> Result<JointSampler> {
        self.validate()?;
        Ok(match self {
            JointDegreeLaw::DRegular { d } => JointSampler::Point(*d),
            JointDegreeLaw::Independent { in_law, out_law } => JointSampler::Independent(in_law.sampler()?, out_law.sampler()?),
            JointDegreeLaw::Equal { law } => JointSampler::Equal(law.sampler()?),
            JointDegreeLaw::Explicit { table } => {
                let mut cells = Vec::new();
                let mut weights = Vec::new();
                for (x, y, p) in Self::explicit_cells(table) {
                    if p > 0.0 {
                        cells.push((x as u32, y as u32));
                        weights.push(p);
                    }
                }
                let alias = WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidLaw(e.to_string()))?;
                JointSampler::Table { cells, alias }
            }
        })
    }
}

/// Draws `(D⁻, D⁺)` pairs.
#[derive(Clone, Debug)]
pub enum JointSampler {
    Point(u32),
    Independent(MarginalSampler, MarginalSampler),
    Equal(MarginalSampler),
    Table { cells: Vec<(u32, u32)>, alias: WeightedAliasIndex<f64> },
}

impl Distribution<(u32, u32)> for JointSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        match self {
            JointSampler::Point(d) => (*d, *d),
            JointSampler::Independent(a, b) => {
                let x = a.sample(rng) as u32;
                (x, b.sample(rng) as u32)
            }
            JointSampler::Equal(a) => {
                let x = a.sample(rng) as u32;
                (x, x)
            }
            JointSampler::Table { cells, alias } => cells[alias.sample(rng)],
        }
    }
}

/// Compact law specs used on the command line:
/// `dregular:D`, `pp-indep:SHAPE,SCALE`, `pp-equal:SHAPE,SCALE`,
/// `zipf-equal:EXP,CORPUS`, `zipf-indep:EXP,CORPUS`, `poisson-indep:RATE`,
/// `poisson-equal:RATE`.
impl FromStr for JointDegreeLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| Error::InvalidLaw(format!("bad number {a:?} in {s:?}"))))
                .collect::<Result<_>>()?
        };
        let arity = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidLaw(format!("{kind} takes {k} parameter(s), got {}", nums.len())))
            }
        };
        let law = match kind {
            "dregular" => {
                arity(1)?;
                JointDegreeLaw::DRegular { d: nums[0] as u32 }
            }
            "pp-indep" | "pp-equal" => {
                if nums.is_empty() {
                    // the defaults used throughout the examples
                    return format!("{kind}:1.5,1").parse();
                }
                arity(2)?;
                let m = MarginalLaw::PoissonPareto { shape: nums[0], scale: nums[1] };
                if kind == "pp-indep" {
                    JointDegreeLaw::Independent { in_law: m.clone(), out_law: m }
                } else {
                    JointDegreeLaw::Equal { law: m }
                }
            }
            "zipf-equal" | "zipf-indep" => {
                arity(2)?;
                let m = MarginalLaw::Zipf { exponent: nums[0], corpus: nums[1] as u32 };
                if kind == "zipf-indep" {
                    JointDegreeLaw::Independent { in_law: m.clone(), out_law: m }
                } else {
                    JointDegreeLaw::Equal { law: m }
                }
            }
            "poisson-indep" | "poisson-equal" => {
                arity(1)?;
                let m = MarginalLaw::Poisson { rate: nums[0] };
                if kind == "poisson-indep" {
                    JointDegreeLaw::Independent { in_law: m.clone(), out_law: m }
                } else {
                    JointDegreeLaw::Equal { law: m }
                }
            }
            _ => return Err(Error::InvalidLaw(format!("unknown law kind {kind:?}"))),
        };
        law.validate()?;
        Ok(law)
    }
}

impl fmt::Display for JointDegreeLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JointDegreeLaw::DRegular { d } => write!(f, "dregular:{d}"),
            JointDegreeLaw::Explicit { .. } => write!(f, "explicit"),
            JointDegreeLaw::Independent { in_law, out_law } if in_law == out_law => write!(f, "{}-indep", marginal_tag(in_law)),
            JointDegreeLaw::Independent { .. } => write!(f, "independent"),
            JointDegreeLaw::Equal { law } => write!(f, "{}-equal", marginal_tag(law)),
        }
    }
}

fn marginal_tag(m: &MarginalLaw) -> String {
    match m {
        MarginalLaw::Dirac { value } => format!("dirac({value})"),
        MarginalLaw::Poisson { rate } => format!("poisson({rate})"),
        MarginalLaw::PoissonPareto { shape, scale } => format!("pp({shape},{scale})"),
        MarginalLaw::Zipf { exponent, corpus } => format!("zipf({exponent},{corpus})"),
        MarginalLaw::Table { .. } => "table".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn joint_moment_matches_direct_sums() {
        assert_abs_diff_eq!(JointDegreeLaw::DRegular { d: 3 }.joint_moment(1.0).unwrap(), 54.0);
        // D⁻ = D⁺ uniform on {1, 2}: E[2 D^{2.5}] by hand
        let table = vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.5]];
        let want = 2.0f64.powf(2.5) + 1.0;
        assert_abs_diff_eq!(JointDegreeLaw::Explicit { table }.joint_moment(0.5).unwrap(), want, epsilon = 1e-12);
        let p = MarginalLaw::Poisson { rate: 2.0 };
        let indep = JointDegreeLaw::Independent { in_law: p.clone(), out_law: p };
        // E[D²] E[D] twice for κ = 1: (λ + λ²) λ = 12
        assert_abs_diff_eq!(indep.joint_moment(1.0).unwrap(), 24.0, epsilon = 1e-6);
    }

    #[test]
    fn parses_specs() {
        assert_eq!("dregular:3".parse::<JointDegreeLaw>().unwrap(), JointDegreeLaw::DRegular { d: 3 });
        let z: JointDegreeLaw = "zipf-equal:3.5,1000".parse().unwrap();
        assert!(matches!(z, JointDegreeLaw::Equal { law: MarginalLaw::Zipf { corpus: 1000, .. } }));
        let pp: JointDegreeLaw = "pp-indep".parse().unwrap();
        assert_abs_diff_eq!(pp.nu(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pp.mu(), 3.0, epsilon = 1e-12);
        assert!("pp-equal".parse::<JointDegreeLaw>().is_ok());
        assert!("dregular".parse::<JointDegreeLaw>().is_err());
        assert!("bogus:1".parse::<JointDegreeLaw>().is_err());
    }

    #[test]
    fn explicit_table_moments() {
        // (1,2) and (2,1) with equal probability
        let law = JointDegreeLaw::Explicit {
            table: vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.5], vec![0.0, 0.5, 0.0]],
        };
        law.validate().unwrap();
        assert_abs_diff_eq!(law.nu(), 1.5);
        assert_abs_diff_eq!(law.mu(), 2.0 / 1.5);
        let (fp, fm) = law.size_biased().unwrap();
        assert_abs_diff_eq!(fp.pmf(2), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fm.pmf(1), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fp.mean(), law.mu(), epsilon = 1e-12);
    }

    #[test]
    fn unequal_means_rejected() {
        let law = JointDegreeLaw::Independent {
            in_law: MarginalLaw::Poisson { rate: 2.0 },
            out_law: MarginalLaw::Poisson { rate: 3.0 },
        };
        assert!(matches!(law.validate(), Err(Error::InvalidLaw(_))));
        let skew = JointDegreeLaw::Explicit { table: vec![vec![0.0, 1.0]] };
        assert!(skew.validate().is_err());
    }

    #[test]
    fn config_round_trip() {
        let law: JointDegreeLaw = "zipf-equal:3.5,1000".parse().unwrap();
        let js = serde_json::to_string(&law).unwrap();
        assert!(js.contains("\"kind\":\"equal\""));
        assert_eq!(serde_json::from_str::<JointDegreeLaw>(&js).unwrap(), law);
    }
}
