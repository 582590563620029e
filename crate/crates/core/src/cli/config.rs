//! Experiment configuration: JSON file merged with command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use dcm_lab::degrees::JointDegreeLaw;

/// A law given either as a compact spec (`pp-indep:1.5,1`) or as a JSON
/// object with a `kind` tag.
#[derive(Clone, Debug, PartialEq)]
pub struct LawArg(pub JointDegreeLaw);

impl FromStr for LawArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let law = if s.starts_with('{') {
            let law: JointDegreeLaw = serde_json::from_str(s).map_err(|e| e.to_string())?;
            law.validate().map_err(|e| e.to_string())?;
            law
        } else {
            s.parse().map_err(|e: dcm_lab::Error| e.to_string())?
        };
        Ok(LawArg(law))
    }
}

impl Serialize for LawArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LawArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Spec(String),
            Object(JointDegreeLaw),
        }
        match Raw::deserialize(d)? {
            Raw::Spec(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Object(law) => {
                law.validate().map_err(serde::de::Error::custom)?;
                Ok(LawArg(law))
            }
        }
    }
}

impl fmt::Display for LawArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMode {
    /// One BFS per source.
    Exact,
    /// Uniform random pairs of distinct nodes.
    Sampled,
    /// HyperLogLog neighborhood function.
    Hll,
}

/// Every tunable of every command. Unset fields fall back to the command's
/// defaults after the config file and the flags are merged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Joint degree law: a spec such as `dregular:3` or a JSON object.
    #[arg(long)]
    pub law: Option<LawArg>,
    /// Number of nodes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of independent graphs.
    #[arg(long)]
    pub graphs: Option<usize>,
    /// Master seed; every stream is derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exponent of the i.i.d. algorithm's acceptance window (default from κ).
    #[arg(long)]
    pub iid_delta: Option<f64>,
    /// Hopcount measurement.
    #[arg(long, value_enum)]
    pub mode: Option<MeasureMode>,
    /// HyperLogLog precision.
    #[arg(long)]
    pub p: Option<u8>,
    /// Sampled pairs per graph.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Largest distance propagated by the neighborhood function.
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Samples per limit-variable pool.
    #[arg(long)]
    pub pool_size: Option<usize>,
    /// Population-dynamics rounds.
    #[arg(long)]
    pub generations: Option<usize>,
    /// Bootstrap replicates for the KS interval.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Coupling horizon.
    #[arg(long)]
    pub k: Option<usize>,
    /// Coupling tolerance exponent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Coupling window exponent.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Distance exponent of the regularity event.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Moment exponent of the regularity event.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Moment bound of the regularity event (default twice the population moment).
    #[arg(long)]
    pub k_kappa: Option<f64>,
    /// Coupling replicates.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($f:ident),* $(,)?) => {
        ExperimentConfig { $($f: $top.$f.or($base.$f),)* }
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: ExperimentConfig) -> Self {
        overlay!(
            self, base, law, n, graphs, seed, iid_delta, mode, p, pairs, t_max, pool_size, generations, bootstrap, k, gamma, delta, eps, kappa,
            k_kappa, reps, out,
        )
    }
}
