use std::io;

use thiserror::Error;

/// Errors produced by the laboratory's operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree law: {0}")]
    InvalidLaw(String),

    #[error("degenerate law: {0}")]
    DegenerateLaw(String),

    #[error("step 2 of the i.i.d. algorithm failed {attempts} times (|delta_n| > {bound:.3})")]
    RetriesExhausted { attempts: u32, bound: f64 },

    #[error("empty graph: the degree sequence has no stubs")]
    EmptyGraph,

    #[error("generation size exceeded the population cap of {cap}")]
    PopulationOverflow { cap: u64 },

    #[error("tilted laws undefined: {0}")]
    UndefinedTilt(String),

    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("neighborhood function decreases at t = {t}")]
    NonMonotoneInput { t: usize },

    #[error("conditioned product sample is empty (one of the W pools has no positive mass)")]
    NoSurvivingMass,

    #[error("empirical histogram has no finite pairs")]
    EmptyEmpirical,

    #[error("all stubs already traversed (T = {traversed}, L = {total})")]
    ExhaustedStubs { traversed: u64, total: u64 },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("traversal time {t} outside the validity window t <= {limit:.1}")]
    OutOfValidityWindow { t: u64, limit: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
