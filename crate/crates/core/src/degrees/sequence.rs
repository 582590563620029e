//! Bi-degree sequences and the i.i.d. construction.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::joint::JointDegreeLaw;
use crate::error::{Error, Result};
use crate::rng::Seed;

/// Which side of the sequence the i.i.d. algorithm topped up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    In,
    Out,
}

/// How a sequence came to be.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// `Σ (D⁻ - D⁺)` of the accepted draw, before fixing.
    pub delta: i64,
    /// Number of rejected draws.
    pub retries: u32,
    pub side: Option<Side>,
    /// Indices that received one extra stub.
    pub modified: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiDegreeSequence {
    d_minus: Vec<u32>,
    d_plus: Vec<u32>,
    total: u64,
    pub provenance: Provenance,
}

impl BiDegreeSequence {
    /// Fails with `Format` unless both sides have equal length and sum.
    pub fn new(d_minus: Vec<u32>, d_plus: Vec<u32>) -> Result<Self> {
        if d_minus.len() != d_plus.len() {
            return Err(Error::Format(format!(
                "in/out degree arrays have lengths {} and {}",
                d_minus.len(),
                d_plus.len()
            )));
        }
        let a: u64 = d_minus.iter().map(|&d| d as u64).sum();
        let b: u64 = d_plus.iter().map(|&d| d as u64).sum();
        if a != b {
            return Err(Error::Format(format!("in-degree sum {a} != out-degree sum {b}")));
        }
        Ok(BiDegreeSequence {
            d_minus,
            d_plus,
            total: a,
            provenance: Provenance::default(),
        })
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn n(&self) -> usize {
        self.d_minus.len()
    }

    /// `L_n`, the number of edges.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn d_minus(&self) -> &[u32] {
        &self.d_minus
    }

    pub fn d_plus(&self) -> &[u32] {
        &self.d_plus
    }

    pub fn max_in(&self) -> u32 {
        self.d_minus.iter().copied().max().unwrap_or(0)
    }

    pub fn max_out(&self) -> u32 {
        self.d_plus.iter().copied().max().unwrap_or(0)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(SEQ_MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.n());
        for (a, b) in self.d_minus.iter().zip(&self.d_plus) {
            buf.extend_from_slice(&a.to_le_bytes());
            buf.extend_from_slice(&b.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != SEQ_MAGIC {
            return Err(Error::Format("not a DCMS file".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported DCMS version {version}")));
        }
        let n = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 8 * n {
            return Err(Error::Format(format!("expected {} payload bytes, found {}", 8 * n, body.len())));
        }
        let word = |i: usize| u32::from_le_bytes(body[4 * i..4 * i + 4].try_into().unwrap());
        let d_minus = (0..n).map(|i| word(2 * i)).collect();
        let d_plus = (0..n).map(|i| word(2 * i + 1)).collect();
        Self::new(d_minus, d_plus)
    }

    /// CSV with columns `index,d_minus,d_plus`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "d_minus", "d_plus"])?;
        for (i, (a, b)) in self.d_minus.iter().zip(&self.d_plus).enumerate() {
            out.serialize((i, a, b))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut d_minus = Vec::new();
        let mut d_plus = Vec::new();
        for (row, rec) in rdr.deserialize::<(usize, u32, u32)>().enumerate() {
            let (i, a, b) = rec?;
            if i != row {
                return Err(Error::Format(format!("row {row} has index {i}")));
            }
            d_minus.push(a);
            d_plus.push(b);
        }
        Self::new(d_minus, d_plus)
    }
}

const SEQ_MAGIC: &[u8; 4] = b"DCMS";
const FORMAT_VERSION: u32 = 1;

/// Parameters of the i.i.d. algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IidParams {
    pub n: usize,
    /// The draw is accepted when `|Δ| <= n^{1-δ}`.
    pub delta: f64,
    pub max_retries: u32,
}

impl IidParams {
    pub fn new(n: usize, delta: f64) -> Self {
        IidParams { n, delta, max_retries: 1000 }
    }

    pub fn bound(&self) -> f64 {
        (self.n as f64).powf(1.0 - self.delta)
    }
}

/// Draws `n` i.i.d. pairs from `law`, retrying until the imbalance
/// `Δ = Σ (D⁻ - D⁺)` satisfies `|Δ| <= n^{1-δ}`, then adds one stub to
/// `|Δ|` distinct uniformly chosen nodes on the deficient side.
pub fn sample_iid_bidegree(law: &JointDegreeLaw, params: IidParams, seed: Seed) -> Result<BiDegreeSequence> {
    if !(params.delta > 0.0 && params.delta < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("delta = {} must lie in (0, 1)", params.delta)));
    }
    let sampler = law.sampler()?;
    let bound = params.bound();
    let mut rng = seed.rng();
    let n = params.n;
    let mut d_minus = vec![0u32; n];
    let mut d_plus = vec![0u32; n];
    let mut retries = 0u32;
    let delta = loop {
        let mut imbalance: i64 = 0;
        for i in 0..n {
            let (a, b) = sampler.sample(&mut rng);
            d_minus[i] = a;
            d_plus[i] = b;
            imbalance += a as i64 - b as i64;
        }
        if (imbalance.unsigned_abs() as f64) <= bound {
            break imbalance;
        }
        retries += 1;
        if retries >= params.max_retries {
            return Err(Error::RetriesExhausted { attempts: retries, bound });
        }
    };

    let k = delta.unsigned_abs() as usize;
    let (side, modified) = if k == 0 {
        (None, Vec::new())
    } else {
        // Δ > 0 means more in-stubs than out-stubs
        let (side, target) = if delta > 0 {
            (Side::Out, &mut d_plus)
        } else {
            (Side::In, &mut d_minus)
        };
        let picked = choose_distinct(n, k, &mut rng);
        for &i in &picked {
            target[i as usize] += 1;
        }
        (Some(side), picked)
    };
    let mut seq = BiDegreeSequence::new(d_minus, d_plus)?;
    seq.provenance = Provenance {
        delta,
        retries,
        side,
        modified,
    };
    Ok(seq)
}

/// `k` distinct indices from `0..n`, uniformly, by a partial Fisher-Yates
/// shuffle.
fn choose_distinct<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..n as u32).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}
