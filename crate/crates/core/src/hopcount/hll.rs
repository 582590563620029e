//! HyperLogLog counters: a standalone counter and a packed array of them.

use crate::rng::mix64;

const LANE_BITS: u32 = 6;
const LANES: usize = 10;
const LANE_MASK: u64 = (1 << LANE_BITS) - 1;
/// High bit of each of the ten 6-bit lanes.
const HIGH: u64 = {
    let mut h = 0u64;
    let mut i = 0;
    while i < LANES {
        h |= 1 << (i as u32 * LANE_BITS + LANE_BITS - 1);
        i += 1;
    }
    h
};

pub const MIN_PRECISION: u8 = 4;
pub const MAX_PRECISION: u8 = 16;

/// Hash of a node id under a per-run salt.
#[inline]
pub fn hash_node(node: u64, salt: u64) -> u64 {
    mix64(node ^ mix64(salt))
}

/// Register index and rank of a hash for precision `p`.
#[inline]
fn locate(hash: u64, p: u8) -> (usize, u8) {
    let idx = (hash >> (64 - p)) as usize;
    let rest = hash << p;
    let rank = (rest.leading_zeros().min(64 - p as u32) + 1) as u8;
    (idx, rank)
}

fn alpha(m: usize) -> f64 {
    match m {
        16 => 0.673,
        32 => 0.697,
        64 => 0.709,
        _ => 0.7213 / (1.0 + 1.079 / m as f64),
    }
}

/// Cardinality estimate from `Σ 2^{-M_j}` and the number of zero registers,
/// with linear counting in the small range.
#[inline]
fn estimate_from(m: usize, inv_sum: f64, zeros: usize) -> f64 {
    let mf = m as f64;
    let raw = alpha(m) * mf * mf / inv_sum;
    if raw <= 2.5 * mf && zeros > 0 {
        mf * (mf / zeros as f64).ln()
    } else {
        raw
    }
}

/// Lane-wise maximum of ten packed 6-bit registers.
///
/// `(y|H) - (x&!H)` cannot borrow across lanes, and its high bit says whether
/// the low five bits of `y` are at least those of `x`; combining with the
/// lanes' own high bits gives `y >= x`, which is then widened to a lane mask.
#[inline]
pub fn packed_max(x: u64, y: u64) -> u64 {
    let low_ge = ((y | HIGH) - (x & !HIGH)) & HIGH;
    let ge = ((y & !x) | (!(x ^ y) & low_ge)) & HIGH;
    let bits = ge >> (LANE_BITS - 1);
    let mask = (bits << LANE_BITS) - bits;
    (y & mask) | (x & !mask)
}

/// A single counter with one byte per register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HllCounter {
    p: u8,
    registers: Vec<u8>,
}

impl HllCounter {
    pub fn new(p: u8) -> Self {
        assert!((MIN_PRECISION..=MAX_PRECISION).contains(&p), "precision {p} outside 4..=16");
        HllCounter {
            p,
            registers: vec![0; 1 << p],
        }
    }

    pub fn precision(&self) -> u8 {
        self.p
    }

    pub fn registers(&self) -> &[u8] {
        &self.registers
    }

    pub fn add_hash(&mut self, hash: u64) {
        let (i, r) = locate(hash, self.p);
        if r > self.registers[i] {
            self.registers[i] = r;
        }
    }

    /// Register-wise maximum; panics on mismatched precision.
    pub fn merge(&mut self, other: &HllCounter) {
        assert_eq!(self.p, other.p, "merging counters of different precision");
        for (a, &b) in self.registers.iter_mut().zip(&other.registers) {
            *a = (*a).max(b);
        }
    }

    pub fn estimate(&self) -> f64 {
        let inv: f64 = self.registers.iter().map(|&r| f64::from_bits((1023 - r as u64) << 52)).sum();
        let zeros = self.registers.iter().filter(|&&r| r == 0).count();
        estimate_from(self.registers.len(), inv, zeros)
    }
}

/// `n` counters of precision `p`, ten registers per word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HllArray {
    p: u8,
    words: usize,
    data: Vec<u64>,
}

impl HllArray {
    pub fn new(n: usize, p: u8) -> Self {
        assert!((MIN_PRECISION..=MAX_PRECISION).contains(&p), "precision {p} outside 4..=16");
        let words = (1usize << p).div_ceil(LANES);
        HllArray {
            p,
            words,
            data: vec![0; n * words],
        }
    }

    pub fn precision(&self) -> u8 {
        self.p
    }

    pub fn words_per_counter(&self) -> usize {
        self.words
    }

    pub fn counter(&self, v: usize) -> &[u64] {
        &self.data[v * self.words..(v + 1) * self.words]
    }

    pub fn data_mut(&mut self) -> &mut [u64] {
        &mut self.data
    }

    pub fn add_hash(&mut self, v: usize, hash: u64) {
        let (i, r) = locate(hash, self.p);
        let w = &mut self.data[v * self.words + i / LANES];
        let shift = (i % LANES) as u32 * LANE_BITS;
        let cur = (*w >> shift) & LANE_MASK;
        if r as u64 > cur {
            *w = (*w & !(LANE_MASK << shift)) | ((r as u64) << shift);
        }
    }

    /// Unpacks counter `v`.
    pub fn to_counter(&self, v: usize) -> HllCounter {
        let m = 1usize << self.p;
        let words = self.counter(v);
        let registers = (0..m)
            .map(|i| ((words[i / LANES] >> ((i % LANES) as u32 * LANE_BITS)) & LANE_MASK) as u8)
            .collect();
        HllCounter { p: self.p, registers }
    }

    pub fn estimate(&self, v: usize) -> f64 {
        estimate_words(self.counter(v), self.p)
    }
}

/// Estimate straight from packed words.
pub fn estimate_words(words: &[u64], p: u8) -> f64 {
    let m = 1usize << p;
    let mut inv = 0.0;
    let mut zeros = 0;
    for i in 0..m {
        let r = (words[i / LANES] >> ((i % LANES) as u32 * LANE_BITS)) & LANE_MASK;
        zeros += (r == 0) as usize;
        inv += f64::from_bits((1023 - r) << 52);
    }
    estimate_from(m, inv, zeros)
}

/// `dst = max(dst, src)` lane-wise; returns whether `dst` changed.
#[inline]
pub fn merge_words(dst: &mut [u64], src: &[u64]) -> bool {
    let mut changed = false;
    for (d, &s) in dst.iter_mut().zip(src) {
        let m = packed_max(*d, s);
        changed |= m != *d;
        *d = m;
    }
    changed
}
