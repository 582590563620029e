//! Binary indexed tree over nonnegative integer weights.

#[derive(Clone, Debug)]
pub(crate) struct Fenwick {
    tree: Vec<u64>,
    top: usize,
}

impl Fenwick {
    /// Linear-time construction from initial weights.
    pub fn new(weights: &[u64]) -> Self {
        let n = weights.len();
        let mut tree = vec![0u64; n + 1];
        tree[1..].copy_from_slice(weights);
        for i in 1..=n {
            let j = i + (i & i.wrapping_neg());
            if j <= n {
                tree[j] += tree[i];
            }
        }
        let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        Fenwick { tree, top }
    }

    pub fn sub(&mut self, pos: usize, delta: u64) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] -= delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of the first `len` weights.
    pub fn prefix(&self, len: usize) -> u64 {
        let mut i = len;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }

    /// Smallest `pos` with `prefix(pos + 1) >= x`, for `1 <= x <= total`.
    pub fn lower_bound(&self, mut x: u64) -> usize {
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] < x {
                pos = next;
                x -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}
