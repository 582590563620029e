//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon when
//! asked for [`Execution::Parallel`]; without it every call runs sequentially.
//! Work is always split into fixed chunks so floating-point reductions and
//! derived random streams are identical in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `(0..n).map(f).collect()`, preserving order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Calls `f(chunk_index, chunk)` on consecutive chunks of `data`.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }

    /// Maps each chunk of `data` to a value, preserving chunk order.
    pub fn map_chunks_mut<T, R, F>(self, data: &mut [T], chunk: usize, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, &mut [T]) -> R + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return data
                .par_chunks_mut(chunk)
                .enumerate()
                .map(|(i, c)| f(i, c))
                .collect();
        }
        data.chunks_mut(chunk)
            .enumerate()
            .map(|(i, c)| f(i, c))
            .collect()
    }
}

/// Deterministic sum of `f(i)` over `0..n`: fixed-size blocks are summed
/// (possibly in parallel) and the block sums are added in order.
pub fn chunked_sum<F>(exec: Execution, n: usize, block: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let block = block.max(1);
    let blocks = n.div_ceil(block);
    exec.map_range(blocks, |b| {
        let lo = b * block;
        let hi = (lo + block).min(n);
        (lo..hi).map(&f).sum::<f64>()
    })
    .into_iter()
    .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let a = Execution::Sequential.map_range(1000, |i| (i * i) as u64);
        let b = Execution::Parallel.map_range(1000, |i| (i * i) as u64);
        assert_eq!(a, b);
        let s1 = chunked_sum(Execution::Sequential, 10_001, 64, |i| 1.0 / (1.0 + i as f64));
        let s2 = chunked_sum(Execution::Parallel, 10_001, 64, |i| 1.0 / (1.0 + i as f64));
        assert_eq!(s1.to_bits(), s2.to_bits());
    }

    #[test]
    fn chunk_helpers_cover_everything() {
        let mut v = vec![0usize; 103];
        Execution::Parallel.for_each_chunk_mut(&mut v, 10, |ci, c| {
            for (j, x) in c.iter_mut().enumerate() {
                *x = ci * 10 + j;
            }
        });
        assert!(v.iter().enumerate().all(|(i, &x)| i == x));
        let lens = Execution::Sequential.map_chunks_mut(&mut v, 10, |_, c| c.len());
        assert_eq!(lens.iter().sum::<usize>(), 103);
        assert_eq!(lens.len(), 11);
    }
}
