//! Data-parallel building blocks.
//!
//! With the `parallel` feature these run on the rayon pool; without it they
//! are plain sequential loops. Work is always split into fixed chunks and
//! partial results are combined in chunk order, so floating-point sums are
//! bit-identical across thread counts and across the two builds.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk size used by the enumeration loops.
pub const CHUNK: usize = 1 << 12;

fn chunk_ranges(len: usize, chunk: usize) -> impl Iterator<Item = Range<usize>> + Clone {
    let chunk = chunk.max(1);
    let count = len.div_ceil(chunk);
    (0..count).map(move |i| i * chunk..((i + 1) * chunk).min(len))
}

/// Applies `f` to each chunk of `0..len`, returning results in chunk order.
/// The closure also receives the chunk index, usable as a seed stream id.
pub fn map_chunks<T, F>(len: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, Range<usize>) -> T + Sync + Send,
{
    let ranges: Vec<Range<usize>> = chunk_ranges(len, chunk).collect();
    #[cfg(feature = "parallel")]
    {
        ranges
            .into_par_iter()
            .enumerate()
            .map(|(i, r)| f(i, r))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ranges.into_iter().enumerate().map(|(i, r)| f(i, r)).collect()
    }
}

/// Deterministic chunked sum.
pub fn sum_chunks<F>(len: usize, chunk: usize, f: F) -> f64
where
    F: Fn(usize, Range<usize>) -> f64 + Sync + Send,
{
    map_chunks(len, chunk, f).into_iter().fold(0.0, |a, b| a + b)
}

/// Order-preserving map over a slice.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Order-preserving map over `0..len`.
pub fn map_indices<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// One butterfly stage of a per-coordinate 2x2 kernel on a table over the
/// cube: for every pair `(a, b)` at distance `stride`,
/// `a <- k[0][0] a + k[0][1] b` and `b <- k[1][0] a + k[1][1] b`.
pub fn butterfly(v: &mut [f64], stride: usize, k: [[f64; 2]; 2]) {
    let stage = |lo: &mut [f64], hi: &mut [f64]| {
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = k[0][0] * x + k[0][1] * y;
            *b = k[1][0] * x + k[1][1] * y;
        }
    };
    #[cfg(feature = "parallel")]
    {
        v.par_chunks_mut(2 * stride).for_each(|blk| {
            let (lo, hi) = blk.split_at_mut(stride);
            if stride >= CHUNK {
                lo.par_chunks_mut(CHUNK)
                    .zip(hi.par_chunks_mut(CHUNK))
                    .for_each(|(l, h)| stage(l, h));
            } else {
                stage(lo, hi);
            }
        });
    }
    #[cfg(not(feature = "parallel"))]
    {
        for blk in v.chunks_mut(2 * stride) {
            let (lo, hi) = blk.split_at_mut(stride);
            stage(lo, hi);
        }
    }
}

/// Sorts finite floats ascending.
pub fn sort_floats(v: &mut [f64]) {
    #[cfg(feature = "parallel")]
    {
        v.par_sort_unstable_by(f64::total_cmp);
    }
    #[cfg(not(feature = "parallel"))]
    {
        v.sort_unstable_by(f64::total_cmp);
    }
}

/// Runs `op` on a dedicated pool of `threads` workers (`0` = rayon default).
/// A no-op wrapper in the sequential build.
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return op();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        op()
    }
}
