//! Data-parallel kernels over grid arrays.
//!
//! Every reduction splits the data into fixed-size chunks, accumulates each
//! chunk sequentially and combines the partial sums in index order, so results
//! are bit-identical regardless of thread count or scheduling. With the
//! `parallel` feature disabled everything runs on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for both work splitting and deterministic reductions.
pub const CHUNK: usize = 4096;

/// Fill `out` chunk by chunk; `f` receives the chunk's start offset.
pub fn fill_chunks<F>(out: &mut [f64], f: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(ci, chunk)| f(ci * CHUNK, chunk));

    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(ci, chunk)| f(ci * CHUNK, chunk));
}

/// `out[p] += s * a[p] * b[p]`.
pub fn fma_pointwise(out: &mut [f64], s: f64, a: &[f64], b: &[f64]) {
    debug_assert_eq!(out.len(), a.len());
    debug_assert_eq!(out.len(), b.len());
    fill_chunks(out, |off, chunk| {
        for (j, o) in chunk.iter_mut().enumerate() {
            *o += s * a[off + j] * b[off + j];
        }
    });
}

/// `out[p] += s * a[p]`.
pub fn axpy(out: &mut [f64], s: f64, a: &[f64]) {
    debug_assert_eq!(out.len(), a.len());
    fill_chunks(out, |off, chunk| {
        for (j, o) in chunk.iter_mut().enumerate() {
            *o += s * a[off + j];
        }
    });
}

/// Deterministic sum: per-chunk partials combined in index order.
pub fn sum(values: &[f64]) -> f64 {
    let partials = chunk_partials(values.len(), |range| {
        values[range].iter().sum::<f64>()
    });
    partials.into_iter().sum()
}

/// Deterministic dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let partials = chunk_partials(a.len(), |range| {
        a[range.clone()]
            .iter()
            .zip(&b[range])
            .map(|(x, y)| x * y)
            .sum::<f64>()
    });
    partials.into_iter().sum()
}

/// Maximum of |values|; 0 for empty input.
pub fn max_abs(values: &[f64]) -> f64 {
    let partials = chunk_partials(values.len(), |range| {
        values[range].iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    });
    partials.into_iter().fold(0.0, f64::max)
}

/// Minimum of values; +inf for empty input.
pub fn min(values: &[f64]) -> f64 {
    let partials = chunk_partials(values.len(), |range| {
        values[range].iter().fold(f64::INFINITY, |m, &v| m.min(v))
    });
    partials.into_iter().fold(f64::INFINITY, f64::min)
}

fn chunk_partials<F>(len: usize, f: F) -> Vec<f64>
where
    F: Fn(std::ops::Range<usize>) -> f64 + Sync + Send,
{
    let n_chunks = len.div_ceil(CHUNK).max(1);
    let ranges: Vec<_> = (0..n_chunks)
        .map(|ci| (ci * CHUNK)..((ci + 1) * CHUNK).min(len))
        .collect();

    #[cfg(feature = "parallel")]
    return ranges.into_par_iter().map(f).collect();

    #[cfg(not(feature = "parallel"))]
    return ranges.into_iter().map(f).collect();
}

/// Map an index range to a Vec, in parallel when enabled, preserving order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();

    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_sequential() {
        let v: Vec<f64> = (0..10_000).map(|i| (i as f64).sin()).collect();
        let seq: f64 = v.iter().sum();
        assert!((sum(&v) - seq).abs() < 1e-9);
    }

    #[test]
    fn sum_is_reproducible() {
        let v: Vec<f64> = (0..50_000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let a = sum(&v);
        let b = sum(&v);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn max_abs_and_min() {
        let v = vec![-3.0, 1.0, 2.5];
        assert_eq!(max_abs(&v), 3.0);
        assert_eq!(min(&v), -3.0);
    }
}
