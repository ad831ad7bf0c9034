//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it the same functions run on the calling thread. Reductions are
//! always performed over fixed-size chunks whose partial sums are combined
//! in index order, so both builds produce bit-identical results.

/// Number of terms summed sequentially before partial sums are combined.
pub const CHUNK: usize = 512;

/// Maps `f` over `0..n` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps `f` over a slice and returns the results in order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), |i| f(&items[i]))
}

/// Deterministic sum of `f(i)` over `0..n`.
pub fn chunked_sum<T, F>(n: usize, zero: T, f: F) -> T
where
    T: Copy + Send + Sync + std::ops::Add<Output = T>,
    F: Fn(usize) -> T + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).fold(zero, |acc, i| acc + f(i))
    });
    partials.into_iter().fold(zero, |acc, x| acc + x)
}

/// Fallible variant of [`chunked_sum`]; the first error in index order wins.
pub fn try_chunked_sum<T, E, F>(n: usize, zero: T, f: F) -> Result<T, E>
where
    T: Copy + Send + Sync + std::ops::Add<Output = T>,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = zero;
        for i in lo..hi {
            acc = acc + f(i)?;
        }
        Ok(acc)
    });
    let mut total = zero;
    for p in partials {
        total = total + p?;
    }
    Ok(total)
}

/// Configures the global pool size. `0` keeps rayon's automatic choice.
///
/// Returns `false` if the pool was already initialised or the crate was
/// built without the `parallel` feature.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return true;
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}
