//! Striped data-parallel drivers with a sequential fallback.
//!
//! The brute-force scans split their outer loop into row stripes; each
//! stripe is mapped independently and the results are merged with a
//! deterministic, order-insensitive reduction (minimum under a total
//! order, or in-order concatenation). With the `parallel` feature the
//! stripes run on a rayon pool; without it the same code runs on one
//! thread. Results are identical either way and for any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map every row index to an optional record and return the smallest
/// record under `R`'s total order.
///
/// `threads` caps the worker count (`None` = rayon default / sequential).
pub fn rows_min<R, F>(rows: std::ops::RangeInclusive<u64>, threads: Option<usize>, f: F) -> Option<R>
where
    R: Ord + Send,
    F: Fn(u64) -> Option<R> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        run_pool(threads, || rows.into_par_iter().filter_map(&f).min())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        rows.filter_map(f).min()
    }
}

/// Map every row index to a vector of records and concatenate the results
/// in row order.
pub fn rows_collect<R, F>(
    rows: std::ops::RangeInclusive<u64>,
    threads: Option<usize>,
    f: F,
) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> Vec<R> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        run_pool(threads, || {
            rows.into_par_iter().flat_map_iter(&f).collect()
        })
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        rows.flat_map(f).collect()
    }
}

#[cfg(feature = "parallel")]
fn run_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) if n >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool construction cannot fail for a positive count")
            .install(job),
        _ => job(),
    }
}
