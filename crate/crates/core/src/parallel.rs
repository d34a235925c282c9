//! Minimal ordered fan-out over scoped threads.
//!
//! Work is split into contiguous chunks, one per worker, and results are
//! reassembled in input order, so callers that reduce sequentially get the
//! same bits no matter how many workers ran.

use std::num::NonZeroUsize;
use std::thread;

/// Worker count to use when the caller does not specify one.
pub fn default_workers() -> usize {
    thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1)
}

/// Applies `f` to every item, using up to `workers` threads. Output order
/// matches input order.
pub fn map_ordered<T, U, F>(items: &[T], workers: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(f).collect::<Vec<U>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Like [`map_ordered`] over the index range `0..n`.
pub fn map_indices<U, F>(n: usize, workers: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync,
{
    let idx: Vec<usize> = (0..n).collect();
    map_ordered(&idx, workers, |&i| f(i))
}
