//! Execution of the independent per-subdomain work inside one tick.

use alloc::vec::Vec;

/// Runs `f(0), …, f(n−1)` and returns the results in index order.
///
/// Implementations may run the calls concurrently; the iteration engines
/// only ever combine the results in index order, so every scheduler gives
/// bit-identical iterates.
pub trait Scheduler: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Scheduler for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
