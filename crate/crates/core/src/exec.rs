//! Sequential/parallel execution switch for the data-parallel kernels.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How the data-parallel inner loops (covariance pairs, per-depth CI tests,
/// benchmark instances) execute. `Sequential` is always available and is the
/// only variant when the `parallel` feature is disabled. Results are
/// bit-identical across modes and thread counts: every work item is computed
/// independently and collected in input order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

// derive(Default) cannot mark a cfg'd variant as default
#[allow(clippy::derivable_impls)]
impl Default for Parallelism {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Parallelism::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Parallelism::Sequential
        }
    }
}

/// Map `f` over `items`, preserving order.
pub(crate) fn map_collect<T, U, F>(items: Vec<T>, par: Parallelism, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    match par {
        Parallelism::Sequential => items.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => items.into_par_iter().map(f).collect(),
    }
}

/// Run two independent closures, possibly on separate workers.
pub(crate) fn join<A, B, RA, RB>(par: Parallelism, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    match par {
        Parallelism::Sequential => (a(), b()),
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => rayon::join(a, b),
    }
}
