//! Execution strategy for the data-parallel loops (Monte Carlo trials, sweeps).
//!
//! With the `parallel` feature (default) the work is spread over the rayon
//! pool. Without it, `Execution::Parallel` silently runs sequentially, so
//! callers never need to gate on the feature themselves. Every parallel
//! reduction in this crate is over integers or is order-restored afterwards,
//! so both strategies produce bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Sums `f(i)` for `i` in `range`.
    pub fn sum_u64<F>(self, range: std::ops::Range<u64>, f: F) -> u64
    where
        F: Fn(u64) -> u64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return range.into_par_iter().map(f).sum();
        }
        range.map(f).sum()
    }

    /// Maps `f` over `items`, preserving input order in the output.
    pub fn map_collect<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let f = |i: u64| (i * 2654435761) % 97;
        let a = Execution::Sequential.sum_u64(0..10_000, f);
        let b = Execution::Parallel.sum_u64(0..10_000, f);
        assert_eq!(a, b);

        let xs: Vec<u32> = (0..1000).collect();
        let s = Execution::Sequential.map_collect(&xs, |x| x * 3);
        let p = Execution::Parallel.map_collect(&xs, |x| x * 3);
        assert_eq!(s, p);
    }
}
