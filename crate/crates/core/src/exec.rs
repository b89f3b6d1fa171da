//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the heavy loops run on rayon's
//! global pool. Every loop body is keyed by its index (see [`crate::rng`]), so
//! both modes produce identical output.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Falls back to sequential execution when the crate is built without
    /// the `parallel` feature.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Maps `f` over `range` in index order. `init` builds per-worker scratch.
pub fn map_indexed<T, S, I, F>(mode: ExecMode, range: Range<usize>, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => range.into_par_iter().map_init(init, f).collect(),
        _ => {
            let mut scratch = init();
            range.map(|i| f(&mut scratch, i)).collect()
        }
    }
}

/// Integer sum of `f` over `range`; exact, so the result is schedule independent.
pub fn sum_indexed<S, I, F>(mode: ExecMode, range: Range<usize>, init: I, f: F) -> u64
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> u64 + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => range.into_par_iter().map_init(init, f).sum(),
        _ => {
            let mut scratch = init();
            range.map(|i| f(&mut scratch, i)).sum()
        }
    }
}
