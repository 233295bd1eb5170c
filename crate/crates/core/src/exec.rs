//! Data-parallel helpers.
//!
//! With the `parallel` feature the heavy loops (FFT rows, transposes and sweep
//! drivers) are distributed with rayon. Without it, or when a grid is built with
//! [`Execution::Sequential`], the same closures run on the calling thread. Work
//! items never share accumulators, so results are bitwise identical in both modes.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether parallel execution is actually available in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Applies `f` to every `chunk`-sized slice of `data`, passing a per-worker scratch buffer.
pub(crate) fn for_each_chunk_with_scratch<T, S, I, F>(
    exec: Execution,
    data: &mut [T],
    chunk: usize,
    init: I,
    f: F,
) where
    T: Send,
    I: Fn() -> S + Send + Sync,
    F: Fn(&mut S, usize, &mut [T]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each_init(&init, |scratch, (i, c)| f(scratch, i, c));
        return;
    }
    let _ = exec;
    let mut scratch = init();
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(&mut scratch, i, c);
    }
}

/// Order-preserving map over a slice of independent work items.
pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}
