//! Thin execution layer over the per-node loops.
//!
//! With the `parallel` feature (default) node-indexed maps run on rayon.
//! [`force_sequential`] switches to plain iteration at runtime so benchmarks
//! can compare both modes in one process; without the feature the crate
//! compiles with no rayon dependency at all.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQ: AtomicBool = AtomicBool::new(false);

/// Globally disable (or re-enable) data parallelism at runtime.
pub fn force_sequential(on: bool) {
    FORCE_SEQ.store(on, Ordering::SeqCst);
}

/// True when maps will actually run on rayon.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQ.load(Ordering::SeqCst)
}

/// Map `f` over `0..n`, preserving index order in the result.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Map `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_toggle_round_trips() {
        let par = map_indexed(100, |i| i * i);
        force_sequential(true);
        let seq = map_indexed(100, |i| i * i);
        force_sequential(false);
        assert_eq!(par, seq);
    }
}
