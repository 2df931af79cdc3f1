//! Data-parallel drivers with a sequential fallback.
//!
//! All cross-worker reductions go through fixed-size blocks merged in block
//! order, so results are bit-identical regardless of worker count, and
//! identical between the `parallel` feature and the sequential fallback.

use std::sync::atomic::{AtomicBool, Ordering};

/// Subjects per reduction block. Fixed so that the f64 summation tree does
/// not depend on the thread count.
pub const BLOCK: usize = 32;

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Globally disable the rayon path (used by `--threads 1` and benches).
pub fn set_sequential(seq: bool) {
    FORCE_SEQUENTIAL.store(seq, Ordering::Relaxed);
}

/// Sizes the global worker pool. The pool can only be built once per
/// process; later calls keep the first size. A count of 1 switches to the
/// sequential path instead.
pub fn configure_threads(n: usize) {
    set_sequential(n == 1);
    #[cfg(feature = "parallel")]
    if n > 1 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn is_sequential() -> bool {
    FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

/// Map `f` over `0..n`, returning results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Fold `0..n` into per-block partials (each block accumulated sequentially
/// by `fold`), then merge the partials in block order with `merge`.
pub fn block_reduce<T, F, M>(n: usize, init: impl Fn() -> T + Sync + Send, fold: F, merge: M) -> T
where
    T: Send,
    F: Fn(&mut T, usize) + Sync + Send,
    M: Fn(&mut T, T),
{
    let fold_block = |range: std::ops::Range<usize>| {
        let mut acc = init();
        for i in range {
            fold(&mut acc, i);
        }
        acc
    };
    let nblocks = n.div_ceil(BLOCK);
    let block_range = |b: usize| b * BLOCK..((b + 1) * BLOCK).min(n);

    #[cfg(feature = "parallel")]
    let partials: Vec<T> = if !is_sequential() {
        use rayon::prelude::*;
        (0..nblocks)
            .into_par_iter()
            .map(|b| fold_block(block_range(b)))
            .collect()
    } else {
        (0..nblocks).map(|b| fold_block(block_range(b))).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<T> = (0..nblocks).map(|b| fold_block(block_range(b))).collect();

    let mut out = init();
    for p in partials {
        merge(&mut out, p);
    }
    out
}

/// Sum per-index f64 contributions with a thread-count-independent tree.
pub fn block_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    block_reduce(n, || 0.0, |acc, i| *acc += f(i), |acc, p| *acc += p)
}
