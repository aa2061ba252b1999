//! Data-parallel execution with a sequential fallback.
//!
//! With the default `parallel` feature, indexed maps run on a shared rayon
//! pool sized by the `XFPT_THREADS` environment variable (or the machine's
//! available parallelism). Without the feature the same entry points compile
//! to plain loops. Work is always a pure function of the index, so parallel
//! and sequential runs produce bit-identical output in the same order.

use std::sync::atomic::{AtomicUsize, Ordering};

static THREAD_OVERRIDE: AtomicUsize = AtomicUsize::new(0);

/// Forces an execution width for subsequent [`map_indexed`] calls:
/// `Some(1)` runs sequentially, `None` restores the environment default.
/// Used by the benchmark suite to compare both paths in one process.
pub fn set_thread_override(n: Option<usize>) {
    THREAD_OVERRIDE.store(n.unwrap_or(0), Ordering::Relaxed);
}

/// Worker cap: override, else `XFPT_THREADS`, else available parallelism.
pub fn max_threads() -> usize {
    let ov = THREAD_OVERRIDE.load(Ordering::Relaxed);
    if ov > 0 {
        return ov;
    }
    env_threads()
}

fn env_threads() -> usize {
    if let Ok(s) = std::env::var("XFPT_THREADS") {
        if let Ok(n) = s.parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if max_threads() <= 1 || n <= 1 {
        return map_indexed_seq(n, f);
    }
    use rayon::prelude::*;
    pool().install(|| (0..n).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// The sequential path, always available (and what the parallel build
/// benchmarks against).
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    use std::sync::OnceLock;
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(env_threads())
            .thread_name(|i| format!("xfpt-worker-{i}"))
            .build()
            .expect("failed to build worker pool")
    })
}
