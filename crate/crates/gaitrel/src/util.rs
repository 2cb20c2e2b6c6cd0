//! Internal parallelism helper. `GAITREL_THREADS` caps worker threads;
//! 0 (or 1) forces sequential execution; unset uses the rayon default.

use rayon::prelude::*;
use std::sync::OnceLock;

enum Mode {
    Sequential,
    Pool(rayon::ThreadPool),
    Default,
}

fn mode() -> &'static Mode {
    static MODE: OnceLock<Mode> = OnceLock::new();
    MODE.get_or_init(|| {
        match std::env::var("GAITREL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
            Some(0) | Some(1) => Mode::Sequential,
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map(Mode::Pool)
                .unwrap_or(Mode::Default),
            None => Mode::Default,
        }
    })
}

/// Order-preserving map; the reduction order of results is always the input
/// order, so callers stay bit-deterministic regardless of thread count.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode() {
        Mode::Sequential => items.iter().map(f).collect(),
        Mode::Pool(pool) => pool.install(|| items.par_iter().map(f).collect()),
        Mode::Default => items.par_iter().map(f).collect(),
    }
}
