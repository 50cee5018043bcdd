//! Index-parallel map with per-worker state. Runs on rayon when the `rayon`
//! feature is enabled and `parallel` is requested, sequentially otherwise.

/// `(0..count).map(|i| f(&mut state, i))` with one `state` per worker.
/// Results keep index order.
pub fn map_indexed<S, T, I, F>(count: usize, parallel: bool, init: I, f: F) -> Vec<T>
where
    S: Send,
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    #[cfg(feature = "rayon")]
    if parallel && count > 1 {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map_init(&init, |s, i| f(s, i)).collect();
    }
    let _ = parallel;
    let mut state = init();
    (0..count).map(|i| f(&mut state, i)).collect()
}

/// `true` when parallel execution is compiled in.
pub const fn available() -> bool {
    cfg!(feature = "rayon")
}
