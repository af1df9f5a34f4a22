//! Data-parallel mapping with a sequential fallback.
//!
//! Extracted programs build deep terms (unary numerals, long lists) and the
//! term walkers recurse on depth, so all work runs on threads with large
//! stacks. With the `parallel` feature disabled every map is sequential.

/// Stack size for worker threads. Only touched pages are committed.
pub const STACK_SIZE: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    Sequential,
    #[default]
    Parallel,
}

impl Mode {
    /// `Parallel` when compiled with the feature, otherwise `Sequential`.
    pub fn best() -> Mode {
        if cfg!(feature = "parallel") {
            Mode::Parallel
        } else {
            Mode::Sequential
        }
    }
}

/// Runs `f` on a fresh thread with a [`STACK_SIZE`] stack.
pub fn with_stack<T: Send, F: FnOnce() -> T + Send>(f: F) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK_SIZE)
            .spawn_scoped(s, f)
            .expect("spawn worker thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    use std::sync::OnceLock;
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .stack_size(STACK_SIZE)
            .thread_name(|i| format!("lextract-{i}"))
            .build()
            .expect("build thread pool")
    })
}

/// Maps `f` over `items`, keeping input order.
pub fn map<T, U, F>(mode: Mode, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Mode::Parallel => {
            use rayon::prelude::*;
            pool().install(|| items.into_par_iter().map(&f).collect())
        }
        _ => with_stack(|| items.into_iter().map(f).collect()),
    }
}
