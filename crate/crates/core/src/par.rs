//! Switch between the rayon path and the sequential fallback.
//!
//! Without the `parallel` feature every [`Execution`] runs sequentially.
//! Results never depend on the choice: parallel maps preserve index order and
//! reductions are done by the caller in a fixed order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(start..end).map(f).collect()`, index order preserved.
pub(crate) fn map_range<T, F>(exec: Execution, start: usize, end: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (start..end).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (start..end).map(f).collect()
}
