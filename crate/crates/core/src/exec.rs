//! Sequential / data-parallel execution of independent indexed tasks.

/// How independent tasks (trials, restarts) are executed.
///
/// `Parallel` uses rayon when the `parallel` feature is enabled and silently
/// falls back to sequential execution otherwise. Results are always returned
/// in task-index order, so both modes produce identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Evaluates `task(0..n)` and collects the results in index order.
    pub fn map<T, F>(self, n: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(task).collect(),
            Execution::Parallel => parallel_map(n, task),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(task).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(task).collect()
}
