use alloc::vec::Vec;

/// Runs the independent per-scenario updates of one iteration.
///
/// Implementations may evaluate `f` concurrently but must return results in
/// the order of `items`. The solver writes results back sequentially, so the
/// iterates do not depend on the executor.
pub trait ScenarioExecutor {
    fn map<T, F>(&self, items: &[usize], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Evaluates scenarios one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ScenarioExecutor for Sequential {
    fn map<T, F>(&self, items: &[usize], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        items.iter().map(|&s| f(s)).collect()
    }
}
