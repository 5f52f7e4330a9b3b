use rayon::prelude::*;
use rayon::ThreadPool;
use stochsplit_core::solver::ScenarioExecutor;

/// Runs the per-scenario updates of one iteration on a rayon pool. Results
/// come back in block order, so output does not depend on the thread count.
#[derive(Debug)]
pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        Ok(Self {
            pool: rayon::ThreadPoolBuilder::new().num_threads(threads).build()?,
        })
    }
}

impl ScenarioExecutor for RayonExecutor {
    fn map<T: Send, F: Fn(usize) -> T + Sync + Send>(&self, items: &[usize], f: F) -> Vec<T> {
        self.pool.install(|| items.par_iter().map(|&i| f(i)).collect())
    }
}
