//! Node-level parallelism on a rayon pool.

use anyhow::Result;
use casimir_core::energy::{NodeMap, NodeValue};
use rayon::prelude::*;
use rayon::ThreadPool;

/// Evaluates quadrature nodes on a fixed-size pool. Results are collected in
/// node order, so sums over them do not depend on scheduling.
pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    /// `workers = 0` uses the machine's parallelism.
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Pool { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl NodeMap for Pool {
    fn map_nodes(
        &self,
        count: usize,
        eval: &(dyn Fn(usize) -> casimir_core::Result<NodeValue> + Sync),
    ) -> Vec<casimir_core::Result<NodeValue>> {
        self.pool.install(|| (0..count).into_par_iter().map(eval).collect())
    }
}
