//! Rayon-backed drivers. Every reduction happens in the same order as the
//! sequential code in `cardpath-core`, so results do not depend on the
//! number of workers.

use cardpath_core::propagator::{
    assemble_enumeration, check_monte_carlo, enumerate_chunk, enumeration_chunks, euclidean_block, finish_euclidean,
    monte_carlo_blocks, EuclideanScheme, McStats, PropagatorConfig, PropagatorResult, RowExecutor, StepKernel,
    TransferEngine,
};
use cardpath_core::{Complex64, Result};
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "CARDPATH_THREADS";

/// Computes output rows of a step on the current rayon pool.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl RowExecutor for Rayon {
    fn apply(&self, kernel: &StepKernel, v: &[Complex64], out: &mut [Complex64], transpose: bool) {
        let n = kernel.sites();
        out.par_iter_mut().enumerate().for_each_init(
            || vec![Complex64::new(0.0, 0.0); n],
            |scratch, (j, o)| {
                *o = if transpose { kernel.col_dot(j, v, scratch) } else { kernel.row_dot(j, v, scratch) };
            },
        );
    }
}

/// Worker pool sized from `CARDPATH_THREADS` (all cores when unset).
pub struct Workers {
    pool: rayon::ThreadPool,
}

impl Workers {
    pub fn new(threads: Option<usize>) -> Self {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n.max(1));
        }
        Self { pool: builder.build().expect("thread pool") }
    }

    /// Reads the cap from the environment; unparsable values are ignored.
    pub fn from_env() -> Self {
        Self::new(std::env::var(THREADS_VAR).ok().and_then(|v| v.trim().parse().ok()))
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

pub fn propagate_transfer_matrix(cfg: &PropagatorConfig) -> Result<PropagatorResult> {
    TransferEngine::with_executor(cfg, Rayon).propagate()
}

pub fn propagate_enumerate(cfg: &PropagatorConfig) -> Result<PropagatorResult> {
    let sums = enumeration_chunks(cfg)?.into_par_iter().map(|r| enumerate_chunk(cfg, r)).collect::<Result<Vec<_>>>()?;
    Ok(assemble_enumeration(cfg, &sums))
}

pub fn propagate_monte_carlo(
    cfg: &PropagatorConfig,
    samples: usize,
    seed: u64,
    scheme: EuclideanScheme,
) -> Result<PropagatorResult> {
    check_monte_carlo(cfg, samples)?;
    let blocks = monte_carlo_blocks(samples)
        .into_par_iter()
        .map(|(block, count)| euclidean_block(cfg, scheme, seed, block, count))
        .collect::<Result<Vec<_>>>()?;
    let stats = blocks.into_iter().fold(McStats::default(), McStats::merge);
    Ok(finish_euclidean(cfg, stats))
}
