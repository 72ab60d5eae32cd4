//! Chunked parallel trial loop.
//!
//! Trials are cut into fixed chunks of [`CHUNK`] consecutive indices. Each
//! chunk owns a fresh accumulator, trial `i` draws only from streams with
//! index `i`, and accumulators merge by integer addition, so the result does
//! not depend on the number of workers or on scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};

pub(crate) const CHUNK: u64 = 1024;

pub(crate) trait Accumulator: Send {
    fn merge(&mut self, other: Self);
}

/// Runs `body(trial, acc)` for every trial in `0..trials` on `workers`
/// threads (0 means one per core) and returns the merged accumulator.
pub(crate) fn run<A, I, F>(trials: u64, workers: usize, init: I, body: F) -> Result<A>
where
    A: Accumulator,
    I: Fn() -> A + Sync + Send,
    F: Fn(u64, &mut A) + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let chunks = trials.div_ceil(CHUNK);
    let merged = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    body(t, &mut acc);
                }
                acc
            })
            .reduce(&init, |mut a, b| {
                a.merge(b);
                a
            })
    });
    Ok(merged)
}
