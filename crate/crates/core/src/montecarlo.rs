//! Parallel Monte Carlo campaigns with output independent of worker count.
//!
//! Sample `i` always uses `SeedTag::new(master, i)`, and samples are processed
//! in fixed-size chunks whose boundaries do not depend on the pool. Results
//! reach the caller in index order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::{FbmPlan, GenPlan};
use crate::pathstats::{self, PathStats};
use crate::rng::SeedTag;

/// Paths generated together by one worker.
pub const CHUNK: u64 = 16;
// Chunks in flight between two ordered hand-offs to the sink.
const BLOCK_CHUNKS: u64 = 256;

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidParameter("worker count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

/// Runs `work` on chunks of seed tags for samples `0..n` and feeds every
/// result to `sink` in sample order.
pub fn for_each_ordered<T, W, S>(master: u64, n: u64, workers: usize, work: W, mut sink: S) -> Result<()>
where
    T: Send,
    W: Fn(&[SeedTag]) -> Vec<T> + Sync,
    S: FnMut(u64, T) -> Result<()>,
{
    let pool = thread_pool(workers)?;
    let block = CHUNK * BLOCK_CHUNKS;
    let mut start = 0;
    while start < n {
        let end = (start + block).min(n);
        let chunks: Vec<(u64, u64)> = (start..end)
            .step_by(CHUNK as usize)
            .map(|a| (a, (a + CHUNK).min(end)))
            .collect();
        let results: Vec<Vec<T>> = pool.install(|| {
            chunks
                .par_iter()
                .map(|&(a, b)| {
                    let seeds: Vec<SeedTag> = (a..b).map(|i| SeedTag::new(master, i)).collect();
                    work(&seeds)
                })
                .collect()
        });
        let mut index = start;
        for chunk in results {
            for item in chunk {
                sink(index, item)?;
                index += 1;
            }
        }
        start = end;
    }
    Ok(())
}

/// Collects [`for_each_ordered`] results into a vector.
pub fn map_ordered<T, W>(master: u64, n: u64, workers: usize, work: W) -> Result<Vec<T>>
where
    T: Send,
    W: Fn(&[SeedTag]) -> Vec<T> + Sync,
{
    let mut out = Vec::with_capacity(n as usize);
    for_each_ordered(master, n, workers, work, |_, v| {
        out.push(v);
        Ok(())
    })?;
    Ok(out)
}

/// Path statistics for samples `0..n` of `plan`.
pub fn path_stats(plan: &GenPlan, master: u64, n: u64, workers: usize) -> Result<Vec<PathStats>> {
    map_ordered(master, n, workers, |seeds| {
        plan.generate_batch(seeds)
            .iter()
            .map(|p| pathstats::extract(p).expect("generated paths are non-empty"))
            .collect()
    })
}

/// Leftmost argmax of FBM on `[0, 1]` for samples `0..n`.
pub fn fbm_argmax(plan: &FbmPlan, master: u64, n: u64, workers: usize) -> Result<Vec<f64>> {
    let t = plan.len() as f64;
    map_ordered(master, n, workers, |seeds| {
        plan.generate_batch(seeds)
            .iter()
            .map(|b| {
                let mut best = 0;
                for (i, &v) in b.iter().enumerate() {
                    if v > b[best] {
                        best = i;
                    }
                }
                best as f64 / t
            })
            .collect()
    })
}
