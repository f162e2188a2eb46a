//! Parallel generation and ranking. Outputs follow input order regardless of
//! the worker count.

use followup_core::confounders::{assemble_sample, AuditRecord, ConfigError, GeneratorConfig, Resources};
use followup_core::ranking::{self, RankedList, ScoreError, Scorer};
use followup_core::{Conversation, Sample};
use rayon::prelude::*;

/// Runs `f` on a pool of `workers` threads; 0 lets rayon decide.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("cannot build a {workers}-thread pool ({e}); using the global pool");
            f()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub samples: Vec<Sample>,
    pub audit: Vec<AuditRecord>,
}

/// One sample per turn boundary of every conversation, in corpus order.
pub fn generate(
    conversations: &[Conversation],
    res: &Resources<'_>,
    config: &GeneratorConfig,
    workers: usize,
) -> Result<Generated, ConfigError> {
    config.check(res)?;
    let skeletons: Vec<_> = conversations.iter().flat_map(Conversation::skeletons).collect();
    let assembled: Vec<_> =
        with_workers(workers, || skeletons.par_iter().map(|sk| assemble_sample(sk, res, config)).collect());
    let mut samples = Vec::with_capacity(assembled.len());
    let mut audit = Vec::new();
    for a in assembled {
        samples.push(a.sample);
        audit.extend(a.audit);
    }
    Ok(Generated { samples, audit })
}

pub fn rank_all(samples: &[Sample], scorer: &(dyn Scorer + Sync), workers: usize) -> Result<Vec<RankedList>, ScoreError> {
    with_workers(workers, || samples.par_iter().map(|s| ranking::rank(s, scorer)).collect())
}
