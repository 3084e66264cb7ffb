//! The batch commands. Each takes a manifest and a [`RunConfig`], fans
//! out over image pairs on a bounded worker pool, and merges results in
//! manifest order so outputs are reproducible regardless of scheduling.

mod ablate;
mod dwt;
mod eval;
mod fuse;
mod precompute;
mod prompt_gen;

pub use ablate::{cmd_ablate, AblateAxis};
pub use dwt::cmd_dwt;
pub use eval::{cmd_eval, EvalOutput};
pub use fuse::{cmd_fuse_smoke, FuseStage, FuseSummary};
pub use precompute::cmd_precompute;
pub use prompt_gen::cmd_prompt_gen;

use rayon::prelude::*;

use crate::manifest::PairedEntry;

/// Run `f` over the entries on `workers` threads, results in input order.
pub(crate) fn run_pool<T, F>(workers: usize, entries: &[PairedEntry], f: F) -> Vec<T>
where
    F: Fn(&PairedEntry) -> T + Sync,
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("worker pool");
    pool.install(|| entries.par_iter().map(f).collect())
}

/// What happened to one item of a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemStatus {
    Produced,
    Cached,
    Skipped(String),
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct ItemOutcome {
    pub stem: String,
    pub status: ItemStatus,
}

/// Batch result counts plus per-item notes for anything abnormal.
#[derive(Debug, Clone, Default)]
pub struct BatchSummary {
    pub dataset: String,
    pub seed: u64,
    pub produced: usize,
    pub cached: usize,
    pub skipped: usize,
    pub failed: usize,
    pub notes: Vec<String>,
}

impl BatchSummary {
    pub(crate) fn absorb(&mut self, outcome: &ItemOutcome) {
        match &outcome.status {
            ItemStatus::Produced => self.produced += 1,
            ItemStatus::Cached => self.cached += 1,
            ItemStatus::Skipped(reason) => {
                self.skipped += 1;
                self.notes.push(format!("{}: skipped: {reason}", outcome.stem));
            }
            ItemStatus::Failed(reason) => {
                self.failed += 1;
                self.notes.push(format!("{}: failed: {reason}", outcome.stem));
            }
        }
    }

    pub fn total(&self) -> usize {
        self.produced + self.cached + self.skipped + self.failed
    }

    /// Nonzero when any item failed, for process exit status.
    pub fn exit_code(&self) -> u8 {
        u8::from(self.failed > 0)
    }
}

impl std::fmt::Display for BatchSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "dataset={} seed={} produced={} cached={} skipped={} failed={}",
            self.dataset, self.seed, self.produced, self.cached, self.skipped, self.failed
        )?;
        for note in &self.notes {
            writeln!(f, "  {note}")?;
        }
        Ok(())
    }
}
