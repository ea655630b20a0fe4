//! Worker scheduling over sample-index ranges, with checkpoints between chunks.
//!
//! Indices `[next, samples)` are processed in chunks of `checkpoint_every`.
//! Each chunk is cut into one contiguous slice per worker; workers fill
//! private tallies that are merged once the chunk is done. Counts are
//! integers and every index has its own RNG stream, so the merged result
//! does not depend on the worker count or on where a run was interrupted.

use std::io::Write as _;
use std::path::Path;
use std::thread;
use std::time::Instant;

use seplab::pipeline::{Pipeline, Tally};

use crate::checkpoint::{self, checkpoint_path, CheckpointState};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::report::ExperimentReport;

#[derive(Clone, Copy, Debug, Default)]
pub struct RunControl {
    /// Stop after this many chunks in this session, leaving a checkpoint.
    pub max_chunks: Option<usize>,
    /// Progress lines on stderr.
    pub progress: bool,
}

#[derive(Clone, Debug)]
pub enum RunOutcome {
    Completed(Box<ExperimentReport>),
    Stopped { next_index: u64 },
}

impl RunOutcome {
    pub fn completed(self) -> Option<ExperimentReport> {
        match self {
            RunOutcome::Completed(r) => Some(*r),
            RunOutcome::Stopped { .. } => None,
        }
    }
}

pub fn pipeline_for(cfg: &ExperimentConfig) -> CliResult<Pipeline> {
    Ok(Pipeline::with_method(
        cfg.shape,
        cfg.measure_spec()?,
        cfg.seed,
        cfg.bins,
        cfg.ppt_method,
    )?)
}

/// Splits `[start, end)` into `parts` contiguous slices of near-equal length.
pub fn split_range(start: u64, end: u64, parts: usize) -> Vec<std::ops::Range<u64>> {
    let len = end - start;
    let parts = parts as u64;
    (0..parts)
        .map(|w| start + len * w / parts..start + len * (w + 1) / parts)
        .filter(|r| !r.is_empty())
        .collect()
}

fn run_chunk(p: &Pipeline, start: u64, end: u64, workers: usize) -> CliResult<Tally> {
    let slices = split_range(start, end, workers);
    let parts: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = slices[1..]
            .iter()
            .map(|r| {
                let r = r.clone();
                s.spawn(move || p.run_range(r))
            })
            .collect();
        let first = p.run_range(slices[0].clone());
        std::iter::once(first)
            .chain(handles.into_iter().map(|h| h.join().expect("worker panicked")))
            .collect()
    });
    let mut tally = p.empty_tally();
    for part in parts {
        tally.merge_from(&part?)?;
    }
    Ok(tally)
}

/// Runs from `start` (or from scratch) until done or until `control` says stop.
/// Writes a checkpoint after each chunk when the config has an output directory.
pub fn run_from(
    cfg: &ExperimentConfig,
    start: Option<CheckpointState>,
    control: RunControl,
) -> CliResult<RunOutcome> {
    cfg.validate()?;
    let p = pipeline_for(cfg)?;
    let (mut tally, mut next, prior_secs) = match start {
        Some(st) => {
            st.check_config(cfg)?;
            (st.tally, st.next_index, st.elapsed_secs)
        }
        None => (p.empty_tally(), 0, 0.0),
    };
    let clock = Instant::now();
    let mut chunks = 0usize;
    while next < cfg.samples {
        if control.max_chunks.is_some_and(|m| chunks >= m) {
            return Ok(RunOutcome::Stopped { next_index: next });
        }
        let end = next.saturating_add(cfg.checkpoint_every).min(cfg.samples);
        let part = run_chunk(&p, next, end, cfg.workers)?;
        tally.merge_from(&part)?;
        next = end;
        chunks += 1;
        let elapsed = prior_secs + clock.elapsed().as_secs_f64();
        if let Some(dir) = &cfg.out_dir {
            let st = CheckpointState::new(cfg, next, elapsed, tally.clone());
            checkpoint::save(&checkpoint_path(dir), &st)?;
        }
        if control.progress {
            let _ = writeln!(
                std::io::stderr(),
                "[seplab] {next}/{} samples, {} ppt, {:.1} s",
                cfg.samples,
                tally.n_ppt,
                elapsed
            );
        }
    }
    // A run that was already complete keeps its recorded time.
    let elapsed = if chunks == 0 { prior_secs } else { prior_secs + clock.elapsed().as_secs_f64() };
    Ok(RunOutcome::Completed(Box::new(ExperimentReport::build(cfg, &tally, elapsed)?)))
}

/// Fresh run to completion.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let outcome = run_from(cfg, None, RunControl::default())?;
    Ok(outcome.completed().expect("an unbounded run completes"))
}

/// Continues from the checkpoint at `path`. A checkpoint that already covers
/// every sample is turned straight into a report.
pub fn resume(cfg: &ExperimentConfig, path: &Path, control: RunControl) -> CliResult<RunOutcome> {
    let st = checkpoint::load(path)?;
    run_from(cfg, Some(st), control)
}

/// Report from a checkpoint alone, using the config stored inside it.
pub fn report_from_checkpoint(path: &Path) -> CliResult<(ExperimentConfig, ExperimentReport)> {
    let st = checkpoint::load(path)?;
    let cfg = ExperimentConfig::from_pairs(&st.config)?;
    st.check_config(&cfg)?;
    let report = ExperimentReport::build(&cfg, &st.tally, st.elapsed_secs)?;
    Ok((cfg, report))
}
