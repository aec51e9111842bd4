//! Parallel ensemble execution: fan out over member indices, fan in by
//! merging integer accumulators. Merges are exact integer additions, so the
//! result is bit-identical for any thread count and any reduction order.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use levrep::ensemble::EnsembleConfig;
use levrep::spectra::UnfoldedWindow;
use rayon::prelude::*;

/// Runs `absorb` over every member window and merges the per-worker
/// accumulators.
pub fn reduce_members<A>(
    cfg: &EnsembleConfig,
    threads: usize,
    init: impl Fn() -> A + Send + Sync,
    absorb: impl Fn(&mut A, &UnfoldedWindow) + Send + Sync,
    merge: impl Fn(&mut A, A) + Send + Sync,
) -> Result<A>
where
    A: Send,
{
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;
    let acc = pool.install(|| {
        (0..cfg.member_count)
            .into_par_iter()
            .try_fold(
                || init(),
                |mut acc, i| -> levrep::Result<A> {
                    let w = cfg.member_window(i)?;
                    absorb(&mut acc, &w);
                    Ok(acc)
                },
            )
            .try_reduce(
                || init(),
                |mut a, b| {
                    merge(&mut a, b);
                    Ok(a)
                },
            )
    })?;
    Ok(acc)
}

/// Sequential variant that also streams every unfolded level to a dump file
/// as `member_id,x` rows. Used when `--dump-levels` is given.
pub fn reduce_members_with_dump<A>(
    cfg: &EnsembleConfig,
    dump_path: &Path,
    init: impl Fn() -> A,
    absorb: impl Fn(&mut A, &UnfoldedWindow),
) -> Result<A> {
    cfg.validate()?;
    let file = std::fs::File::create(dump_path)
        .with_context(|| format!("creating {}", dump_path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    let mut acc = init();
    for i in 0..cfg.member_count {
        let w = cfg.member_window(i)?;
        for &x in &w.levels {
            writeln!(out, "{i},{}", crate::csvio::cell(x))?;
        }
        absorb(&mut acc, &w);
    }
    out.flush()?;
    Ok(acc)
}
