//! Grids of experiments.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiment::{self, RunSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub config_hash: String,
    pub seed: u64,
    pub topology: String,
    pub n: usize,
    pub rate: String,
    pub policy: String,
    pub error: String,
    pub summary: Option<RunSummary>,
}

/// Runs every config, in parallel, keeping grid order. A failing entry is
/// recorded in its row and does not stop the others. With `artifacts` each
/// entry writes its files into `<out_dir>/<index>-<hash>`.
pub fn sweep(grid: &[ExperimentConfig], artifacts: bool) -> Vec<SweepRow> {
    grid.par_iter()
        .enumerate()
        .map(|(index, config)| {
            let result = if artifacts {
                let mut c = config.clone();
                c.out_dir = config.out_dir.join(format!("{index:04}-{}", config.hash()));
                experiment::run_experiment(&c).map(|(s, _)| s)
            } else {
                experiment::execute(config).map(|o| o.summary)
            };
            SweepRow {
                index,
                config_hash: config.hash(),
                seed: config.seed,
                topology: config.topology.to_string(),
                n: config.n,
                rate: config.rate.to_string(),
                policy: config.policy.to_string(),
                error: result
                    .as_ref()
                    .err()
                    .map(ToString::to_string)
                    .unwrap_or_default(),
                summary: result.ok(),
            }
        })
        .collect()
}

const RESULT_COLUMNS: [&str; 17] = [
    "sources",
    "preload_source",
    "alpha",
    "delta_len",
    "delta_pipe",
    "injection_probability",
    "slots",
    "injected",
    "delivered",
    "queue_total",
    "ratio",
    "max_bound_ratio",
    "bound_violations",
    "overruns",
    "fast_link_failures",
    "discoveries",
    "token_passes",
];

/// Aggregated CSV: one row per grid entry; result columns are empty for
/// failed entries.
pub fn write_summary<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "index",
        "config_hash",
        "seed",
        "topology",
        "n",
        "rate",
        "policy",
        "error",
    ];
    header.extend(RESULT_COLUMNS);
    w.write_record(&header)?;
    for r in rows {
        let mut record = vec![
            r.index.to_string(),
            r.config_hash.clone(),
            r.seed.to_string(),
            r.topology.clone(),
            r.n.to_string(),
            r.rate.clone(),
            r.policy.clone(),
            r.error.clone(),
        ];
        match &r.summary {
            Some(s) => record.extend([
                s.sources.to_string(),
                s.preload_source.to_string(),
                s.alpha.to_string(),
                s.delta_len.to_string(),
                s.delta_pipe.to_string(),
                s.injection_probability.to_string(),
                s.slots.to_string(),
                s.injected.to_string(),
                s.delivered.to_string(),
                s.queue_total.to_string(),
                s.ratio.to_string(),
                s.max_bound_ratio.to_string(),
                s.bound_violations.to_string(),
                s.overruns.to_string(),
                s.fast_link_failures.to_string(),
                s.discoveries.to_string(),
                s.token_passes.to_string(),
            ]),
            None => record.extend(RESULT_COLUMNS.iter().map(|_| String::new())),
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_file(rows: &[SweepRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    write_summary(rows, std::fs::File::create(path)?)
}
