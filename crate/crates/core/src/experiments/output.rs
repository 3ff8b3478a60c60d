use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::sweep::{AggregateStats, TrialRecord};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// One JSON object per line, in trial order.
pub fn write_trials(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut w = create(path)?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Column names of the summary table for a given maximum order.
pub fn summary_header(max_order: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "model",
        "rho",
        "b",
        "trials",
        "mean_W",
        "se_W",
        "quad_EW",
        "quad_EW_torus",
        "mean_W_T",
        "mean_W_E",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((2..=max_order).map(|k| format!("mean_xi{k}")));
    h.extend((2..=max_order).map(|k| format!("se_xi{k}")));
    h.extend(
        [
            "se_W_T",
            "se_W_E",
            "mean_W_trunc",
            "mean_finite",
            "se_finite",
            "frac_no_finite",
            "frac_W_pos",
            "quad_Exi2",
            "quad_Exi2_se",
            "zscore_W",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

/// Rows of the summary table, matching [`summary_header`].
pub fn summary_rows(stats: &AggregateStats) -> Vec<Vec<String>> {
    stats
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.model.to_string(),
                r.rho.to_string(),
                r.b.to_string(),
                r.trials.to_string(),
                r.mean_w.to_string(),
                r.se_w.to_string(),
                opt(r.quad_ew),
                opt(r.quad_ew_torus),
                opt(r.mean_w_t),
                opt(r.mean_w_e),
            ];
            row.extend((2..=stats.max_order).map(|k| r.mean_xi(k).to_string()));
            row.extend((2..=stats.max_order).map(|k| r.se_xi(k).to_string()));
            row.extend([
                opt(r.se_w_t),
                opt(r.se_w_e),
                opt(r.mean_w_trunc),
                r.mean_finite.to_string(),
                r.se_finite.to_string(),
                r.frac_no_finite.to_string(),
                r.frac_w_pos.to_string(),
                opt(r.quad_xi2),
                opt(r.quad_xi2_se),
                opt(r.zscore_w),
            ]);
            row
        })
        .collect()
}

pub fn write_summary(path: &Path, stats: &AggregateStats) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(summary_header(stats.max_order))?;
    for row in summary_rows(stats) {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
