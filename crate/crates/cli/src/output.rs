//! Artifact files: series.csv, summary.json and plot.gp, each written to a
//! temporary file in the target directory and renamed into place.

use std::io::Write;
use std::path::Path;

pub const SERIES_FILE: &str = "series.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "plot.gp";
pub const SERIES_HEADER: &str = "t,h_s_norm,weighted_norm";

/// One row of series.csv.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub h_s_norm: f64,
    pub weighted_norm: f64,
}

/// Writes `bytes` to `dir/name` via a sibling temporary file and rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any double.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{}\n", fmt17(r.t), fmt17(r.h_s_norm), fmt17(r.weighted_norm)));
    }
    out
}

pub fn plot_script(title: &str, s: f64, gamma: f64, log_scale: bool) -> String {
    let mut out = String::new();
    out.push_str("set datafile separator ','\n");
    out.push_str("set key autotitle columnhead\n");
    out.push_str(&format!("set title '{title}'\n"));
    out.push_str("set xlabel 't'\n");
    if log_scale {
        out.push_str("set logscale y\n");
        out.push_str("set format y '%.0e'\n");
    }
    out.push_str(&format!(
        "plot '{SERIES_FILE}' using 1:2 with linespoints title 'H_s norm (s = {s})', \\\n     '' using 1:3 with lines title 'weighted norm (γ = {gamma:.6})'\n"
    ));
    out
}
