//! Table emission: CSV for spreadsheets, versioned JSON for tooling, and
//! bare two-column series for plotting.
//!
//! Output is deterministic down to the byte: float formatting is the
//! shortest decimal that parses back to the identical value (the point
//! decimal separator, never a locale), column order is the declaration
//! order of [`SweepRow`], and JSON keys keep struct order. Identical tables
//! produce identical files on any machine and any worker count.

use crate::sweep::SweepRow;
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Version tag stamped into every JSON document; `schema/sweep.schema.json`
/// describes the shape this version promises.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("CSV serialization failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("no such column: {name}")]
    UnknownColumn { name: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EmitError + '_ {
    move |source| EmitError::Io { path: path.to_path_buf(), source }
}

/// The whole table as CSV: header row first (even for an empty table),
/// then one line per row in the order given.
pub fn csv_string(rows: &[SweepRow]) -> Result<String, EmitError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        // serde-driven headers are only written with the first record.
        writer.write_record(SweepRow::COLUMNS)?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .expect("flushing an in-memory buffer cannot fail");
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Parse emitted CSV back into rows (empty cells become `None`).
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, EmitError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    schema_version: &'static str,
    rows: &'a [SweepRow],
}

/// The whole table as a schema-versioned JSON document.
pub fn json_string(rows: &[SweepRow]) -> String {
    let doc = SweepDocument { schema_version: SCHEMA_VERSION, rows };
    let mut text = serde_json::to_string_pretty(&doc).expect("rows serialize to JSON");
    text.push('\n');
    text
}

/// A two-column whitespace-separated series, one line per row where both
/// columns are present and numeric; rows with holes are skipped. The header
/// line names the pair for the plotting tool.
pub fn plot_series(rows: &[SweepRow], x: &str, y: &str) -> Result<String, EmitError> {
    for name in [x, y] {
        if !SweepRow::COLUMNS.contains(&name) {
            return Err(EmitError::UnknownColumn { name: name.to_string() });
        }
    }
    let mut out = format!("# {x} {y}\n");
    for row in rows {
        let value = serde_json::to_value(row).expect("rows serialize");
        if let (Some(a), Some(b)) = (value[x].as_f64(), value[y].as_f64()) {
            out.push_str(&format!("{a} {b}\n"));
        }
    }
    Ok(out)
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<(), EmitError> {
    std::fs::write(path, csv_string(rows)?).map_err(io_err(path))
}

pub fn write_json(path: &Path, rows: &[SweepRow]) -> Result<(), EmitError> {
    std::fs::write(path, json_string(rows)).map_err(io_err(path))
}

pub fn write_plot(path: &Path, rows: &[SweepRow], x: &str, y: &str) -> Result<(), EmitError> {
    std::fs::write(path, plot_series(rows, x, y)?).map_err(io_err(path))
}

/// Write the standard sweep bundle into `dir` (created if missing):
/// `sweep.csv`, `sweep.json`, and `k`-indexed series for the central
/// exponent and the volume lower bound. Returns the paths written.
pub fn emit_sweep(dir: &Path, rows: &[SweepRow]) -> Result<Vec<PathBuf>, EmitError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let csv_path = dir.join("sweep.csv");
    write_csv(&csv_path, rows)?;
    written.push(csv_path);

    let json_path = dir.join("sweep.json");
    write_json(&json_path, rows)?;
    written.push(json_path);

    for y in ["sigma_c", "lower_bound"] {
        let path = dir.join(format!("k_vs_{y}.dat"));
        write_plot(&path, rows, "k", y)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<SweepRow> {
        let full = SweepRow {
            k: 5,
            lambda_s: Some(0.30800714881141583),
            lambda_c: Some(0.6431041321077904),
            lambda_u: Some(5.048888719080794),
            theta: Some(2.0879118424311678),
            beta: Some(0.2021312864485644),
            gamma: Some(0.8844322740561264),
            epsilon: Some(0.019128945005065413),
            c1_distance: Some(0.66),
            i_h: Some(-0.022),
            n_r: Some(3),
            c_estimate: Some(0.41),
            lower_bound: Some(4.3e-5),
            sigma_c: Some(-0.4414),
            sigma_c_ci_lo: Some(-0.4415),
            sigma_c_ci_hi: Some(-0.4413),
            sigma_u: Some(1.6193),
            certified: Some(true),
            error: None,
        };
        let partial = SweepRow {
            k: 6,
            lambda_u: Some(6.033167440633103),
            error: Some("chart: radius too large, with a comma".to_string()),
            ..SweepRow::default()
        };
        vec![full, partial]
    }

    #[test]
    fn empty_table_is_a_lone_header() {
        let text = csv_string(&[]).unwrap();
        let expected = format!("{}\n", SweepRow::COLUMNS.join(","));
        assert_eq!(text, expected);
    }

    #[test]
    fn header_matches_the_declared_column_order() {
        let text = csv_string(&sample_rows()).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, SweepRow::COLUMNS.join(","));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = sample_rows();
        let text = csv_string(&rows).unwrap();
        let parsed = parse_csv(&text).unwrap();
        // Shortest-round-trip float formatting makes this equality exact,
        // well inside the 1e-12 the format promises.
        assert_eq!(parsed, rows, "CSV round-trip altered the table:\n{text}");
    }

    #[test]
    fn csv_uses_point_decimals_and_empty_cells() {
        let text = csv_string(&sample_rows()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].contains("0.6431041321077904"), "row: {}", lines[1]);
        assert!(
            lines[2].contains(",,"),
            "missing values must be empty cells: {}",
            lines[2]
        );
        assert!(!text.contains(';'), "no locale separators anywhere");
    }

    #[test]
    fn json_carries_the_schema_version() {
        let doc: serde_json::Value = serde_json::from_str(&json_string(&sample_rows())).unwrap();
        assert_eq!(doc["schema_version"], "1");
        assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
        assert_eq!(doc["rows"][0]["k"], 5);
        assert!(doc["rows"][1]["sigma_c"].is_null());
    }

    #[test]
    fn plot_series_skips_rows_with_holes() {
        let text = plot_series(&sample_rows(), "k", "sigma_c").unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# k sigma_c");
        assert_eq!(lines.len(), 2, "row with a hole is skipped: {text}");
        assert_eq!(lines[1], "5 -0.4414");
    }

    #[test]
    fn plot_series_rejects_unknown_columns() {
        match plot_series(&[], "k", "sigma") {
            Err(EmitError::UnknownColumn { name }) => assert_eq!(name, "sigma"),
            other => panic!("expected UnknownColumn, got {other:?}"),
        }
    }

    #[test]
    fn emit_sweep_writes_the_bundle() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("nested/out");
        let written = emit_sweep(&target, &sample_rows()).unwrap();
        assert_eq!(written.len(), 4);
        for path in &written {
            assert!(path.exists(), "{} missing", path.display());
        }
        let round = parse_csv(&std::fs::read_to_string(&written[0]).unwrap()).unwrap();
        assert_eq!(round, sample_rows());
    }

    #[test]
    fn unwritable_paths_surface_the_path() {
        let err = write_csv(Path::new("/nonexistent/dir/sweep.csv"), &[]).unwrap_err();
        match err {
            EmitError::Io { path, .. } => {
                assert_eq!(path, PathBuf::from("/nonexistent/dir/sweep.csv"))
            }
            other => panic!("expected Io, got {other:?}"),
        }
    }
}
