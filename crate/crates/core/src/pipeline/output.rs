use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scan::{ScanOutput, ScanRow};
use crate::error::{Error, Result};

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// CSV text with a header row, one record per item.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn scan_csv(rows: &[ScanRow]) -> Result<String> {
    if rows.is_empty() {
        return Ok("k,phi_pp,phi_mm,re_phi,reE,imE,status\n".into());
    }
    to_csv(rows)
}

pub fn read_scan_csv(text: &str) -> Result<Vec<ScanRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

pub fn summary_json(out: &ScanOutput) -> Result<String> {
    serde_json::to_string_pretty(&out.summary).map_err(|e| Error::Io(e.to_string()))
}

/// Write the scan CSV and JSON summary into `dir`; returns both paths.
pub fn write_scan(out: &ScanOutput, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let names = &out.summary.config.output;
    let csv_path = dir.join(&names.csv);
    let json_path = dir.join(&names.summary);
    std::fs::write(&csv_path, scan_csv(&out.rows)?)?;
    std::fs::write(&json_path, summary_json(out)? + "\n")?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_keeps_header_and_nan() {
        let rows = vec![
            ScanRow { k: -1.0, phi_pp: 0.1, phi_mm: 0.2, re_phi: 0.15, re_e: 1.5, im_e: -0.2, status: "ok".into() },
            ScanRow {
                k: 0.5,
                phi_pp: f64::NAN,
                phi_mm: f64::NAN,
                re_phi: f64::NAN,
                re_e: f64::NAN,
                im_e: f64::NAN,
                status: "exceptional_point".into(),
            },
        ];
        let text = scan_csv(&rows).unwrap();
        assert!(text.starts_with("k,phi_pp,phi_mm,re_phi,reE,imE,status\n"));
        let back = read_scan_csv(&text).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(back[1].re_phi.is_nan() && back[1].status == "exceptional_point");
        assert_eq!(scan_csv(&[]).unwrap().lines().count(), 1);
    }
}
