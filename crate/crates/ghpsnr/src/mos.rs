//! MOS tables: CSV with `stimulus_id`, `mos` and optional numeric score columns.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use ghpsnr_core::correlation::MosRecord;

use crate::error::{Error, Result};

fn mos_err(msg: impl Into<String>) -> Error {
    Error::Mos(msg.into())
}

/// Parses a MOS table. Any column besides `stimulus_id` and `mos` whose
/// every cell parses as a number becomes an objective score; other columns
/// are ignored.
pub fn read_mos_table<R: Read>(reader: R) -> Result<Vec<MosRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            mos_err(format!(
                "missing required column `{name}`; columns: {}",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let id_col = find("stimulus_id")?;
    let mos_col = find("mos")?;

    let rows: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(mos_err("no data rows"));
    }

    let score_cols: Vec<(usize, &str)> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != id_col && i != mos_col)
        .filter(|&(i, name)| {
            let numeric = rows.iter().all(|r| r.get(i).is_some_and(|v| v.parse::<f64>().is_ok()));
            if !numeric {
                log::debug!("MOS column `{name}` is not numeric; ignored");
            }
            numeric
        })
        .collect();

    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(rows.len());
    for (line, row) in rows.iter().enumerate() {
        let id = row.get(id_col).unwrap_or("");
        if id.is_empty() {
            return Err(mos_err(format!("row {}: empty stimulus_id", line + 1)));
        }
        if !seen.insert(id.to_string()) {
            return Err(mos_err(format!("duplicate stimulus_id `{id}`")));
        }
        let raw = row.get(mos_col).unwrap_or("");
        let mos: f64 = raw
            .parse()
            .ok()
            .filter(|m: &f64| m.is_finite())
            .ok_or_else(|| mos_err(format!("row {}: mos `{raw}` is not a finite number", line + 1)))?;
        let objective_scores: BTreeMap<String, f64> = score_cols
            .iter()
            .map(|&(i, name)| (name.to_string(), row[i].parse().unwrap()))
            .collect();
        records.push(MosRecord {
            stimulus_id: id.to_string(),
            mos,
            objective_scores,
        });
    }
    Ok(records)
}

pub fn load_mos_table(path: impl AsRef<Path>) -> Result<Vec<MosRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_mos_table(file)
}

/// Names of the objective score columns present in every record.
pub fn score_columns(records: &[MosRecord]) -> Vec<String> {
    records
        .first()
        .map(|r| r.objective_scores.keys().cloned().collect())
        .unwrap_or_default()
}
