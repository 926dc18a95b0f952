//! CSV formats: datasets (one column per attribute) and sweep curves.
//!
//! Dataset cells that all parse as non-negative integers are used as labels
//! directly. Any other column is label-encoded by first occurrence, top to
//! bottom.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::harness::{StopTraceEntry, SweepResult};
use crate::infotheory::{Dataset, LabelColumn};
use crate::synthgen::CLASS_COLUMN;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged {
        row: u64,
        expected: u64,
        found: u64,
    },

    #[error("column `{column}`: {message}")]
    Column { column: String, message: String },

    #[error("{0}")]
    Dataset(#[from] crate::Error),
}

/// Parses a dataset. The class column is `class_name` if given, else a column
/// named `class` when present.
pub fn read_dataset<R: Read>(reader: R, class_name: Option<&str>) -> Result<Dataset, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths {
                pos,
                expected_len,
                len,
            } => CsvError::Ragged {
                row: pos.as_ref().map_or(0, |p| p.line()),
                expected: *expected_len,
                found: *len,
            },
            _ => CsvError::Csv(e),
        })?;
        for (column, field) in cells.iter_mut().zip(record.iter()) {
            column.push(field.trim().to_string());
        }
    }

    let columns = header
        .iter()
        .zip(cells)
        .map(|(name, raw)| Ok((name.clone(), encode_column(name, raw)?)))
        .collect::<Result<Vec<_>, CsvError>>()?;

    let class_index = match class_name {
        Some(name) => Some(header.iter().position(|h| h == name).ok_or_else(|| CsvError::Column {
            column: name.to_string(),
            message: "class column not found".into(),
        })?),
        None => header.iter().position(|h| h == CLASS_COLUMN),
    };
    Ok(Dataset::new(columns, class_index)?)
}

fn encode_column(name: &str, raw: Vec<String>) -> Result<LabelColumn, CsvError> {
    let numeric: Option<Vec<u32>> = raw.iter().map(|s| s.parse::<u32>().ok()).collect();
    let column = match numeric {
        Some(values) => {
            let max = values.iter().copied().max().unwrap_or(0);
            if max == u32::MAX {
                return Err(CsvError::Column {
                    column: name.to_string(),
                    message: "label too large".into(),
                });
            }
            LabelColumn::from_labels(values)?
        }
        None => {
            let mut codes: HashMap<String, u32> = HashMap::new();
            let values = raw
                .into_iter()
                .map(|s| {
                    let next = codes.len() as u32;
                    *codes.entry(s).or_insert(next)
                })
                .collect();
            LabelColumn::new(values, (codes.len() as u32).max(1))?
        }
    };
    Ok(column)
}

pub fn write_dataset<W: Write>(writer: W, ds: &Dataset) -> Result<(), CsvError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(ds.names())?;
    let mut row = Vec::with_capacity(ds.n_columns());
    for r in 0..ds.n_rows() {
        row.clear();
        row.extend(ds.columns().iter().map(|c| c.values()[r].to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Formats `value` with six significant digits, without exponent notation.
pub fn sig6(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{:.5}", value.abs());
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Writes curves as `x,mean,stddev,trials,measure,config_fingerprint`, sorted
/// by measure then x.
pub fn write_curves<W: Write>(writer: W, results: &[SweepResult]) -> Result<(), CsvError> {
    let mut rows: Vec<(&str, u64, String, String, usize, u64)> = results
        .iter()
        .flat_map(|r| {
            r.points.iter().map(move |p| {
                (
                    r.measure.as_str(),
                    p.x,
                    sig6(p.mean),
                    sig6(p.stddev),
                    p.trials,
                    r.fingerprint,
                )
            })
        })
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["x", "mean", "stddev", "trials", "measure", "config_fingerprint"])?;
    for (measure, x, mean, stddev, trials, fp) in rows {
        wtr.write_record([
            x.to_string(),
            mean,
            stddev,
            trials.to_string(),
            measure.to_string(),
            format!("{fp:016x}"),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes a stop-rule trace as `n,mean,delta`; the first delta is empty.
pub fn write_trace<W: Write>(writer: W, trace: &[StopTraceEntry]) -> Result<(), CsvError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["n", "mean", "delta"])?;
    for e in trace {
        wtr.write_record([
            e.n.to_string(),
            sig6(e.mean),
            e.delta.map(sig6).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::CurvePoint;

    #[test]
    fn string_labels_encode_by_first_occurrence() {
        let text = "f1,f2,class\nb,s,p\nb,s,q\na,t,p\n";
        let ds = read_dataset(text.as_bytes(), None).unwrap();
        assert_eq!(ds.column(0).values(), &[0, 0, 1]);
        assert_eq!(ds.column(0).cardinality(), 2);
        assert_eq!(ds.column(2).values(), &[0, 1, 0]);
        assert_eq!(ds.class_index(), Some(2));
    }

    #[test]
    fn integer_labels_are_kept() {
        let ds = read_dataset("a,b\n3,0\n1,0\n".as_bytes(), Some("a")).unwrap();
        assert_eq!(ds.column(0).values(), &[3, 1]);
        assert_eq!(ds.column(0).cardinality(), 4);
        assert_eq!(ds.class_index(), Some(0));
    }

    #[test]
    fn ragged_rows_are_reported() {
        let err = read_dataset("a,b\n1,2\n3\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, CsvError::Ragged { row: 3, expected: 2, found: 1 }), "{err}");
    }

    #[test]
    fn missing_class_column_is_reported() {
        let err = read_dataset("a,b\n1,2\n".as_bytes(), Some("y")).unwrap_err();
        assert!(matches!(err, CsvError::Column { .. }));
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(0.178662090205769), "0.178662");
        assert_eq!(sig6(1.4056390622), "1.40564");
        assert_eq!(sig6(0.0034567891), "0.00345679");
        assert_eq!(sig6(1234567.0), "1234567");
    }

    #[test]
    fn curves_sorted_by_measure_then_x() {
        let point = |x| CurvePoint { x, mean: 0.5, stddev: 0.0, trials: 1 };
        let results = vec![
            SweepResult { measure: "b".into(), points: vec![point(1)], fingerprint: 1 },
            SweepResult { measure: "a".into(), points: vec![point(2), point(1)], fingerprint: 2 },
        ];
        let mut out = Vec::new();
        write_curves(&mut out, &results).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,mean,stddev,trials,measure,config_fingerprint");
        assert_eq!(lines[1], "1,0.500000,0.00000,1,a,0000000000000002");
        assert_eq!(lines[2], "2,0.500000,0.00000,1,a,0000000000000002");
        assert_eq!(lines[3], "1,0.500000,0.00000,1,b,0000000000000001");
    }
}
