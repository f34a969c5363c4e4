use std::fs::File;
use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::data::Dataset;
use crate::error::{io_err, Error, Result};
use crate::numeric::Matrix;

/// Data rows of a comma-separated file with their 1-based line numbers.
/// A first row containing any non-numeric field is taken as a header.
pub(crate) fn read_rows(path: &Path) -> Result<Vec<(u64, StringRecord)>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if rows.is_empty() && i == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        rows.push((line, record));
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: format!("{}: no data rows", path.display()),
        });
    }
    Ok(rows)
}

pub(crate) fn parse_real(field: &str, line: u64, column: usize) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            message: format!("column {column}: expected a finite number, found {field:?}"),
        }),
    }
}

/// Loads a dataset from CSV. `label_column` is the 0-based column holding
/// integer labels; every other column is a real-valued feature.
pub fn load_csv(path: impl AsRef<Path>, label_column: usize, num_classes: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    let arity = rows[0].1.len();
    if arity < 2 {
        return Err(Error::Parse {
            line: rows[0].0,
            message: "need at least one feature column and a label column".into(),
        });
    }
    if label_column >= arity {
        return Err(Error::Parse {
            line: rows[0].0,
            message: format!("label column {label_column} out of range for {arity} columns"),
        });
    }
    let mut features = Vec::with_capacity(rows.len() * (arity - 1));
    let mut labels = Vec::with_capacity(rows.len());
    for (line, record) in &rows {
        let line = *line;
        if record.len() != arity {
            return Err(Error::Parse {
                line,
                message: format!("expected {arity} fields, found {}", record.len()),
            });
        }
        for (col, field) in record.iter().enumerate() {
            if col == label_column {
                let label = field.parse::<i64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("label {field:?} is not an integer"),
                })?;
                if label < 0 || label as usize >= num_classes {
                    return Err(Error::Parse {
                        line,
                        message: format!("label {label} outside [0, {num_classes})"),
                    });
                }
                labels.push(label as usize);
            } else {
                features.push(parse_real(field, line, col)?);
            }
        }
    }
    let features = Matrix::new(labels.len(), arity - 1, features)?;
    Dataset::new(features, labels, num_classes)
}

/// Writes `x0,…,x{d-1},label` with a header row. Reals use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let header: Vec<String> = (0..d.dim()).map(|j| format!("x{j}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",label\n");
    for (row, label) in d.features().iter_rows().zip(d.labels()) {
        for v in row {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{label}\n"));
    }
    let mut file = File::create(path).map_err(io_err(path))?;
    file.write_all(out.as_bytes()).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_blobs;
    use crate::numeric::{Purpose, RngStream};
    use std::fs;

    #[test]
    fn reads_three_rows_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "a,b,label\n1.0,2.0,0\n3,4,1\r\n-5e-1,6,1\n").unwrap();
        let d = load_csv(&p, 2, 2).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.labels(), &[0, 1, 1]);
        assert_eq!(d.features().row(2), &[-0.5, 6.0]);
    }

    #[test]
    fn label_column_can_be_first_and_header_optional() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "2,0.5\n0,1.5\n").unwrap();
        let d = load_csv(&p, 0, 3).unwrap();
        assert_eq!(d.labels(), &[2, 0]);
        assert_eq!(d.dim(), 1);
    }

    #[test]
    fn text_in_feature_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "a,b,label\n1,2,0\n1,oops,1\n").unwrap();
        match load_csv(&p, 2, 2).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn ragged_and_out_of_range_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "1,2,0\n1,1\n").unwrap();
        assert!(matches!(load_csv(&p, 2, 2), Err(Error::Parse { line: 2, .. })));
        fs::write(&p, "1,2,0\n1,1,2\n").unwrap();
        assert!(matches!(load_csv(&p, 2, 2), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn blobs_round_trip_exactly() {
        let d = gen_blobs(30, 3, 4, 0.7, &mut RngStream::new(5, Purpose::DataGen)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("blobs.csv");
        write_csv(&d, &p).unwrap();
        let back = load_csv(&p, 4, 3).unwrap();
        assert_eq!(back.labels(), d.labels());
        for (a, b) in back.features().as_slice().iter().zip(d.features().as_slice()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}
