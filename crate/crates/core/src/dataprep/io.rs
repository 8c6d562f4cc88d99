use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{DataError, Dataset};
use crate::Scalar;

/// Loads a headed CSV file; `target_column` becomes the target and every
/// other column a feature, in file order.
pub fn load_csv<F: Scalar>(path: impl AsRef<Path>, target_column: &str) -> Result<Dataset<F>, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, target_column)
}

pub fn read_csv<F: Scalar, R: Read>(reader: R, target_column: &str) -> Result<Dataset<F>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| DataError::MissingTarget(target_column.to_string()))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut target = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != headers.len() {
            return Err(DataError::RaggedRow {
                row,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let trimmed = cell.trim();
            let value: f64 = trimmed.parse().map_err(|_| DataError::NonNumeric {
                row,
                column: headers[j].clone(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DataError::NonFinite {
                    row,
                    column: headers[j].clone(),
                });
            }
            if j == target_idx {
                target.push(F::of(value));
            } else {
                features.push(F::of(value));
            }
        }
    }
    Dataset::from_flat(features, target, feature_names, target_column.to_string())
}

/// Writes features then the target as the last column. Values use the
/// shortest decimal form that parses back to the identical float.
pub fn write_csv<F: Scalar, W: Write>(data: &Dataset<F>, writer: W) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push(data.target_name());
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..data.n_rows() {
        record.clear();
        record.extend(data.row(i).iter().map(|v| v.to_string()));
        record.push(data.target()[i].to_string());
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|source| DataError::Io {
        path: "<csv writer>".into(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_row_csv() {
        let csv = "d1,d2,act\n1,2,3\n4,5,6\n7,8,9\n";
        let d: Dataset<f64> = read_csv(csv.as_bytes(), "act").unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.row(2), &[7.0, 8.0]);
        assert_eq!(d.target(), &[3.0, 6.0, 9.0]);
    }

    #[test]
    fn target_may_sit_anywhere() {
        let csv = "act,d1\n1,2\n3,4\n";
        let d: Dataset<f64> = read_csv(csv.as_bytes(), "act").unwrap();
        assert_eq!(d.feature_names(), &["d1".to_string()]);
        assert_eq!(d.target(), &[1.0, 3.0]);
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let csv = "d1,d2,act\n1,2,3\n4,abc,6\n";
        let err = read_csv::<f64, _>(csv.as_bytes(), "act").unwrap_err();
        match err {
            DataError::NonNumeric { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "d2", "abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_target_column() {
        let err = read_csv::<f64, _>("a,b\n1,2\n3,4\n".as_bytes(), "act").unwrap_err();
        assert!(matches!(err, DataError::MissingTarget(_)));
    }

    #[test]
    fn single_data_row_is_rejected() {
        let err = read_csv::<f64, _>("a,act\n1,2\n".as_bytes(), "act").unwrap_err();
        assert!(matches!(err, DataError::TooFewRows(1)));
    }

    #[test]
    fn missing_file() {
        let err = load_csv::<f64>("/nonexistent/dir/data.csv", "act").unwrap_err();
        assert!(matches!(err, DataError::Io { .. }));
    }

    #[test]
    fn full_width_descriptor_file_loads() {
        let mut text = (1..=234).map(|j| format!("d{j}")).collect::<Vec<_>>().join(",");
        text.push_str(",activity\n");
        for i in 0..100 {
            let row: Vec<String> = (0..235).map(|j| format!("{}", (i * j) % 7)).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let d: Dataset<f64> = read_csv(text.as_bytes(), "activity").unwrap();
        assert_eq!((d.n_rows(), d.n_features()), (100, 234));
    }

    #[test]
    fn write_then_read_is_exact() {
        let d = Dataset::from_rows(
            vec![vec![0.1f64, 1.0 / 3.0], vec![2.5e-17, -7.0]],
            vec![std::f64::consts::PI, 1e300],
            vec!["a".into(), "b".into()],
            "y",
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back: Dataset<f64> = read_csv(buf.as_slice(), "y").unwrap();
        assert_eq!(back, d);
    }
}
