//! Plain CSV: one matrix row per line, no header. Vectors may be written on a
//! single line or one value per line.

use std::path::Path;

use super::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};

fn records(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("record {}: {f:?}: {e}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

pub fn parse_matrix_csv(text: &str) -> Result<DenseMatrix> {
    let rows = records(text)?;
    if rows.is_empty() {
        return Err(Error::Empty("matrix"));
    }
    DenseMatrix::from_rows(&rows)
}

pub fn parse_vector_csv(text: &str) -> Result<DenseVector> {
    let rows = records(text)?;
    let values: Vec<f64> = match rows.as_slice() {
        [single] => single.clone(),
        many if many.iter().all(|r| r.len() == 1) => many.iter().map(|r| r[0]).collect(),
        _ => {
            return Err(Error::Parse(
                "vector must be a single line or one value per line".into(),
            ))
        }
    };
    DenseVector::new(values)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix_csv(&std::fs::read_to_string(path)?)
}

pub fn read_vector_csv(path: impl AsRef<Path>) -> Result<DenseVector> {
    parse_vector_csv(&std::fs::read_to_string(path)?)
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// One value per line.
pub fn write_vector_csv(path: impl AsRef<Path>, v: &DenseVector) -> Result<()> {
    let text: String = v.iter().map(|x| format!("{x}\n")).collect();
    std::fs::write(path, text)?;
    Ok(())
}
