//! Plain-text CSV storage for dense matrices (row-major, `.` decimal point).

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub fn write_matrix<W: Write>(m: &DMatrix<f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in m.row_iter() {
        w.write_record(row.iter().map(|x| x.to_string()))
            .map_err(|e| Error::InvalidArgument(format!("writing matrix: {e}")))?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("writing matrix: {e}")))?;
    Ok(())
}

pub fn read_matrix<R: Read>(input: R) -> Result<DMatrix<f64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidArgument(format!("row {}: {e}", line + 1)))?;
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(Error::InvalidArgument(format!("row {} has {} fields", line + 1, record.len())));
        }
        for (k, field) in record.iter().enumerate() {
            let x: f64 = field.parse().map_err(|_| {
                Error::InvalidArgument(format!("row {}, field {}: bad number {field:?}", line + 1, k + 1))
            })?;
            data.push(x);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::InvalidArgument("empty matrix file".into()))?;
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn save_matrix(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display(), e))?;
    write_matrix(m, file)
}

pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path.display(), e))?;
    read_matrix(file)
}
