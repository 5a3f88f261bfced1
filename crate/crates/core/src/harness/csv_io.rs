//! Trace CSV files: `run_id,algorithm,problem,seed,iter,oracle_epochs,residual,elapsed_ms`.
//!
//! Floats are written in Rust's shortest round-trip form, so parsing a file
//! back recovers every epoch count and residual exactly. Elapsed time is
//! rounded to microseconds.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::trace::TraceRecord;

pub const HEADER: [&str; 8] =
    ["run_id", "algorithm", "problem", "seed", "iter", "oracle_epochs", "residual", "elapsed_ms"];

/// All records of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub run_id: String,
    pub algorithm: String,
    pub problem: String,
    pub seed: u64,
    pub records: Vec<TraceRecord>,
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_csv<W: Write>(traces: &[RunTrace], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for t in traces {
        for r in &t.records {
            w.write_record([
                t.run_id.clone(),
                t.algorithm.clone(),
                t.problem.clone(),
                t.seed.to_string(),
                r.iter.to_string(),
                format_float(r.oracle_epochs),
                format_float(r.residual),
                format!("{:.3}", r.elapsed_ms),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::io("flushing trace CSV", e))?;
    Ok(())
}

/// Writes `traces` to `path`. An empty trace list is rejected before the file
/// is created.
pub fn emit_csv(traces: &[RunTrace], path: &Path) -> Result<()> {
    if traces.is_empty() || traces.iter().all(|t| t.records.is_empty()) {
        return Err(Error::InvalidArgument("no trace records to write".into()));
    }
    let mut buf = Vec::new();
    write_csv(traces, &mut buf)?;
    let mut file = File::create(path).map_err(|e| Error::io(path.display(), e))?;
    file.write_all(&buf).map_err(|e| Error::io(path.display(), e))?;
    Ok(())
}

/// Parses a trace CSV, regrouping rows into runs in order of first appearance.
/// `source` names the input in error messages.
pub fn parse_csv<R: Read>(input: R, source: &str) -> Result<Vec<RunTrace>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Parse(format!("{source}: {e}")))?.clone();
    if headers.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Parse(format!("{source}: unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut runs: Vec<RunTrace> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        // Header is line 1.
        let row = idx + 2;
        let bad = |what: &str| Error::Parse(format!("{source}, row {row}: {what}"));
        let record = record.map_err(|e| bad(&e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            record[k].parse::<f64>().map_err(|_| bad(&format!("bad {} {:?}", HEADER[k], &record[k])))
        };
        let seed: u64 = record[3].parse().map_err(|_| bad(&format!("bad seed {:?}", &record[3])))?;
        let iter: usize = record[4].parse().map_err(|_| bad(&format!("bad iter {:?}", &record[4])))?;
        let rec = TraceRecord { iter, oracle_epochs: num(5)?, residual: num(6)?, elapsed_ms: num(7)? };
        match runs.iter_mut().find(|r| r.run_id == record[0]) {
            Some(run) => run.records.push(rec),
            None => runs.push(RunTrace {
                run_id: record[0].to_string(),
                algorithm: record[1].to_string(),
                problem: record[2].to_string(),
                seed,
                records: vec![rec],
            }),
        }
    }
    Ok(runs)
}

pub fn read_csv(path: &Path) -> Result<Vec<RunTrace>> {
    let file = File::open(path).map_err(|e| Error::io(path.display(), e))?;
    parse_csv(file, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<RunTrace> {
        vec![RunTrace {
            run_id: "eg-matrix-game-s0".into(),
            algorithm: "eg".into(),
            problem: "matrix-game".into(),
            seed: 0,
            records: vec![TraceRecord { iter: 0, oracle_epochs: 0.0, residual: 0.1 + 0.2, elapsed_ms: 0.25 }],
        }]
    }

    #[test]
    fn single_record_is_two_lines() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "run_id,algorithm,problem,seed,iter,oracle_epochs,residual,elapsed_ms\neg-matrix-game-s0,eg,matrix-game,0,0,0,0.30000000000000004,0.250\n");
    }

    #[test]
    fn round_trip_is_exact() {
        let mut t = sample();
        let values = [1e-300, 3.5e-7, 1.0 / 3.0, 12345.678901234567, 2.5e17, f64::MIN_POSITIVE];
        t[0].records = values
            .iter()
            .enumerate()
            .map(|(i, &x)| TraceRecord { iter: i, oracle_epochs: x * 7.0, residual: x, elapsed_ms: 0.0 })
            .collect();
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let back = parse_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn empty_traces_create_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        assert!(emit_csv(&[], &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn malformed_row_is_named() {
        let text = "run_id,algorithm,problem,seed,iter,oracle_epochs,residual,elapsed_ms\na,eg,p,0,0,0,1,0\na,eg,p,0,1,x,1,0\n";
        let err = parse_csv(text.as_bytes(), "f.csv").unwrap_err().to_string();
        assert!(err.contains("row 3") && err.contains("oracle_epochs"), "{err}");
    }
}
