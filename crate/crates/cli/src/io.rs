//! File helpers shared by the subcommands.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use qpdrive::ingest::load_csv;
use qpdrive::{Real, Stage, TimeSeries};

/// `true` when the first non-empty line has a non-numeric first field.
fn has_header(path: &Path) -> std::io::Result<bool> {
    let reader = BufReader::new(File::open(path)?);
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let first = line.split(',').next().unwrap_or("").trim();
        return Ok(first.parse::<f64>().is_err());
    }
    Ok(false)
}

/// Loads a CSV series, detecting an optional header line.
pub fn read_series<T: Real>(path: &Path, dt: f64) -> qpdrive::Result<TimeSeries<T>> {
    let inner = || {
        let header = has_header(path)?;
        load_csv(path, T::lit(dt), header)
    };
    inner().map_err(|e| e.at(Stage::Ingest))
}

/// Writes a numeric table with a header line. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_table(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:?}"));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn print_json<S: Serialize>(value: &S) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn channel_header(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|c| format!("{prefix}{c}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_detection() {
        let dir = tempfile::tempdir().unwrap();
        let with = dir.path().join("a.csv");
        let without = dir.path().join("b.csv");
        std::fs::write(&with, "x,y\n1,2\n3,4\n").unwrap();
        std::fs::write(&without, "\n-1.5e-3,2\n3,4\n").unwrap();
        let a = read_series::<f64>(&with, 1.0).unwrap();
        let b = read_series::<f64>(&without, 1.0).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.channel_names().unwrap(), ["x", "y"]);
        assert_eq!(b.len(), 2);
        assert!(b.channel_names().is_none());
    }

    #[test]
    fn table_values_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let v = [0.1 + 0.2, -1.0 / 3.0, 1e-300];
        write_table(&path, &channel_header("y", 3), [v.to_vec(), v.to_vec()]).unwrap();
        let ts = read_series::<f64>(&path, 1.0).unwrap();
        for (c, x) in v.iter().enumerate() {
            assert_eq!(ts.values()[(0, c)].to_bits(), x.to_bits());
        }
    }

    #[test]
    fn missing_file_is_labeled_ingest() {
        let err = read_series::<f64>(Path::new("/nonexistent/data.csv"), 1.0).unwrap_err();
        assert!(err.to_string().starts_with("ingest stage failed"), "{err}");
    }
}
