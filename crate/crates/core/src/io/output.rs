//! CSV datasets with `#`-prefixed metadata lines.

use crate::Result;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Version recorded in every dataset, `git describe` when built from a checkout.
pub const VERSION: &str = env!("PHASEFLOW_VERSION");

pub const UNITS_NOTE: &str = "dimensionless; hbar = m = 1 unless overridden";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata {
    pub scenario: String,
    pub gauge: String,
    pub method: Option<String>,
    pub seed: u64,
    pub hbar: f64,
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(scenario: &str, gauge: &str, seed: u64, hbar: f64) -> Self {
        Metadata { scenario: scenario.into(), gauge: gauge.into(), method: None, seed, hbar, extra: Vec::new() }
    }

    pub fn with_method(mut self, method: &str) -> Self {
        self.method = Some(method.into());
        self
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }

    fn lines(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("version".to_string(), VERSION.to_string()),
            ("scenario".to_string(), self.scenario.clone()),
            ("gauge".to_string(), self.gauge.clone()),
        ];
        if let Some(m) = &self.method {
            out.push(("method".into(), m.clone()));
        }
        let units = if self.hbar == 1.0 { UNITS_NOTE.to_string() } else { format!("dimensionless; hbar = {}", self.hbar) };
        out.push(("units".into(), units));
        out.push(("seed".into(), self.seed.to_string()));
        out.extend(self.extra.iter().cloned());
        out
    }
}

/// Column-oriented CSV writer; the metadata block precedes the header row.
pub struct CsvWriter {
    inner: csv::Writer<BufWriter<File>>,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, meta: &Metadata, header: &[&str]) -> Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = BufWriter::new(File::create(path)?);
        for (k, v) in meta.lines() {
            writeln!(file, "# {k}: {v}")?;
        }
        let mut inner = csv::Writer::from_writer(file);
        inner.write_record(header)?;
        Ok(CsvWriter { inner, columns: header.len() })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        debug_assert_eq!(values.len(), self.columns);
        self.inner.write_record(values.iter().map(|v| v.to_string()))?;
        Ok(())
    }

    pub fn record<S: AsRef<[u8]>>(&mut self, fields: &[S]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.columns);
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Parsed dataset: metadata pairs, header and raw rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let metadata = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l[1..].split_once(':').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())))
            .collect();
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = reader.headers()?.iter().map(str::to_string).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Dataset { metadata, header, rows })
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_and_columns_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.csv");
        let meta = Metadata::new("harmonic", "default", 7, 1.0).with_method("CCS").with("dt", 0.01);
        let mut w = CsvWriter::create(&path, &meta, &["t", "value"]).unwrap();
        w.row(&[0.0, 0.1]).unwrap();
        w.row(&[0.5, f64::NAN]).unwrap();
        w.finish().unwrap();
        let d = Dataset::read(&path).unwrap();
        assert_eq!(d.meta("version"), Some(VERSION));
        assert_eq!(d.meta("scenario"), Some("harmonic"));
        assert_eq!(d.meta("method"), Some("CCS"));
        assert_eq!(d.meta("seed"), Some("7"));
        assert_eq!(d.meta("units"), Some(UNITS_NOTE));
        assert_eq!(d.header, ["t", "value"]);
        let v = d.column("value").unwrap();
        assert_eq!(v[0], 0.1);
        assert!(v[1].is_nan());
    }
}
