//! CSV tables and their on-disk form.

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Round-trip exact float formatting: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// A CSV table held in encoded form, header first.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: &'static str,
    pub header: &'static [&'static str],
    data: Vec<u8>,
    rows: usize,
}

fn encode_record<I, T>(out: &mut Vec<u8>, record: I)
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).buffer_capacity(256).from_writer(out);
    w.write_record(record).expect("write to memory");
    w.flush().expect("flush to memory");
}

impl Table {
    pub fn new(file_name: &'static str, header: &'static [&'static str]) -> Self {
        let mut data = Vec::new();
        encode_record(&mut data, header);
        Self { file_name, header, data, rows: 0 }
    }

    pub fn push<I, T>(&mut self, row: I)
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        encode_record(&mut self.data, row);
        self.rows += 1;
    }

    /// Number of data rows, excluding the header.
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn bytes(&self) -> &[u8] {
        &self.data
    }

    /// Decode the data rows back into fields.
    pub fn records(&self) -> Vec<Vec<String>> {
        csv::Reader::from_reader(self.data.as_slice())
            .records()
            .map(|r| r.expect("table holds valid csv").iter().map(str::to_string).collect())
            .collect()
    }

    /// Values of one column, parsed as floats.
    pub fn column_f64(&self, name: &str) -> Vec<f64> {
        let idx = self.header.iter().position(|h| *h == name).expect("known column");
        self.records().iter().map(|r| r[idx].parse().expect("numeric column")).collect()
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(self.file_name);
        std::fs::write(&path, &self.data).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Key-value summary of an experiment, written as `summary.csv`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub entries: Vec<(String, String)>,
}

impl Summary {
    pub fn add(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn add_f64(&mut self, key: impl Into<String>, value: f64) {
        self.add(key, fmt_f64(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new("summary.csv", &["key", "value"]);
        for (k, v) in &self.entries {
            t.push([k, v]);
        }
        t
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: Summary,
}

impl Outcome {
    pub fn table(&self, file_name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file_name == file_name)
    }

    /// Write every table plus `summary.csv` into `dir`, creating it.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut paths = Vec::new();
        for t in &self.tables {
            paths.push(t.write_to(dir)?);
        }
        paths.push(self.summary.table().write_to(dir)?);
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, 123456789.12345679] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push(["1", ""]);
        t.push(["x,y", "2"]);
        assert_eq!(String::from_utf8(t.bytes().to_vec()).unwrap(), "a,b\n1,\n\"x,y\",2\n");
        assert_eq!(t.len(), 2);
        assert_eq!(t.records()[1], vec!["x,y".to_string(), "2".to_string()]);
    }
}
