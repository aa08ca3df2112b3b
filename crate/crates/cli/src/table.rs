//! CSV tables: `# key: value` metadata, one header row, then data.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of negative zero out of diffs
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Comment lines written after the data.
    pub footer: Vec<(String, String)>,
}

impl Table {
    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        self.columns.push((name.to_string(), values));
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        let _ = writeln!(s, "{}", names.join(","));
        for r in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|(_, c)| fmt_f64(c[r])).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        for (k, v) in &self.footer {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    /// Inverse of [`Table::to_csv`]. Comment lines before the header are
    /// metadata, those after it footer.
    pub fn parse(text: &str) -> Result<Table, String> {
        let mut table = Table::default();
        let mut header: Option<Vec<String>> = None;
        let mut data: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest
                    .split_once(": ")
                    .ok_or_else(|| format!("line {}: malformed comment", i + 1))?;
                let entry = (k.to_string(), v.to_string());
                if header.is_none() {
                    table.metadata.push(entry);
                } else {
                    table.footer.push(entry);
                }
            } else if header.is_none() {
                let names: Vec<String> = line.split(',').map(str::to_string).collect();
                data = vec![Vec::new(); names.len()];
                header = Some(names);
            } else {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != data.len() {
                    return Err(format!("line {}: expected {} fields", i + 1, data.len()));
                }
                for (col, f) in data.iter_mut().zip(fields) {
                    col.push(
                        f.parse()
                            .map_err(|_| format!("line {}: bad number `{f}`", i + 1))?,
                    );
                }
            }
        }
        let names = header.ok_or("missing header row")?;
        table.columns = names.into_iter().zip(data).collect();
        Ok(table)
    }
}
