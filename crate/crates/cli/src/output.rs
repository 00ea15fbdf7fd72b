//! Output plumbing: 17-significant-digit float formatting (exact f64
//! round-trip), CSV emission, and the out-file/manifest pairing.

use crate::manifest::RunManifest;
use std::fs;
use std::io::Write;

/// Formats with 17 significant digits, enough for exact f64 round-trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table with a header row; all floats go through [`fmt_f64`].
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.header.join(","));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes `content` to `out` (plus its manifest sidecar) or to stdout.
pub fn deliver(out: Option<&str>, content: &str, manifest: &RunManifest) -> std::io::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content)?;
            let sidecar = format!("{path}.manifest.json");
            fs::write(sidecar, manifest.render())?;
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}
