//! CSV tables and atomic file output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Empty cell for a missing value.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Short label for file names, e.g. `0.05`.
pub fn tag(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Trailing lines written verbatim after the rows.
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: vec![], footer: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        for f in &self.footer {
            let _ = writeln!(out, "{f}");
        }
        out
    }

    /// Column by name, parsed back to numbers; empty cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[j].parse().unwrap_or(f64::NAN)).collect())
    }
}

/// Writes files as `name.tmp` and renames them into place, so a failure never
/// leaves a truncated file behind. Writes are serialized.
#[derive(Debug)]
pub struct Writer {
    dir: PathBuf,
    written: Mutex<Vec<String>>,
}

impl Writer {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), written: Mutex::new(vec![]) }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_text(&self, name: &str, text: &str) -> std::io::Result<PathBuf> {
        let mut log = self.written.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        log.push(name.to_string());
        Ok(path)
    }

    pub fn write_table(&self, name: &str, table: &Table) -> std::io::Result<PathBuf> {
        self.write_text(name, &table.render())
    }

    pub fn written(&self) -> Vec<String> {
        self.written.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub rows: usize,
}

/// Everything needed to regenerate the outputs of one invocation.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    /// Derived quantities per curve, for cross-checking.
    pub derived: Vec<(String, f64)>,
    pub files: Vec<FileEntry>,
}

impl<C: Serialize> Manifest<'_, C> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02e23, 5e-324, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(opt(None), "");
    }

    #[test]
    fn table_renders_header_rows_footer() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(1.0), opt(None)]);
        t.footer.push("#end".into());
        assert_eq!(t.render(), "a,b\n1.0000000000000000e0,\n#end\n");
        assert!(t.column("b").unwrap()[0].is_nan());
    }

    #[test]
    fn writer_leaves_no_temporaries() {
        let dir = std::env::temp_dir().join(format!("wqed-writer-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let w = Writer::new(&dir);
        w.write_text("x.csv", "1\n").unwrap();
        let names: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("x.csv")]);
        fs::remove_dir_all(&dir).unwrap();
    }
}
