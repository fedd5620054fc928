//! CSV artifacts and JSON metadata sidecars.
//!
//! CSV files are RFC-4180 style: header row, comma-separated, `.` decimal
//! separator, floats at 10 significant digits. Formatting is fixed so a
//! rerun with the same seed is byte-identical.

use crate::Result;
use std::fs;
use std::path::{Path, PathBuf};

/// Formats a float with 10 significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.000000000e0".to_string();
    }
    format!("{x:.9e}")
}

/// In-memory CSV table with a fixed header.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: Vec<S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        assert_eq!(
            cells.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(cells);
    }

    pub fn to_string(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_string())?;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Cell helpers.
pub fn cell_f(x: f64) -> String {
    format_sig(x)
}

pub fn cell_u(x: u64) -> String {
    x.to_string()
}

/// Writes the JSON metadata sidecar next to a CSV artifact.
///
/// The sidecar records configuration, seeds and hyperparameters but not
/// anything execution-dependent (worker count, timestamps), so it is as
/// reproducible as the CSV itself.
pub fn write_metadata(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Output paths for one runner invocation.
#[derive(Debug, Clone)]
pub struct ArtifactPaths {
    pub csv: PathBuf,
    pub metadata: PathBuf,
    pub svg: Option<PathBuf>,
}

impl ArtifactPaths {
    pub fn new(out_dir: &Path, stem: &str, with_svg: bool) -> Self {
        Self {
            csv: out_dir.join(format!("{stem}.csv")),
            metadata: out_dir.join(format!("{stem}.meta.json")),
            svg: with_svg.then(|| out_dir.join(format!("{stem}.svg"))),
        }
    }
}
