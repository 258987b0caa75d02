//! Report documents and columnar export.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ermstab::stability::Series;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Everything except `timings_ms` is a deterministic function of the config
/// echo and the artifact version.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    pub claims: Vec<Claim>,
    pub results: BTreeMap<String, Value>,
    pub series: BTreeMap<String, Series<f64>>,
    pub exit_code: i32,
    pub timings_ms: BTreeMap<String, f64>,
}

impl ReportDocument {
    pub fn new(command: impl Into<String>) -> Self {
        ReportDocument {
            schema_version: REPORT_SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.to_string(),
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn claim(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.claims.push(Claim {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn result(&mut self, key: &str, value: &impl Serialize) {
        self.results.insert(
            key.to_string(),
            serde_json::to_value(value).expect("results serialize"),
        );
    }

    pub fn series(&mut self, name: &str, indices: Vec<usize>, values: Vec<f64>) {
        self.series.insert(name.to_string(), Series::new(indices, values));
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The document without wall-clock timings.
    pub fn comparable(&self) -> ReportDocument {
        ReportDocument {
            timings_ms: BTreeMap::new(),
            ..self.clone()
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_text()).map_err(CliError::io(path))
    }

    /// PASS/FAIL summary lines.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.claims {
            out.push_str(&format!(
                "{} {}: {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    /// One `n,value` CSV file per series.
    Columnar,
    /// The full document, normalized.
    Structured,
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes the export files into `dir` and returns their paths.
pub fn export(report: &ReportDocument, format: ExportFormat, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    match format {
        ExportFormat::Columnar => {
            if report.series.is_empty() {
                return Ok(written);
            }
            fs::create_dir_all(dir).map_err(CliError::io(dir))?;
            for (name, s) in &report.series {
                let mut text = format!("n,{name}\n");
                for (n, v) in s.indices.iter().zip(&s.values) {
                    text.push_str(&format!("{n},{}\n", format_value(*v)));
                }
                let path = dir.join(format!("{}.csv", file_stem(name)));
                fs::write(&path, text).map_err(CliError::io(&path))?;
                written.push(path);
            }
        }
        ExportFormat::Structured => {
            fs::create_dir_all(dir).map_err(CliError::io(dir))?;
            let path = dir.join("report.json");
            report.write(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_documents_parse() {
        let r: ReportDocument = serde_json::from_str("{}").unwrap();
        assert!(r.series.is_empty() && r.claims.is_empty());
    }

    #[test]
    fn series_survive_non_finite_values() {
        let mut r = ReportDocument::new("test");
        r.series("bound", vec![1, 2], vec![0.5, f64::INFINITY]);
        let back: ReportDocument = serde_json::from_str(&r.to_text()).unwrap();
        assert_eq!(back, r);
        assert_eq!(format_value(f64::INFINITY), "inf");
        assert_eq!(format_value(0.25), "2.5e-1");
    }
}
