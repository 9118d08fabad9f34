//! Detection counts per library compared with published reference counts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::depdb::DeprecationDb;
use crate::error::{Error, Result};
use crate::extractor::{extract_library, ExtractorConfig};

/// (library, detected, manually verified) reference counts.
pub const REFERENCE_COUNTS: [(&str, u32, u32); 6] = [
    ("scikit-learn", 487, 438),
    ("matplotlib", 169, 254),
    ("numpy", 39, 36),
    ("pandas", 66, 59),
    ("scipy", 46, 49),
    ("seaborn", 31, 35),
];

pub fn reference_for(library: &str) -> Option<(u32, u32)> {
    let name = match library {
        "sklearn" => "scikit-learn",
        other => other,
    };
    REFERENCE_COUNTS.iter().find(|(n, _, _)| *n == name).map(|&(_, d, g)| (d, g))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub path: PathBuf,
    pub expected_detected: u32,
    #[serde(default)]
    pub version: Option<String>,
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub library: String,
    pub version_used: Option<String>,
    /// `None` when the source path is absent.
    pub detected: Option<u32>,
    pub paper_detected: u32,
    pub paper_ground_truth: Option<u32>,
    pub delta: Option<i64>,
    pub files_scanned: usize,
    pub files_skipped: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl EvalRow {
    /// `delta / paper_detected`, when both are known.
    pub fn relative_delta(&self) -> Option<f64> {
        let d = self.delta?;
        (self.paper_detected > 0).then(|| d as f64 / self.paper_detected as f64)
    }
}

/// Extracts each manifest library in turn. Relative manifest paths are
/// taken from `base_dir`. When `db_dir` is given each library's database is
/// written there as `<name>.json`.
pub fn run_eval(
    manifest: &[ManifestEntry],
    base_dir: &Path,
    db_dir: Option<&Path>,
    cfg: &ExtractorConfig,
) -> Result<Vec<EvalRow>> {
    let mut rows = Vec::with_capacity(manifest.len());
    for entry in manifest {
        let root = base_dir.join(&entry.path);
        let ground_truth = reference_for(&entry.name).map(|(_, g)| g);
        let started = Instant::now();
        let mut row = EvalRow {
            library: entry.name.clone(),
            version_used: entry.version.clone(),
            detected: None,
            paper_detected: entry.expected_detected,
            paper_ground_truth: ground_truth,
            delta: None,
            files_scanned: 0,
            files_skipped: 0,
            elapsed: Duration::ZERO,
        };
        if !root.is_dir() {
            log::warn!("{}: source not found at {}", entry.name, root.display());
            rows.push(row);
            continue;
        }
        let x = extract_library(&root, &entry.name, entry.version.as_deref(), cfg)?;
        row.elapsed = started.elapsed();
        let detected = x.records.len() as u32;
        row.detected = Some(detected);
        row.delta = Some(detected as i64 - entry.expected_detected as i64);
        row.version_used = x.library_version.clone();
        row.files_scanned = x.files_scanned;
        row.files_skipped = x.skipped.len();
        if let Some(dir) = db_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            DeprecationDb::from_extraction(&x).save(&dir.join(format!("{}.json", entry.name)))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn format_table(rows: &[EvalRow]) -> String {
    let mut out = String::new();
    let dash = || "-".to_owned();
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.library.clone(),
                r.detected.map_or_else(|| "absent".to_owned(), |d| d.to_string()),
                r.paper_detected.to_string(),
                r.delta.map_or_else(dash, |d| d.to_string()),
                r.paper_ground_truth.map_or_else(dash, |g| g.to_string()),
                r.version_used.clone().unwrap_or_else(dash),
            ]
        })
        .collect();
    let header = ["library", "detected", "paper_detected", "delta", "paper_ground_truth", "version"];
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut line = |cols: &[String]| {
        let parts: Vec<String> = cols.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&header.map(String::from));
    for row in &cells {
        line(row);
    }
    out
}
