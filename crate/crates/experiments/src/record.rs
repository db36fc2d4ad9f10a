//! Run artifacts: the reproducibility manifest, per-sample accounting,
//! aggregated tables, and their on-disk form.
//!
//! A run writes `manifest.json` plus one CSV per named table into its
//! output directory.  Everything in the manifest except the `timestamps`
//! block is a pure function of (config snapshot, master seed, binary), so
//! two runs with the same inputs produce byte-identical CSVs and
//! timestamp-stripped manifests regardless of worker count — the
//! reproducibility contract the acceptance suite checks verbatim.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::fit::FitResult;

/// Wall-clock bracketing of the run.  Excluded from reproducibility
/// comparisons by construction (it is the only nondeterministic field).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timestamps {
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
}

impl Timestamps {
    pub fn now() -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
}

/// Everything needed to reproduce the run bit-for-bit with the same binary.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub master_seed: u64,
    pub config: BTreeMap<String, String>,
    pub timestamps: Timestamps,
}

/// Terminal status and noise fingerprint of one Monte Carlo sample.
///
/// The `noise_hash` folds every Wiener increment the sample consumes (a pure
/// function of seed, sample index, step count, and noise model — never of
/// the regularization), so coupled runs across an ε-ladder must agree on it.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SampleReport {
    pub index: u64,
    pub status: String,
    pub noise_hash: String,
}

/// A rectangular named-column table; cells are pre-formatted strings so CSV
/// and JSON render identically and deterministically.
#[derive(Debug, Clone, Serialize, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Uniform float formatting for table cells: round-trip exact, locale-free.
pub fn cell(v: f64) -> String {
    format!("{v:.17e}")
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width ≠ column count");
        for cell in &row {
            assert!(
                !cell.contains(',') && !cell.contains('\n'),
                "cell {cell:?} would corrupt the unquoted CSV encoding"
            );
        }
        self.rows.push(row);
    }

    /// Header plus rows, comma-separated, `\n` line ends, UTF-8, `.` decimal
    /// separator.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// A fit plus the ±2·stderr confidence band the reports quote.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
    pub slope_ci_low: f64,
    pub slope_ci_high: f64,
}

impl From<FitResult> for FitSummary {
    fn from(f: FitResult) -> Self {
        FitSummary {
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            slope_stderr: f.slope_stderr,
            slope_ci_low: f.slope - 2.0 * f.slope_stderr,
            slope_ci_high: f.slope + 2.0 * f.slope_stderr,
        }
    }
}

/// Complete result of one experiment invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub manifest: Manifest,
    pub samples: Vec<SampleReport>,
    /// `completed + excluded == n_samples`, always.
    pub completed: usize,
    pub excluded: usize,
    /// More than 5% exclusions: the record still carries whatever was
    /// measured, but the experiment must not be trusted (CLI exit code 2).
    pub invalid: bool,
    pub fits: BTreeMap<String, FitSummary>,
    pub tables: BTreeMap<String, Table>,
}

impl RunRecord {
    /// Tallies completion from the sample reports and applies the 5% rule.
    pub fn account(&mut self, n_samples: usize) {
        self.excluded = self
            .samples
            .iter()
            .filter(|s| s.status != "finished")
            .count();
        self.completed = n_samples - self.excluded;
        self.invalid = 20 * self.excluded > n_samples;
    }

    pub fn manifest_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serialization is infallible") + "\n"
    }

    /// Writes `manifest.json` and `<table>.csv` files; returns the paths.
    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let manifest = dir.join("manifest.json");
        std::fs::write(&manifest, self.manifest_json())?;
        written.push(manifest);
        for (name, table) in &self.tables {
            let path = dir.join(format!("{name}.csv"));
            std::fs::write(&path, table.to_csv())?;
            written.push(path);
        }
        Ok(written)
    }
}

/// FNV-1a over the bit patterns of a stream of floats; the noise
/// fingerprint in [`SampleReport`].
#[derive(Debug, Clone, Copy)]
pub struct FnvHasher(u64);

impl FnvHasher {
    pub fn new() -> Self {
        FnvHasher(0xcbf2_9ce4_8422_2325)
    }

    pub fn absorb_f64(&mut self, v: f64) {
        for byte in v.to_bits().to_le_bytes() {
            self.0 ^= byte as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn finish(self) -> String {
        format!("{:016x}", self.0)
    }
}

impl Default for FnvHasher {
    fn default() -> Self {
        Self::new()
    }
}
