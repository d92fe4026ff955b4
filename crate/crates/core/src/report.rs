//! Report plumbing: deterministic CSV/JSON writers and the check/suite
//! structures the verification commands emit.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

/// One verified identity: its residual against the tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    /// Stable identifier of the identity under test.
    pub id: String,
    pub description: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(id: &str, description: &str, max_residual: f64, tolerance: f64) -> Self {
        Check {
            id: id.to_string(),
            description: description.to_string(),
            max_residual,
            tolerance,
            pass: max_residual.is_finite() && max_residual < tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(suite: &str, model: &str, c: Option<f64>) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            model: model.to_string(),
            c,
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn merge(&mut self, other: SuiteReport) {
        for c in other.checks {
            self.push(c);
        }
    }
}

/// 17 significant digits: enough to round-trip any f64, so identical runs
/// produce byte-identical artifacts.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: &[Vec<f64>],
) -> io::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_g17(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn write_json<P: AsRef<Path>, T: Serialize>(path: P, value: &T) -> io::Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    atomic_write(path, body.as_bytes())
}

fn atomic_write<P: AsRef<Path>>(path: P, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.as_ref().parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_pass_logic() {
        assert!(Check::new("a", "", 1e-9, 1e-6).pass);
        assert!(!Check::new("b", "", 1e-3, 1e-6).pass);
        assert!(!Check::new("c", "", f64::NAN, 1e-6).pass);
    }

    #[test]
    fn g17_round_trips() {
        for &v in &[0.1, std::f64::consts::PI, 1.0 / 3.0, 2.0f64.sqrt() * 1e-10] {
            let s = fmt_g17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}
