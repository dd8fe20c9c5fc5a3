//! Deterministic CSV tables and their run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// `x` to 12 significant digits, fixed notation for moderate exponents, no trailing zeros.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp).max(0) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Cell for a computation that may not apply at this row.
pub fn cell<E>(r: Result<f64, E>) -> String {
    r.map(sig12).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Flag name to canonical value; boolean flags carry `"true"`.
    pub parameters: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub version: String,
    pub wall_time_s: f64,
    /// Grid overrides read from the environment.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub environment: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Vec<(&str, String)>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: parameters.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
            environment: BTreeMap::new(),
        }
    }

    /// Command line that reproduces the run.
    pub fn argv(&self) -> Vec<String> {
        let mut v = vec!["vmw".to_string(), self.command.clone()];
        for (k, val) in &self.parameters {
            if val == "true" {
                v.push(format!("--{k}"));
            } else {
                v.push(format!("--{k}={val}"));
            }
        }
        v
    }
}

/// `trace.csv` -> `trace.manifest.json`
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Writes `table` to `path` with its manifest beside it, or to stdout without one.
pub fn emit(table: &Table, path: Option<&Path>, manifest: &RunManifest) -> Result<(), CliError> {
    let bytes = table.to_bytes()?;
    match path {
        Some(p) => {
            fs::write(p, &bytes)?;
            let mut m = manifest.clone();
            m.outputs = vec![p.display().to_string()];
            let json = serde_json::to_string_pretty(&m)?;
            fs::write(manifest_path(p), json + "\n")?;
        }
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(0.25), "0.25");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(sig12(123456789.12345679), "123456789.123");
        assert_eq!(sig12(9.9999999999996), "10");
        assert_eq!(sig12(1e-7 / 3.0), "3.33333333333e-8");
        assert_eq!(sig12(6.02e23), "6.02e23");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(40.0), "40");
    }

    #[test]
    fn csv_uses_newlines() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        assert_eq!(t.to_bytes().unwrap(), b"a,b\n1,x\n");
    }

    #[test]
    fn manifest_argv() {
        let m = RunManifest::new("cg", vec![("j1", "1/2".into()), ("m2", "-1/2".into()), ("degrees", "true".into())]);
        assert_eq!(m.argv(), ["vmw", "cg", "--degrees", "--j1=1/2", "--m2=-1/2"]);
    }
}
