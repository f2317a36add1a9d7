use std::fs;
use std::path::{Path, PathBuf};

use super::scenarios::ScenarioResult;

/// Significant digits written for every real in the CSV.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct EmitError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn at(path: &Path) -> impl FnOnce(std::io::Error) -> EmitError + '_ {
    move |source| EmitError {
        path: path.to_path_buf(),
        source,
    }
}

/// Paths of the files written by [`emit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emitted {
    pub csv: PathBuf,
    pub report: PathBuf,
}

/// Plain decimal with [`SIGNIFICANT_DIGITS`] significant digits and trailing
/// zeros removed. Never uses exponent notation.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (SIGNIFICANT_DIGITS as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn optional(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

pub fn csv_bytes(result: &ScenarioResult) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        result.scenario.param_name(),
        "computed",
        "certified_bound",
        "formula",
        "residual",
    ])
    .expect("in-memory write");
    for r in &result.rows {
        w.write_record([
            r.param.to_string(),
            format_value(r.computed),
            optional(r.certified),
            optional(r.formula),
            optional(r.residual),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn report_text(result: &ScenarioResult) -> String {
    let passed = result.assertions.iter().filter(|a| a.passed).count();
    let mut out = format!(
        "scenario: {}\nrows: {}\nassertions: {} passed, {} failed\n",
        result.scenario,
        result.rows.len(),
        passed,
        result.assertions.len() - passed
    );
    for a in &result.assertions {
        let tag = if a.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{tag} {}: {}\n", a.name, a.detail));
    }
    out
}

/// Writes `<scenario>.csv` and `<scenario>_report.txt` into `dir`, creating
/// it if needed.
pub fn emit(result: &ScenarioResult, dir: &Path) -> Result<Emitted, EmitError> {
    fs::create_dir_all(dir).map_err(at(dir))?;
    let csv = dir.join(format!("{}.csv", result.scenario));
    let report = dir.join(format!("{}_report.txt", result.scenario));
    fs::write(&csv, csv_bytes(result)).map_err(at(&csv))?;
    fs::write(&report, report_text(result)).map_err(at(&report))?;
    Ok(Emitted { csv, report })
}
