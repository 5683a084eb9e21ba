//! Consolidation of the per-command JSON fragments.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::commands::{write_json, GEOMETRY_FILE, REPORT_FILE, SAMPLING_FILE, SIMULATION_FILE, SOLVABILITY_FILE};
use crate::{CliError, EXIT_CHECKS_FAILED, EXIT_MISSING_FRAGMENTS, EXIT_OK};

pub const REQUIRED: [&str; 3] = [SOLVABILITY_FILE, GEOMETRY_FILE, SIMULATION_FILE];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub pass: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

fn read_fragment(dir: &Path, name: &str) -> Result<Option<Value>, CliError> {
    let path = dir.join(name);
    match fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::new(crate::EXIT_FAILURE, format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn ks_checks(frag: &Value, prefix: &str, checks: &mut Vec<Check>) {
    let list = match &frag["ks"] {
        Value::Array(a) => a.clone(),
        v @ Value::Object(_) => vec![v.clone()],
        _ => Vec::new(),
    };
    for k in list {
        checks.push(Check {
            name: format!("{prefix}ks:{}", k["test"].as_str().unwrap_or("?")),
            pass: k["pass"].as_bool().unwrap_or(false),
        });
    }
}

/// Derives the pass/fail checks and notes from the fragments.
pub fn summarize(fragments: &Map<String, Value>) -> Summary {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    if let Some(s) = fragments.get("solvability") {
        let verdict = s["report"]["verdict"].as_str().unwrap_or("?");
        checks.push(Check {
            name: format!("verdict:{verdict}"),
            pass: matches!(verdict, "P_GT_1" | "ZYGMUND_SUFFICIENT" | "HILBERT_L1_DIRECT"),
        });
    }
    if let Some(g) = fragments.get("geometry") {
        checks.push(Check { name: "geometry:simple".into(), pass: g["simple"].as_bool().unwrap_or(false) });
        checks.push(Check { name: "geometry:winding_number".into(), pass: g["winding_number"].as_i64() == Some(1) });
        if let Some(r) = g["truncation"]["radius"].as_f64() {
            notes.push(format!(
                "unbounded domain truncated at R = {r:.6e}; exit statistics carry an additive bias of at most {:.3e}",
                g["tail_mass"].as_f64().unwrap_or(f64::NAN)
            ));
        }
    }
    if let Some(s) = fragments.get("sampling") {
        ks_checks(s, "sampling:", &mut checks);
    }
    if let Some(s) = fragments.get("simulation") {
        ks_checks(s, "simulation:", &mut checks);
        checks.push(Check { name: "simulation:completed".into(), pass: s["error"].is_null() });
        match &s["ito"] {
            Value::Object(i) => {
                checks.push(Check { name: "simulation:ito".into(), pass: i["pass"].as_bool().unwrap_or(false) })
            }
            _ => notes.push(format!(
                "Ito cross-check skipped: expected exit time from the series not available ({})",
                s["expected_tau_series"]["note"].as_str().unwrap_or("no Euler exit times")
            )),
        }
    }
    Summary { pass: checks.iter().all(|c| c.pass), checks, notes }
}

pub fn cmd_report(dir: &Path) -> Result<i32, CliError> {
    let mut fragments = Map::new();
    let mut missing = Vec::new();
    for name in [SOLVABILITY_FILE, GEOMETRY_FILE, SAMPLING_FILE, SIMULATION_FILE] {
        match read_fragment(dir, name)? {
            Some(v) => {
                fragments.insert(name.trim_end_matches(".json").to_string(), v);
            }
            None if REQUIRED.contains(&name) => missing.push(name),
            None => {}
        }
    }
    if !missing.is_empty() {
        return Err(CliError::new(
            EXIT_MISSING_FRAGMENTS,
            format!("missing fragments in {}: {}", dir.display(), missing.join(", ")),
        ));
    }
    let summary = summarize(&fragments);
    fragments.insert("summary".into(), serde_json::to_value(&summary)?);
    write_json(&dir.join(REPORT_FILE), &Value::Object(fragments))?;
    for c in &summary.checks {
        println!("{:<36} {}", c.name, if c.pass { "pass" } else { "FAIL" });
    }
    for n in &summary.notes {
        println!("note: {n}");
    }
    println!("overall: {}", if summary.pass { "pass" } else { "FAIL" });
    Ok(if summary.pass { EXIT_OK } else { EXIT_CHECKS_FAILED })
}
