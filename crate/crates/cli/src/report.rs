use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;

use bellfw::certify::{parse_certificate, verify, Certificate, TargetSource};
use bellfw::rational::{format_rational, to_f64};
use bellfw::tensor::StateKind;

use crate::meta_path;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportRow {
    pub file: PathBuf,
    pub state: String,
    pub parties: usize,
    pub m: usize,
    pub v_low: Option<f64>,
    pub v_up: Option<f64>,
    pub eta_sq: Option<String>,
    pub nu: Option<f64>,
    pub runtime: Option<f64>,
    /// Reason the certificate was refused.
    pub failure: Option<String>,
}

fn state_label(src: &TargetSource) -> String {
    match src {
        TargetSource::Quantum { state, .. } => match state {
            StateKind::Singlet => "singlet".into(),
            StateKind::Ghz(n) => format!("ghz{n}"),
            StateKind::W3 => "w3".into(),
        },
        TargetSource::Tensor(_) => "tensor".into(),
    }
}

fn runtime(path: &Path) -> Option<f64> {
    let text = fs::read_to_string(meta_path(path)).ok()?;
    let v: serde_json::Value = serde_json::from_str(&text).ok()?;
    v["timings"]["total_s"].as_f64()
}

fn row(path: &Path) -> ReportRow {
    let mut r = ReportRow {
        file: path.to_path_buf(),
        ..ReportRow::default()
    };
    let cert = match fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|t| parse_certificate(&t).map_err(|e| e.to_string()))
    {
        Ok(c) => c,
        Err(e) => {
            r.failure = Some(e);
            return r;
        }
    };
    let sc = *cert.scenario();
    r.state = state_label(cert.source());
    r.parties = sc.parties;
    r.m = sc.inputs;
    r.runtime = runtime(path);
    let report = verify(&cert);
    if let Some(f) = report.failure {
        r.failure = Some(f);
        return r;
    }
    match &cert {
        Certificate::Lower(c) => {
            r.v_low = Some(to_f64(&c.v_low));
            r.nu = Some(to_f64(&c.nu));
            r.eta_sq = c.polyhedron.as_ref().map(|p| format_rational(&p.eta_sq));
        }
        Certificate::Upper(c) => r.v_up = Some(to_f64(&c.v_up)),
    }
    r
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or("-".into(), |x| format!("{x:.prec$}"))
}

fn eta_decimal(s: &Option<String>) -> String {
    s.as_deref()
        .and_then(bellfw::rational::parse_rational)
        .map_or("-".into(), |q| format!("{:.6}", to_f64(&q)))
}

/// Verifies every file and returns the aligned table, the CSV and whether
/// all certificates passed.
pub fn report(files: &[PathBuf]) -> Result<(String, String, bool)> {
    let rows: Vec<ReportRow> = files.iter().map(|f| row(f)).collect();
    let mut text = format!(
        "{:<8} {:>2} {:>4} {:>10} {:>10} {:>10} {:>10} {:>9}  {}\n",
        "state", "N", "m", "v_low", "v_up", "eta_sq", "nu", "runtime", "file"
    );
    let mut csv = String::from("file,state,N,m,v_low,v_up,eta_sq,nu,runtime_s,status\n");
    for r in &rows {
        let status = r
            .failure
            .as_ref()
            .map_or("ok".to_string(), |f| format!("FAILED: {f}"));
        let _ = writeln!(
            text,
            "{:<8} {:>2} {:>4} {:>10} {:>10} {:>10} {:>10} {:>9}  {}{}",
            if r.state.is_empty() { "?" } else { &r.state },
            r.parties,
            r.m,
            opt(r.v_low, 6),
            opt(r.v_up, 6),
            eta_decimal(&r.eta_sq),
            opt(r.nu, 8),
            opt(r.runtime, 2),
            r.file.display(),
            r.failure
                .as_ref()
                .map_or(String::new(), |f| format!("  FAILED: {f}")),
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            r.file.display(),
            r.state,
            r.parties,
            r.m,
            r.v_low.map_or(String::new(), |v| v.to_string()),
            r.v_up.map_or(String::new(), |v| v.to_string()),
            r.eta_sq.clone().unwrap_or_default(),
            r.nu.map_or(String::new(), |v| v.to_string()),
            r.runtime.map_or(String::new(), |v| v.to_string()),
            status.replace(',', ";"),
        );
    }
    // best bracket per (state, N, m)
    let mut brackets: BTreeMap<(String, usize, usize), (Option<f64>, Option<f64>)> =
        BTreeMap::new();
    for r in rows.iter().filter(|r| r.failure.is_none()) {
        let e = brackets
            .entry((r.state.clone(), r.parties, r.m))
            .or_default();
        if let Some(v) = r.v_low {
            e.0 = Some(e.0.map_or(v, |x: f64| x.max(v)));
        }
        if let Some(v) = r.v_up {
            e.1 = Some(e.1.map_or(v, |x: f64| x.min(v)));
        }
    }
    for ((state, n, m), (lo, hi)) in &brackets {
        if let (Some(lo), Some(hi)) = (lo, hi) {
            let _ = writeln!(
                text,
                "bracket {state} N={n} m={m}: {lo:.6} <= v_c <= {hi:.6}"
            );
        }
    }
    let (kg_low, kg_up) = singlet_grothendieck(&rows);
    if kg_low.is_some() || kg_up.is_some() {
        let _ = writeln!(text, "K_G(3) in [{}, {}]", opt(kg_low, 6), opt(kg_up, 6));
    }
    let ok = rows.iter().all(|r| r.failure.is_none());
    Ok((text, csv, ok))
}

/// Grothendieck constant interval from the best singlet polyhedron lower
/// bound and the best singlet upper bound.
fn singlet_grothendieck(rows: &[ReportRow]) -> (Option<f64>, Option<f64>) {
    let singlet = rows
        .iter()
        .filter(|r| r.failure.is_none() && r.state == "singlet");
    let v_low = singlet
        .clone()
        .filter(|r| r.eta_sq.is_some())
        .filter_map(|r| r.v_low)
        .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |x| x.max(v))));
    let v_up = singlet
        .filter_map(|r| r.v_up)
        .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |x| x.min(v))));
    bellfw::certify::grothendieck_interval(v_low, v_up)
}
