use std::io::Write;
use std::path::Path;

use ftq_core::bounds::CapacityComparison;
use ftq_core::threshold::SweepResult;
use serde_json::Value;

use crate::CliError;

pub enum Document {
    Json(Value),
    Csv(String),
}

pub fn write(doc: &Document, path: Option<&Path>) -> Result<(), CliError> {
    let text = match doc {
        Document::Json(v) => {
            let mut s = serde_json::to_string_pretty(v)
                .map_err(|e| CliError::numerical(format!("cannot serialize result: {e}")))?;
            s.push('\n');
            s
        }
        Document::Csv(s) => s.clone(),
    };
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::numerical(format!("--output: cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::numerical(format!("cannot write to standard output: {e}")))
        }
    }
}

/// Decimal text with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // round first so the exponent reflects the rounded value
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let exponent = rounded.abs().log10().floor() as i32;
    let decimals = (11 - exponent).max(0) as usize;
    format!("{rounded:.decimals$}")
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let err = |e: csv::Error| CliError::numerical(format!("cannot format CSV: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::numerical(format!("cannot format CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields is UTF-8"))
}

/// `param,ic_bits,prop1_bound,vacuous`, one row per grid point in grid order.
pub fn sweep_csv(result: &SweepResult) -> Result<String, CliError> {
    let rows = result
        .points
        .iter()
        .map(|p| {
            vec![
                sig12(p.param),
                sig12(p.ic),
                sig12(p.prop1.value),
                p.prop1.vacuous.to_string(),
            ]
        })
        .collect();
    csv_text(&["param", "ic_bits", "prop1_bound", "vacuous"], rows)
}

/// `k,ic_bits,ratio`; the ratio is empty where `Ic_k <= 0`.
pub fn capacity_csv(result: &CapacityComparison) -> Result<String, CliError> {
    let rows = result
        .rows
        .iter()
        .map(|r| vec![r.k.to_string(), sig12(r.ic), r.ratio.map(sig12).unwrap_or_default()])
        .collect();
    csv_text(&["k", "ic_bits", "ratio"], rows)
}
