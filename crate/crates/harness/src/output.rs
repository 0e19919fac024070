//! CSV serialization of diagnostics.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! binary64 exactly. An undefined Λ is written as `nan`.

use std::io::Write;

use surfns_core::diagnostics::DiagnosticsRecord;

use crate::ensemble::EnsembleReport;

pub const BASE_COLUMNS: [&str; 9] = [
    "t",
    "norm_u",
    "norm_uK",
    "norm_uNK",
    "energy",
    "dissipation",
    "work",
    "energy_residual",
    "lambda",
];

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn header(n_alpha: usize) -> Vec<String> {
    BASE_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain((1..=n_alpha).map(|i| format!("alpha_{i}")))
        .collect()
}

pub fn record_row(r: &DiagnosticsRecord) -> Vec<String> {
    [
        r.t,
        r.norm_u,
        r.norm_uk,
        r.norm_unk,
        r.energy,
        r.dissipation,
        r.work,
        r.energy_residual,
        r.lambda.unwrap_or(f64::NAN),
    ]
    .into_iter()
    .chain(r.alpha.iter().copied())
    .map(fmt_f64)
    .collect()
}

pub fn write_records<W: Write>(out: W, records: &[DiagnosticsRecord]) -> csv::Result<()> {
    let n_alpha = records.first().map_or(0, |r| r.alpha.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(n_alpha))?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_to_string(records: &[DiagnosticsRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Parses a diagnostics CSV back into records.
pub fn read_records(text: &str) -> csv::Result<Vec<DiagnosticsRecord>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let v: Vec<f64> = row.iter().map(|s| s.parse::<f64>().unwrap_or(f64::NAN)).collect();
        out.push(DiagnosticsRecord {
            t: v[0],
            norm_u: v[1],
            norm_uk: v[2],
            norm_unk: v[3],
            energy: v[4],
            dissipation: v[5],
            work: v[6],
            energy_residual: v[7],
            lambda: (!v[8].is_nan()).then_some(v[8]),
            alpha: v[9..].to_vec(),
        });
    }
    Ok(out)
}

/// Per-sample ensemble aggregates: `max`, `min` and `mean` of every scalar column.
pub fn write_ensemble<W: Write>(out: W, report: &EnsembleReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["t".to_string(), "members".to_string()];
    for c in &BASE_COLUMNS[1..] {
        for s in ["max", "min", "mean"] {
            head.push(format!("{c}_{s}"));
        }
    }
    w.write_record(&head)?;
    for a in &report.aggregates {
        let mut row = vec![fmt_f64(a.t), a.members.to_string()];
        for s in &a.stats {
            row.extend([fmt_f64(s.max), fmt_f64(s.min), fmt_f64(s.mean)]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
