//! CSV and JSON writers. Both are byte-deterministic for a given result:
//! floats use the shortest round-trip representation and JSON keys follow
//! struct order.

use std::io::Write;

use serde::Serialize;

use crate::config::Format;
use crate::sweep::{Metadata, Record, SweepResult};

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn emit<W: Write>(result: &SweepResult, format: Format, out: W) -> Result<(), EmitError> {
    match format {
        Format::Csv => write_csv(result, out),
        Format::Json => write_json(result, out),
    }
}

/// Header `axis…, observable, value_re, value_im, flag`; failed points leave
/// the value fields empty.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<(), EmitError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = result.axes.iter().map(String::as_str).collect();
    header.extend(["observable", "value_re", "value_im", "flag"]);
    w.write_record(&header)?;
    for r in &result.records {
        let mut row: Vec<String> = r.coords.iter().map(|c| c.to_string()).collect();
        row.push(r.observable.clone());
        match r.value {
            Some([re, im]) => {
                row.push(re.to_string());
                row.push(im.to_string());
            }
            None => {
                row.push(String::new());
                row.push(String::new());
            }
        }
        row.push(r.flag.clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    params: serde_json::Map<String, serde_json::Value>,
    observable: &'a str,
    value_re: Option<f64>,
    value_im: Option<f64>,
    flag: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    backend: Option<giantwg_core::Backend>,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    metadata: &'a Metadata,
    axes: &'a [String],
    records: Vec<JsonRecord<'a>>,
}

fn json_record<'a>(axes: &[String], r: &'a Record) -> JsonRecord<'a> {
    let params = axes
        .iter()
        .zip(&r.coords)
        .map(|(a, c)| (a.clone(), serde_json::Value::from(*c)))
        .collect();
    JsonRecord {
        params,
        observable: &r.observable,
        value_re: r.value.map(|v| v[0]),
        value_im: r.value.map(|v| v[1]),
        flag: &r.flag,
        backend: r.backend,
    }
}

pub fn write_json<W: Write>(result: &SweepResult, mut out: W) -> Result<(), EmitError> {
    let doc = JsonDocument {
        metadata: &result.metadata,
        axes: &result.axes,
        records: result.records.iter().map(|r| json_record(&result.axes, r)).collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    Ok(())
}
