//! On-disk formats: readings and deviation tables as CSV, reports and
//! baselines as JSON.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! values always produce identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use photomesh_core::ids::DetectionReport;
use photomesh_core::{PortReading, Readings};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{HarnessError, Result};

pub const READINGS_HEADER: [&str; 5] = ["scenario", "step", "port", "power_dbm", "phase_rad"];
pub const DEVIATIONS_HEADER: [&str; 6] = ["probe", "port", "power_db", "phase_rad", "power_alarm", "phase_alarm"];

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Format { path: path.to_owned(), message: e.to_string() }
}

fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    File::create(path).map_err(|e| HarnessError::io(path, e))
}

pub fn write_readings<W: Write>(out: W, series: &[Readings]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(READINGS_HEADER)?;
    for r in series {
        for (port, p) in r.ports.iter().enumerate() {
            w.write_record([
                r.scenario.clone(),
                r.step.to_string(),
                port.to_string(),
                p.power_dbm.to_string(),
                p.phase_rad.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn export_readings(path: &Path, series: &[Readings]) -> Result<()> {
    write_readings(BufWriter::new(create(path)?), series).map_err(|e| csv_error(path, e))
}

/// Reads a readings file back, grouping consecutive rows with the same
/// scenario and step.
pub fn import_readings(path: &Path) -> Result<Vec<Readings>> {
    let fmt = |message: String| HarnessError::Format { path: path.to_owned(), message };
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(READINGS_HEADER) {
        return Err(fmt(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut series: Vec<Readings> = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let bad = |what: &str| fmt(format!("row {}: bad {what}", line + 1));
        let step: u64 = field(1).parse().map_err(|_| bad("step"))?;
        let port: usize = field(2).parse().map_err(|_| bad("port"))?;
        let reading = PortReading {
            power_dbm: field(3).parse().map_err(|_| bad("power_dbm"))?,
            phase_rad: field(4).parse().map_err(|_| bad("phase_rad"))?,
        };
        match series.last_mut() {
            Some(last) if last.scenario == field(0) && last.step == step => {
                if port != last.ports.len() {
                    return Err(bad("port order"));
                }
                last.ports.push(reading);
            }
            _ => {
                if port != 0 {
                    return Err(bad("port order"));
                }
                series.push(Readings { scenario: field(0).to_owned(), step, ports: vec![reading] });
            }
        }
    }
    Ok(series)
}

pub fn write_deviations<W: Write>(out: W, report: &DetectionReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DEVIATIONS_HEADER)?;
    let t = &report.thresholds;
    for d in &report.deviations {
        w.write_record([
            d.probe.to_string(),
            d.port.to_string(),
            d.power_db.to_string(),
            d.phase_rad.to_string(),
            (d.power_db > t.power_threshold_db).to_string(),
            (d.phase_rad > t.phase_threshold_rad).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_deviations(path: &Path, report: &DetectionReport) -> Result<()> {
    write_deviations(BufWriter::new(create(path)?), report).map_err(|e| csv_error(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| HarnessError::Format { path: path.to_owned(), message: e.to_string() })?;
    out.write_all(b"\n").and_then(|_| out.flush()).map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Format { path: path.to_owned(), message: e.to_string() })
}
