//! Line-delimited event logs.
//!
//! One JSON object per line with the fields `t_us`, `kind` and `payload`, in
//! that order:
//!
//! ```text
//! {"t_us":2301000,"kind":"blink_end","payload":"duration_ms=300.000"}
//! {"t_us":2301000,"kind":"left_click","payload":"duration_ms=300.000"}
//! {"t_us":2301000,"kind":"report","payload":"01 00 00 00"}
//! ```
//!
//! Gesture records use the gesture kind names; HID reports use the kind
//! `report` with the four report bytes as upper-case hex.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use meiga_core::{GestureEvent, GestureKind, HidReport, Sink};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const REPORT_KIND: &str = "report";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub t_us: u64,
    pub kind: String,
    pub payload: String,
}

/// A decoded log line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entry {
    Event(GestureEvent),
    Report { t_us: u64, report: HidReport },
}

impl Entry {
    pub fn t_us(&self) -> u64 {
        match self {
            Entry::Event(e) => e.t_us,
            Entry::Report { t_us, .. } => *t_us,
        }
    }

    pub fn to_record(&self) -> Record {
        match self {
            Entry::Event(e) => Record {
                t_us: e.t_us,
                kind: e.kind.as_str().to_owned(),
                payload: e.duration_us.map_or_else(String::new, |d| {
                    format!("duration_ms={:.3}", d as f64 / 1000.0)
                }),
            },
            Entry::Report { t_us, report } => Record {
                t_us: *t_us,
                kind: REPORT_KIND.to_owned(),
                payload: report.to_string(),
            },
        }
    }

    pub fn from_record(rec: &Record) -> std::result::Result<Entry, String> {
        if rec.kind == REPORT_KIND {
            return parse_report(&rec.payload).map(|report| Entry::Report {
                t_us: rec.t_us,
                report,
            });
        }
        let kind =
            GestureKind::parse(&rec.kind).ok_or_else(|| format!("unknown kind {:?}", rec.kind))?;
        let duration_us = if rec.payload.is_empty() {
            None
        } else {
            let ms = rec
                .payload
                .strip_prefix("duration_ms=")
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| format!("bad payload {:?}", rec.payload))?;
            Some((ms * 1000.0).round() as u64)
        };
        Ok(Entry::Event(GestureEvent {
            kind,
            t_us: rec.t_us,
            duration_us,
        }))
    }
}

/// Parses `"01 05 00 00"` into a report.
pub fn parse_report(payload: &str) -> std::result::Result<HidReport, String> {
    let parts: Vec<&str> = payload.split(' ').collect();
    if parts.len() != 4 || parts.iter().any(|p| p.len() != 2) {
        return Err(format!(
            "report payload must be four hex bytes, got {payload:?}"
        ));
    }
    let mut bytes = [0u8; 4];
    for (b, p) in bytes.iter_mut().zip(&parts) {
        *b = u8::from_str_radix(p, 16).map_err(|_| format!("bad hex byte {p:?}"))?;
    }
    HidReport::from_bytes(bytes).map_err(|e| e.to_string())
}

pub fn format_line(entry: &Entry) -> String {
    serde_json::to_string(&entry.to_record()).expect("record serializes")
}

/// Writes pipeline output as log lines as it is produced.
pub struct LogSink<W: Write> {
    out: W,
    err: Option<std::io::Error>,
    pub events: u64,
    pub reports: u64,
}

impl<W: Write> LogSink<W> {
    pub fn new(out: W) -> Self {
        LogSink {
            out,
            err: None,
            events: 0,
            reports: 0,
        }
    }

    fn put(&mut self, entry: &Entry) {
        if self.err.is_none() {
            if let Err(e) = writeln!(self.out, "{}", format_line(entry)) {
                self.err = Some(e);
            }
        }
    }

    /// Flushes and hands back the writer, or the first write error.
    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.err.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> Sink for LogSink<W> {
    fn event(&mut self, event: &GestureEvent) {
        self.events += 1;
        self.put(&Entry::Event(*event));
    }

    fn report(&mut self, t_us: u64, report: &HidReport) {
        self.reports += 1;
        self.put(&Entry::Report {
            t_us,
            report: *report,
        });
    }
}

pub fn write_log_to<W: Write>(out: W, entries: &[Entry]) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    for e in entries {
        writeln!(w, "{}", format_line(e))?;
    }
    w.flush()
}

pub fn write_log(path: &Path, entries: &[Entry]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_log_to(f, entries).map_err(|e| Error::io(path, e))
}

pub fn read_log_from<R: BufRead>(input: R, source_name: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::format(source_name, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| Error::format(source_name, line_no, e.to_string()))?;
        out.push(Entry::from_record(&rec).map_err(|m| Error::format(source_name, line_no, m))?);
    }
    Ok(out)
}

pub fn read_log(path: &Path) -> Result<Vec<Entry>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_log_from(BufReader::new(f), &path.display().to_string())
}

/// Gesture events of a log, in order.
pub fn events(entries: &[Entry]) -> Vec<GestureEvent> {
    entries
        .iter()
        .filter_map(|e| match e {
            Entry::Event(ev) => Some(*ev),
            Entry::Report { .. } => None,
        })
        .collect()
}
