//! CSV sensor traces.
//!
//! Physical-unit traces carry the header
//! `t_us,ax_g,ay_g,az_g,gx_dps,gy_dps,gz_dps,ir_norm`; raw-count traces
//! `t_us,ax,ay,az,gx,gy,gz,ir`. Values are written rounded to 9 significant
//! digits. Readers reject a wrong header, a row with the wrong number of
//! fields, an unparsable field, or a timestamp that does not increase, each
//! reported with its line number.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use meiga_core::{PhysSample, RawSample, Vec3};

use crate::{Error, Result};

pub const PHYS_HEADER: [&str; 8] = [
    "t_us", "ax_g", "ay_g", "az_g", "gx_dps", "gy_dps", "gz_dps", "ir_norm",
];
pub const RAW_HEADER: [&str; 8] = ["t_us", "ax", "ay", "az", "gx", "gy", "gz", "ir"];

/// Shortest decimal that equals `v` rounded to 9 significant digits.
pub fn fmt_sig9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Streaming reader over CSV rows of either trace flavour.
pub struct TraceReader<R: Read, T> {
    rows: csv::Reader<R>,
    record: csv::StringRecord,
    source_name: String,
    last_t: Option<u64>,
    _kind: std::marker::PhantomData<T>,
}

fn parse_field<T: FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    source: &str,
    line: u64,
) -> Result<T> {
    let raw = rec.get(i).unwrap_or("").trim();
    raw.parse().map_err(|_| {
        Error::format(
            source,
            line,
            format!("column {}: cannot parse {raw:?}", i + 1),
        )
    })
}

impl<R: Read, T> TraceReader<R, T> {
    fn open(reader: R, source_name: &str, header: [&str; 8]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::Headers)
            .from_reader(reader);
        let found = rdr
            .headers()
            .map_err(|e| Error::format(source_name, 1, e.to_string()))?
            .clone();
        if found.iter().ne(header.iter().copied()) {
            return Err(Error::format(
                source_name,
                1,
                format!(
                    "expected header {:?}, found {:?}",
                    header.join(","),
                    found.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        Ok(TraceReader {
            rows: rdr,
            record: csv::StringRecord::new(),
            source_name: source_name.to_owned(),
            last_t: None,
            _kind: std::marker::PhantomData,
        })
    }

    /// Reads the next row into `self.record` and returns its line number.
    fn next_record(&mut self) -> Option<Result<u64>> {
        match self.rows.read_record(&mut self.record) {
            Ok(false) => return None,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Some(Err(Error::format(&self.source_name, line, e.to_string())));
            }
        }
        let line = self.record.position().map_or(0, |p| p.line());
        if self.record.len() != 8 {
            return Some(Err(Error::format(
                &self.source_name,
                line,
                format!("expected 8 fields, found {}", self.record.len()),
            )));
        }
        Some(Ok(line))
    }

    fn check_monotone(&mut self, t: u64, line: u64) -> Result<()> {
        if let Some(prev) = self.last_t {
            if t <= prev {
                return Err(Error::format(
                    &self.source_name,
                    line,
                    format!("timestamp {t} does not increase past {prev}"),
                ));
            }
        }
        self.last_t = Some(t);
        Ok(())
    }
}

impl<R: Read> TraceReader<R, PhysSample> {
    pub fn phys(reader: R, source_name: &str) -> Result<Self> {
        Self::open(reader, source_name, PHYS_HEADER)
    }
}

impl<R: Read> TraceReader<R, RawSample> {
    pub fn raw(reader: R, source_name: &str) -> Result<Self> {
        Self::open(reader, source_name, RAW_HEADER)
    }
}

impl<R: Read> Iterator for TraceReader<R, PhysSample> {
    type Item = Result<PhysSample>;

    fn next(&mut self) -> Option<Self::Item> {
        let line = match self.next_record()? {
            Ok(x) => x,
            Err(e) => return Some(Err(e)),
        };
        let (rec, src) = (&self.record, self.source_name.as_str());
        let parsed = (|| {
            let f = |i| parse_field::<f64>(rec, i, src, line);
            let s = PhysSample {
                t_us: parse_field(rec, 0, src, line)?,
                accel: Vec3::new(f(1)?, f(2)?, f(3)?),
                gyro: Vec3::new(f(4)?, f(5)?, f(6)?),
                ir: f(7)?,
            };
            if !s.is_finite() {
                return Err(Error::format(src, line, "non-finite value"));
            }
            Ok(s)
        })();
        Some(parsed.and_then(|s| self.check_monotone(s.t_us, line).map(|_| s)))
    }
}

impl<R: Read> Iterator for TraceReader<R, RawSample> {
    type Item = Result<RawSample>;

    fn next(&mut self) -> Option<Self::Item> {
        let line = match self.next_record()? {
            Ok(x) => x,
            Err(e) => return Some(Err(e)),
        };
        let (rec, src) = (&self.record, self.source_name.as_str());
        let parsed = (|| {
            let c = |i| parse_field::<i16>(rec, i, src, line);
            let ir: u16 = parse_field(rec, 7, src, line)?;
            if ir > meiga_core::model::IR_FULL_SCALE {
                return Err(Error::format(
                    src,
                    line,
                    format!("ir count {ir} exceeds ADC range"),
                ));
            }
            Ok(RawSample {
                t_us: parse_field(rec, 0, src, line)?,
                accel: [c(1)?, c(2)?, c(3)?],
                gyro: [c(4)?, c(5)?, c(6)?],
                ir,
            })
        })();
        Some(parsed.and_then(|s| self.check_monotone(s.t_us, line).map(|_| s)))
    }
}

fn open_file(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<PhysSample>> {
    TraceReader::phys(open_file(path)?, &path.display().to_string())?.collect()
}

pub fn read_raw_trace(path: &Path) -> Result<Vec<RawSample>> {
    TraceReader::raw(open_file(path)?, &path.display().to_string())?.collect()
}

pub fn write_trace_to<W: Write>(out: W, samples: &[PhysSample]) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{}", PHYS_HEADER.join(","))?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.t_us,
            fmt_sig9(s.accel.x),
            fmt_sig9(s.accel.y),
            fmt_sig9(s.accel.z),
            fmt_sig9(s.gyro.x),
            fmt_sig9(s.gyro.y),
            fmt_sig9(s.gyro.z),
            fmt_sig9(s.ir)
        )?;
    }
    w.flush()
}

pub fn write_raw_trace_to<W: Write>(out: W, samples: &[RawSample]) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{}", RAW_HEADER.join(","))?;
    for s in samples {
        let [ax, ay, az] = s.accel;
        let [gx, gy, gz] = s.gyro;
        writeln!(w, "{},{ax},{ay},{az},{gx},{gy},{gz},{}", s.t_us, s.ir)?;
    }
    w.flush()
}

pub fn write_trace(path: &Path, samples: &[PhysSample]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_to(f, samples).map_err(|e| Error::io(path, e))
}

pub fn write_raw_trace(path: &Path, samples: &[RawSample]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_raw_trace_to(f, samples).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<PhysSample>> {
        TraceReader::phys(text.as_bytes(), "t.csv")?.collect()
    }

    const HEADER: &str = "t_us,ax_g,ay_g,az_g,gx_dps,gy_dps,gz_dps,ir_norm\n";

    #[test]
    fn sig9_rounding() {
        assert_eq!(fmt_sig9(0.6), "0.6");
        assert_eq!(fmt_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig9(-123456.789012), "-123456.789");
        assert_eq!(fmt_sig9(0.0), "0");
    }

    #[test]
    fn parses_rows() {
        let s = parse(&format!(
            "{HEADER}10,0,0,1,0.5,0,-0.25,0.6\n20,0,0,1,0,0,0,0.61\n"
        ))
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].gyro, Vec3::new(0.5, 0.0, -0.25));
        assert_eq!(s[1].ir, 0.61);
    }

    #[test]
    fn short_row_reports_its_line() {
        let err = parse(&format!("{HEADER}10,0,0,1,0,0,0,0.6\n20,0,0,1,0,0,0\n")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("t.csv:3:"), "{msg}");
        assert!(msg.contains("expected 8 fields, found 7"), "{msg}");
    }

    #[test]
    fn bad_header_or_order_is_rejected() {
        assert!(parse("t,ax\n1,2\n")
            .unwrap_err()
            .to_string()
            .contains("expected header"));
        let err = parse(&format!("{HEADER}10,0,0,1,0,0,0,0.6\n10,0,0,1,0,0,0,0.6\n")).unwrap_err();
        assert!(err.to_string().starts_with("t.csv:3:"), "{err}");
        let err = parse(&format!("{HEADER}10,0,0,x,0,0,0,0.6\n")).unwrap_err();
        assert!(err.to_string().contains("column 4"), "{err}");
    }

    #[test]
    fn raw_traces_round_trip() {
        let samples = vec![
            RawSample {
                t_us: 1,
                accel: [0, -5, 16384],
                gyro: [131, i16::MIN, i16::MAX],
                ir: 4095,
            },
            RawSample {
                t_us: 2,
                accel: [1, 2, 3],
                gyro: [4, 5, 6],
                ir: 0,
            },
        ];
        let mut buf = Vec::new();
        write_raw_trace_to(&mut buf, &samples).unwrap();
        let back: Vec<RawSample> = TraceReader::raw(buf.as_slice(), "r")
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(back, samples);
        let over = "t_us,ax,ay,az,gx,gy,gz,ir\n1,0,0,0,0,0,0,4096\n";
        assert!(TraceReader::raw(over.as_bytes(), "r")
            .unwrap()
            .next()
            .unwrap()
            .is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert_eq!(
            read_trace(Path::new("/nonexistent.csv"))
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}
