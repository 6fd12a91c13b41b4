//! Feeding whole traces through the pipeline.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use meiga_core::pipeline::calibration_len;
use meiga_core::{PhysSample, PipelineConfig, PipelineState, RawSample, Sink, StepOutput};

use crate::eventlog::LogSink;
use crate::{Error, Result};

/// Calibrates on the leading window of `samples` and steps the rest into
/// `sink`. Returns the final state.
pub fn run<S: Sink>(
    samples: &[PhysSample],
    cfg: &PipelineConfig,
    sink: &mut S,
) -> Result<PipelineState> {
    let n = calibration_len(samples, cfg);
    let mut st = PipelineState::init(cfg, &samples[..n])?;
    for s in &samples[n..] {
        st.step(s, cfg, sink)?;
    }
    Ok(st)
}

pub fn run_raw<S: Sink>(
    samples: &[RawSample],
    cfg: &PipelineConfig,
    sink: &mut S,
) -> Result<PipelineState> {
    let phys: Vec<PhysSample> = samples
        .iter()
        .map(|r| meiga_core::to_phys(r, cfg))
        .collect();
    run(&phys, cfg, sink)
}

pub fn run_collect(
    samples: &[PhysSample],
    cfg: &PipelineConfig,
) -> Result<(StepOutput, PipelineState)> {
    let mut out = StepOutput::default();
    let st = run(samples, cfg, &mut out)?;
    Ok((out, st))
}

/// The complete event log of a replay, as bytes.
pub fn log_bytes(samples: &[PhysSample], cfg: &PipelineConfig) -> Result<Vec<u8>> {
    let mut sink = LogSink::new(Vec::new());
    run(samples, cfg, &mut sink)?;
    Ok(sink.finish().expect("writing to memory cannot fail"))
}

/// Replays the trace at `trace` and writes its event log to `out`.
pub fn replay_file(
    trace: &Path,
    cfg: &PipelineConfig,
    out: &Path,
    raw: bool,
) -> Result<(u64, u64)> {
    let samples = if raw {
        let r = crate::trace::read_raw_trace(trace)?;
        r.iter().map(|s| meiga_core::to_phys(s, cfg)).collect()
    } else {
        crate::trace::read_trace(trace)?
    };
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut sink = LogSink::new(BufWriter::new(file));
    run(&samples, cfg, &mut sink)?;
    let counts = (sink.events, sink.reports);
    sink.finish()
        .and_then(|mut w| w.flush())
        .map_err(|e| Error::io(out, e))?;
    Ok(counts)
}
