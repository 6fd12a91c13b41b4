//! Sample-by-sample orchestration of the whole chain.
//!
//! Each sample runs convert → fuse → denoise → gesture → map → encode in that
//! fixed order. Motion accumulates between reports, which go out on a fixed
//! cadence of `report_hz`; button events additionally push their press and
//! release reports immediately.

use alloc::vec::Vec;
use core::fmt;

use crate::config::{ConfigError, PipelineConfig};
use crate::convert::{calibrate, to_phys, Calibration, CalibrationError};
use crate::cursor::CursorState;
use crate::fusion::{AxisTriple, FusionState};
use crate::gesture::{BlinkFsm, GestureEvent};
use crate::hid::{click_to_reports, encode, Buttons, Carry, HidReport};
use crate::kalman::{KalmanError, KalmanState};
use crate::model::{PhysSample, RawSample};

/// Receives everything the pipeline produces, in order.
pub trait Sink {
    fn event(&mut self, event: &GestureEvent);
    fn report(&mut self, t_us: u64, report: &HidReport);
}

/// A [`Sink`] that keeps everything in memory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutput {
    pub events: Vec<GestureEvent>,
    pub reports: Vec<(u64, HidReport)>,
}

impl Sink for StepOutput {
    fn event(&mut self, event: &GestureEvent) {
        self.events.push(*event);
    }

    fn report(&mut self, t_us: u64, report: &HidReport) {
        self.reports.push((t_us, *report));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineError {
    Config(Vec<ConfigError>),
    Calibration(CalibrationError),
    Kalman(KalmanError),
    NonMonotonic { previous_us: u64, t_us: u64 },
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Config(errs) => {
                f.write_str("invalid config:")?;
                for e in errs {
                    write!(f, " {e};")?;
                }
                Ok(())
            }
            PipelineError::Calibration(e) => write!(f, "calibration failed: {e}"),
            PipelineError::Kalman(e) => write!(f, "IR filter: {e}"),
            PipelineError::NonMonotonic { previous_us, t_us } => {
                write!(f, "timestamp {t_us} does not follow {previous_us}")
            }
        }
    }
}

impl From<CalibrationError> for PipelineError {
    fn from(e: CalibrationError) -> Self {
        PipelineError::Calibration(e)
    }
}

impl From<KalmanError> for PipelineError {
    fn from(e: KalmanError) -> Self {
        PipelineError::Kalman(e)
    }
}

/// Number of leading samples that make up the startup calibration window:
/// everything up to and including the first sample `calib_ms` after the
/// start.
pub fn calibration_len(samples: &[PhysSample], cfg: &PipelineConfig) -> usize {
    let Some(first) = samples.first() else {
        return 0;
    };
    let end = first.t_us + u64::from(cfg.calib_ms) * 1000;
    samples
        .iter()
        .position(|s| s.t_us >= end)
        .map_or(samples.len(), |i| i + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineState {
    pub calib: Calibration,
    pub fusion: FusionState,
    pub ir_kalman: KalmanState,
    pub fsm: BlinkFsm,
    pub cursor: CursorState,
    pub held_buttons: Buttons,
    /// Motion clamped out of the last report, added to the next one.
    pub carry: Carry,
    pub next_report_at_us: u64,
    last_report_at_us: u64,
    last_t_us: u64,
    rate_accum: AxisTriple,
    gaps: u64,
}

impl PipelineState {
    /// Calibrates on a stationary window and seeds every stage from it.
    pub fn init(cfg: &PipelineConfig, window: &[PhysSample]) -> Result<Self, PipelineError> {
        let cfg = cfg.clone().validate().map_err(PipelineError::Config)?;
        for w in window.windows(2) {
            if w[1].t_us <= w[0].t_us {
                return Err(PipelineError::NonMonotonic {
                    previous_us: w[0].t_us,
                    t_us: w[1].t_us,
                });
            }
        }
        let calib = calibrate(window, &cfg)?;
        let fusion = FusionState::seeded(window, &cfg);
        let ir_kalman =
            KalmanState::new(calib.ir_baseline, cfg.kalman_p0, cfg.kalman_r, cfg.kalman_q)?;
        let t0 = fusion.last_t_us;
        Ok(PipelineState {
            calib,
            fusion,
            ir_kalman,
            fsm: BlinkFsm::new(calib.ir_baseline, t0),
            cursor: CursorState::new(fusion.attitude),
            held_buttons: Buttons::NONE,
            carry: Carry::default(),
            next_report_at_us: t0 + cfg.report_period_us(),
            last_report_at_us: t0,
            last_t_us: t0,
            rate_accum: AxisTriple::ZERO,
            gaps: 0,
        })
    }

    /// Same as [`PipelineState::init`] on raw-count samples.
    pub fn init_raw(cfg: &PipelineConfig, window: &[RawSample]) -> Result<Self, PipelineError> {
        let phys: Vec<PhysSample> = window.iter().map(|r| to_phys(r, cfg)).collect();
        Self::init(cfg, &phys)
    }

    /// Timestamp of the last sample consumed.
    pub fn last_t_us(&self) -> u64 {
        self.last_t_us
    }

    /// Sample gaps seen so far.
    pub fn gap_count(&self) -> u64 {
        self.gaps
    }

    pub fn step_raw<S: Sink>(
        &mut self,
        raw: &RawSample,
        cfg: &PipelineConfig,
        sink: &mut S,
    ) -> Result<(), PipelineError> {
        self.step(&to_phys(raw, cfg), cfg, sink)
    }

    /// Consumes one sample.
    ///
    /// A sample gap re-anchors fusion and abandons any blink in progress, but
    /// keeps calibration, held buttons and pending output.
    pub fn step<S: Sink>(
        &mut self,
        sample: &PhysSample,
        cfg: &PipelineConfig,
        sink: &mut S,
    ) -> Result<(), PipelineError> {
        let t = sample.t_us;
        if t <= self.last_t_us {
            return Err(PipelineError::NonMonotonic {
                previous_us: self.last_t_us,
                t_us: t,
            });
        }
        self.last_t_us = t;

        match self.fusion.update(sample, &self.calib, cfg) {
            Ok(delta) => {
                self.rate_accum.pitch += delta.pitch;
                self.rate_accum.roll += delta.roll;
                self.rate_accum.yaw += delta.yaw;
            }
            Err(_) => {
                self.gaps += 1;
                self.fsm.reset_timing(t);
                self.cursor.rebase(self.fusion.attitude);
                self.rate_accum = AxisTriple::ZERO;
                self.last_report_at_us = t;
                self.next_report_at_us = t + cfg.report_period_us();
            }
        }

        // a non-finite IR reading holds the previous estimate
        let ir = self
            .ir_kalman
            .step(sample.ir)
            .unwrap_or(self.ir_kalman.x_hat);

        let held = &mut self.held_buttons;
        self.fsm.step(t, ir, cfg, |e| {
            sink.event(&e);
            if e.kind.is_button() {
                let (reports, now) = click_to_reports(&e, *held);
                *held = now;
                for r in &reports {
                    sink.report(t, r);
                }
            }
        });

        if t >= self.next_report_at_us {
            self.emit_report(t, cfg, sink);
        }
        Ok(())
    }

    /// Convenience wrapper collecting one step's output.
    pub fn step_collect(
        &mut self,
        sample: &PhysSample,
        cfg: &PipelineConfig,
    ) -> Result<StepOutput, PipelineError> {
        let mut out = StepOutput::default();
        self.step(sample, cfg, &mut out)?;
        Ok(out)
    }

    fn emit_report<S: Sink>(&mut self, t: u64, cfg: &PipelineConfig, sink: &mut S) {
        let dt_s = (t - self.last_report_at_us) as f64 * 1e-6;
        let inv = 1.0 / dt_s;
        let rates = AxisTriple {
            pitch: self.rate_accum.pitch * inv,
            roll: self.rate_accum.roll * inv,
            yaw: self.rate_accum.yaw * inv,
        };
        let m = self
            .cursor
            .map_motion(&self.fusion.attitude, &rates, dt_s, cfg);
        let (report, carry) = encode(
            self.held_buttons,
            m.dx.saturating_add(self.carry.dx),
            m.dy.saturating_add(self.carry.dy),
            m.wheel.saturating_add(self.carry.wheel),
        );
        self.carry = carry;
        sink.report(t, &report);

        self.rate_accum = AxisTriple::ZERO;
        self.last_report_at_us = t;
        let period = cfg.report_period_us().max(1);
        while self.next_report_at_us <= t {
            self.next_report_at_us += period;
        }
    }
}
