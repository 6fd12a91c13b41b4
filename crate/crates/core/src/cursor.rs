//! Attitude changes to relative pointer motion and scroll ticks.
//!
//! Yaw moves the pointer horizontally, pitch vertically, and a sustained roll
//! beyond a deadzone scrolls at a rate proportional to the excess angle.
//!
//! Fractional output is carried between reports in fixed point with
//! [`SUBUNITS`] steps per pixel (or wheel tick), so over any run
//! `emitted * SUBUNITS + remainder` equals the sum of the quantized requests
//! exactly.

use crate::config::PipelineConfig;
use crate::fusion::AxisTriple;
use crate::model::Attitude;

/// Fixed-point steps per pixel or wheel tick.
pub const SUBUNITS: i64 = 1 << 20;

const MAX_FIXED: f64 = (1u64 << 52) as f64;

/// Rounds a fractional pixel amount to fixed point.
pub fn quantize(amount: f64) -> i64 {
    if amount.is_nan() {
        return 0;
    }
    libm::round((amount * SUBUNITS as f64).clamp(-MAX_FIXED, MAX_FIXED)) as i64
}

/// Whole pixels and ticks produced by one report interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Motion {
    pub dx: i32,
    pub dy: i32,
    pub wheel: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CursorState {
    /// Fixed-point remainders, each strictly inside `(-SUBUNITS, SUBUNITS)`.
    pub rem_x: i64,
    pub rem_y: i64,
    pub rem_wheel: i64,
    pub last_attitude: Attitude,
}

impl CursorState {
    pub fn new(attitude: Attitude) -> Self {
        CursorState {
            last_attitude: attitude,
            ..Default::default()
        }
    }

    pub fn rem_x_px(&self) -> f64 {
        self.rem_x as f64 / SUBUNITS as f64
    }

    pub fn rem_y_px(&self) -> f64 {
        self.rem_y as f64 / SUBUNITS as f64
    }

    pub fn rem_wheel_ticks(&self) -> f64 {
        self.rem_wheel as f64 / SUBUNITS as f64
    }

    /// Forgets the reference attitude without emitting motion for the jump.
    pub fn rebase(&mut self, attitude: Attitude) {
        self.last_attitude = attitude;
    }

    /// Produces the motion for one report interval.
    ///
    /// `rates` are the mean bias-corrected attitude rates over the interval;
    /// an axis whose rate magnitude is under `rate_deadzone_dps` contributes
    /// nothing, but the reference attitude still advances so suppressed drift
    /// is never replayed later.
    pub fn map_motion(
        &mut self,
        attitude: &Attitude,
        rates: &AxisTriple,
        dt_report_s: f64,
        cfg: &PipelineConfig,
    ) -> Motion {
        let d_yaw = attitude.yaw - self.last_attitude.yaw;
        let d_pitch = attitude.pitch - self.last_attitude.pitch;
        self.last_attitude = *attitude;
        if dt_report_s.is_nan() || dt_report_s <= 0.0 {
            return Motion::default();
        }

        let sign = |inverted: bool| if inverted { -1.0 } else { 1.0 };
        let raw_x = if libm::fabs(rates.yaw) < cfg.rate_deadzone_dps {
            0.0
        } else {
            sign(cfg.invert_x) * cfg.gain_x * d_yaw
        };
        let raw_y = if libm::fabs(rates.pitch) < cfg.rate_deadzone_dps {
            0.0
        } else {
            sign(cfg.invert_y) * cfg.gain_y * pitch_step(d_pitch)
        };
        let raw_wheel = scroll_amount(attitude.roll, dt_report_s, cfg);

        Motion {
            dx: emit(&mut self.rem_x, quantize(raw_x)),
            dy: emit(&mut self.rem_y, quantize(raw_y)),
            wheel: emit(&mut self.rem_wheel, quantize(raw_wheel)),
        }
    }
}

/// Pitch differences are taken the short way round.
fn pitch_step(d: f64) -> f64 {
    if libm::fabs(d) > 180.0 {
        crate::model::wrap_degrees(d)
    } else {
        d
    }
}

/// Wheel ticks requested for a report interval at the given roll angle.
pub fn scroll_amount(roll: f64, dt_report_s: f64, cfg: &PipelineConfig) -> f64 {
    let excess = libm::fabs(roll) - cfg.roll_deadzone_deg;
    if excess <= 0.0 {
        return 0.0;
    }
    let sign = if roll < 0.0 { -1.0 } else { 1.0 };
    cfg.scroll_rate * excess * sign * dt_report_s
}

/// Adds `request` to the accumulator and takes out the whole units,
/// truncating toward zero.
fn emit(rem: &mut i64, request: i64) -> i32 {
    let total = *rem + request;
    let whole = total / SUBUNITS;
    let whole = whole.clamp(i64::from(i32::MIN), i64::from(i32::MAX));
    *rem = total - whole * SUBUNITS;
    whole as i32
}

/// Pure form of [`CursorState::map_motion`].
pub fn map_motion(
    state: CursorState,
    attitude: &Attitude,
    rates: &AxisTriple,
    dt_report_s: f64,
    cfg: &PipelineConfig,
) -> (Motion, CursorState) {
    let mut next = state;
    let m = next.map_motion(attitude, rates, dt_report_s, cfg);
    (m, next)
}
