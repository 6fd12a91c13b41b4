//! Head attitude from accelerometer tilt and integrated gyro rates.
//!
//! Pitch and roll run through a first-order complementary filter:
//!
//! ```text
//! angle = A * (angle_prev + gyro_rate * dt) + (1 - A) * accel_angle
//! ```
//!
//! The gyro term tracks fast motion, the accelerometer term pulls slow drift
//! back towards gravity. Yaw has no gravity reference and is a plain
//! rectangular integral of the yaw rate.

use core::fmt;

use crate::config::PipelineConfig;
use crate::convert::Calibration;
use crate::model::{wrap_degrees, Attitude, PhysSample, Vec3};

/// Longest interval between samples that is still integrated.
pub const MAX_SAMPLE_GAP_S: f64 = 0.5;

/// Signed permutation taking sensor axes to head axes (x forward, y left,
/// z up). Identity for the vertical in-case mounting.
pub const SENSOR_TO_HEAD: [[i8; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

/// Applies [`SENSOR_TO_HEAD`].
pub fn to_head_frame(v: Vec3) -> Vec3 {
    let s = v.as_array();
    let row = |r: [i8; 3]| f64::from(r[0]) * s[0] + f64::from(r[1]) * s[1] + f64::from(r[2]) * s[2];
    Vec3::new(
        row(SENSOR_TO_HEAD[0]),
        row(SENSOR_TO_HEAD[1]),
        row(SENSOR_TO_HEAD[2]),
    )
}

/// Per-axis angular quantity in attitude terms (rates or increments).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisTriple {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

impl AxisTriple {
    pub const ZERO: AxisTriple = AxisTriple {
        pitch: 0.0,
        roll: 0.0,
        yaw: 0.0,
    };
}

/// Bias-corrected gyro reading expressed as attitude rates, °/s.
///
/// Rotation about +z (head up) is a turn to the left, so yaw is its negation.
pub fn attitude_rates(gyro: Vec3, bias: Vec3) -> AxisTriple {
    let head = to_head_frame(gyro - bias);
    AxisTriple {
        pitch: head.y,
        roll: head.x,
        yaw: -head.z,
    }
}

/// Accelerometer magnitude fell outside the trusted gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvalidTilt {
    pub magnitude_g: f64,
}

/// Pitch and roll (degrees) implied by the gravity direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tilt {
    pub pitch: f64,
    pub roll: f64,
}

/// Extracts tilt from a head-frame accelerometer reading in g.
pub fn accel_tilt(accel: Vec3, gate: [f64; 2]) -> Result<Tilt, InvalidTilt> {
    let magnitude_g = accel.norm();
    if !(magnitude_g >= gate[0] && magnitude_g <= gate[1]) {
        return Err(InvalidTilt { magnitude_g });
    }
    let pitch = libm::atan2(-accel.x, libm::sqrt(accel.y * accel.y + accel.z * accel.z));
    let roll = libm::atan2(accel.y, accel.z);
    Ok(Tilt {
        pitch: pitch.to_degrees(),
        roll: roll.to_degrees(),
    })
}

/// Interval between consecutive samples was zero, negative, or too long to
/// integrate across.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGap {
    pub dt_s: f64,
}

impl fmt::Display for SampleGap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sample gap of {} s", self.dt_s)
    }
}

/// Rectangular integration of attitude rates over one sample interval.
pub fn gyro_delta(rates: AxisTriple, dt_s: f64) -> Result<AxisTriple, SampleGap> {
    if !(dt_s > 0.0 && dt_s <= MAX_SAMPLE_GAP_S) {
        return Err(SampleGap { dt_s });
    }
    Ok(AxisTriple {
        pitch: rates.pitch * dt_s,
        roll: rates.roll * dt_s,
        yaw: rates.yaw * dt_s,
    })
}

/// One complementary-filter step for a single axis.
pub fn blend(a: f64, prev: f64, gyro_delta: f64, accel_angle: f64) -> f64 {
    let predicted = prev + gyro_delta;
    // keep the correction on the short way round the ±180 seam
    let accel_angle = if libm::fabs(accel_angle - predicted) > 180.0 {
        predicted + wrap_degrees(accel_angle - predicted)
    } else {
        accel_angle
    };
    a * predicted + (1.0 - a) * accel_angle
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionState {
    pub attitude: Attitude,
    pub last_t_us: u64,
    /// Whether the last sample passed the accelerometer gate.
    pub accel_valid: bool,
}

impl FusionState {
    pub fn new(attitude: Attitude, t_us: u64) -> Self {
        FusionState {
            attitude,
            last_t_us: t_us,
            accel_valid: true,
        }
    }

    /// Starts from the tilt of the first sample that passes the gate, with
    /// yaw at zero. Falls back to level if none does.
    pub fn seeded(window: &[PhysSample], cfg: &PipelineConfig) -> Self {
        let tilt = window
            .iter()
            .find_map(|s| accel_tilt(to_head_frame(s.accel), cfg.accel_gate).ok());
        let last_t = window.last().map_or(0, |s| s.t_us);
        let attitude = match tilt {
            Some(t) => Attitude {
                pitch: t.pitch,
                roll: t.roll,
                yaw: 0.0,
            },
            None => Attitude::default(),
        };
        FusionState {
            attitude,
            last_t_us: last_t,
            accel_valid: tilt.is_some(),
        }
    }

    /// Advances by one sample and returns the gyro increments applied.
    ///
    /// On a [`SampleGap`] nothing is integrated: the clock is re-anchored at
    /// the sample, pitch and roll snap to the accelerometer tilt (or stay put
    /// if it is invalid) and yaw is kept.
    pub fn update(
        &mut self,
        sample: &PhysSample,
        calib: &Calibration,
        cfg: &PipelineConfig,
    ) -> Result<AxisTriple, SampleGap> {
        let tilt = accel_tilt(to_head_frame(sample.accel), cfg.accel_gate).ok();
        self.accel_valid = tilt.is_some();

        let dt_s = if sample.t_us > self.last_t_us {
            (sample.t_us - self.last_t_us) as f64 * 1e-6
        } else {
            -((self.last_t_us - sample.t_us) as f64 * 1e-6)
        };
        let rates = attitude_rates(sample.gyro, calib.gyro_bias);
        let delta = match gyro_delta(rates, dt_s) {
            Ok(d) => d,
            Err(gap) => {
                self.last_t_us = sample.t_us;
                if let Some(t) = tilt {
                    self.attitude.pitch = t.pitch;
                    self.attitude.roll = t.roll;
                }
                return Err(gap);
            }
        };

        let att = &mut self.attitude;
        match tilt {
            Some(t) => {
                att.pitch = wrap_degrees(blend(cfg.a, att.pitch, delta.pitch, t.pitch));
                att.roll = wrap_degrees(blend(cfg.a, att.roll, delta.roll, t.roll));
            }
            None => {
                att.pitch = wrap_degrees(att.pitch + delta.pitch);
                att.roll = wrap_degrees(att.roll + delta.roll);
            }
        }
        att.yaw += delta.yaw;
        self.last_t_us = sample.t_us;
        Ok(delta)
    }
}

/// Pure form of [`FusionState::update`].
pub fn fuse(
    state: FusionState,
    sample: &PhysSample,
    calib: &Calibration,
    cfg: &PipelineConfig,
) -> (FusionState, Result<AxisTriple, SampleGap>) {
    let mut next = state;
    let r = next.update(sample, calib, cfg);
    (next, r)
}
