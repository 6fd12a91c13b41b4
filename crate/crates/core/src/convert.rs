//! Unit conversion and startup calibration.

use core::fmt;

use crate::config::PipelineConfig;
use crate::model::{PhysSample, RawSample, Vec3, IR_FULL_SCALE};

/// Smallest window accepted by [`calibrate`].
pub const MIN_CALIB_SAMPLES: usize = 10;

/// Largest per-axis mean residual rate (°/s) accepted as "stationary".
pub const STATIONARY_LIMIT_DPS: f64 = 2.0;

/// Converts bus counts to physical units.
pub fn to_phys(raw: &RawSample, cfg: &PipelineConfig) -> PhysSample {
    let a = |c: i16| f64::from(c) / cfg.accel_scale;
    let g = |c: i16| f64::from(c) / cfg.gyro_scale;
    PhysSample {
        t_us: raw.t_us,
        accel: Vec3::new(a(raw.accel[0]), a(raw.accel[1]), a(raw.accel[2])),
        gyro: Vec3::new(g(raw.gyro[0]), g(raw.gyro[1]), g(raw.gyro[2])),
        ir: f64::from(raw.ir) / f64::from(IR_FULL_SCALE),
    }
}

/// Resting-state statistics captured at power-up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Mean gyro reading while still, °/s.
    pub gyro_bias: Vec3,
    /// Mean normalized IR level of the resting cheek.
    pub ir_baseline: f64,
    /// Population standard deviation of the resting IR level.
    pub ir_sigma: f64,
    /// Time spanned by the window.
    pub window_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalibrationError {
    TooFewSamples {
        count: usize,
    },
    WindowTooShort {
        span_ms: f64,
        required_ms: u32,
    },
    /// `axis` is 0/1/2 for x/y/z.
    NotStationary {
        axis: usize,
        residual_dps: f64,
    },
    NonFinite,
}

impl fmt::Display for CalibrationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalibrationError::TooFewSamples { count } => write!(
                f,
                "calibration needs at least {MIN_CALIB_SAMPLES} samples, got {count}"
            ),
            CalibrationError::WindowTooShort { span_ms, required_ms } => write!(
                f,
                "calibration window spans {span_ms} ms, need {required_ms} ms"
            ),
            CalibrationError::NotStationary { axis, residual_dps } => write!(
                f,
                "device not stationary during calibration: gyro axis {} residual {residual_dps:.3} deg/s",
                ["x", "y", "z"][*axis]
            ),
            CalibrationError::NonFinite => f.write_str("calibration window contains non-finite values"),
        }
    }
}

/// Estimates gyro bias and the resting IR level from a stationary window.
///
/// The window is rejected when any gyro axis still shows a mean absolute
/// rate above [`STATIONARY_LIMIT_DPS`] once its own mean is removed.
pub fn calibrate(
    samples: &[PhysSample],
    cfg: &PipelineConfig,
) -> Result<Calibration, CalibrationError> {
    let n = samples.len();
    if n < MIN_CALIB_SAMPLES {
        return Err(CalibrationError::TooFewSamples { count: n });
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(CalibrationError::NonFinite);
    }
    let span_us = samples[n - 1].t_us.saturating_sub(samples[0].t_us);
    let span_ms = span_us as f64 / 1000.0;
    if span_us < u64::from(cfg.calib_ms) * 1000 {
        return Err(CalibrationError::WindowTooShort {
            span_ms,
            required_ms: cfg.calib_ms,
        });
    }

    let inv_n = 1.0 / n as f64;
    let mut sum = [0.0f64; 3];
    let mut ir_sum = 0.0;
    for s in samples {
        for (acc, v) in sum.iter_mut().zip(s.gyro.as_array()) {
            *acc += v;
        }
        ir_sum += s.ir;
    }
    let bias = [sum[0] * inv_n, sum[1] * inv_n, sum[2] * inv_n];
    let ir_baseline = ir_sum * inv_n;

    let mut residual = [0.0f64; 3];
    let mut ir_sq = 0.0;
    for s in samples {
        for ((acc, v), b) in residual.iter_mut().zip(s.gyro.as_array()).zip(bias) {
            *acc += libm::fabs(v - b);
        }
        let d = s.ir - ir_baseline;
        ir_sq += d * d;
    }
    for (axis, r) in residual.iter().enumerate() {
        let mean_residual = r * inv_n;
        if mean_residual > STATIONARY_LIMIT_DPS {
            return Err(CalibrationError::NotStationary {
                axis,
                residual_dps: mean_residual,
            });
        }
    }

    Ok(Calibration {
        gyro_bias: Vec3::from(bias),
        ir_baseline,
        ir_sigma: libm::sqrt(ir_sq * inv_n),
        window_ms: span_ms,
    })
}
