//! Pipeline tuning parameters.

use alloc::vec::Vec;
use core::fmt;

/// Every tunable of the signal chain.
///
/// The complementary-filter gyro weight is `a`; the accelerometer weight is
/// always `1 - a` and is never stored. Field names double as the keys of the
/// on-disk config file (`a` is spelled `A` there).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct PipelineConfig {
    /// Gyro weight of the complementary filter, `(0, 1]`.
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    pub a: f64,
    /// Measurement variance of the IR channel (normalized units squared).
    pub kalman_r: f64,
    /// Process variance of the IR channel.
    pub kalman_q: f64,
    /// Initial estimate covariance of the IR channel.
    pub kalman_p0: f64,
    /// Blinks at least this long are right clicks.
    pub t_right_ms: u32,
    /// Blinks at least this long latch the left button.
    pub t_hold_ms: u32,
    /// Minimum sustained closure before a blink counts.
    pub debounce_ms: u32,
    /// Relative IR deviation from baseline that signals a closure.
    pub blink_delta: f64,
    /// Window after a short blink in which a second one makes a middle click.
    pub double_blink_gap_ms: u32,
    pub middle_click_enabled: bool,
    /// Pixels per degree of yaw.
    pub gain_x: f64,
    /// Pixels per degree of pitch.
    pub gain_y: f64,
    /// Angular rates below this produce no cursor motion on that axis.
    pub rate_deadzone_dps: f64,
    /// Roll magnitude below this produces no scrolling.
    pub roll_deadzone_deg: f64,
    /// Wheel ticks per second per degree of roll beyond the deadzone.
    pub scroll_rate: f64,
    pub invert_x: bool,
    pub invert_y: bool,
    /// Accelerometer counts per g.
    pub accel_scale: f64,
    /// Gyroscope counts per degree/second.
    pub gyro_scale: f64,
    /// Length of the stationary startup window.
    pub calib_ms: u32,
    /// Accelerometer magnitudes outside `[lo, hi]` g are not trusted for tilt.
    pub accel_gate: [f64; 2],
    pub report_hz: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            a: 0.95,
            kalman_r: 0.0004,
            kalman_q: 0.000001,
            kalman_p0: 1.0,
            t_right_ms: 1000,
            t_hold_ms: 2000,
            debounce_ms: 30,
            blink_delta: 0.08,
            double_blink_gap_ms: 400,
            middle_click_enabled: false,
            gain_x: 15.0,
            gain_y: 15.0,
            rate_deadzone_dps: 0.5,
            roll_deadzone_deg: 10.0,
            scroll_rate: 0.5,
            invert_x: false,
            invert_y: false,
            accel_scale: 16384.0,
            gyro_scale: 131.0,
            calib_ms: 2000,
            accel_gate: [0.5, 1.5],
            report_hz: 100.0,
        }
    }
}

/// One violated config invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigError {
    pub field: &'static str,
    pub requirement: &'static str,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.requirement)
    }
}

impl PipelineConfig {
    /// Complementary-filter accelerometer weight.
    pub fn b(&self) -> f64 {
        1.0 - self.a
    }

    pub fn report_period_us(&self) -> u64 {
        libm::round(1e6 / self.report_hz) as u64
    }

    /// Returns the config unchanged if every invariant holds, otherwise
    /// every violation found.
    pub fn validate(self) -> Result<Self, Vec<ConfigError>> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &'static str, requirement: &'static str| {
            if !ok {
                errs.push(ConfigError { field, requirement });
            }
        };

        check(self.a > 0.0 && self.a <= 1.0, "A", "A must be in (0,1]");
        check(self.kalman_r > 0.0, "kalman_r", "kalman_r must be > 0");
        check(self.kalman_q > 0.0, "kalman_q", "kalman_q must be > 0");
        check(self.kalman_p0 > 0.0, "kalman_p0", "kalman_p0 must be > 0");
        check(
            self.t_hold_ms > self.t_right_ms,
            "t_hold_ms",
            "t_hold_ms > t_right_ms required",
        );
        check(
            self.t_right_ms > self.debounce_ms,
            "t_right_ms",
            "t_right_ms > debounce_ms required",
        );
        check(
            self.blink_delta > 0.0 && self.blink_delta < 1.0,
            "blink_delta",
            "blink_delta must be in (0,1)",
        );
        check(self.gain_x.is_finite(), "gain_x", "gain_x must be finite");
        check(self.gain_y.is_finite(), "gain_y", "gain_y must be finite");
        check(
            self.rate_deadzone_dps >= 0.0,
            "rate_deadzone_dps",
            "rate_deadzone_dps must be >= 0",
        );
        check(
            self.roll_deadzone_deg >= 0.0,
            "roll_deadzone_deg",
            "roll_deadzone_deg must be >= 0",
        );
        check(
            self.scroll_rate >= 0.0,
            "scroll_rate",
            "scroll_rate must be >= 0",
        );
        check(
            self.accel_scale > 0.0,
            "accel_scale",
            "accel_scale must be > 0",
        );
        check(
            self.gyro_scale > 0.0,
            "gyro_scale",
            "gyro_scale must be > 0",
        );
        check(self.calib_ms > 0, "calib_ms", "calib_ms must be > 0");
        check(
            self.accel_gate[0] >= 0.0 && self.accel_gate[0] < self.accel_gate[1],
            "accel_gate",
            "accel_gate must satisfy 0 <= lo < hi",
        );
        check(
            self.report_hz > 0.0 && self.report_hz <= 1e6,
            "report_hz",
            "report_hz must be in (0,1e6]",
        );

        if errs.is_empty() {
            Ok(self)
        } else {
            Err(errs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn defaults_are_valid() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.clone().validate(), Ok(cfg));
    }

    #[test]
    fn zero_weight_is_rejected() {
        let cfg = PipelineConfig {
            a: 0.0,
            ..Default::default()
        };
        let errs = cfg.validate().unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "A");
        assert_eq!(errs[0].to_string(), "A must be in (0,1]");
    }

    #[test]
    fn unit_weight_is_allowed() {
        let cfg = PipelineConfig {
            a: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn hold_must_exceed_right() {
        let cfg = PipelineConfig {
            t_right_ms: 2000,
            t_hold_ms: 1500,
            ..Default::default()
        };
        let errs = cfg.validate().unwrap_err();
        assert_eq!(errs[0].to_string(), "t_hold_ms > t_right_ms required");
    }

    #[test]
    fn every_violation_is_listed() {
        let cfg = PipelineConfig {
            a: 1.5,
            kalman_r: 0.0,
            gyro_scale: -1.0,
            debounce_ms: 5000,
            ..Default::default()
        };
        let fields: Vec<_> = cfg
            .validate()
            .unwrap_err()
            .iter()
            .map(|e| e.field)
            .collect();
        assert_eq!(fields, ["A", "kalman_r", "t_right_ms", "gyro_scale"]);
    }

    #[test]
    fn b_is_complement_of_a() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.a + cfg.b(), 1.0);
        assert_eq!(cfg.report_period_us(), 10_000);
    }
}
