//! Signal chain for a head-operated mouse.
//!
//! Timestamped IMU and infrared cheek-distance samples go in; relative
//! pointer motion, scroll, and button activity come out as 4-byte HID
//! boot-mouse reports. Every stage is a plain value type advanced by a pure
//! function so a trace replayed twice produces identical bytes.
//!
//! The stages, in pipeline order:
//!
//! * [`convert`]: raw counts to physical units, startup calibration
//! * [`fusion`]: complementary filter for pitch/roll, gyro-only yaw
//! * [`kalman`]: static scalar Kalman filter denoising the IR channel
//! * [`gesture`]: timed blink state machine producing button gestures
//! * [`cursor`]: attitude deltas to pixels and scroll ticks
//! * [`hid`]: boot-protocol report encoding
//! * [`pipeline`]: orchestration and report pacing
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod config;
pub mod convert;
pub mod cursor;
pub mod fusion;
pub mod gesture;
pub mod hid;
pub mod kalman;
pub mod model;
pub mod pipeline;

pub use config::{ConfigError, PipelineConfig};
pub use convert::{calibrate, to_phys, Calibration, CalibrationError};
pub use cursor::{map_motion, CursorState, Motion};
pub use fusion::{accel_tilt, gyro_delta, FusionState, SampleGap};
pub use gesture::{BlinkFsm, FsmPhase, GestureEvent, GestureKind};
pub use hid::{click_to_reports, encode, Buttons, Carry, DecodeError, HidReport};
pub use kalman::{KalmanError, KalmanState};
pub use model::{Attitude, PhysSample, RawSample, Vec3};
pub use pipeline::{PipelineError, PipelineState, Sink, StepOutput};
