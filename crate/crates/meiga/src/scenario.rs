//! Synthetic labelled scenarios.
//!
//! A scenario describes head motion as a per-axis sequence of primitives and
//! blinks as rectangular IR pulses, plus Gaussian sensor noise. Rendering it
//! gives a trace (starting with a stationary calibration prefix) and the
//! button events the pipeline is expected to produce.
//!
//! ```toml
//! seed = 7
//! duration_s = 8.0
//! ir_baseline = 0.6
//! pulse_amplitude = 2.5
//!
//! [noise]
//! accel_g = 0.002
//! gyro_dps = 0.05
//! ir_rel = 0.01
//! gyro_bias_dps = [0.3, -0.2, 0.1]
//!
//! [motion]
//! yaw = [{ kind = "hold", duration_s = 1.0 }, { kind = "ramp", duration_s = 1.0, to_deg = 20.0 }]
//! pitch = [{ kind = "sinusoid", duration_s = 2.0, amplitude_deg = 5.0, freq_hz = 0.5 }]
//!
//! [[blink]]
//! start_s = 4.0
//! duration_s = 0.3
//! ```
//!
//! Motion and blink times count from `settle_s` after the calibration prefix.

use std::f64::consts::PI;
use std::path::Path;

use meiga_core::{GestureEvent, PhysSample, PipelineConfig, RawSample, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::oracle::{label_closures, Closure};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sample_hz")]
    pub sample_hz: f64,
    /// Length after the calibration prefix.
    pub duration_s: f64,
    /// Stillness after the calibration window before anything happens.
    #[serde(default = "default_settle_s")]
    pub settle_s: f64,
    #[serde(default = "default_ir_baseline")]
    pub ir_baseline: f64,
    /// Pulse height in multiples of `blink_delta`.
    #[serde(default = "default_pulse_amplitude")]
    pub pulse_amplitude: f64,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default)]
    pub motion: Motion,
    #[serde(default)]
    pub blink: Vec<Blink>,
}

fn default_sample_hz() -> f64 {
    1000.0
}

fn default_settle_s() -> f64 {
    0.5
}

fn default_ir_baseline() -> f64 {
    0.6
}

fn default_pulse_amplitude() -> f64 {
    2.5
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Noise {
    pub accel_g: f64,
    pub gyro_dps: f64,
    /// IR noise σ as a fraction of the baseline level.
    pub ir_rel: f64,
    pub gyro_bias_dps: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Motion {
    pub pitch: Vec<Primitive>,
    pub roll: Vec<Primitive>,
    pub yaw: Vec<Primitive>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    Hold {
        duration_s: f64,
    },
    Ramp {
        duration_s: f64,
        to_deg: f64,
    },
    /// Oscillation around the current angle.
    Sinusoid {
        duration_s: f64,
        amplitude_deg: f64,
        freq_hz: f64,
    },
}

impl Primitive {
    fn duration_s(&self) -> f64 {
        match *self {
            Primitive::Hold { duration_s }
            | Primitive::Ramp { duration_s, .. }
            | Primitive::Sinusoid { duration_s, .. } => duration_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blink {
    pub start_s: f64,
    pub duration_s: f64,
}

/// Angle (degrees) and rate (°/s) of one axis at time `t` after the start
/// of its primitive sequence.
fn axis_state(seq: &[Primitive], t: f64) -> (f64, f64) {
    let mut angle = 0.0;
    let mut t0 = 0.0;
    for p in seq {
        let d = p.duration_s();
        let local = t - t0;
        if local < 0.0 {
            break;
        }
        let inside = local < d;
        match *p {
            Primitive::Hold { .. } => {
                if inside {
                    return (angle, 0.0);
                }
            }
            Primitive::Ramp { to_deg, .. } => {
                let rate = (to_deg - angle) / d;
                if inside {
                    return (angle + rate * local, rate);
                }
                angle = to_deg;
            }
            Primitive::Sinusoid {
                amplitude_deg,
                freq_hz,
                ..
            } => {
                let w = 2.0 * PI * freq_hz;
                if inside {
                    return (
                        angle + amplitude_deg * (w * local).sin(),
                        amplitude_deg * w * (w * local).cos(),
                    );
                }
                angle += amplitude_deg * (w * d).sin();
            }
        }
        t0 += d;
    }
    (angle, 0.0)
}

/// A rendered scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub samples: Vec<PhysSample>,
    pub expected: Vec<GestureEvent>,
    /// Time of the first sample after the calibration prefix.
    pub active_from_us: u64,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        toml::from_str(text).map_err(|e| Error::Scenario(e.message().to_owned()))
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scenario::parse(&text).map_err(|e| match e {
            Error::Scenario(m) => Error::Scenario(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    fn validate(&self, cfg: &PipelineConfig) -> Result<()> {
        let fail = |m: String| Err(Error::Scenario(m));
        if !(self.sample_hz > 0.0 && self.sample_hz.is_finite()) {
            return fail("sample_hz must be > 0".into());
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return fail("duration_s must be > 0".into());
        }
        if self.settle_s.is_nan() || self.settle_s < 0.0 {
            return fail("settle_s must be >= 0".into());
        }
        if !(self.ir_baseline > 0.0 && self.ir_baseline < 1.0) {
            return fail("ir_baseline must be in (0,1)".into());
        }
        if self.pulse_amplitude.is_nan() || self.pulse_amplitude < 2.0 {
            return fail(format!(
                "pulse_amplitude must be >= 2 (got {})",
                self.pulse_amplitude
            ));
        }
        if self.ir_baseline * (1.0 + self.pulse_amplitude * cfg.blink_delta) > 1.0 {
            return fail("pulses would exceed the IR full scale".into());
        }
        let n = &self.noise;
        if [n.accel_g, n.gyro_dps, n.ir_rel]
            .iter()
            .any(|s| !(*s >= 0.0 && s.is_finite()))
        {
            return fail("noise sigmas must be finite and >= 0".into());
        }
        for p in self
            .motion
            .pitch
            .iter()
            .chain(&self.motion.roll)
            .chain(&self.motion.yaw)
        {
            if p.duration_s().is_nan() || p.duration_s() <= 0.0 {
                return fail("motion primitive durations must be > 0".into());
            }
        }
        let mut blinks = self.blink.clone();
        blinks.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        for b in &blinks {
            if !(b.start_s >= 0.0 && b.duration_s > 0.0) {
                return fail(format!(
                    "blink at {} s: start must be >= 0 and duration > 0",
                    b.start_s
                ));
            }
            if b.start_s + b.duration_s > self.duration_s {
                return fail(format!(
                    "blink at {} s runs past the end of the scenario",
                    b.start_s
                ));
            }
        }
        for w in blinks.windows(2) {
            if w[1].start_s < w[0].start_s + w[0].duration_s {
                return fail(format!(
                    "blink pulses at {} s and {} s overlap",
                    w[0].start_s, w[1].start_s
                ));
            }
        }
        Ok(())
    }

    /// Renders the trace and its labels. Identical inputs give identical
    /// output.
    pub fn render(&self, cfg: &PipelineConfig) -> Result<Rendered> {
        self.validate(cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
        let gauss = move |rng: &mut ChaCha8Rng, sigma: f64| {
            if sigma > 0.0 {
                sigma * std_normal.sample(rng)
            } else {
                0.0
            }
        };

        let dt_us = (1e6 / self.sample_hz).round().max(1.0) as u64;
        let prefix_us = u64::from(cfg.calib_ms) * 1000 + dt_us;
        let active_from_us = prefix_us;
        let settle_us = (self.settle_s * 1e6).round() as u64;
        let total_us = prefix_us + settle_us + (self.duration_s * 1e6).round() as u64;

        let pulses: Vec<(u64, u64)> = self
            .blink
            .iter()
            .map(|b| {
                let s = prefix_us + settle_us + (b.start_s * 1e6).round() as u64;
                (s, s + (b.duration_s * 1e6).round() as u64)
            })
            .collect();
        let pulse_level = self.ir_baseline * (1.0 + self.pulse_amplitude * cfg.blink_delta);
        let bias = Vec3::from(self.noise.gyro_bias_dps);

        let mut samples = Vec::with_capacity((total_us / dt_us + 1) as usize);
        let mut t = 0;
        while t <= total_us {
            let motion_t = t.saturating_sub(prefix_us + settle_us) as f64 * 1e-6;
            let moving = t >= prefix_us + settle_us;
            let (pitch, pitch_rate) = if moving {
                axis_state(&self.motion.pitch, motion_t)
            } else {
                (0.0, 0.0)
            };
            let (roll, roll_rate) = if moving {
                axis_state(&self.motion.roll, motion_t)
            } else {
                (0.0, 0.0)
            };
            let (_, yaw_rate) = if moving {
                axis_state(&self.motion.yaw, motion_t)
            } else {
                (0.0, 0.0)
            };

            let (p, r) = (pitch.to_radians(), roll.to_radians());
            let n = &self.noise;
            let accel = Vec3::new(
                -p.sin() + gauss(&mut rng, n.accel_g),
                p.cos() * r.sin() + gauss(&mut rng, n.accel_g),
                p.cos() * r.cos() + gauss(&mut rng, n.accel_g),
            );
            let gyro = Vec3::new(
                roll_rate + bias.x + gauss(&mut rng, n.gyro_dps),
                pitch_rate + bias.y + gauss(&mut rng, n.gyro_dps),
                -yaw_rate + bias.z + gauss(&mut rng, n.gyro_dps),
            );
            let level = if pulses.iter().any(|&(s, e)| t >= s && t < e) {
                pulse_level
            } else {
                self.ir_baseline
            };
            let ir = level + self.ir_baseline * gauss(&mut rng, n.ir_rel);
            samples.push(PhysSample {
                t_us: t,
                accel,
                gyro,
                ir,
            });
            t += dt_us;
        }

        let mut closures: Vec<Closure> = pulses
            .iter()
            .map(|&(s, e)| Closure {
                start_us: s,
                end_us: e,
            })
            .collect();
        closures.sort_by_key(|c| c.start_us);
        let closures: Vec<Closure> = closures
            .into_iter()
            .filter(|c| c.duration_us() >= u64::from(cfg.debounce_ms) * 1000)
            .collect();
        Ok(Rendered {
            samples,
            expected: label_closures(&closures, cfg),
            active_from_us,
        })
    }
}

/// Quantizes a physical trace to bus counts.
pub fn to_raw(samples: &[PhysSample], cfg: &PipelineConfig) -> Vec<RawSample> {
    let count = |v: f64, scale: f64| {
        (v * scale)
            .round()
            .clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16
    };
    let full = f64::from(meiga_core::model::IR_FULL_SCALE);
    samples
        .iter()
        .map(|s| RawSample {
            t_us: s.t_us,
            accel: s.accel.as_array().map(|v| count(v, cfg.accel_scale)),
            gyro: s.gyro.as_array().map(|v| count(v, cfg.gyro_scale)),
            ir: (s.ir * full).round().clamp(0.0, full) as u16,
        })
        .collect()
}

/// Blink-only scenario with `blinks` pulses whose lengths are drawn from the
/// three duration bands (short, right-click, hold), separated by quiet gaps
/// of 0.7–1.5 s, with IR noise up to a quarter of `blink_delta`.
pub fn random_blinks(seed: u64, blinks: usize, cfg: &PipelineConfig) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d_6569_6761);
    let bands = [(0.1, 0.9), (1.0, 1.9), (2.0, 4.0)];
    let pick = Uniform::new(0usize, bands.len());
    let gap = Uniform::new_inclusive(0.7, 1.5);
    let mut t = 0.5;
    let mut blink = Vec::with_capacity(blinks);
    for _ in 0..blinks {
        let (lo, hi) = bands[pick.sample(&mut rng)];
        let d: f64 = Uniform::new_inclusive(lo, hi).sample(&mut rng);
        let d = (d * 1000.0).round() / 1000.0;
        blink.push(Blink {
            start_s: t,
            duration_s: d,
        });
        t += d + gap.sample(&mut rng);
    }
    let ir_sigma_delta: f64 = Uniform::new_inclusive(0.0, 0.25).sample(&mut rng);
    Scenario {
        seed,
        sample_hz: default_sample_hz(),
        duration_s: t + 1.0,
        settle_s: default_settle_s(),
        ir_baseline: Uniform::new_inclusive(0.3, 0.7).sample(&mut rng),
        pulse_amplitude: default_pulse_amplitude(),
        noise: Noise {
            accel_g: 0.002,
            gyro_dps: 0.05,
            ir_rel: ir_sigma_delta * cfg.blink_delta,
            gyro_bias_dps: [0.2, -0.1, 0.3],
        },
        motion: Motion::default(),
        blink,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use meiga_core::GestureKind;

    fn one_blink(ms: f64) -> Scenario {
        Scenario::parse(&format!(
            "duration_s = 2.0\n[[blink]]\nstart_s = 0.5\nduration_s = {}\n",
            ms / 1000.0
        ))
        .unwrap()
    }

    #[test]
    fn single_short_pulse_is_left_click() {
        let cfg = PipelineConfig::default();
        let r = one_blink(300.0).render(&cfg).unwrap();
        assert_eq!(r.expected.len(), 1);
        assert_eq!(r.expected[0].kind, GestureKind::LeftClick);
        assert_eq!(r.expected[0].duration_us, Some(300_000));
        assert_eq!(r.samples.first().unwrap().t_us, 0);
        assert!(r.samples.windows(2).all(|w| w[1].t_us == w[0].t_us + 1000));
    }

    #[test]
    fn same_seed_same_trace() {
        let cfg = PipelineConfig::default();
        let s = random_blinks(11, 5, &cfg);
        assert_eq!(s.render(&cfg).unwrap(), s.render(&cfg).unwrap());
        let other = Scenario {
            seed: 12,
            ..s.clone()
        };
        assert_ne!(
            s.render(&cfg).unwrap().samples,
            other.render(&cfg).unwrap().samples
        );
    }

    #[test]
    fn rejects_overlap_and_weak_pulses() {
        let cfg = PipelineConfig::default();
        let s = Scenario::parse(
            "duration_s = 3.0\n[[blink]]\nstart_s = 0.5\nduration_s = 0.5\n[[blink]]\nstart_s = 0.9\nduration_s = 0.2\n",
        )
        .unwrap();
        assert!(s.render(&cfg).unwrap_err().to_string().contains("overlap"));
        let weak = Scenario {
            pulse_amplitude: 1.5,
            ..one_blink(300.0)
        };
        assert!(weak
            .render(&cfg)
            .unwrap_err()
            .to_string()
            .contains("pulse_amplitude"));
        assert!(Scenario::parse("duration_s = 1.0\nbogus = 1\n").is_err());
    }

    #[test]
    fn ramp_reaches_target_with_constant_rate() {
        let seq = [
            Primitive::Hold { duration_s: 1.0 },
            Primitive::Ramp {
                duration_s: 2.0,
                to_deg: 20.0,
            },
        ];
        assert_eq!(axis_state(&seq, 0.5), (0.0, 0.0));
        assert_eq!(axis_state(&seq, 2.0), (10.0, 10.0));
        assert_eq!(axis_state(&seq, 5.0), (20.0, 0.0));
        let sine = [Primitive::Sinusoid {
            duration_s: 1.0,
            amplitude_deg: 3.0,
            freq_hz: 1.0,
        }];
        let (a, r) = axis_state(&sine, 0.25);
        assert!((a - 3.0).abs() < 1e-12 && r.abs() < 1e-9);
    }

    #[test]
    fn raw_quantization_inverts_scaling() {
        let cfg = PipelineConfig::default();
        let s = PhysSample {
            t_us: 5,
            accel: Vec3::new(0.0, -0.5, 1.0),
            gyro: Vec3::new(1.0, 300.0, -1.0),
            ir: 0.5,
        };
        let r = to_raw(&[s], &cfg)[0];
        assert_eq!(r.accel, [0, -8192, 16384]);
        assert_eq!(r.gyro, [131, i16::MAX, -131]);
        assert_eq!(r.ir, 2048);
    }
}
