//! Built-in oracle suites run by `meiga selftest`.

use meiga_core::fusion::blend;
use meiga_core::{encode, Buttons, HidReport, KalmanState, PipelineConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{agree, offline_events};
use crate::replay::{log_bytes, run_collect};
use crate::scenario::random_blinks;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: u32,
    pub total: u32,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

fn suite(name: &'static str, cases: impl IntoIterator<Item = bool>) -> SuiteResult {
    let (mut passed, mut total) = (0, 0);
    for c in cases {
        total += 1;
        passed += u32::from(c);
    }
    SuiteResult {
        name,
        passed,
        total,
    }
}

/// Fixed tilt with zero gyro: the error decays as `A^n`.
fn complementary_decay() -> SuiteResult {
    let a = 0.95;
    let mut theta = 0.0;
    suite(
        "complementary_decay",
        (1..=200).map(move |n| {
            theta = blend(a, theta, 0.0, 10.0);
            let want = 10.0 * (1.0 - a.powi(n));
            (theta - want).abs() <= 1e-9 * want
        }),
    )
}

/// With no process noise the estimate is the running mean.
fn kalman_running_mean() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut kf = KalmanState::new(0.0, 1e12, 0.01, 0.0).ok();
    let mut sum = 0.0;
    suite(
        "kalman_running_mean",
        (1..=500).map(move |n| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            sum += z;
            match kf.as_mut().map(|k| k.step(z)) {
                Some(Ok(x)) => (x - sum / f64::from(n)).abs() <= 1e-6,
                _ => false,
            }
        }),
    )
}

fn hid_round_trip() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    suite(
        "hid_round_trip",
        (0..10_000).map(move |_| {
            let buttons = Buttons::from_bits(rng.gen_range(0..8)).unwrap_or(Buttons::NONE);
            let (dx, dy, w) = (
                rng.gen_range(-400..400),
                rng.gen_range(-400..400),
                rng.gen_range(-400..400),
            );
            let (r, c) = encode(buttons, dx, dy, w);
            HidReport::from_bytes(r.to_bytes()) == Ok(r)
                && i32::from(r.dx) + c.dx == dx
                && i32::from(r.dy) + c.dy == dy
                && i32::from(r.wheel) + c.wheel == w
        }),
    )
}

/// Pipeline, scenario labels and offline segmentation agree.
fn blink_agreement(scenarios: u64) -> SuiteResult {
    let cfg = PipelineConfig::default();
    suite(
        "blink_agreement",
        (0..scenarios).map(move |seed| {
            let Ok(r) = random_blinks(seed, 6, &cfg).render(&cfg) else {
                return false;
            };
            let Ok((out, _)) = run_collect(&r.samples, &cfg) else {
                return false;
            };
            let got: Vec<_> = out
                .events
                .iter()
                .copied()
                .filter(|e| e.kind.is_button())
                .collect();
            agree(&got, &r.expected, 60_000)
                && agree(&got, &offline_events(&r.samples, &cfg), 2_000)
        }),
    )
}

fn replay_determinism() -> SuiteResult {
    let cfg = PipelineConfig::default();
    suite(
        "replay_determinism",
        (100..103).map(move |seed| {
            let Ok(r) = random_blinks(seed, 4, &cfg).render(&cfg) else { return false };
            matches!((log_bytes(&r.samples, &cfg), log_bytes(&r.samples, &cfg)), (Ok(a), Ok(b)) if a == b)
        }),
    )
}

pub fn run_all() -> Vec<SuiteResult> {
    vec![
        complementary_decay(),
        kalman_running_mean(),
        hid_round_trip(),
        blink_agreement(10),
        replay_determinism(),
    ]
}
