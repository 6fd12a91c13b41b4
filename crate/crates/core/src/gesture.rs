//! Blink classification from the denoised cheek-distance signal.
//!
//! A closure is a sustained relative deviation of the IR level from the
//! resting baseline. It starts when the deviation exceeds `blink_delta`, is
//! confirmed once it has lasted `debounce_ms`, and ends when the deviation
//! falls below [`RELEASE_FRACTION`] of `blink_delta`. The closure length
//! picks the button action:
//!
//! | duration                    | action                                  |
//! |-----------------------------|-----------------------------------------|
//! | `< t_right_ms`              | left click (or drag release if latched) |
//! | `t_right_ms ..< t_hold_ms`  | right click                             |
//! | `>= t_hold_ms`              | latch left button (drag)                |
//!
//! With `middle_click_enabled`, a short blink is held back for
//! `double_blink_gap_ms`; a second short blink starting inside that window
//! turns the pair into a middle click.

use alloc::vec::Vec;
use core::fmt;

use crate::config::PipelineConfig;

/// Release threshold as a fraction of the closure threshold.
pub const RELEASE_FRACTION: f64 = 0.6;

/// Time constant of the resting-baseline tracker, seconds.
pub const BASELINE_TAU_S: f64 = 30.0;

/// Floor applied to the baseline when it is used as a divisor.
pub const MIN_BASELINE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GestureKind {
    LeftClick,
    RightClick,
    DragLatch,
    DragRelease,
    MiddleClick,
    BlinkStart,
    BlinkEnd,
}

impl GestureKind {
    pub const ALL: [GestureKind; 7] = [
        GestureKind::LeftClick,
        GestureKind::RightClick,
        GestureKind::DragLatch,
        GestureKind::DragRelease,
        GestureKind::MiddleClick,
        GestureKind::BlinkStart,
        GestureKind::BlinkEnd,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GestureKind::LeftClick => "left_click",
            GestureKind::RightClick => "right_click",
            GestureKind::DragLatch => "drag_latch",
            GestureKind::DragRelease => "drag_release",
            GestureKind::MiddleClick => "middle_click",
            GestureKind::BlinkStart => "blink_start",
            GestureKind::BlinkEnd => "blink_end",
        }
    }

    pub fn parse(s: &str) -> Option<GestureKind> {
        GestureKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Whether the kind changes button state.
    pub fn is_button(&self) -> bool {
        !matches!(self, GestureKind::BlinkStart | GestureKind::BlinkEnd)
    }
}

impl fmt::Display for GestureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GestureEvent {
    pub kind: GestureKind,
    pub t_us: u64,
    /// Length of the closure that produced the event, for blink-end and
    /// button events.
    pub duration_us: Option<u64>,
}

impl GestureEvent {
    pub fn duration_ms(&self) -> Option<f64> {
        self.duration_us.map(|d| d as f64 / 1000.0)
    }
}

/// What the button state is between closures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rest {
    Free,
    Latched,
    /// A short blink ended at `release_us` and may still pair into a middle
    /// click.
    Pending {
        release_us: u64,
        duration_us: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle(Rest),
    Candidate { start_us: u64, rest: Rest },
    Active { start_us: u64, rest: Rest },
}

/// Externally visible state of [`BlinkFsm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsmPhase {
    Idle,
    Candidate,
    Active,
    DragLatched,
    AwaitSecondBlink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlinkFsm {
    phase: Phase,
    entered_at_us: u64,
    baseline: f64,
    last_t_us: Option<u64>,
    clamped: u64,
}

impl BlinkFsm {
    pub fn new(baseline: f64, t_us: u64) -> Self {
        BlinkFsm {
            phase: Phase::Idle(Rest::Free),
            entered_at_us: t_us,
            baseline: baseline.clamp(0.0, 1.0),
            last_t_us: None,
            clamped: 0,
        }
    }

    pub fn phase(&self) -> FsmPhase {
        match self.phase {
            Phase::Idle(Rest::Free) => FsmPhase::Idle,
            Phase::Idle(Rest::Latched) => FsmPhase::DragLatched,
            Phase::Idle(Rest::Pending { .. }) => FsmPhase::AwaitSecondBlink,
            Phase::Candidate { .. } => FsmPhase::Candidate,
            Phase::Active { .. } => FsmPhase::Active,
        }
    }

    pub fn entered_at_us(&self) -> u64 {
        self.entered_at_us
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    /// Release time of a short blink awaiting a possible second one.
    pub fn pending_click_at(&self) -> Option<u64> {
        match self.rest() {
            Rest::Pending { release_us, .. } => Some(release_us),
            _ => None,
        }
    }

    pub fn drag_latched(&self) -> bool {
        self.rest() == Rest::Latched
    }

    /// Number of inputs that fell outside `[0, 1]`.
    pub fn clamped_count(&self) -> u64 {
        self.clamped
    }

    fn rest(&self) -> Rest {
        match self.phase {
            Phase::Idle(r) | Phase::Candidate { rest: r, .. } | Phase::Active { rest: r, .. } => r,
        }
    }

    fn enter(&mut self, phase: Phase, t_us: u64) {
        self.phase = phase;
        self.entered_at_us = t_us;
    }

    /// Abandons any closure in progress, keeping latch and pending-click
    /// state. Used after a sample gap.
    pub fn reset_timing(&mut self, t_us: u64) {
        let rest = self.rest();
        self.enter(Phase::Idle(rest), t_us);
        self.last_t_us = Some(t_us);
    }

    /// Feeds one denoised IR sample, passing any resulting events to `emit`.
    pub fn step<F: FnMut(GestureEvent)>(
        &mut self,
        t_us: u64,
        ir: f64,
        cfg: &PipelineConfig,
        mut emit: F,
    ) {
        let ir = if (0.0..=1.0).contains(&ir) {
            ir
        } else {
            self.clamped += 1;
            if ir.is_nan() {
                self.baseline
            } else {
                ir.clamp(0.0, 1.0)
            }
        };
        let dt_s = self
            .last_t_us
            .map_or(0.0, |prev| t_us.saturating_sub(prev) as f64 * 1e-6);
        self.last_t_us = Some(t_us);

        let deviation = libm::fabs(ir - self.baseline) / self.baseline.max(MIN_BASELINE);
        let closed = deviation > cfg.blink_delta;
        let opened = deviation < RELEASE_FRACTION * cfg.blink_delta;

        match self.phase {
            Phase::Idle(rest) => {
                let rest = self.expire_pending(rest, t_us, cfg, &mut emit);
                if closed {
                    self.enter(
                        Phase::Candidate {
                            start_us: t_us,
                            rest,
                        },
                        t_us,
                    );
                } else {
                    self.phase = Phase::Idle(rest);
                    let alpha = (dt_s / BASELINE_TAU_S).min(1.0);
                    self.baseline = (self.baseline + alpha * (ir - self.baseline)).clamp(0.0, 1.0);
                }
            }
            Phase::Candidate { start_us, rest } => {
                if opened {
                    let rest = self.expire_pending(rest, t_us, cfg, &mut emit);
                    self.enter(Phase::Idle(rest), t_us);
                } else if t_us - start_us >= u64::from(cfg.debounce_ms) * 1000 {
                    self.enter(Phase::Active { start_us, rest }, t_us);
                    emit(GestureEvent {
                        kind: GestureKind::BlinkStart,
                        t_us,
                        duration_us: None,
                    });
                }
            }
            Phase::Active { start_us, rest } => {
                if opened {
                    let duration_us = t_us - start_us;
                    emit(GestureEvent {
                        kind: GestureKind::BlinkEnd,
                        t_us,
                        duration_us: Some(duration_us),
                    });
                    let rest = classify(rest, duration_us, t_us, cfg, &mut emit);
                    self.enter(Phase::Idle(rest), t_us);
                }
            }
        }
    }

    /// Convenience wrapper over [`BlinkFsm::step`] collecting the events.
    pub fn step_collect(&mut self, t_us: u64, ir: f64, cfg: &PipelineConfig) -> Vec<GestureEvent> {
        let mut out = Vec::new();
        self.step(t_us, ir, cfg, |e| out.push(e));
        out
    }

    fn expire_pending<F: FnMut(GestureEvent)>(
        &mut self,
        rest: Rest,
        t_us: u64,
        cfg: &PipelineConfig,
        emit: &mut F,
    ) -> Rest {
        match rest {
            Rest::Pending {
                release_us,
                duration_us,
            } => {
                let deadline = release_us + u64::from(cfg.double_blink_gap_ms) * 1000;
                if t_us >= deadline {
                    emit(GestureEvent {
                        kind: GestureKind::LeftClick,
                        t_us: deadline,
                        duration_us: Some(duration_us),
                    });
                    Rest::Free
                } else {
                    rest
                }
            }
            other => other,
        }
    }
}

/// Turns a completed closure into button events and returns the new rest
/// state.
fn classify<F: FnMut(GestureEvent)>(
    rest: Rest,
    duration_us: u64,
    t_us: u64,
    cfg: &PipelineConfig,
    emit: &mut F,
) -> Rest {
    let right_us = u64::from(cfg.t_right_ms) * 1000;
    let hold_us = u64::from(cfg.t_hold_ms) * 1000;
    let mut out = |kind, duration_us| {
        emit(GestureEvent {
            kind,
            t_us,
            duration_us: Some(duration_us),
        })
    };

    // a held-back short blink followed by anything but a second short blink
    // is still a left click
    if let Rest::Pending {
        duration_us: first_us,
        ..
    } = rest
    {
        if duration_us >= right_us {
            out(GestureKind::LeftClick, first_us);
        }
    }

    if duration_us < right_us {
        match rest {
            Rest::Latched => {
                out(GestureKind::DragRelease, duration_us);
                Rest::Free
            }
            Rest::Pending { .. } => {
                out(GestureKind::MiddleClick, duration_us);
                Rest::Free
            }
            Rest::Free if cfg.middle_click_enabled => Rest::Pending {
                release_us: t_us,
                duration_us,
            },
            Rest::Free => {
                out(GestureKind::LeftClick, duration_us);
                Rest::Free
            }
        }
    } else if duration_us < hold_us {
        out(GestureKind::RightClick, duration_us);
        if rest == Rest::Latched {
            Rest::Latched
        } else {
            Rest::Free
        }
    } else {
        if rest == Rest::Latched {
            out(GestureKind::DragRelease, duration_us);
            Rest::Free
        } else {
            out(GestureKind::DragLatch, duration_us);
            Rest::Latched
        }
    }
}
