//! Offline blink segmentation and labelling.
//!
//! These work on a whole trace at once instead of sample by sample: the
//! denoised IR signal is scanned for closures against the fixed resting
//! level measured in the calibration window, and the resulting list of
//! closure durations is turned into button events by a plain sequence walk.
//! The scenario generator uses the same sequence walk on the nominal pulse
//! list to produce its labels.

use meiga_core::gesture::RELEASE_FRACTION;
use meiga_core::pipeline::calibration_len;
use meiga_core::{GestureEvent, GestureKind, KalmanState, PhysSample, PipelineConfig};

/// One closure: first sample above threshold to the release sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Closure {
    pub start_us: u64,
    pub end_us: u64,
}

impl Closure {
    pub fn duration_us(&self) -> u64 {
        self.end_us - self.start_us
    }
}

/// Denoised IR signal of everything after the calibration window, plus the
/// resting level it is compared to.
pub fn denoised_ir(samples: &[PhysSample], cfg: &PipelineConfig) -> (f64, Vec<(u64, f64)>) {
    let n = calibration_len(samples, cfg);
    let window = &samples[..n];
    let baseline = window.iter().map(|s| s.ir).sum::<f64>() / n.max(1) as f64;
    let mut kf = KalmanState::new(baseline, cfg.kalman_p0, cfg.kalman_r, cfg.kalman_q)
        .expect("validated config has positive variances");
    let out = samples[n..]
        .iter()
        .map(|s| (s.t_us, kf.step(s.ir).unwrap_or(kf.x_hat)))
        .collect();
    (baseline, out)
}

/// All confirmed closures in a denoised signal.
///
/// A closure opens on the first sample whose relative deviation exceeds
/// `blink_delta` and ends on the first later sample below the release
/// threshold. It counts only if some sample strictly inside it lies at
/// least `debounce_ms` after its start.
pub fn segment(signal: &[(u64, f64)], baseline: f64, cfg: &PipelineConfig) -> Vec<Closure> {
    let dev = |v: f64| ((v - baseline) / baseline).abs();
    let debounce_us = u64::from(cfg.debounce_ms) * 1000;
    let mut out = Vec::new();
    let mut i = 0;
    while i < signal.len() {
        if dev(signal[i].1) <= cfg.blink_delta {
            i += 1;
            continue;
        }
        let start = signal[i].0;
        let mut j = i + 1;
        let mut confirmed = false;
        while j < signal.len() && dev(signal[j].1) >= RELEASE_FRACTION * cfg.blink_delta {
            confirmed |= signal[j].0 - start >= debounce_us;
            j += 1;
        }
        if j == signal.len() {
            break;
        }
        if confirmed {
            out.push(Closure {
                start_us: start,
                end_us: signal[j].0,
            });
        }
        i = j + 1;
    }
    out
}

/// Button events implied by a sequence of closures.
///
/// A held-back short blink at the very end is reported as a left click at
/// its deadline.
pub fn label_closures(closures: &[Closure], cfg: &PipelineConfig) -> Vec<GestureEvent> {
    let right = u64::from(cfg.t_right_ms) * 1000;
    let hold = u64::from(cfg.t_hold_ms) * 1000;
    let gap = u64::from(cfg.double_blink_gap_ms) * 1000;
    let ev = |kind, t_us, d| GestureEvent {
        kind,
        t_us,
        duration_us: Some(d),
    };

    let mut out = Vec::new();
    let mut latched = false;
    let mut pending: Option<Closure> = None;
    for c in closures {
        let d = c.duration_us();
        if let Some(p) = pending.take() {
            if d < right && c.start_us < p.end_us + gap {
                out.push(ev(GestureKind::MiddleClick, c.end_us, d));
                continue;
            }
            let t = if c.start_us < p.end_us + gap {
                c.end_us
            } else {
                p.end_us + gap
            };
            out.push(ev(GestureKind::LeftClick, t, p.duration_us()));
        }
        if d < right {
            if latched {
                latched = false;
                out.push(ev(GestureKind::DragRelease, c.end_us, d));
            } else if cfg.middle_click_enabled {
                pending = Some(*c);
            } else {
                out.push(ev(GestureKind::LeftClick, c.end_us, d));
            }
        } else if d < hold {
            out.push(ev(GestureKind::RightClick, c.end_us, d));
        } else {
            out.push(ev(
                if latched {
                    GestureKind::DragRelease
                } else {
                    GestureKind::DragLatch
                },
                c.end_us,
                d,
            ));
            latched = !latched;
        }
    }
    if let Some(p) = pending {
        out.push(ev(GestureKind::LeftClick, p.end_us + gap, p.duration_us()));
    }
    out
}

/// Brute-force button events of a whole trace.
pub fn offline_events(samples: &[PhysSample], cfg: &PipelineConfig) -> Vec<GestureEvent> {
    let (baseline, signal) = denoised_ir(samples, cfg);
    label_closures(&segment(&signal, baseline, cfg), cfg)
}

/// Whether two event lists agree on kinds exactly and on times and
/// durations within `tol_us`.
pub fn agree(a: &[GestureEvent], b: &[GestureEvent], tol_us: u64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.kind == y.kind
                && x.t_us.abs_diff(y.t_us) <= tol_us
                && match (x.duration_us, y.duration_us) {
                    (Some(p), Some(q)) => p.abs_diff(q) <= tol_us,
                    (p, q) => p == q,
                }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use GestureKind::*;

    fn c(start_ms: u64, len_ms: u64) -> Closure {
        Closure {
            start_us: start_ms * 1000,
            end_us: (start_ms + len_ms) * 1000,
        }
    }

    fn kinds(ev: &[GestureEvent]) -> Vec<GestureKind> {
        ev.iter().map(|e| e.kind).collect()
    }

    #[test]
    fn sequence_labels() {
        let cfg = PipelineConfig::default();
        let ev = label_closures(
            &[
                c(0, 300),
                c(1000, 1500),
                c(3000, 2500),
                c(6000, 1200),
                c(8000, 999),
            ],
            &cfg,
        );
        assert_eq!(
            kinds(&ev),
            [LeftClick, RightClick, DragLatch, RightClick, DragRelease]
        );
        let ev = label_closures(&[c(0, 2000), c(3000, 2000)], &cfg);
        assert_eq!(kinds(&ev), [DragLatch, DragRelease]);
    }

    #[test]
    fn middle_click_pairs() {
        let cfg = PipelineConfig {
            middle_click_enabled: true,
            ..Default::default()
        };
        let ev = label_closures(
            &[
                c(0, 200),
                c(500, 150),
                c(2000, 200),
                c(3000, 200),
                c(3300, 1500),
            ],
            &cfg,
        );
        assert_eq!(kinds(&ev), [MiddleClick, LeftClick, LeftClick, RightClick]);
        assert_eq!(ev[1].t_us, 2_600_000);
        assert_eq!(ev[2].t_us, 4_800_000);
    }

    #[test]
    fn segmentation_respects_hysteresis_and_debounce() {
        let cfg = PipelineConfig::default();
        let base = 0.5;
        let lvl = |d: f64| base * (1.0 + d);
        let mut sig = Vec::new();
        let mut t = 0;
        let mut push = |n: u64, d: f64| {
            for _ in 0..n {
                t += 1000;
                sig.push((t, lvl(d)));
            }
        };
        push(10, 0.0);
        push(20, 0.2); // too short
        push(10, 0.0);
        push(100, 0.2);
        push(50, 0.06); // inside the hysteresis band
        push(10, 0.0);
        let cl = segment(&sig, base, &cfg);
        assert_eq!(
            cl,
            [Closure {
                start_us: 41_000,
                end_us: 191_000
            }]
        );
    }
}
