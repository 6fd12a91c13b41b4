//! Statistics over an event log: event counts, net cursor drift and click
//! latency.

use std::collections::BTreeMap;
use std::fmt;

use meiga_core::GestureKind;

use crate::eventlog::Entry;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub counts: BTreeMap<&'static str, u64>,
    pub reports: u64,
    pub net_dx: i64,
    pub net_dy: i64,
    pub net_wheel: i64,
    /// Time covered by the log.
    pub span_us: u64,
    /// Blink release to first report of each button event, microseconds.
    pub click_latency_us: Vec<u64>,
}

impl Summary {
    pub fn of(entries: &[Entry]) -> Summary {
        let mut s = Summary::default();
        for k in GestureKind::ALL {
            s.counts.insert(k.as_str(), 0);
        }
        let (Some(first), Some(last)) = (entries.first(), entries.last()) else {
            return s;
        };
        s.span_us = last.t_us().saturating_sub(first.t_us());

        let mut last_release: Option<u64> = None;
        let mut awaiting_report = false;
        for e in entries {
            match e {
                Entry::Event(ev) => {
                    *s.counts.entry(ev.kind.as_str()).or_default() += 1;
                    if ev.kind == GestureKind::BlinkEnd {
                        last_release = Some(ev.t_us);
                    }
                    awaiting_report |= ev.kind.is_button();
                }
                Entry::Report { t_us, report } => {
                    s.reports += 1;
                    s.net_dx += i64::from(report.dx);
                    s.net_dy += i64::from(report.dy);
                    s.net_wheel += i64::from(report.wheel);
                    if awaiting_report {
                        awaiting_report = false;
                        if let Some(r) = last_release {
                            s.click_latency_us.push(t_us.saturating_sub(r));
                        }
                    }
                }
            }
        }
        s
    }

    /// Net horizontal and vertical motion per second of log.
    pub fn drift_px_per_s(&self) -> (f64, f64) {
        if self.span_us == 0 {
            return (0.0, 0.0);
        }
        let secs = self.span_us as f64 * 1e-6;
        (self.net_dx as f64 / secs, self.net_dy as f64 / secs)
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "span_s: {:.3}", self.span_us as f64 * 1e-6)?;
        writeln!(f, "reports: {}", self.reports)?;
        for (k, n) in &self.counts {
            writeln!(f, "{k}: {n}")?;
        }
        let (vx, vy) = self.drift_px_per_s();
        writeln!(f, "net_dx: {}", self.net_dx)?;
        writeln!(f, "net_dy: {}", self.net_dy)?;
        writeln!(f, "net_wheel: {}", self.net_wheel)?;
        writeln!(f, "drift_px_per_s: {vx:.3} {vy:.3}")?;
        if self.click_latency_us.is_empty() {
            writeln!(f, "click_latency_ms: n/a")
        } else {
            let n = self.click_latency_us.len() as f64;
            let mean = self.click_latency_us.iter().sum::<u64>() as f64 / n / 1000.0;
            let max = *self.click_latency_us.iter().max().unwrap() as f64 / 1000.0;
            writeln!(
                f,
                "click_latency_ms: mean {mean:.3} max {max:.3} (n={})",
                self.click_latency_us.len()
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use meiga_core::{Buttons, GestureEvent, HidReport};

    #[test]
    fn counts_drift_and_latency() {
        let ev = |kind, t_us| {
            Entry::Event(GestureEvent {
                kind,
                t_us,
                duration_us: Some(1),
            })
        };
        let rep = |t_us, dx| Entry::Report {
            t_us,
            report: HidReport {
                buttons: Buttons::NONE,
                dx,
                dy: -1,
                wheel: 0,
            },
        };
        let log = [
            rep(1_000_000, 3),
            ev(GestureKind::BlinkEnd, 1_500_000),
            ev(GestureKind::LeftClick, 1_900_000),
            rep(1_902_000, 0),
            rep(3_000_000, -1),
        ];
        let s = Summary::of(&log);
        assert_eq!(s.counts["left_click"], 1);
        assert_eq!(s.counts["right_click"], 0);
        assert_eq!((s.net_dx, s.net_dy, s.reports), (2, -3, 3));
        assert_eq!(s.click_latency_us, [402_000]);
        assert_eq!(s.drift_px_per_s(), (1.0, -1.5));
        assert!(s.to_string().contains("click_latency_ms: mean 402.000"));
    }
}
