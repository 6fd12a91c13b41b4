//! HID boot-protocol mouse reports.
//!
//! ```text
//! byte 0: buttons  bit0 left, bit1 right, bit2 middle, bits 3..7 zero
//! byte 1: dx       two's complement, -127..=127
//! byte 2: dy       two's complement, -127..=127
//! byte 3: wheel    two's complement, -127..=127
//! ```
//!
//! -128 is never emitted so every delta can be negated.

use alloc::vec::Vec;
use core::fmt;

use crate::gesture::{GestureEvent, GestureKind};

pub const REPORT_LEN: usize = 4;
pub const MAX_DELTA: i32 = 127;

/// Report descriptor matching the byte layout above.
pub const BOOT_MOUSE_DESCRIPTOR: &[u8] = &[
    0x05, 0x01, // USAGE_PAGE Generic Desktop
    0x09, 0x02, // USAGE Mouse
    0xa1, 0x01, // COLLECTION Application
    0x09, 0x01, // USAGE Pointer
    0xa1, 0x00, // COLLECTION Physical
    0x05, 0x09, // USAGE_PAGE Button
    0x19, 0x01, // USAGE_MINIMUM Button 1
    0x29, 0x03, // USAGE_MAXIMUM Button 3
    0x15, 0x00, // LOGICAL_MINIMUM 0
    0x25, 0x01, // LOGICAL_MAXIMUM 1
    0x95, 0x03, // REPORT_COUNT 3
    0x75, 0x01, // REPORT_SIZE 1
    0x81, 0x02, // INPUT Data,Var,Abs
    0x95, 0x01, // REPORT_COUNT 1
    0x75, 0x05, // REPORT_SIZE 5
    0x81, 0x01, // INPUT Cnst,Ary,Abs
    0x05, 0x01, // USAGE_PAGE Generic Desktop
    0x09, 0x30, // USAGE X
    0x09, 0x31, // USAGE Y
    0x09, 0x38, // USAGE Wheel
    0x15, 0x81, // LOGICAL_MINIMUM -127
    0x25, 0x7f, // LOGICAL_MAXIMUM 127
    0x75, 0x08, // REPORT_SIZE 8
    0x95, 0x03, // REPORT_COUNT 3
    0x81, 0x06, // INPUT Data,Var,Rel
    0xc0, // END COLLECTION
    0xc0, // END COLLECTION
];

/// Button bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Buttons(u8);

impl Buttons {
    pub const NONE: Buttons = Buttons(0);
    pub const LEFT: Buttons = Buttons(0b001);
    pub const RIGHT: Buttons = Buttons(0b010);
    pub const MIDDLE: Buttons = Buttons(0b100);
    const VALID: u8 = 0b111;

    pub fn from_bits(bits: u8) -> Option<Buttons> {
        if bits & !Self::VALID == 0 {
            Some(Buttons(bits))
        } else {
            None
        }
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, other: Buttons) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn with(self, other: Buttons) -> Buttons {
        Buttons(self.0 | other.0)
    }

    pub fn without(self, other: Buttons) -> Buttons {
        Buttons(self.0 & !other.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct HidReport {
    pub buttons: Buttons,
    pub dx: i8,
    pub dy: i8,
    pub wheel: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    ReservedBits(u8),
    /// -128 in the given byte position.
    OutOfRange(usize),
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::ReservedBits(b) => write!(f, "reserved button bits set in {b:#04x}"),
            DecodeError::OutOfRange(i) => write!(f, "byte {i} is -128"),
        }
    }
}

impl HidReport {
    pub fn with_buttons(buttons: Buttons) -> HidReport {
        HidReport {
            buttons,
            ..Default::default()
        }
    }

    pub fn to_bytes(&self) -> [u8; REPORT_LEN] {
        [
            self.buttons.bits(),
            self.dx as u8,
            self.dy as u8,
            self.wheel as u8,
        ]
    }

    pub fn from_bytes(bytes: [u8; REPORT_LEN]) -> Result<HidReport, DecodeError> {
        let buttons = Buttons::from_bits(bytes[0]).ok_or(DecodeError::ReservedBits(bytes[0]))?;
        let delta = |i: usize| {
            let v = bytes[i] as i8;
            if v == i8::MIN {
                Err(DecodeError::OutOfRange(i))
            } else {
                Ok(v)
            }
        };
        Ok(HidReport {
            buttons,
            dx: delta(1)?,
            dy: delta(2)?,
            wheel: delta(3)?,
        })
    }
}

impl fmt::Display for HidReport {
    /// Space separated upper-case hex, e.g. `01 05 00 00`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.to_bytes();
        write!(f, "{:02X} {:02X} {:02X} {:02X}", b[0], b[1], b[2], b[3])
    }
}

/// Motion that did not fit into a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Carry {
    pub dx: i32,
    pub dy: i32,
    pub wheel: i32,
}

impl Carry {
    pub fn is_zero(&self) -> bool {
        *self == Carry::default()
    }
}

fn clamp_delta(v: i32) -> (i8, i32) {
    let c = v.clamp(-MAX_DELTA, MAX_DELTA);
    (c as i8, v - c)
}

/// Packs motion into one report; whatever exceeds ±127 comes back as carry.
pub fn encode(buttons: Buttons, dx: i32, dy: i32, wheel: i32) -> (HidReport, Carry) {
    let (dx, cx) = clamp_delta(dx);
    let (dy, cy) = clamp_delta(dy);
    let (wheel, cw) = clamp_delta(wheel);
    (
        HidReport {
            buttons,
            dx,
            dy,
            wheel,
        },
        Carry {
            dx: cx,
            dy: cy,
            wheel: cw,
        },
    )
}

/// Reports for a button event given the buttons currently held, and the
/// held set afterwards.
///
/// Clicks are a press followed by a release. A drag latch presses left and
/// leaves it held; a drag release clears it. Blink start/end produce nothing.
pub fn click_to_reports(event: &GestureEvent, held: Buttons) -> (Vec<HidReport>, Buttons) {
    let click = |b: Buttons| {
        (
            alloc::vec![
                HidReport::with_buttons(held.with(b)),
                HidReport::with_buttons(held)
            ],
            held,
        )
    };
    match event.kind {
        GestureKind::LeftClick => click(Buttons::LEFT),
        GestureKind::RightClick => click(Buttons::RIGHT),
        GestureKind::MiddleClick => click(Buttons::MIDDLE),
        GestureKind::DragLatch => {
            let now = held.with(Buttons::LEFT);
            (alloc::vec![HidReport::with_buttons(now)], now)
        }
        GestureKind::DragRelease => {
            let now = held.without(Buttons::LEFT);
            (alloc::vec![HidReport::with_buttons(now)], now)
        }
        GestureKind::BlinkStart | GestureKind::BlinkEnd => (Vec::new(), held),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn ev(kind: GestureKind) -> GestureEvent {
        GestureEvent {
            kind,
            t_us: 0,
            duration_us: Some(100_000),
        }
    }

    #[test]
    fn idle_report_is_all_zero() {
        let (r, c) = encode(Buttons::NONE, 0, 0, 0);
        assert_eq!(r.to_bytes(), [0, 0, 0, 0]);
        assert!(c.is_zero());
    }

    #[test]
    fn left_with_motion() {
        let (r, _) = encode(Buttons::LEFT, 5, 0, 0);
        assert_eq!(r.to_bytes(), [0x01, 0x05, 0x00, 0x00]);
        assert_eq!(r.to_string(), "01 05 00 00");
    }

    #[test]
    fn overflow_is_carried() {
        let (r, c) = encode(Buttons::NONE, 300, -300, 128);
        assert_eq!(r.to_bytes(), [0x00, 0x7F, 0x81, 0x7F]);
        assert_eq!(
            c,
            Carry {
                dx: 173,
                dy: -173,
                wheel: 1
            }
        );
    }

    #[test]
    fn negative_is_twos_complement() {
        let (r, _) = encode(Buttons::NONE, -1, 0, 0);
        assert_eq!(r.to_bytes()[1], 0xFF);
    }

    #[test]
    fn decode_rejects_reserved_and_min() {
        assert_eq!(
            HidReport::from_bytes([0x08, 0, 0, 0]),
            Err(DecodeError::ReservedBits(0x08))
        );
        assert_eq!(
            HidReport::from_bytes([0, 0x80, 0, 0]),
            Err(DecodeError::OutOfRange(1))
        );
        assert!(HidReport::from_bytes([0x07, 0x7F, 0x81, 0xFF]).is_ok());
    }

    #[test]
    fn click_reports() {
        let (r, held) = click_to_reports(&ev(GestureKind::LeftClick), Buttons::NONE);
        assert_eq!(
            r.iter().map(|r| r.to_bytes()).collect::<Vec<_>>(),
            [[1, 0, 0, 0], [0, 0, 0, 0]]
        );
        assert_eq!(held, Buttons::NONE);
        let (r, _) = click_to_reports(&ev(GestureKind::RightClick), Buttons::NONE);
        assert_eq!(
            r.iter().map(|r| r.to_bytes()).collect::<Vec<_>>(),
            [[2, 0, 0, 0], [0, 0, 0, 0]]
        );
        let (r, _) = click_to_reports(&ev(GestureKind::MiddleClick), Buttons::NONE);
        assert_eq!(
            r.iter().map(|r| r.to_bytes()).collect::<Vec<_>>(),
            [[4, 0, 0, 0], [0, 0, 0, 0]]
        );
    }

    #[test]
    fn latch_persists_until_release() {
        let (r, held) = click_to_reports(&ev(GestureKind::DragLatch), Buttons::NONE);
        assert_eq!(r[0].to_bytes(), [1, 0, 0, 0]);
        let (motion, _) = encode(held, 3, 0, 0);
        assert_eq!(motion.to_bytes(), [1, 3, 0, 0]);
        let (r, held) = click_to_reports(&ev(GestureKind::DragRelease), held);
        assert_eq!(r[0].to_bytes(), [0, 0, 0, 0]);
        assert_eq!(held, Buttons::NONE);
    }

    #[test]
    fn right_click_while_latched_keeps_left() {
        let (r, held) = click_to_reports(&ev(GestureKind::RightClick), Buttons::LEFT);
        assert_eq!(r[0].to_bytes(), [3, 0, 0, 0]);
        assert_eq!(r[1].to_bytes(), [1, 0, 0, 0]);
        assert_eq!(held, Buttons::LEFT);
    }

    #[test]
    fn blink_markers_emit_nothing() {
        assert!(
            click_to_reports(&ev(GestureKind::BlinkStart), Buttons::LEFT)
                .0
                .is_empty()
        );
        assert!(click_to_reports(&ev(GestureKind::BlinkEnd), Buttons::NONE)
            .0
            .is_empty());
    }
}
