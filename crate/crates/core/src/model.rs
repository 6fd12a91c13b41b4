//! Sample and attitude types shared by every stage.

/// ADC full scale of the IR channel (12-bit).
pub const IR_FULL_SCALE: u16 = 4095;

/// Three-axis vector in sensor coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl core::ops::Sub for Vec3 {
    type Output = Vec3;

    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }
}

/// One sensor frame as read off the bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RawSample {
    /// Microseconds, strictly increasing within a stream.
    pub t_us: u64,
    pub accel: [i16; 3],
    pub gyro: [i16; 3],
    /// ADC counts, `0..=4095`.
    pub ir: u16,
}

/// One sensor frame in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhysSample {
    pub t_us: u64,
    /// Specific force in g.
    pub accel: Vec3,
    /// Angular rate in degrees per second.
    pub gyro: Vec3,
    /// Normalized reflectance in `[0, 1]`.
    pub ir: f64,
}

impl PhysSample {
    pub fn is_finite(&self) -> bool {
        self.accel.is_finite() && self.gyro.is_finite() && self.ir.is_finite()
    }
}

/// Head attitude in degrees.
///
/// Pitch is positive for a nod down, roll positive for a tilt toward the
/// right shoulder, yaw positive for a turn to the right. Pitch and roll are
/// kept wrapped; yaw is an unbounded accumulator so that differences across
/// the ±180° seam stay meaningful. Use [`Attitude::yaw_wrapped`] for display.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Attitude {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

impl Attitude {
    pub fn yaw_wrapped(&self) -> f64 {
        wrap_degrees(self.yaw)
    }
}

/// Wraps an angle into `[-180, 180)`.
pub fn wrap_degrees(angle: f64) -> f64 {
    if (-180.0..180.0).contains(&angle) {
        return angle;
    }
    let wrapped = angle - 360.0 * libm::floor((angle + 180.0) / 360.0);
    // floor rounding can land exactly on +180
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}
