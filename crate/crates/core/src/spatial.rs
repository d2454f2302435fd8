//! Bird motion and stereo placement.
//!
//! The listener sits at the origin. A source at `(x, y, z)` is attenuated by
//! `1 / (1 + d)` and panned by its horizontal azimuth `atan2(y, x)`; elevation only
//! affects the distance.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
use core::str::FromStr;

use crate::chirp::MonoBuffer;
use crate::error::{Error, Result};
use crate::mix::StereoBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const ORIGIN: Position = Position::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn axes(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_axes([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Per-axis sinusoidal motion around a base point.
///
/// Axis `i` follows `base[i] + amplitude[i] * sin(2*pi*rate[i]*t + phase[i])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub base: Position,
    pub amplitude: [f64; 3],
    pub rate: [f64; 3],
    pub phase: [f64; 3],
}

impl Trajectory {
    /// Fastest allowed per-axis motion.
    pub const MAX_RATE: f64 = 1.0;

    pub fn stationary(base: Position) -> Self {
        Self {
            base,
            amplitude: [0.0; 3],
            rate: [0.0; 3],
            phase: [0.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.base.is_finite() || self.phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("trajectory values must be finite".into()));
        }
        if self.amplitude.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::Config("trajectory amplitudes must be >= 0".into()));
        }
        if self.rate.iter().any(|r| !(0.0..=Self::MAX_RATE).contains(r)) {
            return Err(Error::Config(
                "trajectory rates must lie within [0, 1] Hz".into(),
            ));
        }
        Ok(())
    }

    pub fn is_stationary(&self) -> bool {
        self.amplitude.iter().all(|&a| a == 0.0)
    }
}

/// Position of a bird at time `t` (seconds).
pub fn position_at(traj: &Trajectory, t: f64) -> Position {
    let base = traj.base.axes();
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = base[i] + traj.amplitude[i] * libm::sin(TAU * traj.rate[i] * t + traj.phase[i]);
    }
    Position::from_axes(out)
}

/// Euclidean distance from the listener at the origin.
pub fn distance(pos: &Position) -> f64 {
    libm::sqrt(pos.x * pos.x + pos.y * pos.y + pos.z * pos.z)
}

/// Horizontal azimuth in `(-pi, pi]`. The listener's own vertical axis maps to 0.
pub fn azimuth(pos: &Position) -> f64 {
    if pos.x == 0.0 && pos.y == 0.0 {
        return 0.0;
    }
    let theta = libm::atan2(pos.y, pos.x);
    // atan2(-0.0, x<0) gives -pi, which is outside the half-open range.
    if theta <= -PI {
        PI
    } else {
        theta
    }
}

/// Inverse distance gain `1 / (1 + d)`.
pub fn attenuation(d: f64) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::Domain {
            what: "distance",
            value: d,
            domain: "[0, inf)",
        });
    }
    Ok(1.0 / (1.0 + d))
}

/// How azimuth maps to left/right gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PanMode {
    /// `(cos(theta/2), sin(theta/2))`. Sources with negative azimuth get a
    /// phase-inverted right channel, and `theta = 0` is hard left.
    #[default]
    HalfAngle,
    /// `p = (theta + pi) / 4`, gains `(cos p, sin p)`; both gains non-negative.
    Remapped,
}

impl PanMode {
    pub const fn as_str(&self) -> &'static str {
        match self {
            PanMode::HalfAngle => "paper-literal",
            PanMode::Remapped => "remapped",
        }
    }
}

impl fmt::Display for PanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" | "half-angle" => Ok(PanMode::HalfAngle),
            "remapped" => Ok(PanMode::Remapped),
            other => Err(Error::Config(alloc::format!(
                "unknown pan mode {other:?} (expected paper-literal or remapped)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanGains {
    pub left: f64,
    pub right: f64,
}

/// Equal-power gains for azimuth `theta` in `(-pi, pi]`.
pub fn pan_gains(theta: f64, mode: PanMode) -> Result<PanGains> {
    if !(theta > -PI && theta <= PI) {
        return Err(Error::Domain {
            what: "theta",
            value: theta,
            domain: "(-pi, pi]",
        });
    }
    let angle = match mode {
        PanMode::HalfAngle => 0.5 * theta,
        PanMode::Remapped => 0.25 * (theta + PI),
    };
    let (sin, cos) = libm::sincos(angle);
    Ok(PanGains {
        left: cos,
        right: sin,
    })
}

/// Attenuate and pan a mono chirp emitted from a fixed position.
pub fn spatialize_chirp(mono: &MonoBuffer, pos: &Position, mode: PanMode) -> Result<StereoBuffer> {
    let alpha = attenuation(distance(pos))?;
    let gains = pan_gains(azimuth(pos), mode)?;
    let (gl, gr) = (alpha * gains.left, alpha * gains.right);
    let left: Vec<f64> = mono.samples.iter().map(|s| s * gl).collect();
    let right: Vec<f64> = mono.samples.iter().map(|s| s * gr).collect();
    Ok(StereoBuffer {
        sample_rate: mono.sample_rate,
        left,
        right,
    })
}
