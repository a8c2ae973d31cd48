//! Discrete time on a fixed grid.
//!
//! Every instant and duration in the toolkit is an integer count of grid
//! steps of width `gamma` seconds (1 µs by default). Keeping time integral
//! makes convolution supports, deadlines, and schedule ticks exact.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

/// A non-negative number of grid ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeUnit(pub u64);

impl TimeUnit {
    pub const ZERO: TimeUnit = TimeUnit(0);

    #[inline]
    pub fn ticks(self) -> u64 {
        self.0
    }

    /// Convert to seconds given the grid resolution.
    #[inline]
    pub fn as_seconds(self, gamma: f64) -> f64 {
        self.0 as f64 * gamma
    }

    /// Nearest grid point to `seconds`, given the resolution.
    #[inline]
    pub fn from_seconds_rounded(seconds: f64, gamma: f64) -> TimeUnit {
        TimeUnit((seconds / gamma).round().max(0.0) as u64)
    }

    /// Exact `ceil(self / divisor)` in tick space.
    #[inline]
    pub fn div_ceil_by(self, divisor: TimeUnit) -> u64 {
        self.0.div_ceil(divisor.0)
    }

    #[inline]
    pub fn saturating_sub(self, rhs: TimeUnit) -> TimeUnit {
        TimeUnit(self.0.saturating_sub(rhs.0))
    }
}

impl From<u64> for TimeUnit {
    fn from(ticks: u64) -> Self {
        TimeUnit(ticks)
    }
}

impl Add for TimeUnit {
    type Output = TimeUnit;
    fn add(self, rhs: TimeUnit) -> TimeUnit {
        TimeUnit(self.0 + rhs.0)
    }
}

impl AddAssign for TimeUnit {
    fn add_assign(&mut self, rhs: TimeUnit) {
        self.0 += rhs.0;
    }
}

impl Sub for TimeUnit {
    type Output = TimeUnit;
    fn sub(self, rhs: TimeUnit) -> TimeUnit {
        TimeUnit(self.0 - rhs.0)
    }
}

impl Mul<u64> for TimeUnit {
    type Output = TimeUnit;
    fn mul(self, rhs: u64) -> TimeUnit {
        TimeUnit(self.0 * rhs)
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}t", self.0)
    }
}
