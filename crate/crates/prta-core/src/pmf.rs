//! Discrete probability mass functions on the tick grid.
//!
//! A [`Pmf`] stores `P[X = i ticks]` densely from index 0 with trailing
//! zeros trimmed. Total mass may fall below 1 when tail mass has been
//! truncated away; it never exceeds 1 beyond round-off.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fft;
use crate::time::TimeUnit;

/// Tolerance used for "mass equals one" preconditions.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PmfError {
    #[error("negative probability {prob} at tick {tick}")]
    NegativeProbability { tick: u64, prob: f64 },
    #[error("duplicate support point at tick {tick}")]
    DuplicateSupportPoint { tick: u64 },
    #[error("total mass {mass} exceeds one")]
    MassExceedsOne { mass: f64 },
    #[error("operation requires a normalized distribution, got mass {mass}")]
    UnnormalizedInput { mass: f64 },
    #[error("transform length {required} exceeds the configured ceiling {limit}")]
    TransformSizeOverflow { required: usize, limit: usize },
    #[error("self-convolution power requires at least one repetition")]
    ZeroRepetitions,
}

/// First three moments of a distribution, in seconds.
///
/// `rho3` is the third absolute central moment `E|X - EX|^3`, the quantity
/// a Berry-Esseen style tail bound consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub rho3: f64,
}

/// A discrete probability mass function on the tick grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
    total_mass: f64,
}

impl Pmf {
    /// The empty distribution (no support, zero mass).
    pub fn empty() -> Pmf {
        Pmf {
            probs: Vec::new(),
            total_mass: 0.0,
        }
    }

    /// Point mass at `t`.
    pub fn delta(t: TimeUnit) -> Pmf {
        let mut probs = vec![0.0; t.ticks() as usize + 1];
        *probs.last_mut().unwrap() = 1.0;
        Pmf {
            probs,
            total_mass: 1.0,
        }
    }

    /// Build from `(tick, probability)` pairs.
    pub fn from_pairs(pairs: &[(u64, f64)]) -> Result<Pmf, PmfError> {
        let mut max_tick = 0u64;
        for &(tick, prob) in pairs {
            if prob < 0.0 {
                return Err(PmfError::NegativeProbability { tick, prob });
            }
            max_tick = max_tick.max(tick);
        }
        let mut probs = vec![0.0; max_tick as usize + 1];
        let mut seen = vec![false; max_tick as usize + 1];
        for &(tick, prob) in pairs {
            let idx = tick as usize;
            if seen[idx] {
                return Err(PmfError::DuplicateSupportPoint { tick });
            }
            seen[idx] = true;
            probs[idx] = prob;
        }
        let mass: f64 = probs.iter().sum();
        if mass > 1.0 + MASS_TOLERANCE {
            return Err(PmfError::MassExceedsOne { mass });
        }
        Ok(Pmf::from_dense(probs))
    }

    /// Build from a dense vector whose index is the tick. Entries must be
    /// non-negative; trailing zeros are trimmed and the mass cached.
    pub(crate) fn from_dense(mut probs: Vec<f64>) -> Pmf {
        debug_assert!(probs.iter().all(|&p| p >= 0.0));
        while probs.last() == Some(&0.0) {
            probs.pop();
        }
        let total_mass = probs.iter().sum();
        Pmf { probs, total_mass }
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Dense support length (max support tick + 1, or 0 when empty).
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// Largest tick with positive probability, if any.
    pub fn max_support(&self) -> Option<TimeUnit> {
        (!self.probs.is_empty()).then(|| TimeUnit(self.probs.len() as u64 - 1))
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P[X = t]`.
    pub fn prob_at(&self, t: TimeUnit) -> f64 {
        self.probs.get(t.ticks() as usize).copied().unwrap_or(0.0)
    }

    /// `F(t) = P[X <= t]`.
    pub fn cdf_at(&self, t: TimeUnit) -> f64 {
        let upto = (t.ticks() as usize + 1).min(self.probs.len());
        self.probs[..upto].iter().sum()
    }

    /// Stochastic partial order: `self` is dominated by `other` iff the CDF
    /// of `self` lies on or above the CDF of `other` at every grid point
    /// (up to 1e-12 of accumulated rounding). Both distributions must carry
    /// full mass.
    pub fn stochastically_dominated_by(&self, other: &Pmf) -> Result<bool, PmfError> {
        for pmf in [self, other] {
            if (pmf.total_mass - 1.0).abs() > MASS_TOLERANCE {
                return Err(PmfError::UnnormalizedInput {
                    mass: pmf.total_mass,
                });
            }
        }
        let horizon = self.probs.len().max(other.probs.len());
        let mut cdf_self = 0.0;
        let mut cdf_other = 0.0;
        for t in 0..horizon {
            cdf_self += self.probs.get(t).copied().unwrap_or(0.0);
            cdf_other += other.probs.get(t).copied().unwrap_or(0.0);
            if cdf_self + 1e-12 < cdf_other {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact O(NM) linear convolution. Serves as the independent reference
    /// for the transform-based path.
    pub fn convolve_direct(&self, other: &Pmf) -> Pmf {
        if self.is_empty() || other.is_empty() {
            return Pmf::empty();
        }
        let mut out = vec![0.0; self.probs.len() + other.probs.len() - 1];
        for (i, &a) in self.probs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.probs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Pmf::from_dense(out)
    }

    /// Transform-based linear convolution, numerically equal to
    /// [`Pmf::convolve_direct`]. Returns the convolution together with the
    /// total magnitude of negative round-off clamped to zero.
    pub fn convolve_fft(&self, other: &Pmf) -> Result<(Pmf, f64), PmfError> {
        if self.is_empty() || other.is_empty() {
            return Ok((Pmf::empty(), 0.0));
        }
        let out_len = self.probs.len() + other.probs.len() - 1;
        let Some(conv) = fft::convolve(&self.probs, &other.probs) else {
            return Err(PmfError::TransformSizeOverflow {
                required: out_len.next_power_of_two(),
                limit: fft::MAX_TRANSFORM_LEN,
            });
        };
        Ok((Pmf::from_dense(conv.values), conv.clamped_mass))
    }

    /// Keep the mass on `[0, bound)` and report the mass removed at ticks
    /// `>= bound`.
    pub fn truncate_and_sum(&self, bound: TimeUnit) -> (Pmf, f64) {
        let cut = (bound.ticks() as usize).min(self.probs.len());
        let removed: f64 = self.probs[cut..].iter().sum();
        let kept = Pmf::from_dense(self.probs[..cut].to_vec());
        (kept, removed)
    }

    /// `k`-fold convolution of the distribution with itself, via binary
    /// decomposition of `k`.
    ///
    /// With `truncation = Some(d)` every intermediate convolution is cut at
    /// `d`; because all addends are non-negative, any partial sum at or
    /// beyond `d` forces the total there too, so the kept mass still equals
    /// `P[sum < d]`. The reported removed mass is
    /// `total_mass^k - total_mass(result)`.
    pub fn self_conv_power(
        &self,
        k: u64,
        truncation: Option<TimeUnit>,
    ) -> Result<(Pmf, f64), PmfError> {
        if k == 0 {
            return Err(PmfError::ZeroRepetitions);
        }
        let cut = |pmf: Pmf| match truncation {
            Some(d) => pmf.truncate_and_sum(d).0,
            None => pmf,
        };
        let mut result: Option<Pmf> = None;
        let mut base = cut(self.clone());
        let mut n = k;
        loop {
            if n & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(acc) => cut(acc.convolve_fft(&base)?.0),
                });
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            base = cut(base.convolve_fft(&base)?.0);
        }
        let result = result.expect("k >= 1 always yields a result");
        let removed = self.total_mass.powi(k as i32) - result.total_mass;
        Ok((result, removed))
    }

    /// Mean, variance, and third absolute central moment in seconds, for a
    /// grid resolution of `gamma` seconds per tick. Requires full mass.
    pub fn moments(&self, gamma: f64) -> Result<Moments, PmfError> {
        if (self.total_mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(PmfError::UnnormalizedInput {
                mass: self.total_mass,
            });
        }
        let mean: f64 = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| i as f64 * gamma * p)
            .sum();
        let mut variance = 0.0;
        let mut rho3 = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            let d = i as f64 * gamma - mean;
            variance += d * d * p;
            rho3 += d.abs().powi(3) * p;
        }
        Ok(Moments {
            mean,
            variance,
            rho3,
        })
    }

    /// Largest absolute per-tick difference between two distributions.
    pub fn max_abs_diff(&self, other: &Pmf) -> f64 {
        let len = self.probs.len().max(other.probs.len());
        (0..len)
            .map(|i| {
                let a = self.probs.get(i).copied().unwrap_or(0.0);
                let b = other.probs.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}
