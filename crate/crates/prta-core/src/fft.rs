//! FFT-backed linear convolution of real, non-negative sequences.
//!
//! Inputs are zero-padded to the smallest power of two that holds the full
//! linear convolution, transformed, multiplied element-wise, and inverted.
//! Plans are cached per thread since the same transform lengths recur
//! heavily in analysis pipelines.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Largest transform length this backend will attempt. Two complex-f64
/// scratch buffers of this length stay comfortably inside a few hundred MiB.
pub const MAX_TRANSFORM_LEN: usize = 1 << 24;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache {
        planner: FftPlanner::new(),
        forward: HashMap::new(),
        inverse: HashMap::new(),
    });
}

struct PlanCache {
    planner: FftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

impl PlanCache {
    fn forward(&mut self, len: usize) -> Arc<dyn Fft<f64>> {
        let planner = &mut self.planner;
        self.forward
            .entry(len)
            .or_insert_with(|| planner.plan_fft_forward(len))
            .clone()
    }

    fn inverse(&mut self, len: usize) -> Arc<dyn Fft<f64>> {
        let planner = &mut self.planner;
        self.inverse
            .entry(len)
            .or_insert_with(|| planner.plan_fft_inverse(len))
            .clone()
    }
}

/// Smallest power of two that can hold a linear convolution of the given
/// output length, or `None` if it would exceed [`MAX_TRANSFORM_LEN`].
pub fn transform_len(out_len: usize) -> Option<usize> {
    let len = out_len.next_power_of_two();
    (len <= MAX_TRANSFORM_LEN).then_some(len)
}

/// Result of one transform-based convolution.
pub struct ConvOutput {
    /// Linear convolution values, negatives already clamped to zero.
    pub values: Vec<f64>,
    /// Total magnitude of the clamped negative round-off.
    pub clamped_mass: f64,
}

/// Linear convolution of `a` and `b` via FFT.
///
/// Output has length `a.len() + b.len() - 1`. Round-off can leave tiny
/// negative entries; they are clamped to zero and their magnitude summed
/// into `clamped_mass` so callers can track numerical drift.
///
/// Returns `None` when the required transform length exceeds
/// [`MAX_TRANSFORM_LEN`].
pub fn convolve(a: &[f64], b: &[f64]) -> Option<ConvOutput> {
    debug_assert!(!a.is_empty() && !b.is_empty());
    let out_len = a.len() + b.len() - 1;
    let len = transform_len(out_len)?;

    let mut fa = vec![Complex::new(0.0, 0.0); len];
    for (dst, &src) in fa.iter_mut().zip(a) {
        dst.re = src;
    }
    let mut fb = vec![Complex::new(0.0, 0.0); len];
    for (dst, &src) in fb.iter_mut().zip(b) {
        dst.re = src;
    }

    PLANS.with(|cache| {
        let (fwd, inv) = {
            let mut cache = cache.borrow_mut();
            (cache.forward(len), cache.inverse(len))
        };
        fwd.process(&mut fa);
        fwd.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(fb.iter()) {
            *x *= y;
        }
        inv.process(&mut fa);
    });

    let scale = 1.0 / len as f64;
    let mut values = Vec::with_capacity(out_len);
    let mut clamped = 0.0;
    for c in fa.iter().take(out_len) {
        let v = c.re * scale;
        if v < 0.0 {
            clamped -= v;
            values.push(0.0);
        } else {
            values.push(v);
        }
    }
    Some(ConvOutput {
        values,
        clamped_mass: clamped,
    })
}
