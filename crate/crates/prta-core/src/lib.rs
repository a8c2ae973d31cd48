//! Probabilistic response-time analysis for fixed-priority sporadic tasks.
//!
//! The crate bounds the worst-case deadline failure probability (WCDFP) of
//! each task in a set whose job execution times are random. Everything is
//! computed on a discrete time grid of `gamma` seconds per tick:
//!
//! * [`pmf`] — distributions on the grid and the convolution machinery,
//! * [`taskset`] — task-set model, synthetic generation, (de)serialization,
//! * [`analysis`] — the WCDFP estimators (convolution, sampling, tail bound),
//! * [`simulator`] — a discrete-time scheduler used to sanity-check the
//!   analytical bounds from below.

pub mod analysis;
mod fft;
pub mod pmf;
pub mod simulator;
pub mod taskset;
pub mod time;

pub use analysis::{AnalysisError, AnalysisResult, Diagnostics, Method};
pub use pmf::{Moments, Pmf, PmfError, MASS_TOLERANCE};
pub use simulator::{ArrivalSequence, JobRecord, ScheduleTrace, SimError};
pub use taskset::{GeneratorConfig, Task, TaskSet, TaskSetError};
pub use time::TimeUnit;
