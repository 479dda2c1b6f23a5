//! Bounded-output programmable oscillator and central pattern generator.
//!
//! A desired periodic joint trajectory, given as a truncated Fourier series,
//! is encoded as the globally attracting limit cycle of an oscillator whose
//! outputs `y = y_avg + δ_y tanh(s₁)` and `ẏ = δ_ẏ tanh(s₂)` can never leave
//! the position box or exceed the rate bound. The [`cpg`] module adds a
//! motion library with online motion and tempo switching.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cpg;
pub mod error;
pub mod integrator;
pub mod oscillator;
pub mod scalar;
pub mod scenario;
pub mod trajectory;

pub use error::{CpgError, Result};
pub use scalar::Scalar;

pub type Trajectory = trajectory::PeriodicTrajectory<f64>;
pub type Limits = trajectory::OutputLimits<f64>;
pub type Params = oscillator::OscillatorParams<f64>;
pub type State = oscillator::OscillatorState<f64>;
pub type Integrator = integrator::IntegratorConfig<f64>;
pub type Library = cpg::MotionLibrary<f64>;
pub type Runtime = cpg::CpgRuntime<f64>;
pub type Record = cpg::StepRecord<f64>;
