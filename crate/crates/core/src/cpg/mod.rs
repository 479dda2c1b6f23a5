//! Integrated CPG: motion library, runtime with online switching, and
//! numerical oracles for convergence.

pub mod analysis;
mod library;
mod runtime;

pub use analysis::{
    distance_phase_derivative, lyapunov_v1, lyapunov_v3, orbital_distance,
    orbital_distance_unbounded, weighted_energy, MIN_DISTANCE_SAMPLES,
};
pub use library::{MotionEntry, MotionLibrary};
pub use runtime::{init_from_robot, step_count, CpgRuntime, StepRecord, INIT_MARGIN};
