//! Live session around a CPG runtime: a real-time stepping loop that
//! broadcasts decimated state snapshots over `/ws` and applies steering
//! commands between steps.

pub mod engine;
pub mod server;
pub mod wire;

pub use engine::{Engine, DEFAULT_DECIMATION};
pub use server::{manifest, serve, start, ServiceConfig};
pub use wire::{StateSnapshot, WireMessage};
