//! The stepping loop's state, free of any I/O so it can be driven directly
//! in tests.

use std::num::NonZeroUsize;

use cpg_core::cpg::StepRecord;
use cpg_core::{CpgError, Runtime};

use crate::wire::{StateSnapshot, WireMessage};

pub const DEFAULT_DECIMATION: NonZeroUsize = NonZeroUsize::new(10).unwrap();

/// A runtime plus the live-session controls: decimation and pause.
pub struct Engine {
    runtime: Runtime,
    decimation: usize,
    since_emit: usize,
    paused: bool,
}

impl Engine {
    pub fn new(runtime: Runtime, decimation: NonZeroUsize) -> Self {
        Self {
            runtime,
            decimation: decimation.get(),
            since_emit: 0,
            paused: false,
        }
    }

    pub fn runtime(&self) -> &Runtime {
        &self.runtime
    }

    pub fn step_size(&self) -> f64 {
        self.runtime.integrator().step()
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    /// Applies a steering command. Non-command messages are rejected.
    pub fn apply(&mut self, msg: &WireMessage) -> Result<(), String> {
        let rt = &mut self.runtime;
        let result = match msg {
            WireMessage::SetMotion { id, period } => rt.switch_motion(id, *period),
            WireMessage::SetGamma { value } => rt.set_gamma(*value),
            WireMessage::Reset { y0, ydot0, phi0 } => rt.reset(y0, ydot0, *phi0),
            WireMessage::Pause => {
                self.paused = true;
                Ok(())
            }
            WireMessage::Resume => {
                self.paused = false;
                Ok(())
            }
            _ => return Err("not a command".into()),
        };
        result.map_err(|e| e.to_string())
    }

    /// Advances one step. Returns a snapshot on every `decimation`-th step.
    /// A paused engine does not move.
    pub fn step(&mut self) -> Result<Option<StateSnapshot>, CpgError> {
        if self.paused {
            return Ok(None);
        }
        let record = self.runtime.step()?;
        self.since_emit += 1;
        if self.since_emit < self.decimation {
            return Ok(None);
        }
        self.since_emit = 0;
        Ok(Some(self.snapshot_of(&record)))
    }

    /// Snapshot of the current state without stepping.
    pub fn snapshot(&mut self) -> Result<StateSnapshot, CpgError> {
        let record = self.runtime.current_record()?;
        Ok(self.snapshot_of(&record))
    }

    fn snapshot_of(&self, r: &StepRecord<f64>) -> StateSnapshot {
        StateSnapshot {
            t: r.t,
            phi: r.phi,
            y: r.y.clone(),
            ydot: r.ydot.clone(),
            f: r.f.clone(),
            motion: self.runtime.active_motion().to_owned(),
            period: self.runtime.active_period(),
            v3: r.v3,
            dphi: r.dphi,
            gamma: self.runtime.params().gamma(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cpg_core::trajectory::{FourierComponent, OutputLimits, PeriodicTrajectory};
    use cpg_core::{Integrator, Library, Params};

    fn engine(gamma: f64, decimation: usize) -> Engine {
        let limits = OutputLimits::uniform(1, -2.0, 2.0, 3.0).unwrap();
        let mut lib = Library::new(limits.clone());
        let wave = FourierComponent {
            dc: 0.0,
            cos: vec![1.0],
            sin: vec![],
        };
        lib.insert("wave", PeriodicTrajectory::new(4.0, vec![wave]).unwrap())
            .unwrap();
        lib.insert("still", PeriodicTrajectory::constant(&[0.5]).unwrap())
            .unwrap();
        let params = Params::uniform(1, 4.0, 4.0, 6.0, gamma).unwrap();
        let init = cpg_core::cpg::init_from_robot(&[0.0], &[0.0], 0.0, &limits).unwrap();
        let rt = Runtime::new(
            lib,
            params,
            Integrator::rk4(1e-3).unwrap(),
            "wave",
            None,
            init,
        )
        .unwrap();
        Engine::new(rt, NonZeroUsize::new(decimation).unwrap())
    }

    fn run_until_snapshot(e: &mut Engine) -> StateSnapshot {
        loop {
            if let Some(s) = e.step().unwrap() {
                return s;
            }
        }
    }

    #[test]
    fn emits_every_decimation_steps() {
        let mut e = engine(0.0, 10);
        let emitted: Vec<_> = (0..100).filter_map(|_| e.step().unwrap()).collect();
        assert_eq!(emitted.len(), 10);
        for (j, s) in emitted.iter().enumerate() {
            assert!((s.t - 0.01 * (j + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn switching_keeps_outputs_continuous() {
        let mut e = engine(10.0, 10);
        let before = run_until_snapshot(&mut e);
        e.apply(&WireMessage::SetMotion {
            id: "still".into(),
            period: None,
        })
        .unwrap();
        let after = run_until_snapshot(&mut e);
        assert_eq!(after.motion, "still");
        let dt = after.t - before.t;
        for i in 0..before.y.len() {
            assert!((after.y[i] - before.y[i]).abs() < 3.0 * dt);
        }
    }

    #[test]
    fn uncoupled_phase_advances_at_unit_rate() {
        let mut e = engine(10.0, 1);
        e.apply(&WireMessage::SetGamma { value: 0.0 }).unwrap();
        assert_eq!(run_until_snapshot(&mut e).dphi, 1.0);
        e.apply(&WireMessage::SetGamma { value: 10.0 }).unwrap();
        let s = run_until_snapshot(&mut e);
        assert_eq!(s.gamma, 10.0);
        assert_ne!(s.dphi, 1.0);
    }

    #[test]
    fn rejected_commands_leave_the_engine_running() {
        let mut e = engine(0.0, 1);
        assert!(e
            .apply(&WireMessage::SetMotion {
                id: "nope".into(),
                period: None
            })
            .is_err());
        assert!(e
            .apply(&WireMessage::SetMotion {
                id: "wave".into(),
                period: Some(0.1)
            })
            .is_err());
        assert!(e.apply(&WireMessage::SetGamma { value: -1.0 }).is_err());
        assert!(e
            .apply(&WireMessage::Reset {
                y0: vec![0.0, 0.0],
                ydot0: vec![0.0],
                phi0: 0.0
            })
            .is_err());
        assert!(e.apply(&WireMessage::Ack { seq: 1 }).is_err());
        let s = run_until_snapshot(&mut e);
        assert_eq!(s.motion, "wave");
        assert_eq!(s.period, 4.0);
    }

    #[test]
    fn pause_holds_the_state() {
        let mut e = engine(0.0, 1);
        run_until_snapshot(&mut e);
        e.apply(&WireMessage::Pause).unwrap();
        let t = e.runtime().t();
        for _ in 0..10 {
            assert!(e.step().unwrap().is_none());
        }
        assert_eq!(e.runtime().t(), t);
        e.apply(&WireMessage::Resume).unwrap();
        assert!(run_until_snapshot(&mut e).t > t);
    }

    #[test]
    fn reset_moves_the_outputs() {
        let mut e = engine(0.0, 1);
        e.apply(&WireMessage::Reset {
            y0: vec![1.5],
            ydot0: vec![-1.0],
            phi0: 1.0,
        })
        .unwrap();
        let s = e.snapshot().unwrap();
        assert!((s.y[0] - 1.5).abs() < 1e-9);
        assert!((s.ydot[0] + 1.0).abs() < 1e-9);
        assert_eq!(s.phi, 1.0);
    }
}
