use serde::Serialize;

use super::analysis::weighted_energy;
use super::library::MotionLibrary;
use crate::error::{CpgError, Result};
use crate::integrator::{self, IntegratorConfig};
use crate::oscillator::{
    bounded_rhs_from_sample, bounded_rhs_into, check_state_dim, output_map, output_rate,
    ComponentTarget, OscillatorParams, OscillatorState, ShapeDerivatives, TransformedTarget,
};
use crate::scalar::{all_finite, guarded_atanh, sech2, Scalar};
use crate::trajectory::{tempo_rescale, OutputLimits, PeriodicTrajectory, TrajectorySample};

/// Relative margin used to project robot positions and rates into the open box.
pub const INIT_MARGIN: f64 = 1e-6;

/// Shape state for a robot currently at `(y0, ẏ0)`.
///
/// Positions are clamped into the box with a margin of `1e-6·δ_y` and rates
/// to `(1 − 1e-6)·δ_ẏ`, so a robot resting exactly on a limit still maps to
/// finite shape states.
pub fn init_from_robot<T: Scalar>(
    y0: &[T],
    ydot0: &[T],
    phi0: T,
    limits: &OutputLimits<T>,
) -> Result<OscillatorState<T>> {
    limits.check_dim("y0", y0.len())?;
    limits.check_dim("ydot0", ydot0.len())?;
    if !all_finite(y0) || !all_finite(ydot0) || !phi0.is_finite() {
        return Err(CpgError::Scenario(
            "initial robot state must be finite".into(),
        ));
    }
    let m = T::lit(INIT_MARGIN);
    let mut s1 = Vec::with_capacity(y0.len());
    let mut s2 = Vec::with_capacity(y0.len());
    for i in 0..y0.len() {
        let (lo, hi) = (limits.y_min()[i], limits.y_max()[i]);
        let (avg, dy, dv) = (
            limits.y_avg()[i],
            limits.delta_y()[i],
            limits.delta_ydot()[i],
        );
        let y = y0[i].max(lo + m * dy).min(hi - m * dy);
        let cap = (T::one() - m) * dv;
        let v = ydot0[i].max(-cap).min(cap);
        s1.push(guarded_atanh((y - avg) / dy));
        s2.push(guarded_atanh(v / dv));
    }
    OscillatorState::new(s1, s2, phi0)
}

/// Everything observable about the runtime after one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord<T> {
    pub t: T,
    pub phi: T,
    pub s1: Vec<T>,
    pub s2: Vec<T>,
    pub y: Vec<T>,
    pub ydot: Vec<T>,
    pub f: Vec<T>,
    pub fp: Vec<T>,
    pub v3: T,
    /// Phase rate `φ̇` at the recorded state.
    pub dphi: T,
    pub e1_norm: T,
    pub e2_norm: T,
}

#[derive(Debug, Clone)]
struct ActiveMotion<T> {
    id: String,
    period: T,
    traj: PeriodicTrajectory<T>,
}

/// Bounded-output CPG: a motion library, the active (tempo-rescaled)
/// motion and the oscillator state, advanced with a fixed-step integrator.
#[derive(Debug, Clone)]
pub struct CpgRuntime<T> {
    library: MotionLibrary<T>,
    params: OscillatorParams<T>,
    integrator: IntegratorConfig<T>,
    active: ActiveMotion<T>,
    state: OscillatorState<T>,
    t: T,
    sample: TrajectorySample<T>,
}

impl<T: Scalar> CpgRuntime<T> {
    /// Starts `motion` at `period` (nominal when `None`) from `state` at `t = 0`.
    pub fn new(
        library: MotionLibrary<T>,
        params: OscillatorParams<T>,
        integrator: IntegratorConfig<T>,
        motion: &str,
        period: Option<T>,
        state: OscillatorState<T>,
    ) -> Result<Self> {
        let n = library.dim();
        library.limits().check_dim("params", params.dim())?;
        check_state_dim(n, &state)?;
        if !state.is_finite() {
            return Err(CpgError::NonFiniteState {
                t: 0.0,
                snapshot: format!("{state:?}"),
            });
        }
        let active = Self::resolve(&library, motion, period)?;
        Ok(Self {
            library,
            params,
            integrator,
            active,
            state,
            t: T::zero(),
            sample: TrajectorySample::zeros(n),
        })
    }

    fn resolve(library: &MotionLibrary<T>, id: &str, period: Option<T>) -> Result<ActiveMotion<T>> {
        let entry = library.get(id)?;
        let period = period.unwrap_or_else(|| entry.nominal.period());
        let traj = tempo_rescale(&entry.nominal, period, library.limits())?;
        Ok(ActiveMotion {
            id: id.to_owned(),
            period,
            traj,
        })
    }

    pub fn library(&self) -> &MotionLibrary<T> {
        &self.library
    }

    pub fn limits(&self) -> &OutputLimits<T> {
        self.library.limits()
    }

    pub fn params(&self) -> &OscillatorParams<T> {
        &self.params
    }

    pub fn integrator(&self) -> &IntegratorConfig<T> {
        &self.integrator
    }

    pub fn state(&self) -> &OscillatorState<T> {
        &self.state
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn active_motion(&self) -> &str {
        &self.active.id
    }

    pub fn active_period(&self) -> T {
        self.active.period
    }

    pub fn active_trajectory(&self) -> &PeriodicTrajectory<T> {
        &self.active.traj
    }

    /// Replaces the target with motion `id` replayed at `period` (nominal
    /// when `None`). The oscillator state, phase included, is untouched.
    pub fn switch_motion(&mut self, id: &str, period: Option<T>) -> Result<()> {
        let next = Self::resolve(&self.library, id, period)?;
        log::info!("t={}: switching to {id} (T={})", self.t, next.period);
        self.active = next;
        Ok(())
    }

    pub fn set_gamma(&mut self, gamma: T) -> Result<()> {
        self.params.set_gamma(gamma)
    }

    /// Restarts from a robot state; simulated time keeps running.
    pub fn reset(&mut self, y0: &[T], ydot0: &[T], phi0: T) -> Result<()> {
        self.state = init_from_robot(y0, ydot0, phi0, self.limits())?;
        Ok(())
    }

    /// Outputs `(y, ẏ)` of the current state.
    pub fn outputs(&self) -> (Vec<T>, Vec<T>) {
        (
            output_map(&self.state.s1, self.limits()),
            output_rate(&self.state.s2, self.limits()),
        )
    }

    /// Record describing the current state without stepping.
    pub fn current_record(&mut self) -> Result<StepRecord<T>> {
        self.active
            .traj
            .evaluate_into(self.state.phi, &mut self.sample);
        let (ds, tg) =
            bounded_rhs_from_sample(&self.sample, self.limits(), &self.params, &self.state)?;
        Ok(self.record(&tg, ds.dphi))
    }

    fn record(&self, tg: &TransformedTarget<T>, dphi: T) -> StepRecord<T> {
        let (y, ydot) = self.outputs();
        let norm = |v: &[T]| v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        StepRecord {
            t: self.t,
            phi: self.state.phi,
            s1: self.state.s1.clone(),
            s2: self.state.s2.clone(),
            y,
            ydot,
            f: self.sample.f.clone(),
            fp: self.sample.fp.clone(),
            v3: weighted_energy(&self.params, &tg.e1, &tg.e2),
            dphi,
            e1_norm: norm(&tg.e1),
            e2_norm: norm(&tg.e2),
        }
    }

    /// Advances one integrator step and returns the record at the new state.
    pub fn step(&mut self) -> Result<StepRecord<T>> {
        let traj = &self.active.traj;
        let limits = self.library.limits();
        let params = &self.params;
        let omega = rate_scale(traj);
        let n = limits.dim();
        let mut scratch = TrajectorySample::zeros(n);
        let next = {
            let scratch = std::cell::RefCell::new(&mut scratch);
            integrator::advance(
                |x, _t| {
                    let mut smp = scratch.borrow_mut();
                    traj.evaluate_into(x.phi, &mut smp);
                    let mut out = ShapeDerivatives::zeros(n);
                    bounded_rhs_into(&smp, limits, params, x, &mut out, |_, _| {})?;
                    Ok(out)
                },
                |x, _t| {
                    let mut smp = scratch.borrow_mut();
                    traj.evaluate_into(x.phi, &mut smp);
                    stiffness_bound(&smp, limits, params, x, omega)
                },
                &self.state,
                self.t,
                &self.integrator,
            )?
        };
        self.state = next;
        self.t = self.t + self.integrator.step();
        self.current_record()
    }

    /// Runs `floor(duration / h)` steps, handing each record to `sink`.
    pub fn run<F>(&mut self, duration: T, mut sink: F) -> Result<()>
    where
        F: FnMut(&StepRecord<T>),
    {
        for _ in 0..step_count(duration, self.integrator.step())? {
            let rec = self.step()?;
            sink(&rec);
        }
        Ok(())
    }
}

/// Highest angular frequency present in the trajectory; zero when constant.
fn rate_scale<T: Scalar>(traj: &PeriodicTrajectory<T>) -> T {
    let harmonics = traj
        .components()
        .iter()
        .map(|c| c.harmonics())
        .max()
        .unwrap_or(0);
    T::TAU() / traj.period() * T::from_usize_lossy(harmonics)
}

/// Rough bound on the local Lipschitz constant of the bounded vector field.
///
/// The shape part is dominated by the `J_s1⁻¹` factors, which grow without
/// bound as an output approaches its limit. The phase part is a row-sum
/// bound on the phase equation, `γ` times the weighted squared speed of the
/// target plus its coupling into the shape errors.
fn stiffness_bound<T: Scalar>(
    sample: &TrajectorySample<T>,
    limits: &OutputLimits<T>,
    params: &OscillatorParams<T>,
    x: &OscillatorState<T>,
    omega: T,
) -> Result<T> {
    let (b, k, d) = (params.b(), params.k(), params.d());
    let two = T::two();
    let mut shape = T::zero();
    let mut phase = T::zero();
    let mut rates = ShapeDerivatives::zeros(limits.dim());
    bounded_rhs_into(
        sample,
        limits,
        params,
        x,
        &mut rates,
        |i, c: &ComponentTarget<T>| {
            let dv = limits.delta_ydot()[i];
            let rate_gain = dv * sech2(x.s2[i]) / c.j_s1;
            let ds1 = dv * x.s2[i].tanh() / c.j_s1;
            let l = two * (ds1 * x.s1[i].tanh()).abs()
                + (T::one() + d[i] / b[i]) * rate_gain
                + b[i]
                + k[i];
            shape = shape.max(l);
            let gp = sample.fp[i] / c.j_gp;
            let pp = c.psi_phi;
            phase = phase
                + d[i] * gp * gp
                + two * b[i] * (gp * pp).abs()
                + k[i] * pp * pp
                + (d[i] * gp + b[i] * pp).abs()
                + (b[i] * gp + k[i] * pp).abs();
        },
    )?;
    Ok(shape + params.gamma() * phase + rates.dphi.abs() * omega)
}

/// Number of whole steps of size `h` in `duration`, tolerant of the
/// rounding in e.g. `0.3 / 0.1`.
pub fn step_count<T: Scalar>(duration: T, h: T) -> Result<usize> {
    if !(duration.is_finite() && duration >= T::zero()) {
        return Err(CpgError::Scenario(format!(
            "duration must be finite and non-negative, got {duration}"
        )));
    }
    let n = (duration / h + T::lit(1e-9)).floor();
    n.to_usize()
        .ok_or_else(|| CpgError::Scenario(format!("duration {duration} too long for step {h}")))
}
