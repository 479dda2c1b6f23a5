//! Fixed-step explicit integration of `(s₁, s₂, φ)`.

use serde::{Deserialize, Serialize};

use crate::error::{CpgError, Result};
use crate::oscillator::{OscillatorState, ShapeDerivatives};
use crate::scalar::Scalar;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const MAX_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Rk4,
    /// Forward Euler; kept for convergence-order comparisons.
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr<T>", into = "ConfigRepr<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct IntegratorConfig<T> {
    step: T,
    method: Method,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct ConfigRepr<T> {
    h: Option<T>,
    #[serde(default)]
    method: Method,
}

impl<T: Scalar> TryFrom<ConfigRepr<T>> for IntegratorConfig<T> {
    type Error = CpgError;

    fn try_from(r: ConfigRepr<T>) -> Result<Self> {
        IntegratorConfig::new(r.h.unwrap_or_else(|| T::lit(DEFAULT_STEP)), r.method)
    }
}

impl<T: Scalar> From<IntegratorConfig<T>> for ConfigRepr<T> {
    fn from(c: IntegratorConfig<T>) -> Self {
        ConfigRepr {
            h: Some(c.step),
            method: c.method,
        }
    }
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            step: T::lit(DEFAULT_STEP),
            method: Method::Rk4,
        }
    }
}

impl<T: Scalar> IntegratorConfig<T> {
    /// Step must lie in `(0, 0.1]` seconds.
    pub fn new(step: T, method: Method) -> Result<Self> {
        if !(step > T::zero() && step <= T::lit(MAX_STEP)) {
            return Err(CpgError::InvalidIntegrator(format!(
                "step {step} outside (0, {MAX_STEP}]"
            )));
        }
        Ok(Self { step, method })
    }

    pub fn rk4(step: T) -> Result<Self> {
        Self::new(step, Method::Rk4)
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn method(&self) -> Method {
        self.method
    }
}

fn offset<T: Scalar>(x: &OscillatorState<T>, k: &ShapeDerivatives<T>, a: T) -> OscillatorState<T> {
    OscillatorState {
        s1: x.s1.iter().zip(&k.ds1).map(|(&s, &d)| s + a * d).collect(),
        s2: x.s2.iter().zip(&k.ds2).map(|(&s, &d)| s + a * d).collect(),
        phi: x.phi + a * k.dphi,
    }
}

fn non_finite<T: Scalar>(state: &OscillatorState<T>, t: T, stage: &str) -> CpgError {
    CpgError::NonFiniteState {
        t: t.to_f64().unwrap_or(f64::NAN),
        snapshot: format!(
            "{stage}: s1={:?} s2={:?} phi={:?}",
            state.s1, state.s2, state.phi
        ),
    }
}

/// Advances `state` from `t` by one step of `cfg.step()`.
///
/// `rhs(state, t)` returns the vector field. Any non-finite stage
/// derivative or result aborts with [`CpgError::NonFiniteState`].
pub fn step<T, F>(
    mut rhs: F,
    state: &OscillatorState<T>,
    t: T,
    cfg: &IntegratorConfig<T>,
) -> Result<OscillatorState<T>>
where
    T: Scalar,
    F: FnMut(&OscillatorState<T>, T) -> Result<ShapeDerivatives<T>>,
{
    let h = cfg.step;
    let mut eval = |x: &OscillatorState<T>, tt: T| -> Result<ShapeDerivatives<T>> {
        let d = rhs(x, tt)?;
        if d.is_finite() {
            Ok(d)
        } else {
            Err(non_finite(x, tt, "derivative"))
        }
    };
    let next = match cfg.method {
        Method::Euler => {
            let k1 = eval(state, t)?;
            offset(state, &k1, h)
        }
        Method::Rk4 => {
            let half = h * T::half();
            let k1 = eval(state, t)?;
            let k2 = eval(&offset(state, &k1, half), t + half)?;
            let k3 = eval(&offset(state, &k2, half), t + half)?;
            let k4 = eval(&offset(state, &k3, h), t + h)?;
            let two = T::two();
            let six = T::lit(6.0);
            // (k1 + 2k2 + 2k3 + k4) / 6 first, so a constant rate of one
            // advances the phase by exactly h.
            let comb = |a: T, b: T, c: T, d: T| (a + two * b + two * c + d) / six;
            OscillatorState {
                s1: (0..state.dim())
                    .map(|i| state.s1[i] + h * comb(k1.ds1[i], k2.ds1[i], k3.ds1[i], k4.ds1[i]))
                    .collect(),
                s2: (0..state.dim())
                    .map(|i| state.s2[i] + h * comb(k1.ds2[i], k2.ds2[i], k3.ds2[i], k4.ds2[i]))
                    .collect(),
                phi: state.phi + h * comb(k1.dphi, k2.dphi, k3.dphi, k4.dphi),
            }
        }
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(non_finite(&next, t + h, "update"))
    }
}

/// Target for `h·L` on each substep of [`advance`]; well inside the
/// real-axis stability interval of both methods.
pub const STABLE_STEP_FRACTION: f64 = 1.0;

/// Upper limit on the substeps [`advance`] may take for one step.
pub const MAX_SUBSTEPS: usize = 1 << 20;

/// Advances `state` from `t` by `cfg.step()`, splitting the step when the
/// local rate bound reported by `stiffness(state, t)` would make a single
/// step unstable.
///
/// Each substep has size `min(remaining, STABLE_STEP_FRACTION / L)`, so in
/// the non-stiff case this is exactly one call to [`step`]. The schedule
/// depends only on the state, so runs stay deterministic.
pub fn advance<T, F, L>(
    mut rhs: F,
    mut stiffness: L,
    state: &OscillatorState<T>,
    t: T,
    cfg: &IntegratorConfig<T>,
) -> Result<OscillatorState<T>>
where
    T: Scalar,
    F: FnMut(&OscillatorState<T>, T) -> Result<ShapeDerivatives<T>>,
    L: FnMut(&OscillatorState<T>, T) -> Result<T>,
{
    let h = cfg.step;
    let frac = T::lit(STABLE_STEP_FRACTION);
    let lip = stiffness(state, t)?;
    if !lip.is_finite() {
        return Err(non_finite(state, t, "stiffness"));
    }
    if lip * h <= frac {
        return step(&mut rhs, state, t, cfg);
    }
    let mut x = state.clone();
    let mut done = T::zero();
    let mut lip = lip;
    for n in 0..MAX_SUBSTEPS {
        let remaining = h - done;
        let sub = if lip * remaining > frac {
            frac / lip
        } else {
            remaining
        };
        let sub_cfg = IntegratorConfig {
            step: sub,
            method: cfg.method,
        };
        x = step(&mut rhs, &x, t + done, &sub_cfg)?;
        if sub == remaining {
            log::trace!("t={t}: step split into {} substeps", n + 1);
            return Ok(x);
        }
        done = done + sub;
        lip = stiffness(&x, t + done)?;
        if !lip.is_finite() {
            return Err(non_finite(&x, t + done, "stiffness"));
        }
    }
    Err(CpgError::NumericalSingularity(format!(
        "step at t = {t} needs more than {MAX_SUBSTEPS} substeps"
    )))
}
