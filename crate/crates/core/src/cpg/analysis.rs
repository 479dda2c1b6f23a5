//! Lyapunov functions and point-to-curve distances used to check
//! convergence numerically.

use crate::error::{CpgError, Result};
use crate::oscillator::{
    check_state_dim, inverse_transform, OscillatorParams, OscillatorState, TransformedTarget,
};
use crate::scalar::Scalar;
use crate::trajectory::{OutputLimits, PeriodicTrajectory, TrajectorySample};

/// Smallest τ-grid accepted by the orbital distance oracles.
pub const MIN_DISTANCE_SAMPLES: usize = 1000;

/// `½ Σ_i (d_i e₁ᵢ² + 2 b_i e₁ᵢ e₂ᵢ + k_i e₂ᵢ²)`: the error energy weighted
/// by the block matrix `[[D, B], [B, K]]`.
pub fn weighted_energy<T: Scalar>(params: &OscillatorParams<T>, e1: &[T], e2: &[T]) -> T {
    let (b, k, d) = (params.b(), params.k(), params.d());
    let mut acc = T::zero();
    for i in 0..e1.len() {
        acc = acc + d[i] * e1[i] * e1[i] + T::two() * b[i] * e1[i] * e2[i] + k[i] * e2[i] * e2[i];
    }
    acc * T::half()
}

/// `V₁ = ½(s − f)ᵀK(s − f) + ½(ṡ − f')ᵀ(ṡ − f')` for the unbounded oscillator.
pub fn lyapunov_v1<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> Result<T> {
    check_state_dim(params.dim(), state)?;
    check_traj_dim(traj, params.dim())?;
    let smp = traj.evaluate(state.phi);
    Ok(unbounded_distance(&smp, params, state))
}

/// `V₃ = ½[e₁; e₂]ᵀ [[D, B], [B, K]] [e₁; e₂]` for the bounded oscillator.
pub fn lyapunov_v3<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    limits: &OutputLimits<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> Result<T> {
    let smp = traj.evaluate(state.phi);
    let tg = TransformedTarget::from_sample(&smp, limits, params, state)?;
    Ok(weighted_energy(params, &tg.e1, &tg.e2))
}

fn unbounded_distance<T: Scalar>(
    smp: &TrajectorySample<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> T {
    let mut acc = T::zero();
    for (i, &ki) in params.k().iter().enumerate() {
        let es = state.s1[i] - smp.f[i];
        let ev = state.s2[i] - smp.fp[i];
        acc = acc + ki * es * es + ev * ev;
    }
    acc * T::half()
}

fn check_traj_dim<T: Scalar>(traj: &PeriodicTrajectory<T>, n: usize) -> Result<()> {
    if traj.dim() == n {
        Ok(())
    } else {
        Err(CpgError::DimensionMismatch {
            what: "trajectory",
            expected: n,
            got: traj.dim(),
        })
    }
}

fn tau_grid<T: Scalar>(period: T, samples: usize) -> Result<impl Iterator<Item = T>> {
    if samples < MIN_DISTANCE_SAMPLES {
        return Err(CpgError::InvalidTrajectory(format!(
            "distance grid needs at least {MIN_DISTANCE_SAMPLES} samples, got {samples}"
        )));
    }
    let step = period / T::from_usize_lossy(samples);
    Ok((0..samples).map(move |j| step * T::from_usize_lossy(j)))
}

/// Brute-force distance from `(s₁, s₂)` to the closed curve
/// `τ ↦ (g_p(τ), g_v(τ))`, using the `[[D, B], [B, K]]`-weighted squared
/// distance. Returns the minimum and the minimising `τ ∈ [0, T)`.
pub fn orbital_distance<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    limits: &OutputLimits<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
    samples: usize,
) -> Result<(T, T)> {
    limits.check_dim("trajectory", traj.dim())?;
    check_state_dim(limits.dim(), state)?;
    let mut best = (T::infinity(), T::zero());
    let mut e1 = vec![T::zero(); state.dim()];
    let mut e2 = vec![T::zero(); state.dim()];
    for tau in tau_grid(traj.period(), samples)? {
        let smp = traj.evaluate(tau);
        let (g_p, g_v) = inverse_transform(&smp.f, &smp.fp, limits)?;
        for i in 0..state.dim() {
            e1[i] = state.s1[i] - g_p[i];
            e2[i] = state.s2[i] - g_v[i];
        }
        let d = weighted_energy(params, &e1, &e2);
        if d < best.0 {
            best = (d, tau);
        }
    }
    Ok(best)
}

/// Unbounded-oscillator counterpart of [`orbital_distance`]: the minimum
/// over `τ` of `½(s − f(τ))ᵀK(s − f(τ)) + ½(ṡ − f'(τ))ᵀ(ṡ − f'(τ))`.
pub fn orbital_distance_unbounded<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
    samples: usize,
) -> Result<(T, T)> {
    check_state_dim(params.dim(), state)?;
    check_traj_dim(traj, params.dim())?;
    let mut best = (T::infinity(), T::zero());
    for tau in tau_grid(traj.period(), samples)? {
        let d = unbounded_distance(&traj.evaluate(tau), params, state);
        if d < best.0 {
            best = (d, tau);
        }
    }
    Ok(best)
}

/// `d_φ`: derivative of the weighted point-to-target distance with respect
/// to the phase, `−[e₁; e₂]ᵀ P [g_p'(φ); ψ_φ]`, evaluated at `τ = φ`.
/// It vanishes where the current target is a stationary point of the
/// distance to the curve.
pub fn distance_phase_derivative<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    limits: &OutputLimits<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> Result<T> {
    let smp = traj.evaluate(state.phi);
    let tg = TransformedTarget::from_sample(&smp, limits, params, state)?;
    let (b, k, d) = (params.b(), params.k(), params.d());
    let mut acc = T::zero();
    for i in 0..state.dim() {
        let gp_prime = smp.fp[i] / tg.j_gp[i];
        let (e1, e2) = (tg.e1[i], tg.e2[i]);
        acc = acc + (d[i] * e1 + b[i] * e2) * gp_prime + (b[i] * e1 + k[i] * e2) * tg.psi_phi[i];
    }
    Ok(-acc)
}
