use super::target::{check_target_dims, component_target, ComponentTarget, TransformedTarget};
use super::{check_state_dim, OscillatorParams, OscillatorState, ShapeDerivatives};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::trajectory::{OutputLimits, PeriodicTrajectory, TrajectorySample};

/// Bounded-output oscillator vector field:
///
/// ```text
/// ṡ₁ = J_s1⁻¹ δ_ẏ tanh(s₂)
/// ṡ₂ = ψ_φ + ψ_t − B e₁ − K e₂ − B⁻¹D J_s1⁻¹ δ_ẏ (tanh(s₂) − tanh(ψ))
/// φ̇  = 1 + γ [ (e₁ᵀD + e₂ᵀB) J_gp⁻¹ δ_ẏ tanh(g_v) + (e₁ᵀB + e₂ᵀK) ψ_φ ]
/// ```
///
/// `ψ_φ` enters `ṡ₂` with unit weight rather than `φ̇`; the mismatch
/// `(1 − φ̇)` is exactly what the phase law turns into `−γW²` in the
/// derivative of the `[[D, B], [B, K]]`-weighted error energy.
pub fn bounded_rhs<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    limits: &OutputLimits<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> Result<ShapeDerivatives<T>> {
    let sample = traj.evaluate(state.phi);
    bounded_rhs_from_sample(&sample, limits, params, state).map(|(d, _)| d)
}

/// [`bounded_rhs`] for a pre-evaluated trajectory sample; also returns the
/// target it was computed from.
pub fn bounded_rhs_from_sample<T: Scalar>(
    sample: &TrajectorySample<T>,
    limits: &OutputLimits<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> Result<(ShapeDerivatives<T>, TransformedTarget<T>)> {
    check_target_dims(sample, limits, params, state)?;
    let mut tg = TransformedTarget::with_capacity(limits.dim());
    let mut out = ShapeDerivatives::zeros(limits.dim());
    bounded_rhs_into(sample, limits, params, state, &mut out, |_, c| tg.push(c))?;
    Ok((out, tg))
}

/// Writes the bounded vector field into `out` without allocating, handing
/// each component's target to `visit` after its shape derivatives are set.
/// Dimensions must already be checked.
pub(crate) fn bounded_rhs_into<T, V>(
    sample: &TrajectorySample<T>,
    limits: &OutputLimits<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
    out: &mut ShapeDerivatives<T>,
    mut visit: V,
) -> Result<()>
where
    T: Scalar,
    V: FnMut(usize, &ComponentTarget<T>),
{
    let (b, k, d) = (params.b(), params.k(), params.d());
    let p = params.sat_sharpness();
    let mut w = T::zero();
    for i in 0..limits.dim() {
        let tg = component_target(i, sample, limits, p, state)?;
        let dv = limits.delta_ydot()[i];
        let ts2 = state.s2[i].tanh();
        out.ds1[i] = dv * ts2 / tg.j_s1;
        out.ds2[i] = tg.psi_phi + tg.psi_t
            - b[i] * tg.e1
            - k[i] * tg.e2
            - d[i] / b[i] * dv / tg.j_s1 * (ts2 - tg.tanh_psi);
        // J_gp⁻¹ δ_ẏ tanh(g_v) with tanh(g_v) = f'/δ_ẏ.
        let gp_rate = sample.fp[i] / tg.j_gp;
        w = w
            + (d[i] * tg.e1 + b[i] * tg.e2) * gp_rate
            + (b[i] * tg.e1 + k[i] * tg.e2) * tg.psi_phi;
        visit(i, &tg);
    }
    out.dphi = if params.gamma().is_zero() {
        T::one()
    } else {
        T::one() + params.gamma() * w
    };
    Ok(())
}

/// Programmable oscillator (unbounded output), flattened to first order
/// with `ds = ṡ`:
///
/// ```text
/// s̈ = f''(φ) − B(ṡ − f'(φ)) − K(s − f(φ))
/// φ̇ = 1 + γ [ (s − f)ᵀK f'(φ) + (ṡ − f')ᵀ f''(φ) ]
/// ```
///
/// The state record's `s1` holds `s` and `s2` holds `ṡ`.
pub fn unbounded_rhs<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> Result<ShapeDerivatives<T>> {
    let sample = traj.evaluate(state.phi);
    unbounded_rhs_from_sample(&sample, params, state)
}

pub fn unbounded_rhs_from_sample<T: Scalar>(
    sample: &TrajectorySample<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> Result<ShapeDerivatives<T>> {
    let n = params.dim();
    check_state_dim(n, state)?;
    if sample.f.len() != n {
        return Err(crate::error::CpgError::DimensionMismatch {
            what: "trajectory",
            expected: n,
            got: sample.f.len(),
        });
    }
    let (b, k) = (params.b(), params.k());
    let mut out = ShapeDerivatives::zeros(n);
    let mut w = T::zero();
    for i in 0..n {
        let es = state.s1[i] - sample.f[i];
        let ev = state.s2[i] - sample.fp[i];
        out.ds1[i] = state.s2[i];
        out.ds2[i] = sample.fpp[i] - b[i] * ev - k[i] * es;
        w = w + es * k[i] * sample.fp[i] + ev * sample.fpp[i];
    }
    out.dphi = if params.gamma().is_zero() {
        T::one()
    } else {
        T::one() + params.gamma() * w
    };
    Ok(out)
}
