use super::maps::{sat_hat, sat_hat_derivative};
use super::{check_state_dim, OscillatorParams, OscillatorState};
use crate::error::{CpgError, Result};
use crate::scalar::{guarded_atanh, sech2, Scalar};
use crate::trajectory::{OutputLimits, PeriodicTrajectory, TrajectorySample};

/// Jacobian diagonals below this are treated as a numerical singularity.
const SINGULAR_JACOBIAN: f64 = 1e-300;

/// Shape-space target of the bounded-output oscillator at one state.
///
/// All Jacobians are diagonal and stored as vectors:
/// `J_s1 = δ_y(1 − tanh²s₁)`, `J_gp = δ_y(1 − tanh²g_p)`,
/// `J_gv = δ_ẏ(1 − tanh²g_v)`, `J_ψ = δ_ẏ(1 − tanh²ψ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedTarget<T> {
    pub g_p: Vec<T>,
    pub g_v: Vec<T>,
    /// `g_a = J_gv⁻¹ f''(φ)`, the phase derivative of `g_v`.
    pub g_a: Vec<T>,
    /// `ψ = atanh(ŝat(J_s1 J_gp⁻¹ tanh(g_v), p))`.
    pub psi: Vec<T>,
    /// `tanh(ψ)`, kept separately to avoid a lossy round trip through `atanh`.
    pub tanh_psi: Vec<T>,
    /// `∂ψ/∂φ` at fixed `s₁`.
    pub psi_phi: Vec<T>,
    /// Rate of change of `ψ` through `s₁` along the flow, `∂ψ/∂s₁ · ṡ₁`.
    pub psi_t: Vec<T>,
    pub j_s1: Vec<T>,
    pub j_gp: Vec<T>,
    pub j_gv: Vec<T>,
    pub j_psi: Vec<T>,
    /// `e₁ = s₁ − g_p`.
    pub e1: Vec<T>,
    /// `e₂ = s₂ − ψ`.
    pub e2: Vec<T>,
}

impl<T: Scalar> TransformedTarget<T> {
    pub(crate) fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            g_p: v(),
            g_v: v(),
            g_a: v(),
            psi: v(),
            tanh_psi: v(),
            psi_phi: v(),
            psi_t: v(),
            j_s1: v(),
            j_gp: v(),
            j_gv: v(),
            j_psi: v(),
            e1: v(),
            e2: v(),
        }
    }

    pub(crate) fn push(&mut self, c: &ComponentTarget<T>) {
        self.g_p.push(c.g_p);
        self.g_v.push(c.g_v);
        self.g_a.push(c.g_a);
        self.psi.push(c.psi);
        self.tanh_psi.push(c.tanh_psi);
        self.psi_phi.push(c.psi_phi);
        self.psi_t.push(c.psi_t);
        self.j_s1.push(c.j_s1);
        self.j_gp.push(c.j_gp);
        self.j_gv.push(c.j_gv);
        self.j_psi.push(c.j_psi);
        self.e1.push(c.e1);
        self.e2.push(c.e2);
    }

    /// Builds the target from an already evaluated trajectory sample
    /// `(f, f', f'')` at `state.phi`.
    pub fn from_sample(
        sample: &TrajectorySample<T>,
        limits: &OutputLimits<T>,
        params: &OscillatorParams<T>,
        state: &OscillatorState<T>,
    ) -> Result<Self> {
        check_target_dims(sample, limits, params, state)?;
        let mut out = Self::with_capacity(limits.dim());
        for i in 0..limits.dim() {
            out.push(&component_target(
                i,
                sample,
                limits,
                params.sat_sharpness(),
                state,
            )?);
        }
        Ok(out)
    }
}

/// [`TransformedTarget`] restricted to one component.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ComponentTarget<T> {
    pub g_p: T,
    pub g_v: T,
    pub g_a: T,
    pub psi: T,
    pub tanh_psi: T,
    pub psi_phi: T,
    pub psi_t: T,
    pub j_s1: T,
    pub j_gp: T,
    pub j_gv: T,
    pub j_psi: T,
    pub e1: T,
    pub e2: T,
}

pub(crate) fn check_target_dims<T: Scalar>(
    sample: &TrajectorySample<T>,
    limits: &OutputLimits<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> Result<()> {
    limits.check_dim("trajectory", sample.f.len())?;
    limits.check_dim("params", params.dim())?;
    check_state_dim(limits.dim(), state)
}

/// Target of component `i`; dimensions must already be checked.
pub(crate) fn component_target<T: Scalar>(
    i: usize,
    sample: &TrajectorySample<T>,
    limits: &OutputLimits<T>,
    p: T,
    state: &OscillatorState<T>,
) -> Result<ComponentTarget<T>> {
    let two = T::two();
    let tiny = T::lit(SINGULAR_JACOBIAN);
    let (avg, dy, dv) = (
        limits.y_avg()[i],
        limits.delta_y()[i],
        limits.delta_ydot()[i],
    );
    let (s1, s2) = (state.s1[i], state.s2[i]);

    // tanh(g_p) and tanh(g_v) are the normalised desired position and
    // rate themselves; use them directly rather than tanh(atanh(·)).
    let tgp = (sample.f[i] - avg) / dy;
    let tgv = sample.fp[i] / dv;
    if !(tgp.abs() < T::one() && tgv.abs() < T::one()) {
        return Err(CpgError::BoundaryViolation {
            component: i,
            detail: format!(
                "desired point f = {}, f' = {} at phase {} is outside the open limits",
                sample.f[i], sample.fp[i], state.phi
            ),
        });
    }
    let g_p = guarded_atanh(tgp);
    let g_v = guarded_atanh(tgv);
    let j_s1 = dy * sech2(s1);
    let j_gp = dy * (T::one() - tgp) * (T::one() + tgp);
    let j_gv = dv * (T::one() - tgv) * (T::one() + tgv);
    let g_a = sample.fpp[i] / j_gv;

    let u = j_s1 / j_gp * tgv;
    let tanh_psi = sat_hat(u, p);
    let psi = guarded_atanh(tanh_psi);
    let j_psi = dv * (T::one() - tanh_psi) * (T::one() + tanh_psi);
    for (name, j) in [
        ("J_s1", j_s1),
        ("J_gp", j_gp),
        ("J_gv", j_gv),
        ("J_psi", j_psi),
    ] {
        if !(j > tiny) {
            return Err(CpgError::NumericalSingularity(format!(
                "{name}[{i}] = {j:?} (s1 = {s1}, s2 = {s2}, phi = {})",
                state.phi
            )));
        }
    }
    // Chain factor of the saturation; one in the unsaturated limit.
    let sat_slope = sat_hat_derivative(u, p);
    let psi_phi =
        sat_slope * j_s1 / (j_psi * j_gp) * (two * dv * dv * tgv * tgv * tgp / j_gp + j_gv * g_a);
    let psi_t = -sat_slope * two * dv * dv * s1.tanh() * s2.tanh() * tgv / (j_psi * j_gp);
    Ok(ComponentTarget {
        g_p,
        g_v,
        g_a,
        psi,
        tanh_psi,
        psi_phi,
        psi_t,
        j_s1,
        j_gp,
        j_gv,
        j_psi,
        e1: s1 - g_p,
        e2: s2 - psi,
    })
}

/// Evaluates the trajectory at `state.phi` and builds the shape-space target.
pub fn transformed_target<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    limits: &OutputLimits<T>,
    params: &OscillatorParams<T>,
    state: &OscillatorState<T>,
) -> Result<TransformedTarget<T>> {
    let sample = traj.evaluate(state.phi);
    TransformedTarget::from_sample(&sample, limits, params, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::FourierComponent;

    fn limits() -> OutputLimits<f64> {
        OutputLimits::new(vec![-1.0, 0.0], vec![1.0, 3.0], vec![1.0, 2.0]).unwrap()
    }

    fn params() -> OscillatorParams<f64> {
        OscillatorParams::uniform(2, 15.0, 10.0, 25.0, 10.0).unwrap()
    }

    fn two_joint_sine() -> PeriodicTrajectory<f64> {
        PeriodicTrajectory::new(
            6.0,
            vec![
                FourierComponent {
                    dc: 0.1,
                    cos: vec![0.2],
                    sin: vec![0.4],
                },
                FourierComponent {
                    dc: 1.4,
                    cos: vec![-0.3, 0.1],
                    sin: vec![0.5],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn constant_at_box_centre_has_zero_psi() {
        let l = limits();
        let traj = PeriodicTrajectory::constant(l.y_avg()).unwrap();
        let state = OscillatorState::new(vec![0.4, -1.2], vec![0.3, 0.8], 2.0).unwrap();
        let t = transformed_target(&traj, &l, &params(), &state).unwrap();
        assert_eq!(t.g_p, vec![0.0, 0.0]);
        assert_eq!(t.g_v, vec![0.0, 0.0]);
        assert_eq!(t.psi, vec![0.0, 0.0]);
        assert_eq!(t.psi_phi, vec![0.0, 0.0]);
        assert_eq!(t.g_a, vec![0.0, 0.0]);
        // ψ ≡ 0 for every s₁, so its rate through s₁ vanishes too.
        assert!(t.psi_t.iter().all(|v| *v == 0.0));
        assert_eq!(t.e1, state.s1);
        assert_eq!(t.e2, state.s2);
    }

    #[test]
    fn on_target_errors_vanish() {
        let (l, p, traj) = (limits(), params(), two_joint_sine());
        let phi = 1.1;
        let smp = traj.evaluate(phi);
        let (g_p, _) = crate::oscillator::inverse_transform(&smp.f, &smp.fp, &l).unwrap();
        let probe = OscillatorState::new(g_p.clone(), vec![0.0; 2], phi).unwrap();
        let psi = transformed_target(&traj, &l, &p, &probe).unwrap().psi;
        let on = OscillatorState::new(g_p, psi, phi).unwrap();
        let t = transformed_target(&traj, &l, &p, &on).unwrap();
        assert!(t.e1.iter().chain(&t.e2).all(|e| e.abs() < 1e-15));
        // On the curve the velocity target equals g_v up to saturation.
        for i in 0..2 {
            assert!((t.psi[i] - t.g_v[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn jacobians_positive_for_interior_inputs() {
        let state = OscillatorState::new(vec![3.0, -2.0], vec![-1.0, 4.0], 0.7).unwrap();
        let t = transformed_target(&two_joint_sine(), &limits(), &params(), &state).unwrap();
        for j in [&t.j_s1, &t.j_gp, &t.j_gv, &t.j_psi] {
            assert!(j.iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn boundary_target_is_rejected() {
        let l = limits();
        let traj = PeriodicTrajectory::constant(&[1.0, 1.0]).unwrap();
        let state = OscillatorState::zeros(2);
        assert!(matches!(
            transformed_target(&traj, &l, &params(), &state),
            Err(CpgError::BoundaryViolation { component: 0, .. })
        ));
    }

    #[test]
    fn singular_shape_state_is_trapped() {
        let state = OscillatorState::new(vec![400.0, 0.0], vec![0.0, 0.0], 0.0).unwrap();
        assert!(matches!(
            transformed_target(&two_joint_sine(), &limits(), &params(), &state),
            Err(CpgError::NumericalSingularity(_))
        ));
    }
}
