use crate::error::{CpgError, Result};
use crate::scalar::{guarded_atanh, Scalar};
use crate::trajectory::OutputLimits;

/// Keeps `v` strictly inside `(lo, hi)` once rounding has pushed it onto a
/// bound; `scale` sets the size of the inward step.
#[inline]
fn strictly_inside<T: Scalar>(v: T, lo: T, hi: T, scale: T) -> T {
    if v >= hi {
        hi - (hi.abs() + scale) * T::epsilon()
    } else if v <= lo {
        lo + (lo.abs() + scale) * T::epsilon()
    } else {
        v
    }
}

#[inline]
pub(crate) fn output_component<T: Scalar>(s1: T, y_avg: T, delta_y: T) -> T {
    let y = y_avg + delta_y * s1.tanh();
    strictly_inside(y, y_avg - delta_y, y_avg + delta_y, delta_y)
}

#[inline]
pub(crate) fn rate_component<T: Scalar>(s2: T, delta_ydot: T) -> T {
    let v = delta_ydot * s2.tanh();
    strictly_inside(v, -delta_ydot, delta_ydot, delta_ydot)
}

/// `y = y_avg + δ_y ∘ tanh(s₁)`; always strictly inside the open box.
pub fn output_map<T: Scalar>(s1: &[T], limits: &OutputLimits<T>) -> Vec<T> {
    s1.iter()
        .zip(limits.y_avg().iter().zip(limits.delta_y()))
        .map(|(&s, (&avg, &dy))| output_component(s, avg, dy))
        .collect()
}

/// `ẏ = δ_ẏ ∘ tanh(s₂)`; always strictly inside `(-δ_ẏ, δ_ẏ)`.
pub fn output_rate<T: Scalar>(s2: &[T], limits: &OutputLimits<T>) -> Vec<T> {
    s2.iter()
        .zip(limits.delta_ydot())
        .map(|(&s, &dv)| rate_component(s, dv))
        .collect()
}

/// Shape-space image `(g_p, g_v)` of a desired position and rate.
///
/// Requires `y_min < f < y_max` and `|f'| < δ_ẏ` strictly.
pub fn inverse_transform<T: Scalar>(
    f: &[T],
    fp: &[T],
    limits: &OutputLimits<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    limits.check_dim("f", f.len())?;
    limits.check_dim("f'", fp.len())?;
    let mut g_p = Vec::with_capacity(f.len());
    let mut g_v = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        let xp = (f[i] - limits.y_avg()[i]) / limits.delta_y()[i];
        let xv = fp[i] / limits.delta_ydot()[i];
        if !(xp.abs() < T::one()) {
            return Err(CpgError::BoundaryViolation {
                component: i,
                detail: format!(
                    "position {} outside ({}, {})",
                    f[i],
                    limits.y_min()[i],
                    limits.y_max()[i]
                ),
            });
        }
        if !(xv.abs() < T::one()) {
            return Err(CpgError::BoundaryViolation {
                component: i,
                detail: format!("rate {} not below {}", fp[i], limits.delta_ydot()[i]),
            });
        }
        g_p.push(guarded_atanh(xp));
        g_v.push(guarded_atanh(xv));
    }
    Ok((g_p, g_v))
}

/// Smooth odd approximation of the unit saturation:
/// `x / (1 + |x|^p)^(1/p)`.
///
/// Evaluated in a form that does not overflow for large `|x|`; the result
/// is capped at the largest value strictly below one.
pub fn sat_hat<T: Scalar>(x: T, p: T) -> T {
    let ax = x.abs();
    let mag = if ax <= T::one() {
        ax / (T::one() + ax.powf(p)).powf(p.recip())
    } else {
        (T::one() + ax.powf(-p)).powf(-p.recip())
    };
    let cap = T::one() - T::epsilon() * T::half();
    mag.min(cap).copysign(x)
}

/// `d/dx sat_hat(x, p) = (1 + |x|^p)^(-1/p - 1)`.
pub fn sat_hat_derivative<T: Scalar>(x: T, p: T) -> T {
    let ax = x.abs();
    let expo = -(p.recip() + T::one());
    if ax <= T::one() {
        (T::one() + ax.powf(p)).powf(expo)
    } else {
        // |x|^(-p-1) · (1 + |x|^-p)^(-1/p-1)
        ax.powf(-(p + T::one())) * (T::one() + ax.powf(-p)).powf(expo)
    }
}
