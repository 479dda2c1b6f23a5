use super::{check_feasibility, OutputLimits, PeriodicTrajectory, DEFAULT_SAMPLES};
use crate::error::{CpgError, Result};
use crate::scalar::Scalar;

/// `max_i max_φ |f'_i(φ)|` on the default feasibility grid.
pub fn max_abs_rate<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    limits: &OutputLimits<T>,
) -> Result<T> {
    let report = check_feasibility(traj, limits, DEFAULT_SAMPLES)?;
    Ok(report
        .max_abs_rate
        .iter()
        .fold(T::zero(), |acc, &r| acc.max(r)))
}

/// Shortest period the nominal motion may be replayed at without exceeding
/// the rate bound: `T_nom · max_i (max|f'_n,i| / δ_ẏ,i)`, which reduces to
/// `T_nom · max|f'_n| / δ_ẏ` for a uniform bound. Zero for constant motions.
pub fn min_admissible_period<T: Scalar>(
    nominal: &PeriodicTrajectory<T>,
    limits: &OutputLimits<T>,
) -> Result<T> {
    let report = check_feasibility(nominal, limits, DEFAULT_SAMPLES)?;
    let ratio = report
        .max_abs_rate
        .iter()
        .zip(limits.delta_ydot())
        .fold(T::zero(), |acc, (&r, &d)| acc.max(r / d));
    Ok(nominal.period() * ratio)
}

/// Replays `nominal` with period `new_period`:
/// `f(φ) = f_n(T_nom·φ / T_new)`, so `f'` scales by `T_nom / T_new` and
/// `f''` by its square. The Fourier coefficients are unchanged; only the
/// fundamental frequency moves.
///
/// Fails with [`CpgError::PeriodTooShort`] unless
/// `new_period > min_admissible_period(nominal, limits)`.
pub fn tempo_rescale<T: Scalar>(
    nominal: &PeriodicTrajectory<T>,
    new_period: T,
    limits: &OutputLimits<T>,
) -> Result<PeriodicTrajectory<T>> {
    if !(new_period.is_finite() && new_period > T::zero()) {
        return Err(CpgError::InvalidTrajectory(format!(
            "period must be positive and finite, got {new_period}"
        )));
    }
    let min_period = min_admissible_period(nominal, limits)?;
    if min_period > T::zero() && !(new_period > min_period) {
        return Err(CpgError::PeriodTooShort {
            requested: new_period.to_f64().unwrap_or(f64::NAN),
            min_period: min_period.to_f64().unwrap_or(f64::NAN),
        });
    }
    nominal.with_period(new_period)
}
