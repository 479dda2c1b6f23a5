use serde::{Deserialize, Serialize};

use super::{OutputLimits, PeriodicTrajectory, TrajectorySample};
use crate::error::{CpgError, Result};
use crate::scalar::Scalar;

/// Grid density used when callers do not pick one.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Smallest grid accepted by [`check_feasibility`].
pub const MIN_SAMPLES: usize = 100;

/// Relative slack applied to the transform-admissibility inequality so that
/// points sitting on its boundary are not classified strict.
const STRICT_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeasibilityClass {
    /// Inside the box and `δ_y²|f'| ≤ |δ_y² − (f − y_avg)²|·δ_ẏ` everywhere:
    /// the unsaturated velocity target `ψ` is well defined.
    Strict,
    /// Inside the open box with `|f'| < δ_ẏ`, but the stronger inequality
    /// fails somewhere; the saturated `ψ` is required.
    BoxOnly,
    /// Leaves the open box or exceeds the rate bound.
    Infeasible,
}

impl FeasibilityClass {
    pub fn is_usable(self) -> bool {
        !matches!(self, FeasibilityClass::Infeasible)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport<T> {
    pub class: FeasibilityClass,
    pub samples: usize,
    /// Largest `δ_y²|f'| / (|δ_y² − (f − y_avg)²|·δ_ẏ)` over grid and
    /// components. Below one means the unsaturated `ψ` argument stays in
    /// `[-1, 1]`.
    pub max_transform_ratio: T,
    /// `max_φ |f'_i(φ)|` per component.
    pub max_abs_rate: Vec<T>,
    /// Smallest `1 − |f − y_avg| / δ_y` over grid and components.
    pub min_position_margin: T,
    /// Component and phase where the worst violation (or ratio) occurred.
    pub worst_component: usize,
    pub worst_phase: T,
}

/// Classifies `traj` against `limits` on a uniform grid of `samples`
/// phases over one period.
pub fn check_feasibility<T: Scalar>(
    traj: &PeriodicTrajectory<T>,
    limits: &OutputLimits<T>,
    samples: usize,
) -> Result<FeasibilityReport<T>> {
    limits.check_dim("trajectory", traj.dim())?;
    if samples < MIN_SAMPLES {
        return Err(CpgError::InvalidTrajectory(format!(
            "feasibility grid needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let n = traj.dim();
    let (y_min, y_max) = (limits.y_min(), limits.y_max());
    let (y_avg, dy, dv) = (limits.y_avg(), limits.delta_y(), limits.delta_ydot());
    let slack = T::one() - T::lit(STRICT_MARGIN);
    let step = traj.period() / T::from_usize_lossy(samples);

    let mut in_box = true;
    let mut strict = true;
    let mut max_ratio = T::zero();
    let mut max_rate = vec![T::zero(); n];
    let mut min_margin = T::infinity();
    let mut worst = (0usize, T::zero());
    let mut worst_ratio = T::neg_infinity();
    let mut buf = TrajectorySample::zeros(n);

    for j in 0..samples {
        let phi = step * T::from_usize_lossy(j);
        traj.evaluate_into(phi, &mut buf);
        for i in 0..n {
            let (f, fp) = (buf.f[i], buf.fp[i]);
            max_rate[i] = max_rate[i].max(fp.abs());
            let centred = f - y_avg[i];
            min_margin = min_margin.min(T::one() - centred.abs() / dy[i]);

            if !(y_min[i] < f && f < y_max[i] && fp.abs() < dv[i]) {
                if in_box {
                    worst = (i, phi);
                }
                in_box = false;
            }

            let lhs = dy[i] * dy[i] * fp.abs();
            let rhs = (dy[i] * dy[i] - centred * centred).abs() * dv[i];
            if !(lhs <= slack * rhs) {
                strict = false;
            }
            let ratio = if rhs > T::zero() {
                lhs / rhs
            } else if lhs > T::zero() {
                T::infinity()
            } else {
                T::zero()
            };
            max_ratio = max_ratio.max(ratio);
            if in_box && ratio > worst_ratio {
                worst_ratio = ratio;
                worst = (i, phi);
            }
        }
    }

    let class = if !in_box {
        FeasibilityClass::Infeasible
    } else if strict {
        FeasibilityClass::Strict
    } else {
        FeasibilityClass::BoxOnly
    };
    Ok(FeasibilityReport {
        class,
        samples,
        max_transform_ratio: max_ratio,
        max_abs_rate: max_rate,
        min_position_margin: min_margin,
        worst_component: worst.0,
        worst_phase: worst.1,
    })
}
