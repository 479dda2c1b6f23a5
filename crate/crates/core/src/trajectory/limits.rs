use serde::{Deserialize, Serialize};

use crate::error::{CpgError, Result};
use crate::scalar::Scalar;

/// Open output box `y_min < y < y_max` together with the rate bound
/// `|ẏ| < delta_ydot`, all componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LimitsRepr<T>", into = "LimitsRepr<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct OutputLimits<T> {
    y_min: Vec<T>,
    y_max: Vec<T>,
    delta_ydot: Vec<T>,
    y_avg: Vec<T>,
    delta_y: Vec<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LimitsRepr<T> {
    y_min: Vec<T>,
    y_max: Vec<T>,
    delta_ydot: Vec<T>,
}

impl<T: Scalar> TryFrom<LimitsRepr<T>> for OutputLimits<T> {
    type Error = CpgError;

    fn try_from(r: LimitsRepr<T>) -> Result<Self> {
        OutputLimits::new(r.y_min, r.y_max, r.delta_ydot)
    }
}

impl<T: Scalar> From<OutputLimits<T>> for LimitsRepr<T> {
    fn from(l: OutputLimits<T>) -> Self {
        LimitsRepr {
            y_min: l.y_min,
            y_max: l.y_max,
            delta_ydot: l.delta_ydot,
        }
    }
}

impl<T: Scalar> OutputLimits<T> {
    pub fn new(y_min: Vec<T>, y_max: Vec<T>, delta_ydot: Vec<T>) -> Result<Self> {
        let n = y_min.len();
        if n == 0 {
            return Err(CpgError::InvalidLimits(
                "limits must have at least one component".into(),
            ));
        }
        for (what, v) in [("y_max", &y_max), ("delta_ydot", &delta_ydot)] {
            if v.len() != n {
                return Err(CpgError::DimensionMismatch {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        for i in 0..n {
            if !(y_min[i].is_finite() && y_max[i].is_finite() && delta_ydot[i].is_finite()) {
                return Err(CpgError::InvalidLimits(format!(
                    "component {i} is not finite"
                )));
            }
            if !(y_min[i] < y_max[i]) {
                return Err(CpgError::InvalidLimits(format!(
                    "component {i}: y_min {} must be below y_max {}",
                    y_min[i], y_max[i]
                )));
            }
            if !(delta_ydot[i] > T::zero()) {
                return Err(CpgError::InvalidLimits(format!(
                    "component {i}: delta_ydot {} must be positive",
                    delta_ydot[i]
                )));
            }
        }
        let y_avg: Vec<T> = y_min
            .iter()
            .zip(&y_max)
            .map(|(&lo, &hi)| (hi + lo) * T::half())
            .collect();
        let delta_y: Vec<T> = y_min
            .iter()
            .zip(&y_max)
            .map(|(&lo, &hi)| (hi - lo) * T::half())
            .collect();
        if let Some(i) = delta_y.iter().position(|d| !(*d > T::zero())) {
            return Err(CpgError::InvalidLimits(format!(
                "component {i}: box half-width underflows to zero"
            )));
        }
        Ok(Self {
            y_min,
            y_max,
            delta_ydot,
            y_avg,
            delta_y,
        })
    }

    /// Same box and rate bound for every one of `n` components.
    pub fn uniform(n: usize, y_min: T, y_max: T, delta_ydot: T) -> Result<Self> {
        Self::new(vec![y_min; n], vec![y_max; n], vec![delta_ydot; n])
    }

    pub fn dim(&self) -> usize {
        self.y_min.len()
    }

    pub fn y_min(&self) -> &[T] {
        &self.y_min
    }

    pub fn y_max(&self) -> &[T] {
        &self.y_max
    }

    pub fn delta_ydot(&self) -> &[T] {
        &self.delta_ydot
    }

    /// Box centre `(y_max + y_min) / 2`.
    pub fn y_avg(&self) -> &[T] {
        &self.y_avg
    }

    /// Box half-width `(y_max - y_min) / 2`.
    pub fn delta_y(&self) -> &[T] {
        &self.delta_y
    }

    pub fn contains_position(&self, y: &[T]) -> bool {
        y.len() == self.dim()
            && y.iter()
                .zip(self.y_min.iter().zip(&self.y_max))
                .all(|(&v, (&lo, &hi))| lo < v && v < hi)
    }

    pub fn contains_rate(&self, ydot: &[T]) -> bool {
        ydot.len() == self.dim()
            && ydot
                .iter()
                .zip(&self.delta_ydot)
                .all(|(&v, &d)| v.abs() < d)
    }

    pub(crate) fn check_dim(&self, what: &'static str, got: usize) -> Result<()> {
        if got == self.dim() {
            Ok(())
        } else {
            Err(CpgError::DimensionMismatch {
                what,
                expected: self.dim(),
                got,
            })
        }
    }
}
