//! Desired joint trajectories as truncated Fourier series.
//!
//! Every component of an n-dimensional trajectory shares one fundamental
//! period, so a single phase value selects a point on the whole curve.
//! A constant trajectory is the zero-harmonic case.

mod feasibility;
mod limits;
mod tempo;

pub use feasibility::{check_feasibility, FeasibilityClass, FeasibilityReport, DEFAULT_SAMPLES};
pub use limits::OutputLimits;
pub use tempo::{max_abs_rate, min_admissible_period, tempo_rescale};

use serde::{Deserialize, Serialize};

use crate::error::{CpgError, Result};
use crate::scalar::Scalar;

/// One scalar component: `dc + Σ_k cos[k-1]·cos(kωφ) + sin[k-1]·sin(kωφ)`,
/// harmonics numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct FourierComponent<T> {
    pub dc: T,
    #[serde(default)]
    pub cos: Vec<T>,
    #[serde(default)]
    pub sin: Vec<T>,
}

impl<T: Scalar> FourierComponent<T> {
    pub fn constant(dc: T) -> Self {
        Self {
            dc,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn harmonics(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|c| c.is_zero())
    }

    /// Value, first and second derivative at the reduced phase `theta = ωφ`.
    fn eval(&self, theta: T, omega: T) -> (T, T, T) {
        let mut f = self.dc;
        let mut fp = T::zero();
        let mut fpp = T::zero();
        for k in 0..self.harmonics() {
            let kk = T::from_usize_lossy(k + 1);
            let a = self.cos.get(k).copied().unwrap_or_else(T::zero);
            let b = self.sin.get(k).copied().unwrap_or_else(T::zero);
            let (s, c) = (kk * theta).sin_cos();
            let kw = kk * omega;
            f = f + a * c + b * s;
            fp = fp + kw * (b * c - a * s);
            fpp = fpp - kw * kw * (a * c + b * s);
        }
        (f, fp, fpp)
    }
}

/// Value and phase derivatives of a trajectory at one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample<T> {
    pub f: Vec<T>,
    pub fp: Vec<T>,
    pub fpp: Vec<T>,
}

impl<T: Scalar> TrajectorySample<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            f: vec![T::zero(); n],
            fp: vec![T::zero(); n],
            fpp: vec![T::zero(); n],
        }
    }
}

/// An n-dimensional periodic (or constant) desired trajectory with exact
/// analytic first and second derivatives.
///
/// On disk: `{"n": 2, "period": 10.0, "components": [{"dc": 0, "cos": [..], "sin": [..]}, ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryFile<T>", into = "TrajectoryFile<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct PeriodicTrajectory<T> {
    period: T,
    components: Vec<FourierComponent<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrajectoryFile<T> {
    n: usize,
    period: T,
    components: Vec<FourierComponent<T>>,
}

impl<T: Scalar> TryFrom<TrajectoryFile<T>> for PeriodicTrajectory<T> {
    type Error = CpgError;

    fn try_from(file: TrajectoryFile<T>) -> Result<Self> {
        if file.components.len() != file.n {
            return Err(CpgError::DimensionMismatch {
                what: "trajectory components",
                expected: file.n,
                got: file.components.len(),
            });
        }
        PeriodicTrajectory::new(file.period, file.components)
    }
}

impl<T: Scalar> From<PeriodicTrajectory<T>> for TrajectoryFile<T> {
    fn from(t: PeriodicTrajectory<T>) -> Self {
        TrajectoryFile {
            n: t.components.len(),
            period: t.period,
            components: t.components,
        }
    }
}

impl<T: Scalar> PeriodicTrajectory<T> {
    pub fn new(period: T, components: Vec<FourierComponent<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(CpgError::InvalidTrajectory("no components".into()));
        }
        if !(period.is_finite() && period > T::zero()) {
            return Err(CpgError::InvalidTrajectory(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        for (i, c) in components.iter().enumerate() {
            let finite = c.dc.is_finite() && c.cos.iter().chain(&c.sin).all(|x| x.is_finite());
            if !finite {
                return Err(CpgError::InvalidTrajectory(format!(
                    "component {i} has a non-finite coefficient"
                )));
            }
        }
        Ok(Self { period, components })
    }

    /// A constant posture. The period is nominal only; every derivative is zero.
    pub fn constant(values: &[T]) -> Result<Self> {
        Self::new(
            T::one(),
            values
                .iter()
                .map(|&v| FourierComponent::constant(v))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn components(&self) -> &[FourierComponent<T>] {
        &self.components
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(FourierComponent::is_constant)
    }

    pub(crate) fn with_period(&self, period: T) -> Result<Self> {
        Self::new(period, self.components.clone())
    }

    fn angular_frequency(&self) -> T {
        T::two() * T::PI() / self.period
    }

    /// `f(φ)`, `f'(φ)`, `f''(φ)`.
    pub fn evaluate(&self, phi: T) -> TrajectorySample<T> {
        let mut out = TrajectorySample::zeros(self.dim());
        self.evaluate_into(phi, &mut out);
        out
    }

    /// Allocation-free variant of [`evaluate`](Self::evaluate); `out` must
    /// already have `dim()` entries per field.
    pub fn evaluate_into(&self, phi: T, out: &mut TrajectorySample<T>) {
        let omega = self.angular_frequency();
        // Reduce first so large phases keep full precision and f(φ+T) = f(φ).
        let theta = omega * phi.rem_euclid(&self.period);
        for (i, c) in self.components.iter().enumerate() {
            let (f, fp, fpp) = c.eval(theta, omega);
            out.f[i] = f;
            out.fp[i] = fp;
            out.fpp[i] = fpp;
        }
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        serde_json::from_str(s).map_err(|e| CpgError::InvalidTrajectory(e.to_string()))
    }
}

trait RemEuclid {
    fn rem_euclid(self, m: &Self) -> Self;
}

impl<T: Scalar> RemEuclid for T {
    fn rem_euclid(self, m: &T) -> T {
        let r = self % *m;
        if r < T::zero() {
            r + *m
        } else {
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sine(amp: f64, period: f64) -> PeriodicTrajectory<f64> {
        PeriodicTrajectory::new(
            period,
            vec![FourierComponent {
                dc: 0.0,
                cos: vec![],
                sin: vec![amp],
            }],
        )
        .unwrap()
    }

    #[test]
    fn constant_trajectory_has_zero_derivatives() {
        let t = PeriodicTrajectory::constant(&[0.3]).unwrap();
        let s = t.evaluate(17.2);
        assert_eq!(s.f, vec![0.3]);
        assert_eq!(s.fp, vec![0.0]);
        assert_eq!(s.fpp, vec![0.0]);
        assert!(t.is_constant());
    }

    #[test]
    fn sine_at_zero_crossing() {
        let s = sine(0.5, 10.0).evaluate(0.0);
        assert_eq!(s.f[0], 0.0);
        assert!((s.fp[0] - 0.1 * PI).abs() < 1e-15);
        assert_eq!(s.fpp[0], 0.0);
    }

    #[test]
    fn periodic_in_phase() {
        let t = sine(0.7, 3.0);
        for &phi in &[0.1, 1.3, -2.2, 250.7] {
            let a = t.evaluate(phi);
            let b = t.evaluate(phi + 3.0);
            assert!((a.f[0] - b.f[0]).abs() < 1e-12);
            assert!((a.fp[0] - b.fp[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn three_harmonic_series_matches_finite_differences() {
        let t = PeriodicTrajectory::new(
            4.0,
            vec![FourierComponent {
                dc: 0.1,
                cos: vec![0.3, -0.2, 0.05],
                sin: vec![-0.4, 0.15, 0.1],
            }],
        )
        .unwrap();
        let (phi, h) = (1.37_f64, 1e-5);
        let s = t.evaluate(phi);
        let (p, m) = (t.evaluate(phi + h), t.evaluate(phi - h));
        assert!(((p.f[0] - m.f[0]) / (2.0 * h) - s.fp[0]).abs() < 1e-6);
        assert!(((p.fp[0] - m.fp[0]) / (2.0 * h) - s.fpp[0]).abs() < 1e-6);
    }

    #[test]
    fn file_format_round_trip() {
        let json = r#"{"n":2,"period":10,"components":[{"dc":0.1,"cos":[0.2],"sin":[0.0,0.3]},{"dc":-0.5}]}"#;
        let t = PeriodicTrajectory::<f64>::from_json(json).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.components()[0].harmonics(), 2);
        assert!(t.components()[1].is_constant());
        let again = PeriodicTrajectory::<f64>::from_json(&t.to_json()).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn file_format_rejects_bad_input() {
        assert!(PeriodicTrajectory::<f64>::from_json(
            r#"{"n":2,"period":1,"components":[{"dc":0}]}"#
        )
        .is_err());
        assert!(PeriodicTrajectory::<f64>::from_json(
            r#"{"n":1,"period":0,"components":[{"dc":0}]}"#
        )
        .is_err());
        assert!(
            PeriodicTrajectory::<f64>::from_json(r#"{"n":0,"period":1,"components":[]}"#).is_err()
        );
    }

    #[test]
    fn generic_over_f32() {
        let t = PeriodicTrajectory::<f32>::new(
            2.0,
            vec![FourierComponent {
                dc: 0.0,
                cos: vec![1.0],
                sin: vec![],
            }],
        )
        .unwrap();
        let s = t.evaluate(0.5);
        assert!(s.f[0].abs() < 1e-6);
        assert!((s.fp[0] + std::f32::consts::PI).abs() < 1e-5);
    }

    fn coeffs() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.0..1.0_f64, 0..4)
    }

    proptest! {
        #[test]
        fn derivatives_agree_with_central_differences(
            dc in -1.0..1.0_f64,
            cos in coeffs(),
            sin in coeffs(),
            period in 2.0..20.0_f64,
            phi in -50.0..50.0_f64,
        ) {
            let t = PeriodicTrajectory::new(period, vec![FourierComponent { dc, cos, sin }]).unwrap();
            let h = 1e-5;
            let s = t.evaluate(phi);
            let (p, m) = (t.evaluate(phi + h), t.evaluate(phi - h));
            prop_assert!(((p.f[0] - m.f[0]) / (2.0 * h) - s.fp[0]).abs() < 1e-6);
            prop_assert!(((p.fp[0] - m.fp[0]) / (2.0 * h) - s.fpp[0]).abs() < 1e-6);
        }
    }
}
