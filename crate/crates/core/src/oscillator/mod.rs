//! The programmable oscillator and its bounded-output variant.
//!
//! Gain matrices are diagonal, so they are stored as vectors and every
//! matrix product in the dynamics reduces to componentwise arithmetic.

mod dynamics;
mod maps;
mod target;

pub(crate) use dynamics::bounded_rhs_into;
pub use dynamics::{
    bounded_rhs, bounded_rhs_from_sample, unbounded_rhs, unbounded_rhs_from_sample,
};
pub use maps::{inverse_transform, output_map, output_rate, sat_hat, sat_hat_derivative};
pub(crate) use target::ComponentTarget;
pub use target::{transformed_target, TransformedTarget};

use serde::{Deserialize, Serialize};

use crate::error::{CpgError, Result};
use crate::scalar::{all_finite, Scalar};

/// Saturation sharpness used when a configuration does not set one.
pub const DEFAULT_SAT_SHARPNESS: f64 = 100.0;

/// Diagonal gains `B`, `K`, `D`, phase coupling `γ` and saturation
/// sharpness `p`.
///
/// Construction enforces `b, k, d > 0`, `k_i d_i > b_i²` (so the block
/// matrix `[[D, B], [B, K]]` is positive definite), `γ ≥ 0` and `p ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr<T>", into = "ParamsRepr<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct OscillatorParams<T> {
    b: Vec<T>,
    k: Vec<T>,
    d: Vec<T>,
    gamma: T,
    sat_sharpness: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ParamsRepr<T> {
    b: Vec<T>,
    k: Vec<T>,
    d: Vec<T>,
    #[serde(default)]
    gamma: T,
    #[serde(default)]
    p: Option<T>,
}

impl<T: Scalar> TryFrom<ParamsRepr<T>> for OscillatorParams<T> {
    type Error = CpgError;

    fn try_from(r: ParamsRepr<T>) -> Result<Self> {
        OscillatorParams::new(
            r.b,
            r.k,
            r.d,
            r.gamma,
            r.p.unwrap_or_else(|| T::lit(DEFAULT_SAT_SHARPNESS)),
        )
    }
}

impl<T: Scalar> From<OscillatorParams<T>> for ParamsRepr<T> {
    fn from(p: OscillatorParams<T>) -> Self {
        ParamsRepr {
            b: p.b,
            k: p.k,
            d: p.d,
            gamma: p.gamma,
            p: Some(p.sat_sharpness),
        }
    }
}

impl<T: Scalar> OscillatorParams<T> {
    pub fn new(b: Vec<T>, k: Vec<T>, d: Vec<T>, gamma: T, sat_sharpness: T) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(CpgError::InvalidParams("gain vectors are empty".into()));
        }
        for (what, v) in [("k", &k), ("d", &d)] {
            if v.len() != n {
                return Err(CpgError::DimensionMismatch {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        for i in 0..n {
            let (bi, ki, di) = (b[i], k[i], d[i]);
            if !(bi.is_finite() && ki.is_finite() && di.is_finite()) {
                return Err(CpgError::InvalidParams(format!("gain {i} is not finite")));
            }
            if !(bi > T::zero() && ki > T::zero() && di > T::zero()) {
                return Err(CpgError::InvalidParams(format!(
                    "gains must be positive (component {i}: b={bi}, k={ki}, d={di})"
                )));
            }
            if !(ki * di > bi * bi) {
                return Err(CpgError::InvalidParams(format!(
                    "component {i}: k·d = {} must exceed b² = {}",
                    ki * di,
                    bi * bi
                )));
            }
        }
        if !(sat_sharpness.is_finite() && sat_sharpness >= T::one()) {
            return Err(CpgError::InvalidParams(format!(
                "saturation sharpness must be ≥ 1, got {sat_sharpness}"
            )));
        }
        let mut params = Self {
            b,
            k,
            d,
            gamma: T::zero(),
            sat_sharpness,
        };
        params.set_gamma(gamma)?;
        Ok(params)
    }

    /// Same gains on every one of `n` components.
    pub fn uniform(n: usize, b: T, k: T, d: T, gamma: T) -> Result<Self> {
        Self::new(
            vec![b; n],
            vec![k; n],
            vec![d; n],
            gamma,
            T::lit(DEFAULT_SAT_SHARPNESS),
        )
    }

    pub fn with_sat_sharpness(mut self, p: T) -> Result<Self> {
        if !(p.is_finite() && p >= T::one()) {
            return Err(CpgError::InvalidParams(format!(
                "saturation sharpness must be ≥ 1, got {p}"
            )));
        }
        self.sat_sharpness = p;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn k(&self) -> &[T] {
        &self.k
    }

    pub fn d(&self) -> &[T] {
        &self.d
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn sat_sharpness(&self) -> T {
        self.sat_sharpness
    }

    /// `γ = 0` gives trajectory tracking; large `γ` gives limit-cycle tracking.
    pub fn set_gamma(&mut self, gamma: T) -> Result<()> {
        if !(gamma.is_finite() && gamma >= T::zero()) {
            return Err(CpgError::InvalidParams(format!(
                "gamma must be finite and non-negative, got {gamma}"
            )));
        }
        self.gamma = gamma;
        Ok(())
    }
}

/// Shape states and phase.
///
/// For the bounded-output oscillator these are `(s₁, s₂, φ)`; for the
/// unbounded oscillator the same record holds `(s, ṡ, φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorState<T> {
    pub s1: Vec<T>,
    pub s2: Vec<T>,
    pub phi: T,
}

impl<T: Scalar> OscillatorState<T> {
    pub fn new(s1: Vec<T>, s2: Vec<T>, phi: T) -> Result<Self> {
        if s1.len() != s2.len() {
            return Err(CpgError::DimensionMismatch {
                what: "s2",
                expected: s1.len(),
                got: s2.len(),
            });
        }
        Ok(Self { s1, s2, phi })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            s1: vec![T::zero(); n],
            s2: vec![T::zero(); n],
            phi: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.s1.len()
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && all_finite(&self.s1) && all_finite(&self.s2)
    }
}

/// Right-hand side of the oscillator ODE at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDerivatives<T> {
    pub ds1: Vec<T>,
    pub ds2: Vec<T>,
    pub dphi: T,
}

impl<T: Scalar> ShapeDerivatives<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            ds1: vec![T::zero(); n],
            ds2: vec![T::zero(); n],
            dphi: T::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dphi.is_finite() && all_finite(&self.ds1) && all_finite(&self.ds2)
    }
}

pub(crate) fn check_state_dim<T: Scalar>(
    expected: usize,
    state: &OscillatorState<T>,
) -> Result<()> {
    for (what, got) in [("state s1", state.s1.len()), ("state s2", state.s2.len())] {
        if got != expected {
            return Err(CpgError::DimensionMismatch {
                what,
                expected,
                got,
            });
        }
    }
    Ok(())
}
