use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{CpgError, Result};
use crate::scalar::Scalar;
use crate::trajectory::{
    check_feasibility, min_admissible_period, FeasibilityClass, FeasibilityReport, OutputLimits,
    PeriodicTrajectory, DEFAULT_SAMPLES,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct MotionEntry<T> {
    pub nominal: PeriodicTrajectory<T>,
    pub feasibility: FeasibilityReport<T>,
    /// Shortest period this motion may be replayed at.
    pub min_period: T,
}

impl<T: Scalar> MotionEntry<T> {
    pub fn class(&self) -> FeasibilityClass {
        self.feasibility.class
    }
}

/// Offline-designed motions keyed by id, all classified against one set of
/// output limits. Infeasible motions never enter the library.
#[derive(Debug, Clone)]
pub struct MotionLibrary<T> {
    limits: OutputLimits<T>,
    motions: BTreeMap<String, MotionEntry<T>>,
}

impl<T: Scalar> MotionLibrary<T> {
    pub fn new(limits: OutputLimits<T>) -> Self {
        Self {
            limits,
            motions: BTreeMap::new(),
        }
    }

    pub fn limits(&self) -> &OutputLimits<T> {
        &self.limits
    }

    pub fn dim(&self) -> usize {
        self.limits.dim()
    }

    /// Classifies and stores `nominal` under `id`, replacing any previous
    /// entry with that id.
    pub fn insert(
        &mut self,
        id: impl Into<String>,
        nominal: PeriodicTrajectory<T>,
    ) -> Result<&MotionEntry<T>> {
        let id = id.into();
        let feasibility = check_feasibility(&nominal, &self.limits, DEFAULT_SAMPLES)?;
        if feasibility.class == FeasibilityClass::Infeasible {
            return Err(CpgError::InfeasibleMotion(id));
        }
        let min_period = min_admissible_period(&nominal, &self.limits)?;
        log::debug!(
            "motion {id}: {:?}, min period {min_period}",
            feasibility.class
        );
        self.motions.insert(
            id.clone(),
            MotionEntry {
                nominal,
                feasibility,
                min_period,
            },
        );
        Ok(&self.motions[&id])
    }

    pub fn get(&self, id: &str) -> Result<&MotionEntry<T>> {
        self.motions
            .get(id)
            .ok_or_else(|| CpgError::UnknownMotion(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.motions.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.motions.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MotionEntry<T>)> {
        self.motions.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.motions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motions.is_empty()
    }
}
