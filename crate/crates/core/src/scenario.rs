//! JSON scenario files: limits, gains, a motion library and a timeline of
//! motion/tempo switches, plus a batch runner that collects a summary.
//!
//! ```json
//! {
//!   "limits": {"y_min": [-170, -120], "y_max": [170, 120], "delta_ydot": 40},
//!   "params": {"b": 15, "k": 10, "d": 25, "gamma": 10},
//!   "integrator": {"h": 0.001},
//!   "motions": {"circle": "circle.json", "rest": {"n": 2, "period": 1, "components": [...]}},
//!   "timeline": [{"t": 0, "motion": "circle", "period": 10}],
//!   "init": {"y0": [0, 0], "ydot0": [0, 0], "phi0": 0},
//!   "duration": 120
//! }
//! ```
//!
//! Gains and `delta_ydot` may be given per component or as one number.
//! Motion file paths are resolved relative to the scenario file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cpg::{init_from_robot, step_count, CpgRuntime, MotionLibrary, StepRecord};
use crate::error::{CpgError, Result};
use crate::integrator::IntegratorConfig;
use crate::oscillator::{OscillatorParams, OscillatorState, DEFAULT_SAT_SHARPNESS};
use crate::trajectory::{tempo_rescale, OutputLimits, PeriodicTrajectory};

/// `‖e₁‖` below which a segment counts as converged in run summaries.
pub const CONVERGENCE_THRESHOLD: f64 = 0.05;

/// Motion id used when a scenario has no motions at all.
pub const HOLD_MOTION: &str = "hold";

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PerComponent {
    One(f64),
    Each(Vec<f64>),
}

impl PerComponent {
    fn expand(&self, n: usize, what: &'static str) -> Result<Vec<f64>> {
        match self {
            PerComponent::One(v) => Ok(vec![*v; n]),
            PerComponent::Each(v) if v.len() == n => Ok(v.clone()),
            PerComponent::Each(v) => Err(CpgError::DimensionMismatch {
                what,
                expected: n,
                got: v.len(),
            }),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitsSpec {
    y_min: Vec<f64>,
    y_max: Vec<f64>,
    delta_ydot: PerComponent,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsSpec {
    b: PerComponent,
    k: PerComponent,
    d: PerComponent,
    #[serde(default)]
    gamma: f64,
    p: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitSpec {
    y0: Option<Vec<f64>>,
    ydot0: Option<Vec<f64>>,
    #[serde(default)]
    phi0: f64,
}

/// One timeline entry: from time `t`, follow `motion` at `period`
/// (nominal period when absent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineEntry {
    pub t: f64,
    pub motion: String,
    #[serde(default)]
    pub period: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    limits: LimitsSpec,
    params: ParamsSpec,
    #[serde(default)]
    integrator: IntegratorConfig<f64>,
    #[serde(default)]
    motions: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    timeline: Vec<TimelineEntry>,
    #[serde(default)]
    init: InitSpec,
    #[serde(default)]
    duration: f64,
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub library: MotionLibrary<f64>,
    pub params: OscillatorParams<f64>,
    pub integrator: IntegratorConfig<f64>,
    /// Non-empty, starts at `t = 0`, sorted by time.
    pub timeline: Vec<TimelineEntry>,
    pub init: OscillatorState<f64>,
    pub duration: f64,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CpgError::Scenario(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    /// Parses a scenario; relative motion paths are resolved against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| CpgError::Scenario(e.to_string()))?;
        let n = file.limits.y_min.len();
        let limits = OutputLimits::new(
            file.limits.y_min,
            file.limits.y_max,
            file.limits.delta_ydot.expand(n, "delta_ydot")?,
        )?;
        let p = &file.params;
        let params = OscillatorParams::new(
            p.b.expand(n, "b")?,
            p.k.expand(n, "k")?,
            p.d.expand(n, "d")?,
            p.gamma,
            p.p.unwrap_or(DEFAULT_SAT_SHARPNESS),
        )?;

        let y0 = file.init.y0.unwrap_or_else(|| limits.y_avg().to_vec());
        let ydot0 = file.init.ydot0.unwrap_or_else(|| vec![0.0; n]);
        let init = init_from_robot(&y0, &ydot0, file.init.phi0, &limits)?;

        let mut library = MotionLibrary::new(limits);
        for (id, value) in file.motions {
            let traj = load_motion(&id, value, base)?;
            if traj.dim() != n {
                return Err(CpgError::DimensionMismatch {
                    what: "motion",
                    expected: n,
                    got: traj.dim(),
                });
            }
            library.insert(id, traj)?;
        }
        if library.is_empty() {
            let hold = crate::oscillator::output_map(&init.s1, library.limits());
            library.insert(HOLD_MOTION, PeriodicTrajectory::constant(&hold)?)?;
        }

        let mut timeline = file.timeline;
        if timeline.is_empty() {
            let first = library
                .ids()
                .next()
                .expect("library is non-empty")
                .to_owned();
            timeline.push(TimelineEntry {
                t: 0.0,
                motion: first,
                period: None,
            });
        }
        validate_timeline(&timeline, &library)?;
        step_count(file.duration, file.integrator.step())?;

        Ok(Self {
            library,
            params,
            integrator: file.integrator,
            timeline,
            init,
            duration: file.duration,
        })
    }

    pub fn limits(&self) -> &OutputLimits<f64> {
        self.library.limits()
    }

    /// Runtime positioned at `t = 0` on the first timeline entry.
    /// `gamma` overrides the scenario's phase coupling when given.
    pub fn runtime(&self, gamma: Option<f64>) -> Result<CpgRuntime<f64>> {
        let mut params = self.params.clone();
        if let Some(g) = gamma {
            params.set_gamma(g)?;
        }
        let first = &self.timeline[0];
        CpgRuntime::new(
            self.library.clone(),
            params,
            self.integrator,
            &first.motion,
            first.period,
            self.init.clone(),
        )
    }

    /// Runs the whole scenario. `sink` receives the initial record and one
    /// record per step; nothing at all when the duration is shorter than
    /// one step.
    pub fn run<F>(&self, gamma: Option<f64>, mut sink: F) -> Result<RunSummary>
    where
        F: FnMut(&StepRecord<f64>),
    {
        let mut rt = self.runtime(gamma)?;
        let h = rt.integrator().step();
        let steps = step_count(self.duration, h)?;
        let limits = rt.limits().clone();
        let mut summary = RunSummary::new(rt.params().gamma(), &self.timeline);
        if steps == 0 {
            summary.finish(&rt.current_record()?);
            return Ok(summary);
        }

        let mut rec = rt.current_record()?;
        summary.observe(&rec, &limits, 0);
        sink(&rec);
        let mut next_entry = 1;
        let mut segment = 0;
        for _ in 0..steps {
            while next_entry < self.timeline.len()
                && self.timeline[next_entry].t <= rt.t() + 0.5 * h
            {
                let entry = &self.timeline[next_entry];
                let (y, ydot) = rt.outputs();
                rt.switch_motion(&entry.motion, entry.period)?;
                let (y2, ydot2) = rt.outputs();
                summary.note_switch(&y, &y2, &ydot, &ydot2);
                segment = next_entry;
                next_entry += 1;
            }
            rec = rt.step()?;
            summary.observe(&rec, &limits, segment);
            sink(&rec);
        }
        summary.steps = steps;
        summary.finish(&rec);
        Ok(summary)
    }
}

fn load_motion(id: &str, value: serde_json::Value, base: &Path) -> Result<PeriodicTrajectory<f64>> {
    let bad = |e: String| CpgError::Scenario(format!("motion `{id}`: {e}"));
    match value {
        serde_json::Value::String(rel) => {
            let path: PathBuf = base.join(rel);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
            PeriodicTrajectory::from_json(&text).map_err(|e| bad(e.to_string()))
        }
        inline => serde_json::from_value(inline).map_err(|e| bad(e.to_string())),
    }
}

fn validate_timeline(timeline: &[TimelineEntry], library: &MotionLibrary<f64>) -> Result<()> {
    if timeline[0].t != 0.0 {
        return Err(CpgError::Scenario(format!(
            "timeline must start at t = 0, first entry is at {}",
            timeline[0].t
        )));
    }
    for (i, e) in timeline.iter().enumerate() {
        if !e.t.is_finite() || (i > 0 && e.t < timeline[i - 1].t) {
            return Err(CpgError::Scenario(format!(
                "timeline entry {i} is out of order (t = {})",
                e.t
            )));
        }
        let entry = library.get(&e.motion)?;
        if let Some(period) = e.period {
            tempo_rescale(&entry.nominal, period, library.limits())?;
        }
    }
    Ok(())
}

/// Per-segment result: the segment starts at `start` with `motion`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSummary {
    pub start: f64,
    pub motion: String,
    pub period: Option<f64>,
    /// Time after the segment start at which `‖e₁‖` first dropped below
    /// [`CONVERGENCE_THRESHOLD`].
    pub convergence_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub gamma: f64,
    pub steps: usize,
    pub final_t: f64,
    pub final_phi: f64,
    pub final_e1_norm: f64,
    pub final_e2_norm: f64,
    pub final_v3: f64,
    /// Recorded states with `y` outside the open box or `|ẏ| ≥ δ_ẏ`.
    pub bound_violations: usize,
    /// Largest change of any output component across a motion switch.
    pub max_switch_jump: f64,
    /// `φ − t` at the end of the run.
    pub delta: f64,
    pub segments: Vec<SegmentSummary>,
}

impl RunSummary {
    fn new(gamma: f64, timeline: &[TimelineEntry]) -> Self {
        Self {
            gamma,
            steps: 0,
            final_t: 0.0,
            final_phi: 0.0,
            final_e1_norm: 0.0,
            final_e2_norm: 0.0,
            final_v3: 0.0,
            bound_violations: 0,
            max_switch_jump: 0.0,
            delta: 0.0,
            segments: timeline
                .iter()
                .map(|e| SegmentSummary {
                    start: e.t,
                    motion: e.motion.clone(),
                    period: e.period,
                    convergence_time: None,
                })
                .collect(),
        }
    }

    fn observe(&mut self, rec: &StepRecord<f64>, limits: &OutputLimits<f64>, segment: usize) {
        if !limits.contains_position(&rec.y) || !limits.contains_rate(&rec.ydot) {
            self.bound_violations += 1;
        }
        let seg = &mut self.segments[segment];
        if seg.convergence_time.is_none() && rec.e1_norm < CONVERGENCE_THRESHOLD {
            seg.convergence_time = Some(rec.t - seg.start);
        }
    }

    fn note_switch(&mut self, y: &[f64], y2: &[f64], ydot: &[f64], ydot2: &[f64]) {
        for (a, b) in y.iter().zip(y2).chain(ydot.iter().zip(ydot2)) {
            self.max_switch_jump = self.max_switch_jump.max((a - b).abs());
        }
    }

    fn finish(&mut self, rec: &StepRecord<f64>) {
        self.final_t = rec.t;
        self.final_phi = rec.phi;
        self.final_e1_norm = rec.e1_norm;
        self.final_e2_norm = rec.e2_norm;
        self.final_v3 = rec.v3;
        self.delta = rec.phi - rec.t;
    }
}
