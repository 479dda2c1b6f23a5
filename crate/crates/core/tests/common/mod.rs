//! Random scenario generators shared by the integration and acceptance tests.
#![allow(dead_code)]

use cpg_core::cpg::{init_from_robot, CpgRuntime, MotionLibrary};
use cpg_core::integrator::IntegratorConfig;
use cpg_core::oscillator::{OscillatorParams, OscillatorState};
use cpg_core::trajectory::{
    check_feasibility, FeasibilityClass, FourierComponent, OutputLimits, PeriodicTrajectory,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_limits(rng: &mut TestRng, n: usize) -> OutputLimits<f64> {
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut dv = Vec::with_capacity(n);
    for _ in 0..n {
        let l = rng.gen_range(-3.0..0.0);
        lo.push(l);
        hi.push(l + rng.gen_range(0.5..4.0));
        dv.push(rng.gen_range(0.5..3.0));
    }
    OutputLimits::new(lo, hi, dv).unwrap()
}

/// Random zero-mean Fourier shape with unit peak deviation per component.
fn unit_shape(
    rng: &mut TestRng,
    n: usize,
    harmonics: usize,
    period: f64,
) -> Vec<FourierComponent<f64>> {
    let unit = PeriodicTrajectory::new(
        period,
        (0..n)
            .map(|_| FourierComponent {
                dc: 0.0,
                cos: (0..harmonics)
                    .map(|k| rng.gen_range(-1.0..1.0) / (k + 1) as f64)
                    .collect(),
                sin: (0..harmonics)
                    .map(|k| rng.gen_range(-1.0..1.0) / (k + 1) as f64)
                    .collect(),
            })
            .collect(),
    )
    .unwrap();
    let peaks: Vec<f64> = (0..n)
        .map(|i| {
            (0..2000)
                .map(|j| unit.evaluate(period * j as f64 / 2000.0).f[i].abs())
                .fold(0.0, f64::max)
        })
        .collect();
    unit.components()
        .iter()
        .zip(peaks)
        .map(|(c, p)| FourierComponent {
            dc: 0.0,
            cos: c.cos.iter().map(|v| v / p).collect(),
            sin: c.sin.iter().map(|v| v / p).collect(),
        })
        .collect()
}

/// A random motion of the requested class (`Strict` or `BoxOnly`) for `limits`.
pub fn random_motion(
    rng: &mut TestRng,
    limits: &OutputLimits<f64>,
    class: FeasibilityClass,
) -> PeriodicTrajectory<f64> {
    let n = limits.dim();
    loop {
        let harmonics = rng.gen_range(1..=3);
        let period = rng.gen_range(2.0..8.0);
        let shape = unit_shape(rng, n, harmonics, period);
        let comps: Vec<_> = shape
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (avg, dy) = (limits.y_avg()[i], limits.delta_y()[i]);
                let centre = avg + rng.gen_range(-0.3..0.3) * dy;
                let room = dy - (centre - avg).abs();
                let amp = match class {
                    FeasibilityClass::Strict => rng.gen_range(0.1..0.6) * room,
                    _ => rng.gen_range(0.7..0.97) * room,
                };
                FourierComponent {
                    dc: centre,
                    cos: c.cos.iter().map(|v| v * amp).collect(),
                    sin: c.sin.iter().map(|v| v * amp).collect(),
                }
            })
            .collect();
        let traj = PeriodicTrajectory::new(period, comps).unwrap();
        // Slow the motion down until it respects the rate bound with room to spare.
        let report = check_feasibility(&traj, limits, 4000).unwrap();
        let rate_ratio = report
            .max_abs_rate
            .iter()
            .zip(limits.delta_ydot())
            .map(|(r, d)| r / d)
            .fold(0.0, f64::max);
        let traj = if rate_ratio > 0.9 {
            let comps = traj.components().to_vec();
            PeriodicTrajectory::new(period * rate_ratio / rng.gen_range(0.5..0.9), comps).unwrap()
        } else {
            traj
        };
        let report = check_feasibility(&traj, limits, 10_000).unwrap();
        if report.class == class {
            return traj;
        }
    }
}

pub fn random_interior_init(rng: &mut TestRng, limits: &OutputLimits<f64>) -> OscillatorState<f64> {
    let n = limits.dim();
    let y0: Vec<f64> = (0..n)
        .map(|i| limits.y_avg()[i] + rng.gen_range(-0.8..0.8) * limits.delta_y()[i])
        .collect();
    let yd: Vec<f64> = (0..n)
        .map(|i| rng.gen_range(-0.9..0.9) * limits.delta_ydot()[i])
        .collect();
    init_from_robot(&y0, &yd, rng.gen_range(0.0..10.0), limits).unwrap()
}

/// Outputs between `1e-6` and `1e-2` of a half-width away from a limit,
/// with rates up to 0.999 of the bound in either direction.
pub fn random_near_boundary_init(
    rng: &mut TestRng,
    limits: &OutputLimits<f64>,
) -> OscillatorState<f64> {
    let n = limits.dim();
    let y0: Vec<f64> = (0..n)
        .map(|i| {
            let gap = 10f64.powf(rng.gen_range(-6.0..-2.0)) * limits.delta_y()[i];
            if rng.gen_bool(0.5) {
                limits.y_max()[i] - gap
            } else {
                limits.y_min()[i] + gap
            }
        })
        .collect();
    let yd: Vec<f64> = (0..n)
        .map(|i| {
            let mag = rng.gen_range(0.5..0.999) * limits.delta_ydot()[i];
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    init_from_robot(&y0, &yd, rng.gen_range(0.0..10.0), limits).unwrap()
}

pub fn reference_gains(n: usize, gamma: f64) -> OscillatorParams<f64> {
    OscillatorParams::uniform(n, 15.0, 10.0, 25.0, gamma).unwrap()
}

pub fn single_motion_runtime(
    limits: &OutputLimits<f64>,
    traj: PeriodicTrajectory<f64>,
    params: OscillatorParams<f64>,
    init: OscillatorState<f64>,
) -> CpgRuntime<f64> {
    let mut lib = MotionLibrary::new(limits.clone());
    lib.insert("m", traj).unwrap();
    CpgRuntime::new(lib, params, IntegratorConfig::default(), "m", None, init).unwrap()
}

pub fn scenario_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}
