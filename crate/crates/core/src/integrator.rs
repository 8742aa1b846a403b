//! Guidance-equation trajectories.
//!
//! x and z are advanced with the classical fixed-step RK4 tableau using the
//! closed-form guidance velocity; y has the closed form y₀ + α·k_y·(t − t₀).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields;
use crate::mask::NodeMask;
use crate::{Point, Scenario};

pub const DEFAULT_DT: f64 = 1e-12;
/// Recording interval giving 150 strides over the default 1.5 ns flight.
pub const DEFAULT_STRIDE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    Completed,
    /// An RK4 stage landed inside the node mask; samples stop there.
    NodeMasked,
}

impl TrajectoryStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryStatus::Completed => "completed",
            TrajectoryStatus::NodeMasked => "node_masked",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: TrajectoryState,
    pub samples: Vec<TrajectoryState>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryState {
        self.samples.last().unwrap_or(&self.initial)
    }

    pub fn is_completed(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }
}

/// One classical RK4 step for a time-dependent planar system.
pub fn rk4_step_with<F, E>(mut rhs: F, state: [f64; 2], t: f64, dt: f64) -> Result<[f64; 2], E>
where
    F: FnMut(f64, [f64; 2]) -> Result<[f64; 2], E>,
{
    let shift = |s: [f64; 2], k: [f64; 2], h: f64| [s[0] + h * k[0], s[1] + h * k[1]];
    let half = 0.5 * dt;
    let k1 = rhs(t, state)?;
    let k2 = rhs(t + half, shift(state, k1, half))?;
    let k3 = rhs(t + half, shift(state, k2, half))?;
    let k4 = rhs(t + dt, shift(state, k3, dt))?;
    Ok([
        state[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

fn planar_velocity(scenario: &Scenario, t: f64, s: [f64; 2], mask: &NodeMask) -> Result<[f64; 2]> {
    let v = fields::velocity_masked(scenario, Point::xz(s[0], s[1], t), mask)?;
    Ok([v[0], v[2]])
}

/// Advances (x, z) from t to t + dt. Fails with a degenerate-node error if
/// any stage evaluation is masked.
pub fn rk4_step(scenario: &Scenario, state: [f64; 2], t: f64, dt: f64) -> Result<[f64; 2]> {
    if !(dt > 0.0) {
        return Err(Error::InvalidStep(format!("dt must be positive, got {dt}")));
    }
    let masks = [
        NodeMask::at(scenario, t),
        NodeMask::at(scenario, t + 0.5 * dt),
        NodeMask::at(scenario, t + dt),
    ];
    let pick = |tau: f64| {
        if tau == t {
            &masks[0]
        } else if tau == t + dt {
            &masks[2]
        } else {
            &masks[1]
        }
    };
    rk4_step_with(|tau, s| planar_velocity(scenario, tau, s, pick(tau)), state, t, dt)
}

/// Validated time grid shared by every trajectory of a run.
#[derive(Debug, Clone)]
pub struct StepPlan {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
}

fn whole_multiple(span: f64, unit: f64, what: &str) -> Result<usize> {
    let n = (span / unit).round();
    if n < 1.0 || (n * unit - span).abs() > 1e-9 * span {
        return Err(Error::InvalidStep(format!(
            "{what}: {unit:e} does not divide {span:e} within 1e-9"
        )));
    }
    Ok(n as usize)
}

impl StepPlan {
    pub fn new(t0: f64, t1: f64, dt: f64, stride: f64) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::InvalidStep(format!("t1 = {t1:e} must exceed t0 = {t0:e}")));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidStep(format!("dt must be positive, got {dt}")));
        }
        if !(stride >= dt) {
            return Err(Error::InvalidStep(format!("stride {stride:e} shorter than dt {dt:e}")));
        }
        let steps = whole_multiple(t1 - t0, dt, "dt")?;
        let record_every = whole_multiple(stride, dt, "stride")?;
        Ok(Self {
            t0,
            dt,
            steps,
            record_every,
        })
    }

    /// Time of half-step index k.
    fn half_time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * (0.5 * self.dt)
    }

    pub fn time(&self, step: usize) -> f64 {
        self.half_time(2 * step)
    }

    pub fn is_recorded(&self, step: usize) -> bool {
        step.is_multiple_of(self.record_every) || step == self.steps
    }

    /// Node masks at every half step, reusable across an ensemble.
    pub fn masks(&self, scenario: &Scenario) -> Vec<NodeMask> {
        (0..=2 * self.steps)
            .map(|k| NodeMask::at(scenario, self.half_time(k)))
            .collect()
    }
}

fn run(scenario: &Scenario, init: (f64, f64), plan: &StepPlan, masks: &[NodeMask]) -> Trajectory {
    let vy = scenario.vy();
    let sample = |step: usize, s: [f64; 2]| -> Result<TrajectoryState> {
        let t = plan.time(step);
        let v = fields::velocity_masked(scenario, Point::xz(s[0], s[1], t), &masks[2 * step])?;
        Ok(TrajectoryState {
            t,
            x: s[0],
            y: vy * (t - plan.t0),
            z: s[1],
            vx: v[0],
            vy: v[1],
            vz: v[2],
        })
    };

    let mut state = [init.0, init.1];
    let initial = match sample(0, state) {
        Ok(s) => s,
        Err(_) => {
            let t = plan.t0;
            let initial = TrajectoryState {
                t,
                x: init.0,
                y: 0.0,
                z: init.1,
                vx: f64::NAN,
                vy,
                vz: f64::NAN,
            };
            return Trajectory {
                initial,
                samples: Vec::new(),
                status: TrajectoryStatus::NodeMasked,
            };
        }
    };

    let mut samples = Vec::with_capacity(plan.steps / plan.record_every + 2);
    samples.push(initial);
    for step in 0..plan.steps {
        let t = plan.time(step);
        let rhs = |tau: f64, s: [f64; 2]| {
            // stage times are t, t + dt/2, t + dt on the half-step grid
            let k = 2 * step + usize::from(tau > t) + usize::from(tau > t + 0.5 * plan.dt);
            planar_velocity(scenario, tau, s, &masks[k])
        };
        match rk4_step_with(rhs, state, t, plan.dt) {
            Ok(next) => state = next,
            Err(_) => {
                return Trajectory {
                    initial,
                    samples,
                    status: TrajectoryStatus::NodeMasked,
                }
            }
        }
        if plan.is_recorded(step + 1) {
            match sample(step + 1, state) {
                Ok(s) => samples.push(s),
                Err(_) => {
                    return Trajectory {
                        initial,
                        samples,
                        status: TrajectoryStatus::NodeMasked,
                    }
                }
            }
        }
    }
    Trajectory {
        initial,
        samples,
        status: TrajectoryStatus::Completed,
    }
}

/// Integrates one trajectory from (x, z) at t0 in the y = 0 plane.
pub fn integrate_trajectory(
    scenario: &Scenario,
    init: (f64, f64),
    t0: f64,
    t1: f64,
    dt: f64,
    stride: f64,
) -> Result<Trajectory> {
    let plan = StepPlan::new(t0, t1, dt, stride)?;
    let masks = plan.masks(scenario);
    Ok(run(scenario, init, &plan, &masks))
}

/// Order-preserving parallel map of [`integrate_trajectory`].
pub fn integrate_ensemble(
    scenario: &Scenario,
    inits: &[(f64, f64)],
    t0: f64,
    t1: f64,
    dt: f64,
    stride: f64,
) -> Result<Vec<Trajectory>> {
    let plan = StepPlan::new(t0, t1, dt, stride)?;
    let masks = plan.masks(scenario);
    Ok(inits
        .par_iter()
        .map(|&init| run(scenario, init, &plan, &masks))
        .collect())
}
