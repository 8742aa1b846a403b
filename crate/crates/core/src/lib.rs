//! Two-pinhole electron interference in the de Broglie–Bohm causal picture.
//!
//! Each pinhole is a two-dimensional spreading Gaussian packet in (x, z)
//! times a common plane wave along y. The crate evaluates the wavefunction
//! and its derivatives, the closed-form intensity / quantum potential /
//! phase-gradient fields, integrates guidance-equation trajectories with
//! fixed-step RK4, and computes the observables used to check the model
//! (fringe visibility, Born-rule equivariance, continuity).
//!
//! Module map:
//!
//! * [`scenario`]: constants, presets, per-packet time-dependent state
//! * [`oracle`]: complex wavefunction jets, the independent reference path
//! * [`fields`]: closed-form R₁, R₂, S₁, S₂, R², Q and ∇S
//! * [`integrator`]: RK4 trajectories and ensembles
//! * [`sampling`], [`observables`]: initial conditions and scalar measures
//! * [`config`], [`export`], [`verify`]: text config, CSV output, check runner

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod export;
pub mod fields;
pub mod integrator;
pub mod mask;
pub mod observables;
pub mod oracle;
pub mod sampling;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
pub use fields::FieldSample;
pub use integrator::{Trajectory, TrajectoryState, TrajectoryStatus};
pub use mask::NodeMask;
pub use oracle::PsiJet;
pub use sampling::InitialSet;
pub use scenario::{
    make_scenario, packet_state_at, PacketParams, PacketState, PhysicalConstants, Scenario, ScenarioKind,
    ScenarioOverrides, Side,
};

/// A spacetime point (m, m, m, s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64, z: f64, t: f64) -> Self {
        Self { x, y, z, t }
    }

    /// Point in the y = 0 plane.
    pub const fn xz(x: f64, z: f64, t: f64) -> Self {
        Self { x, y: 0.0, z, t }
    }

    pub fn mirror_x(self) -> Self {
        Self { x: -self.x, ..self }
    }

    pub fn mirror_z(self) -> Self {
        Self { z: -self.z, ..self }
    }
}

/// `n` evenly spaced values over `[lo, hi]` with both endpoints exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}
