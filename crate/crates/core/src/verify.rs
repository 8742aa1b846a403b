//! Model checks: each measurement is a standalone function, and
//! [`run_verify`] collects them into a [`RunReport`].

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::fields;
use crate::integrator::{integrate_ensemble, DEFAULT_DT, DEFAULT_STRIDE};
use crate::mask::{NodeMask, NODE_MASK_RATIO};
use crate::observables::{
    central_fringe_visibility, continuity_residual, density_distance, endpoint_density_distance, first_q_valleys,
    overlap_peak_x, FringeProfile, HistogramSpec,
};
use crate::oracle::{eval_superposition, oracle_phase_gradient, oracle_quantum_potential};
use crate::sampling::{born_sample_initials, rejection_sample, square_grid_initials, Rect};
use crate::scenario::{packet_state_at, Scenario, ScenarioKind, Side, SCREEN_TIME};
use crate::{linspace, Point};

pub const ORACLE_GRID_N: usize = 101;
pub const ORACLE_FRAMES: usize = 6;
pub const ORACLE_HALF_WIDTH: f64 = 3.5e-6;
pub const ORACLE_TOL: f64 = 1e-9;
pub const FD_STEP: f64 = 1e-10;
pub const FD_TOL: f64 = 1e-4;

pub const EWEA_MIN_VISIBILITY: f64 = 0.99;
pub const EWUA_VISIBILITY: (f64, f64) = (0.6, 0.05);
pub const UWEA_VISIBILITY: (f64, f64) = (0.88, 0.08);

pub const SCREEN_DISTANCE: f64 = 0.195;
pub const SCREEN_DISTANCE_TOL: f64 = 1e-6;
pub const VX_TARGET: (f64, f64) = (150.0, 0.01);
pub const VY_TARGET: (f64, f64) = (1.3e8, 1e4);

pub const CONTINUITY_TIMES: [f64; 3] = [3e-10, 7.5e-10, 1.5e-9];
pub const CONTINUITY_POINTS: usize = 1000;
pub const CONTINUITY_PROBE: f64 = 1e-13;
pub const CONTINUITY_TOL: f64 = 1e-3;

pub const CONVERGENCE_DTS: [f64; 3] = [4e-12, 2e-12, 1e-12];
pub const CONVERGENCE_REFERENCE_DT: f64 = 2.5e-13;
pub const CONVERGENCE_TRAJECTORIES: usize = 10;
pub const CONVERGENCE_MIN_FACTOR: f64 = 12.0;

pub const EQUIVARIANCE_TOL: f64 = 0.08;

pub const EVEN_TOL: f64 = 1e-10;
pub const MIDPLANE_VX_TOL: f64 = 1e-20;

/// |a − b| / max(|a|, |b|, floor); 0 when all three vanish.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    let d = a.abs().max(b.abs()).max(floor);
    if d == 0.0 {
        0.0
    } else {
        (a - b).abs() / d
    }
}

/// Regular (x, z) grid at `frames` times over ±`half_width`.
pub fn check_grid(n: usize, frames: usize, half_width: f64, t_final: f64) -> Vec<Point> {
    let xs = linspace(-half_width, half_width, n);
    let mut out = Vec::with_capacity(n * n * frames);
    for t in linspace(0.0, t_final, frames) {
        for &z in &xs {
            for &x in &xs {
                out.push(Point::xz(x, z, t));
            }
        }
    }
    out
}

/// Mask at 1e-12 of the per-frame grid maximum.
fn frame_masks(scenario: &Scenario, points: &[Point]) -> Vec<bool> {
    let intensity: Vec<f64> = points.par_iter().map(|&p| fields::intensity(scenario, p)).collect();
    let mut peak = std::collections::HashMap::<u64, f64>::new();
    for (p, i) in points.iter().zip(&intensity) {
        let e = peak.entry(p.t.to_bits()).or_insert(0.0);
        *e = e.max(*i);
    }
    points
        .iter()
        .zip(&intensity)
        .map(|(p, &i)| !(i >= NODE_MASK_RATIO * peak[&p.t.to_bits()]) || i <= 0.0)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStats {
    pub max_rel: f64,
    pub compared: usize,
    pub masked: usize,
}

/// Closed-form R² against |ψ₁ + ψ₂|² on the check grid.
pub fn oracle_intensity_error(scenario: &Scenario, points: &[Point]) -> OracleStats {
    let masked = frame_masks(scenario, points);
    let max_rel = points
        .par_iter()
        .zip(&masked)
        .filter(|(_, &m)| !m)
        .map(|(&p, _)| {
            rel_diff(
                fields::intensity(scenario, p),
                eval_superposition(scenario, p).norm_sqr(),
                0.0,
            )
        })
        .reduce(|| 0.0, f64::max);
    let n_masked = masked.iter().filter(|&&m| m).count();
    OracleStats {
        max_rel,
        compared: points.len() - n_masked,
        masked: n_masked,
    }
}

/// Natural magnitudes of Q and ∇S at time t, used as relative-error floors
/// where these fields cross zero.
pub fn field_scales(scenario: &Scenario, t: f64) -> (f64, f64) {
    let c = &scenario.constants;
    let d2 = Side::BOTH
        .iter()
        .map(|&s| packet_state_at(scenario, s, t).dx_t_sq)
        .fold(f64::INFINITY, f64::min);
    let kx = scenario.packet_neg.kx.abs().max(scenario.packet_pos.kx.abs());
    let q_floor = c.hbar * c.hbar / (2.0 * c.m * d2);
    let grad_floor = c.hbar * (kx + 1.0 / d2.sqrt());
    (q_floor, grad_floor)
}

fn closed_form_psi(scenario: &Scenario, p: Point) -> Complex64 {
    let e = fields::envelope_and_phase(scenario, p);
    let hbar = scenario.constants.hbar;
    Complex64::from_polar(e.r1, e.s1 / hbar) + Complex64::from_polar(e.r2, e.s2 / hbar)
}

/// Q and ∇S by fourth-order centred differences (step h) of the
/// closed-form R and ψ.
///
/// The five-point stencil keeps the reference accurate close to near-nodes,
/// where R varies on scales only a few tens of h wide.
pub fn finite_difference_fields(scenario: &Scenario, p: Point, h: f64) -> (f64, [f64; 2]) {
    let c = &scenario.constants;
    let r = |dx: f64, dz: f64| {
        fields::intensity(
            scenario,
            Point {
                x: p.x + dx,
                z: p.z + dz,
                ..p
            },
        )
        .sqrt()
    };
    let r0 = r(0.0, 0.0);
    let second =
        |f: &dyn Fn(f64) -> f64| (-f(2.0 * h) + 16.0 * f(h) - 30.0 * r0 + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h);
    let lap = second(&|d| r(d, 0.0)) + second(&|d| r(0.0, d));
    let q = -c.hbar * c.hbar / (2.0 * c.m) * lap / r0;

    let psi = |dx: f64, dz: f64| {
        closed_form_psi(
            scenario,
            Point {
                x: p.x + dx,
                z: p.z + dz,
                ..p
            },
        )
    };
    // phase differences as arguments of ratios, so no unwrapping is needed
    let first = |f: &dyn Fn(f64) -> Complex64| {
        let span = |d: f64| (f(d) * f(-d).conj()).arg();
        (8.0 * span(h) - span(2.0 * h)) / (12.0 * h) * c.hbar
    };
    let gx = first(&|d| psi(d, 0.0));
    let gz = first(&|d| psi(0.0, d));
    (q, [gx, gz])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeStats {
    /// Closed form against the complex-jet identities.
    pub jet_max_rel: f64,
    /// Closed form against finite differences.
    pub fd_max_rel: f64,
    pub compared: usize,
}

pub fn oracle_derivative_error(scenario: &Scenario, points: &[Point]) -> DerivativeStats {
    let masked = frame_masks(scenario, points);
    let (jet, fd, compared) = points
        .par_iter()
        .zip(&masked)
        .filter(|(_, &m)| !m)
        .map(|(&p, _)| {
            let (q_floor, g_floor) = field_scales(scenario, p.t);
            let open = NodeMask::zeros_only(p.t);
            let (Ok(cf), Ok(grad)) = (
                fields::quantum_potential_masked(scenario, p, &open),
                fields::phase_gradient_masked(scenario, p, &open),
            ) else {
                return (f64::INFINITY, f64::INFINITY, 1);
            };
            let jetv = eval_superposition(scenario, p);
            let (Ok(oq), Ok(og)) = (
                oracle_quantum_potential(&jetv, &scenario.constants, &open),
                oracle_phase_gradient(&jetv, scenario.constants.hbar, &open),
            ) else {
                return (f64::INFINITY, f64::INFINITY, 1);
            };
            let jet_err = [
                rel_diff(cf.qx, oq.qx, q_floor),
                rel_diff(cf.qz, oq.qz, q_floor),
                rel_diff(cf.q, oq.q, q_floor),
                rel_diff(grad[0], og[0], g_floor),
                rel_diff(grad[1], og[1], g_floor),
                rel_diff(grad[2], og[2], g_floor),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            let (fq, fg) = finite_difference_fields(scenario, p, FD_STEP);
            let fd_err = rel_diff(cf.q, fq, q_floor)
                .max(rel_diff(grad[0], fg[0], g_floor))
                .max(rel_diff(grad[2], fg[1], g_floor));
            (jet_err, fd_err, 1)
        })
        .reduce(|| (0.0, 0.0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2 + b.2));
    DerivativeStats {
        jet_max_rel: jet,
        fd_max_rel: fd,
        compared,
    }
}

/// Visibility of the central fringe at the screen time.
pub fn screen_visibility(scenario: &Scenario) -> Result<f64> {
    central_fringe_visibility(&FringeProfile::central_scan(scenario, SCREEN_TIME))
}

/// Accepted visibility band of a preset, as (lower, upper).
pub fn visibility_band(kind: ScenarioKind) -> Option<(f64, f64)> {
    match kind {
        ScenarioKind::Ewea => Some((EWEA_MIN_VISIBILITY, 1.0)),
        ScenarioKind::Ewua => Some((
            EWUA_VISIBILITY.0 - EWUA_VISIBILITY.1,
            EWUA_VISIBILITY.0 + EWUA_VISIBILITY.1,
        )),
        ScenarioKind::Uwea => Some((
            UWEA_VISIBILITY.0 - UWEA_VISIBILITY.1,
            UWEA_VISIBILITY.0 + UWEA_VISIBILITY.1,
        )),
        ScenarioKind::Custom => None,
    }
}

/// V_EWEA > V_UWEA > V_EWUA for the presets.
pub fn preset_visibility_ordering() -> Result<(bool, [f64; 3])> {
    let v = [
        screen_visibility(&Scenario::preset(ScenarioKind::Ewea))?,
        screen_visibility(&Scenario::preset(ScenarioKind::Uwea))?,
        screen_visibility(&Scenario::preset(ScenarioKind::Ewua))?,
    ];
    Ok((v[0] > v[1] && v[1] > v[2], v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub y_screen: f64,
    pub vx: f64,
    pub vy: f64,
}

pub fn kinematics(scenario: &Scenario) -> Kinematics {
    let a = scenario.constants.alpha;
    Kinematics {
        y_screen: scenario.vy() * SCREEN_TIME,
        vx: a * scenario.packet_pos.kx,
        vy: a * scenario.packet_pos.ky,
    }
}

/// Largest continuity residual over `count` random unmasked points drawn
/// uniformly from ±`half_width`, cycling through scenarios and times.
pub fn continuity_max_residual(
    scenarios: &[Scenario],
    times: &[f64],
    count: usize,
    half_width: f64,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::with_capacity(count);
    while jobs.len() < count {
        let k = jobs.len();
        let s = &scenarios[k % scenarios.len()];
        let t = times[(k / scenarios.len()) % times.len()];
        let p = Point::xz(
            rng.random_range(-half_width..half_width),
            rng.random_range(-half_width..half_width),
            t,
        );
        if !NodeMask::at(s, t).is_masked(fields::intensity(s, p)) {
            jobs.push((s, p));
        }
    }
    let residuals: Vec<f64> = jobs
        .par_iter()
        .map(|&(s, p)| continuity_residual(s, p, CONTINUITY_PROBE))
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    /// Max endpoint distance to the reference for each dt in
    /// [`CONVERGENCE_DTS`].
    pub errors: [f64; 3],
    /// Successive error ratios.
    pub factors: [f64; 2],
    /// Endpoint errors of each trajectory separately.
    pub per_trajectory: Vec<[f64; 3]>,
}

impl Convergence {
    pub fn min_factor(&self) -> f64 {
        self.factors[0].min(self.factors[1])
    }

    /// Smaller of the two halving ratios, per trajectory.
    pub fn trajectory_factors(&self) -> Vec<f64> {
        self.per_trajectory
            .iter()
            .map(|e| (e[0] / e[1]).min(e[1] / e[2]))
            .collect()
    }
}

/// Endpoint self-convergence of RK4 for Born-sampled starting points.
pub fn rk4_convergence(scenario: &Scenario, n: usize, seed: u64, t_final: f64) -> Result<Convergence> {
    let inits = born_sample_initials(scenario, n, seed)?.points;
    let ends = |dt: f64| -> Result<Vec<Option<(f64, f64)>>> {
        Ok(integrate_ensemble(scenario, &inits, 0.0, t_final, dt, t_final)?
            .iter()
            .map(|tr| tr.is_completed().then(|| (tr.last().x, tr.last().z)))
            .collect())
    };
    let reference = ends(CONVERGENCE_REFERENCE_DT)?;
    let mut per_trajectory = vec![[0.0; 3]; inits.len()];
    for (k, &dt) in CONVERGENCE_DTS.iter().enumerate() {
        for (row, (a, b)) in per_trajectory.iter_mut().zip(ends(dt)?.iter().zip(&reference)) {
            row[k] = match (a, b) {
                (Some(a), Some(b)) => (a.0 - b.0).hypot(a.1 - b.1),
                _ => f64::INFINITY,
            };
        }
    }
    let mut errors = [0.0f64; 3];
    for row in &per_trajectory {
        for k in 0..3 {
            errors[k] = errors[k].max(row[k]);
        }
    }
    Ok(Convergence {
        errors,
        factors: [errors[0] / errors[1], errors[1] / errors[2]],
        per_trajectory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivariance {
    /// Endpoint histogram against R²(t).
    pub l1: f64,
    /// Exact draws from R²(t) at the same sample size, for scale.
    pub null_l1: f64,
    pub completed: usize,
    pub total: usize,
}

pub fn equivariance(scenario: &Scenario, n: usize, seed: u64, dt: f64, t_final: f64) -> Result<Equivariance> {
    let bins = HistogramSpec::plot_range();
    let inits = born_sample_initials(scenario, n, seed)?.points;
    let trs = integrate_ensemble(scenario, &inits, 0.0, t_final, dt, t_final)?;
    let l1 = endpoint_density_distance(&trs, scenario, t_final, &bins);
    let domain = Rect {
        x_min: bins.x_min,
        x_max: bins.x_max,
        z_min: bins.z_min,
        z_max: bins.z_max,
    };
    let exact = rejection_sample(scenario, t_final, domain, n, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    Ok(Equivariance {
        l1,
        null_l1: density_distance(&exact, scenario, t_final, &bins),
        completed: trs.iter().filter(|t| t.is_completed()).count(),
        total: trs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Symmetry {
    pub trajectories: usize,
    pub sign_changes: usize,
    pub max_midplane_vx: f64,
    pub max_even_rel: f64,
    pub max_abs_qy: f64,
}

impl Symmetry {
    pub fn passes(&self) -> bool {
        self.sign_changes == 0
            && self.max_midplane_vx <= MIDPLANE_VX_TOL
            && self.max_even_rel <= EVEN_TOL
            && self.max_abs_qy == 0.0
    }
}

/// No-crossing, midplane velocity, parity of R² and Q, and Q_y.
pub fn symmetry(scenario: &Scenario, n_born: usize, seed: u64) -> Result<Symmetry> {
    let mut inits = square_grid_initials(scenario, 3)?.points;
    inits.extend(born_sample_initials(scenario, n_born, seed)?.points);
    let trs = integrate_ensemble(scenario, &inits, 0.0, SCREEN_TIME, DEFAULT_DT, DEFAULT_STRIDE)?;
    let sign_changes = trs
        .iter()
        .filter(|tr| {
            let s0 = tr.initial.x.signum();
            tr.samples.iter().any(|s| s.x.signum() != s0 && s.x != 0.0)
        })
        .count();

    let points = check_grid(41, ORACLE_FRAMES, ORACLE_HALF_WIDTH, SCREEN_TIME);
    let mut max_midplane_vx = 0.0f64;
    let mut max_even_rel = 0.0f64;
    let mut max_abs_qy = 0.0f64;
    for p in &points {
        let mask = NodeMask::at(scenario, p.t);
        let (q_floor, _) = field_scales(scenario, p.t);
        if let Ok(v) = fields::velocity_masked(scenario, Point { x: 0.0, ..*p }, &mask) {
            max_midplane_vx = max_midplane_vx.max(v[0].abs());
        }
        let i = fields::intensity(scenario, *p);
        for m in [p.mirror_x(), p.mirror_z()] {
            max_even_rel = max_even_rel.max(rel_diff(i, fields::intensity(scenario, m), 0.0));
            if let (Ok(a), Ok(b)) = (
                fields::quantum_potential_masked(scenario, *p, &mask),
                fields::quantum_potential_masked(scenario, m, &mask),
            ) {
                max_even_rel = max_even_rel.max(rel_diff(a.q, b.q, q_floor));
            }
        }
        let jet = eval_superposition(scenario, *p);
        if let Ok(q) = oracle_quantum_potential(&jet, &scenario.constants, &mask) {
            max_abs_qy = max_abs_qy.max(q.qy.abs());
        }
    }
    Ok(Symmetry {
        trajectories: trs.len(),
        sign_changes,
        max_midplane_vx,
        max_even_rel,
        max_abs_qy,
    })
}

pub const VALLEY_TIME: f64 = 7.5e-10;
pub const OVERLAP_TIME: f64 = 3e-10;
pub const FEATURE_SCAN_HALF_WIDTH: f64 = 3e-6;
pub const FEATURE_SCAN_POINTS: usize = 6001;

/// Born-sample fraction attributed to the +x₀ pinhole (x > 0).
pub fn positive_pinhole_fraction(scenario: &Scenario, n: usize, seed: u64) -> Result<f64> {
    Ok(born_sample_initials(scenario, n, seed)?.fraction_positive_x())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub measured: f64,
    pub threshold: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: Scenario,
    pub checks: Vec<CheckResult>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// Machine-readable `key=value` lines.
    pub fn key_values(&self) -> String {
        let s = &self.scenario;
        let mut out = format!(
            "scenario={}\nhbar={:e}\nm={:e}\ndx0_neg={:e}\ndx0_pos={:e}\namp_neg={:e}\namp_pos={:e}\nx0={:e}\n",
            s.kind,
            s.constants.hbar,
            s.constants.m,
            s.packet_neg.dx0,
            s.packet_pos.dx0,
            s.packet_neg.amp,
            s.packet_pos.amp,
            s.packet_pos.x0
        );
        for c in &self.checks {
            out += &format!(
                "check.{id}.name={}\ncheck.{id}.measured={:e}\ncheck.{id}.threshold={}\ncheck.{id}.status={}\ncheck.{id}.detail={}\n",
                c.name,
                c.measured,
                c.threshold,
                c.status.as_str(),
                c.detail,
                id = c.id
            );
        }
        out += &format!("all_passed={}\n", self.all_passed());
        out
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.scenario;
        writeln!(
            f,
            "scenario {}: dx0 = {:e} / {:e} m, amp = {} / {}, x0 = ±{:e} m",
            s.kind, s.packet_neg.dx0, s.packet_pos.dx0, s.packet_neg.amp, s.packet_pos.amp, s.packet_pos.x0
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "[{:>7}] {}. {:<22} measured {:<12.6e} need {}  ({})",
                c.status.as_str().to_uppercase(),
                c.id,
                c.name,
                c.measured,
                c.threshold,
                c.detail
            )?;
        }
        write!(
            f,
            "{}",
            if self.all_passed() {
                "all checks passed"
            } else {
                "some checks failed"
            }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Ensemble size of the equivariance check.
    pub n_traj: usize,
    pub seed: u64,
    pub dt: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n_traj: 20_000,
            seed: 1,
            dt: DEFAULT_DT,
        }
    }
}

fn errored(id: u8, name: &'static str, threshold: String, e: impl fmt::Display) -> CheckResult {
    CheckResult {
        id,
        name,
        measured: f64::NAN,
        threshold,
        status: CheckStatus::Fail,
        detail: format!("error: {e}"),
    }
}

fn skipped(id: u8, name: &'static str, why: &str) -> CheckResult {
    CheckResult {
        id,
        name,
        measured: f64::NAN,
        threshold: "-".into(),
        status: CheckStatus::Skipped,
        detail: why.into(),
    }
}

/// Runs every check for one scenario. Failures are recorded, not returned.
pub fn run_verify(scenario: &Scenario, options: &VerifyOptions) -> RunReport {
    let mut checks = Vec::with_capacity(9);
    let grid = check_grid(ORACLE_GRID_N, ORACLE_FRAMES, ORACLE_HALF_WIDTH, SCREEN_TIME);

    let o = oracle_intensity_error(scenario, &grid);
    checks.push(CheckResult {
        id: 1,
        name: "oracle_intensity",
        measured: o.max_rel,
        threshold: format!("< {ORACLE_TOL:e}"),
        status: CheckStatus::from_bool(o.max_rel < ORACLE_TOL),
        detail: format!("{} points compared, {} masked", o.compared, o.masked),
    });

    let d = oracle_derivative_error(scenario, &grid);
    checks.push(CheckResult {
        id: 2,
        name: "oracle_q_grad",
        measured: d.jet_max_rel,
        threshold: format!("jet < {ORACLE_TOL:e}, fd < {FD_TOL:e}"),
        status: CheckStatus::from_bool(d.jet_max_rel < ORACLE_TOL && d.fd_max_rel < FD_TOL),
        detail: format!("jet max rel {:e}, fd max rel {:e}", d.jet_max_rel, d.fd_max_rel),
    });

    let name = "visibility";
    checks.push(match (screen_visibility(scenario), visibility_band(scenario.kind)) {
        (Err(e), _) => errored(3, name, "-".into(), e),
        (Ok(v), None) => CheckResult {
            id: 3,
            name,
            measured: v,
            threshold: "-".into(),
            status: CheckStatus::Skipped,
            detail: "no reference value for custom scenarios".into(),
        },
        (Ok(v), Some((lo, hi))) => match preset_visibility_ordering() {
            Err(e) => errored(3, name, format!("[{lo}, {hi}]"), e),
            Ok((ordered, all)) => CheckResult {
                id: 3,
                name,
                measured: v,
                threshold: format!("[{lo}, {hi}] and ewea > uwea > ewua"),
                status: CheckStatus::from_bool(v >= lo && v <= hi && ordered),
                detail: format!("ewea {:.5}, uwea {:.5}, ewua {:.5}", all[0], all[1], all[2]),
            },
        },
    });

    let k = kinematics(scenario);
    checks.push(CheckResult {
        id: 4,
        name: "screen_distance",
        measured: k.y_screen,
        threshold: format!("{SCREEN_DISTANCE} ± {SCREEN_DISTANCE_TOL:e} m"),
        status: CheckStatus::from_bool(
            (k.y_screen - SCREEN_DISTANCE).abs() < SCREEN_DISTANCE_TOL
                && (k.vx - VX_TARGET.0).abs() <= VX_TARGET.1
                && (k.vy - VY_TARGET.0).abs() <= VY_TARGET.1,
        ),
        detail: format!("alpha*kx = {:.6} m/s, alpha*ky = {:.6e} m/s", k.vx, k.vy),
    });

    let name = "continuity";
    let threshold = format!("< {CONTINUITY_TOL:e}");
    checks.push(
        match continuity_max_residual(
            &[*scenario],
            &CONTINUITY_TIMES,
            CONTINUITY_POINTS,
            ORACLE_HALF_WIDTH,
            options.seed,
        ) {
            Ok(r) => CheckResult {
                id: 5,
                name,
                measured: r,
                threshold,
                status: CheckStatus::from_bool(r < CONTINUITY_TOL),
                detail: format!("{CONTINUITY_POINTS} random unmasked points"),
            },
            Err(e) => errored(5, name, threshold, e),
        },
    );

    let name = "rk4_order";
    let threshold = format!(">= {CONVERGENCE_MIN_FACTOR}");
    checks.push(
        match rk4_convergence(scenario, CONVERGENCE_TRAJECTORIES, options.seed, SCREEN_TIME) {
            Ok(c) => CheckResult {
                id: 6,
                name,
                measured: c.min_factor(),
                threshold,
                status: CheckStatus::from_bool(c.min_factor() >= CONVERGENCE_MIN_FACTOR),
                detail: format!(
                    "errors {:.3e} / {:.3e} / {:.3e} m, factors {:.2} / {:.2}",
                    c.errors[0], c.errors[1], c.errors[2], c.factors[0], c.factors[1]
                ),
            },
            Err(e) => errored(6, name, threshold, e),
        },
    );

    let name = "equivariance";
    let threshold = format!("< {EQUIVARIANCE_TOL}");
    checks.push(
        match equivariance(scenario, options.n_traj, options.seed, options.dt, SCREEN_TIME) {
            Ok(e) => CheckResult {
                id: 7,
                name,
                measured: e.l1,
                threshold,
                status: CheckStatus::from_bool(e.l1 < EQUIVARIANCE_TOL),
                detail: format!(
                    "{} of {} trajectories completed; exact draws at the same size give {:.4}",
                    e.completed, e.total, e.null_l1
                ),
            },
            Err(e) => errored(7, name, threshold, e),
        },
    );

    let name = "symmetry";
    checks.push(if scenario.kind != ScenarioKind::Ewea {
        skipped(8, name, "only defined for the ewea preset")
    } else {
        match symmetry(scenario, 1000, options.seed) {
            Ok(s) => CheckResult {
                id: 8,
                name,
                measured: s.sign_changes as f64,
                threshold: "0 crossings".into(),
                status: CheckStatus::from_bool(s.passes()),
                detail: format!(
                    "{} trajectories, midplane |vx| <= {:e}, parity rel <= {:e}, |Qy| <= {:e}",
                    s.trajectories, s.max_midplane_vx, s.max_even_rel, s.max_abs_qy
                ),
            },
            Err(e) => errored(8, name, "0 crossings".into(), e),
        }
    });

    let name = "qualitative";
    checks.push(match scenario.kind {
        ScenarioKind::Ewua => {
            match first_q_valleys(scenario, VALLEY_TIME, FEATURE_SCAN_HALF_WIDTH, FEATURE_SCAN_POINTS) {
                Ok((neg, pos)) => CheckResult {
                    id: 9,
                    name,
                    measured: neg.q - pos.q,
                    threshold: "< 0 (-x valley deeper)".into(),
                    status: CheckStatus::from_bool(neg.q < pos.q),
                    detail: format!("Q(-x) = {:e} at {:e}, Q(+x) = {:e} at {:e}", neg.q, neg.x, pos.q, pos.x),
                },
                Err(e) => errored(9, name, "< 0".into(), e),
            }
        }
        ScenarioKind::Uwea => match positive_pinhole_fraction(scenario, 20_000, options.seed) {
            Ok(frac) => {
                let peak = overlap_peak_x(scenario, OVERLAP_TIME, FEATURE_SCAN_HALF_WIDTH, FEATURE_SCAN_POINTS);
                CheckResult {
                    id: 9,
                    name,
                    measured: frac,
                    threshold: "> 0.5 and overlap peak x > 0".into(),
                    status: CheckStatus::from_bool(frac > 0.5 && peak > 0.0),
                    detail: format!("wide-pinhole fraction {frac:.4}, overlap peak at x = {peak:e}"),
                }
            }
            Err(e) => errored(9, name, "> 0.5".into(), e),
        },
        _ => skipped(9, name, "only defined for the ewua and uwea presets"),
    });

    RunReport {
        scenario: *scenario,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rel_diff_floor() {
        assert_eq!(rel_diff(0.0, 0.0, 0.0), 0.0);
        assert_eq!(rel_diff(1.0, 2.0, 0.0), 0.5);
        assert_eq!(rel_diff(1e-20, -1e-20, 1.0), 2e-20);
    }

    #[test]
    fn grid_layout() {
        let g = check_grid(3, 2, 1.0, 5.0);
        assert_eq!(g.len(), 18);
        assert_eq!(g[0], Point::xz(-1.0, -1.0, 0.0));
        assert_eq!(g[1], Point::xz(0.0, -1.0, 0.0));
        assert_eq!(g[17], Point::xz(1.0, 1.0, 5.0));
    }

    #[test]
    fn kinematics_of_presets() {
        let k = kinematics(&Scenario::preset(ScenarioKind::Ewea));
        assert!((k.vx - 150.0).abs() < 0.01);
        assert!((k.y_screen - SCREEN_DISTANCE).abs() < SCREEN_DISTANCE_TOL);
    }

    #[test]
    fn coarse_oracle_grid_agrees() {
        let s = Scenario::preset(ScenarioKind::Ewua);
        let g = check_grid(21, 3, ORACLE_HALF_WIDTH, SCREEN_TIME);
        assert!(oracle_intensity_error(&s, &g).max_rel < ORACLE_TOL);
        let d = oracle_derivative_error(&s, &g);
        assert!(d.jet_max_rel < ORACLE_TOL, "{d:?}");
        assert!(d.fd_max_rel < FD_TOL, "{d:?}");
    }

    #[test]
    fn report_lists_each_check_once() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let r = run_verify(
            &s,
            &VerifyOptions {
                n_traj: 500,
                ..VerifyOptions::default()
            },
        );
        let ids: Vec<u8> = r.checks.iter().map(|c| c.id).collect();
        assert_eq!(ids, (1..=9).collect::<Vec<_>>());
        let kv = r.key_values();
        assert!(kv.contains("scenario=ewea\n"));
        assert_eq!(kv.matches(".status=").count(), 9);
        assert!(r.to_string().contains("visibility"));
    }
}
