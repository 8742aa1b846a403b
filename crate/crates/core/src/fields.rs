//! Closed-form field quantities built from the modulus/phase split
//! ψᵢ = Rᵢ·exp(iSᵢ/ħ).
//!
//! All phases are handled as dimensionless angles S/ħ. The y plane wave
//! `k_y·y` is common to both packets, so it never enters the phase
//! difference S₁₂ and is only added when absolute phases are reported.
//!
//! The quantum potential is assembled from analytic x/z derivatives of
//!
//! ```text
//! R² = R₁² + R₂² + 2 R₁ R₂ cos(S₁₂/ħ)
//! ```
//!
//! through `Q_x = ħ²/(8mR⁴)·(∂ₓR²)² − ħ²/(4mR²)·∂ₓ²R²` (and the same for z).
//! `Q_y` vanishes identically.

use std::f64::consts::TAU;

use crate::error::Result;
use crate::mask::NodeMask;
use crate::oracle::QuantumPotential;
use crate::scenario::{packet_state_at, Scenario, Side};
use crate::Point;

/// All closed-form field values at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub r1: f64,
    pub r2: f64,
    /// S₁ in J·s, reduced to ħ·[0, 2π).
    pub s1: f64,
    pub s2: f64,
    /// (S₁ − S₂)/ħ, unreduced.
    pub s12: f64,
    pub intensity: f64,
    pub qx: f64,
    pub qz: f64,
    pub q: f64,
    pub grad_s: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePhase {
    pub r1: f64,
    pub r2: f64,
    /// J·s, reduced to ħ·[0, 2π).
    pub s1: f64,
    pub s2: f64,
}

/// Derivative data along one transverse axis.
#[derive(Debug, Clone, Copy)]
struct Axis {
    /// ∂ ln Rᵢ
    a1: f64,
    a2: f64,
    /// ∂² ln Rᵢ = −1/Δᵢ²
    b1: f64,
    b2: f64,
    /// ∂(Sᵢ/ħ)
    p1: f64,
    p2: f64,
    /// ∂²(S₁₂/ħ)
    p12_2: f64,
}

#[derive(Debug, Clone, Copy)]
struct Local {
    r1: f64,
    r2: f64,
    /// Sᵢ/ħ without the common k_y·y term.
    phase1: f64,
    phase2: f64,
    /// (S₁ − S₂)/ħ
    phase12: f64,
    axes: [Axis; 2],
}

impl Local {
    fn new(scenario: &Scenario, point: Point) -> Self {
        let Point { x, z, t, .. } = point;
        let (n, p) = (&scenario.packet_neg, &scenario.packet_pos);
        let sn = packet_state_at(scenario, Side::Negative, t);
        let sp = packet_state_at(scenario, Side::Positive, t);
        let at = scenario.constants.alpha * t;

        let (ux1, uz1) = (x + n.x0 - sn.vx * t, z + n.z0 - sn.vz * t);
        let (ux2, uz2) = (x - p.x0 + sp.vx * t, z - p.z0 + sp.vz * t);

        let r1 = sn.beta * n.amp * (-(ux1 * ux1 + uz1 * uz1) / (2.0 * sn.dx_t_sq)).exp();
        let r2 = sp.beta * p.amp * (-(ux2 * ux2 + uz2 * uz2) / (2.0 * sp.dx_t_sq)).exp();

        let chirp1 = at * (ux1 * ux1 + uz1 * uz1) / (2.0 * sn.dx1_t_sq);
        let chirp2 = at * (ux2 * ux2 + uz2 * uz2) / (2.0 * sp.dx1_t_sq);
        let plane1 = n.kx * (x + n.x0) + n.kz * (z + n.z0);
        let plane2 = -p.kx * (x - p.x0) - p.kz * (z - p.z0) + p.chi;
        let clock1 = (sn.omega_x + sn.omega_z) * t - 2.0 * sn.theta;
        let clock2 = (sp.omega_x + sp.omega_z) * t - 2.0 * sp.theta;

        let phase1 = chirp1 + plane1 - clock1;
        let phase2 = chirp2 + plane2 - clock2;
        let phase12 = (chirp1 - chirp2) + (plane1 - plane2) - (clock1 - clock2);

        let axis = |u1: f64, u2: f64, k1: f64, k2: f64| Axis {
            a1: -u1 / sn.dx_t_sq,
            a2: -u2 / sp.dx_t_sq,
            b1: -1.0 / sn.dx_t_sq,
            b2: -1.0 / sp.dx_t_sq,
            p1: at * u1 / sn.dx1_t_sq + k1,
            p2: at * u2 / sp.dx1_t_sq - k2,
            p12_2: at / sn.dx1_t_sq - at / sp.dx1_t_sq,
        };

        Local {
            r1,
            r2,
            phase1,
            phase2,
            phase12,
            axes: [axis(ux1, ux2, n.kx, p.kx), axis(uz1, uz2, n.kz, p.kz)],
        }
    }

    fn intensity(&self) -> f64 {
        let (r1, r2) = (self.r1, self.r2);
        r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * self.phase12.cos()
    }

    /// ∂(S/ħ) along one axis.
    fn phase_slope(&self, ax: &Axis, intensity: f64) -> f64 {
        let (r1, r2) = (self.r1, self.r2);
        let (c, s) = (self.phase12.cos(), self.phase12.sin());
        (r1 * r1 * ax.p1 + r2 * r2 * ax.p2 + r1 * r2 * ((ax.p1 + ax.p2) * c + (ax.a1 - ax.a2) * s)) / intensity
    }

    /// (∂R²/R², ∂²R²/R²) along one axis.
    fn intensity_derivatives(&self, ax: &Axis, intensity: f64) -> (f64, f64) {
        let (r1, r2) = (self.r1, self.r2);
        let (c, s) = (self.phase12.cos(), self.phase12.sin());
        let (r11, r22, r12) = (r1 * r1, r2 * r2, r1 * r2);
        let asum = ax.a1 + ax.a2;
        let p12 = ax.p1 - ax.p2;
        let d1 = 2.0 * ax.a1 * r11 + 2.0 * ax.a2 * r22 + 2.0 * r12 * (asum * c - p12 * s);
        let d2 = (4.0 * ax.a1 * ax.a1 + 2.0 * ax.b1) * r11
            + (4.0 * ax.a2 * ax.a2 + 2.0 * ax.b2) * r22
            + 2.0 * r12 * ((asum * asum + ax.b1 + ax.b2 - p12 * p12) * c - (2.0 * asum * p12 + ax.p12_2) * s);
        (d1 / intensity, d2 / intensity)
    }

    fn quantum_potential(&self, scenario: &Scenario, intensity: f64) -> QuantumPotential {
        let c = &scenario.constants;
        let h2m = c.hbar * c.hbar / c.m;
        let per_axis = |ax: &Axis| {
            let (g, h) = self.intensity_derivatives(ax, intensity);
            h2m / 8.0 * g * g - h2m / 4.0 * h
        };
        let qx = per_axis(&self.axes[0]);
        let qz = per_axis(&self.axes[1]);
        QuantumPotential {
            qx,
            qy: 0.0,
            qz,
            q: qx + qz,
        }
    }

    /// ∇(S/ħ); the y component is k_y.
    fn phase_gradient(&self, scenario: &Scenario, intensity: f64) -> [f64; 3] {
        [
            self.phase_slope(&self.axes[0], intensity),
            scenario.packet_neg.ky,
            self.phase_slope(&self.axes[1], intensity),
        ]
    }
}

fn reduced_action(hbar: f64, phase: f64) -> f64 {
    hbar * phase.rem_euclid(TAU)
}

pub fn envelope_and_phase(scenario: &Scenario, point: Point) -> EnvelopePhase {
    let l = Local::new(scenario, point);
    let hbar = scenario.constants.hbar;
    let common = scenario.packet_neg.ky * point.y;
    EnvelopePhase {
        r1: l.r1,
        r2: l.r2,
        s1: reduced_action(hbar, l.phase1 + common),
        s2: reduced_action(hbar, l.phase2 + common),
    }
}

/// R² = R₁² + R₂² + 2R₁R₂cos(S₁₂/ħ).
pub fn intensity(scenario: &Scenario, point: Point) -> f64 {
    Local::new(scenario, point).intensity()
}

pub fn quantum_potential(scenario: &Scenario, point: Point) -> Result<QuantumPotential> {
    quantum_potential_masked(scenario, point, &NodeMask::at(scenario, point.t))
}

pub fn quantum_potential_masked(scenario: &Scenario, point: Point, mask: &NodeMask) -> Result<QuantumPotential> {
    let l = Local::new(scenario, point);
    let i = l.intensity();
    mask.check(i)?;
    Ok(l.quantum_potential(scenario, i))
}

/// ∇S in kg·m/s.
pub fn phase_gradient(scenario: &Scenario, point: Point) -> Result<[f64; 3]> {
    phase_gradient_masked(scenario, point, &NodeMask::at(scenario, point.t))
}

pub fn phase_gradient_masked(scenario: &Scenario, point: Point, mask: &NodeMask) -> Result<[f64; 3]> {
    let l = Local::new(scenario, point);
    let i = l.intensity();
    mask.check(i)?;
    let hbar = scenario.constants.hbar;
    Ok(l.phase_gradient(scenario, i).map(|g| hbar * g))
}

/// Guidance velocity ∇S/m in m/s, evaluated as α·∇(S/ħ).
pub fn velocity(scenario: &Scenario, point: Point) -> Result<[f64; 3]> {
    velocity_masked(scenario, point, &NodeMask::at(scenario, point.t))
}

pub fn velocity_masked(scenario: &Scenario, point: Point, mask: &NodeMask) -> Result<[f64; 3]> {
    let l = Local::new(scenario, point);
    let i = l.intensity();
    mask.check(i)?;
    let alpha = scenario.constants.alpha;
    Ok(l.phase_gradient(scenario, i).map(|g| alpha * g))
}

pub fn field_sample(scenario: &Scenario, point: Point) -> Result<FieldSample> {
    field_sample_masked(scenario, point, &NodeMask::at(scenario, point.t))
}

pub fn field_sample_masked(scenario: &Scenario, point: Point, mask: &NodeMask) -> Result<FieldSample> {
    let l = Local::new(scenario, point);
    let i = l.intensity();
    mask.check(i)?;
    let hbar = scenario.constants.hbar;
    let q = l.quantum_potential(scenario, i);
    let common = scenario.packet_neg.ky * point.y;
    Ok(FieldSample {
        r1: l.r1,
        r2: l.r2,
        s1: reduced_action(hbar, l.phase1 + common),
        s2: reduced_action(hbar, l.phase2 + common),
        s12: l.phase12,
        intensity: i,
        qx: q.qx,
        qz: q.qz,
        q: q.q,
        grad_s: l.phase_gradient(scenario, i).map(|g| hbar * g),
    })
}

/// R₁·R₂, the envelope of the interference term.
pub fn overlap_envelope(scenario: &Scenario, point: Point) -> f64 {
    let l = Local::new(scenario, point);
    l.r1 * l.r2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{eval_packet, eval_superposition, oracle_phase_gradient, oracle_quantum_potential};
    use crate::scenario::{make_scenario, ScenarioKind, ScenarioOverrides};
    use num_complex::Complex64;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(a.abs())
    }

    fn single_packet() -> Scenario {
        let mut o = ScenarioOverrides::default();
        o.neg.amp = Some(1.0);
        o.pos.amp = Some(0.0);
        make_scenario(ScenarioKind::Custom, Some(&o)).unwrap()
    }

    #[test]
    fn symmetric_midpoint_envelopes_and_phases_coincide() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        for &t in &[0.0, 4e-10, 1.5e-9] {
            let e = envelope_and_phase(&s, Point::xz(0.0, 0.0, t));
            assert_eq!(e.r1, e.r2);
            assert_eq!(e.s1, e.s2);
            let i = intensity(&s, Point::new(0.0, 0.1, 0.0, t));
            assert!(rel(i, 4.0 * e.r1 * e.r1) < 1e-15);
        }
    }

    #[test]
    fn packet_centre_values() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let e = envelope_and_phase(&s, Point::xz(-5e-7, 0.0, 0.0));
        assert!(rel(e.r1, 6.411e14) < 1e-4);
        assert!(e.r2 / e.r1 < (-100.0f64).exp());
    }

    #[test]
    fn envelope_phase_reconstructs_packets() {
        for kind in ScenarioKind::PRESETS {
            let s = Scenario::preset(kind);
            let hbar = s.constants.hbar;
            for &(x, y, z, t) in &[
                (1e-7, 0.0, 0.0, 0.0),
                (-4e-7, 1e-9, 2e-7, 5e-10),
                (6e-7, 0.0, -1e-7, 1.5e-9),
            ] {
                let p = Point::new(x, y, z, t);
                let e = envelope_and_phase(&s, p);
                for (side, r, sv) in [(Side::Negative, e.r1, e.s1), (Side::Positive, e.r2, e.s2)] {
                    let psi = eval_packet(&s, side, p).value;
                    let rebuilt = Complex64::from_polar(r, sv / hbar);
                    assert!((rebuilt - psi).norm() <= 1e-12 * psi.norm(), "{kind} {side:?} {p:?}");
                }
            }
        }
    }

    #[test]
    fn intensity_matches_superposition() {
        for kind in ScenarioKind::PRESETS {
            let s = Scenario::preset(kind);
            for &t in &[0.0, 3e-10, 1.5e-9] {
                for i in 0..41 {
                    let x = -2e-6 + 1e-7 * i as f64;
                    let p = Point::xz(x, 1.3e-7, t);
                    let a = intensity(&s, p);
                    let b = eval_superposition(&s, p).norm_sqr();
                    if b > 0.0 {
                        assert!(rel(a, b) < 1e-9, "{kind} {p:?}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn qy_is_zero_and_q_is_the_sum() {
        let s = Scenario::preset(ScenarioKind::Uwea);
        let q = quantum_potential(&s, Point::xz(2e-7, 1e-7, 5e-10)).unwrap();
        assert_eq!(q.qy, 0.0);
        assert_eq!(q.q, q.qx + q.qz);
    }

    #[test]
    fn gaussian_peak_quantum_potential() {
        let s = single_packet();
        let c = s.constants;
        let q = quantum_potential(&s, Point::xz(-5e-7, 0.0, 0.0)).unwrap();
        let expected = c.hbar * c.hbar / (2.0 * c.m * 4.9e-15);
        assert!(rel(q.qx, expected) < 1e-12);
        assert!(rel(q.qz, expected) < 1e-12);
    }

    #[test]
    fn quantum_potential_matches_oracle_and_fd() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let p = Point::xz(0.0, 0.0, 1.5e-9);
        let mask = NodeMask::at(&s, p.t);
        let q = quantum_potential(&s, p).unwrap();
        let o = oracle_quantum_potential(&eval_superposition(&s, p), &s.constants, &mask).unwrap();
        assert!(rel(q.q, o.q) < 1e-9);

        let h = 1e-10;
        let r = |dx: f64, dz: f64| intensity(&s, Point::xz(p.x + dx, p.z + dz, p.t)).sqrt();
        let lap = (r(h, 0.0) + r(-h, 0.0) + r(0.0, h) + r(0.0, -h) - 4.0 * r(0.0, 0.0)) / (h * h);
        let fd = -s.constants.hbar.powi(2) / (2.0 * s.constants.m) * lap / r(0.0, 0.0);
        assert!(rel(q.q, fd) < 1e-4, "{} vs {fd}", q.q);
    }

    #[test]
    fn phase_gradient_matches_oracle() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let p = Point::xz(1e-6, 0.0, 7.5e-10);
        let mask = NodeMask::at(&s, p.t);
        let g = phase_gradient(&s, p).unwrap();
        let o = oracle_phase_gradient(&eval_superposition(&s, p), s.constants.hbar, &mask).unwrap();
        for k in 0..3 {
            assert!((g[k] - o[k]).abs() <= 1e-9 * o[k].abs().max(s.constants.hbar * s.packet_neg.kx));
        }
        assert_eq!(g[1], s.constants.hbar * s.packet_neg.ky);
    }

    #[test]
    fn midplane_velocity_is_exactly_zero() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        for &t in &[0.0, 1e-10, 7.5e-10, 1.5e-9] {
            for &z in &[0.0, 5e-8, -3e-7] {
                let v = velocity(&s, Point::xz(0.0, z, t)).unwrap();
                assert_eq!(v[0], 0.0, "t={t} z={z}");
                if z == 0.0 {
                    assert_eq!(v[2], 0.0);
                }
            }
        }
        let v = velocity(&s, Point::xz(0.0, 0.0, 1e-9)).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[2], 0.0);
        assert!(rel(v[1], 1.3e8) < 1e-4);
    }

    #[test]
    fn isolated_packet_velocity() {
        let s = single_packet();
        let v = velocity(&s, Point::xz(-5e-7, 0.0, 0.0)).unwrap();
        assert!(rel(v[0], 150.0) < 1e-4);
        assert_eq!(v[1], s.constants.alpha * s.packet_neg.ky);
    }

    #[test]
    fn field_sample_is_consistent() {
        let s = Scenario::preset(ScenarioKind::Ewua);
        let p = Point::new(3e-7, 0.05, -1e-7, 9e-10);
        let f = field_sample(&s, p).unwrap();
        assert!(f.intensity >= 0.0);
        assert!(rel(f.intensity, f.r1 * f.r1 + f.r2 * f.r2 + 2.0 * f.r1 * f.r2 * f.s12.cos()) < 1e-15);
        assert_eq!(f.q, f.qx + f.qz);
        assert!(f.s1 >= 0.0 && f.s1 < s.constants.hbar * TAU);
        assert_eq!(f.grad_s, phase_gradient(&s, p).unwrap());
    }

    #[test]
    fn masked_points_error() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let p = Point::xz(3.4e-6, 3.4e-6, 0.0);
        assert_eq!(intensity(&s, p), 0.0);
        assert!(velocity(&s, p).is_err());
        assert!(quantum_potential(&s, p).is_err());
        assert!(field_sample(&s, p).is_err());
    }
}
