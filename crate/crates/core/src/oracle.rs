//! Reference evaluation of ψ₁, ψ₂ as complex numbers with exact analytic
//! first and second spatial derivatives.
//!
//! This path shares nothing with [`crate::fields`] beyond the scenario
//! parameters: it works directly with the complex width `Δ₀² + iαt` instead
//! of the real spread/phase decomposition, so agreement between the two is
//! a meaningful check of the closed-form field formulas.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::mask::NodeMask;
use crate::scenario::{PhysicalConstants, Scenario, Side};
use crate::Point;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// ψ and its spatial derivatives at one point.
///
/// The y-dependence of every packet is the same plane wave `exp(i k_y y)`,
/// so the y-derivatives are carried structurally through `ky` rather than
/// stored: ∂ψ/∂y = i k_y ψ and ∂²ψ/∂y² = −k_y² ψ hold exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiJet {
    pub value: Complex64,
    pub d_dx: Complex64,
    pub d_dz: Complex64,
    pub d2_dx2: Complex64,
    pub d2_dz2: Complex64,
    pub ky: f64,
}

impl PsiJet {
    pub fn d_dy(&self) -> Complex64 {
        self.value * Complex64::new(0.0, self.ky)
    }

    pub fn d2_dy2(&self) -> Complex64 {
        self.value * (-self.ky * self.ky)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.value.norm_sqr()
    }

    /// ∂²ψ/∂x² + ∂²ψ/∂z²; the y part is −k_y²ψ.
    pub fn transverse_laplacian(&self) -> Complex64 {
        self.d2_dx2 + self.d2_dz2
    }

    /// Multiplies ψ and all derivatives by a constant.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            value: self.value * c,
            d_dx: self.d_dx * c,
            d_dz: self.d_dz * c,
            d2_dx2: self.d2_dx2 * c,
            d2_dz2: self.d2_dz2 * c,
            ky: self.ky,
        }
    }

    fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.ky, other.ky);
        Self {
            value: self.value + other.value,
            d_dx: self.d_dx + other.d_dx,
            d_dz: self.d_dz + other.d_dz,
            d2_dx2: self.d2_dx2 + other.d2_dx2,
            d2_dz2: self.d2_dz2 + other.d2_dz2,
            ky: self.ky,
        }
    }

    /// (ψ'/ψ, ψ''/ψ) for the x and z axes, via ψ̄ψ'/|ψ|².
    fn log_derivatives(&self) -> [(Complex64, Complex64); 2] {
        let n = self.value.norm_sqr();
        let conj = self.value.conj();
        [
            (conj * self.d_dx / n, conj * self.d2_dx2 / n),
            (conj * self.d_dz / n, conj * self.d2_dz2 / n),
        ]
    }
}

/// Evaluates one pinhole packet and its analytic derivatives.
pub fn eval_packet(scenario: &Scenario, side: Side, point: Point) -> PsiJet {
    let p = scenario.packet(side);
    let alpha = scenario.constants.alpha;
    let Point { x, y, z, t } = point;

    // complex width w = Δ₀² + iαt; A(t) = (2π/w)^{1/2} per axis
    let w = Complex64::new(p.dx0 * p.dx0, alpha * t);
    let a_axis = (Complex64::from(2.0 * PI) / w).sqrt();
    let norm = a_axis * a_axis;
    let curvature = -w.inv();

    let (vx, vz) = (alpha * p.kx, alpha * p.kz);
    let omega = alpha * (p.kx * p.kx + p.kz * p.kz) / 2.0;
    let (ux, uz, kx, kz, plane) = match side {
        Side::Negative => (
            x + p.x0 - vx * t,
            z + p.z0 - vz * t,
            p.kx,
            p.kz,
            p.kx * (x + p.x0) + p.kz * (z + p.z0),
        ),
        Side::Positive => (
            x - p.x0 + vx * t,
            z - p.z0 + vz * t,
            -p.kx,
            -p.kz,
            -p.kx * (x - p.x0) - p.kz * (z - p.z0) + p.chi,
        ),
    };

    let exponent = 0.5 * curvature * (ux * ux + uz * uz) + I * (plane - omega * t);
    let value = p.amp * norm * exponent.exp() * Complex64::from_polar(1.0, p.ky * y);

    let gx = curvature * ux + I * kx;
    let gz = curvature * uz + I * kz;
    PsiJet {
        value,
        d_dx: gx * value,
        d_dz: gz * value,
        d2_dx2: (gx * gx + curvature) * value,
        d2_dz2: (gz * gz + curvature) * value,
        ky: p.ky,
    }
}

/// ψ = ψ₁ + ψ₂ with derivatives.
pub fn eval_superposition(scenario: &Scenario, point: Point) -> PsiJet {
    eval_packet(scenario, Side::Negative, point).add(&eval_packet(scenario, Side::Positive, point))
}

/// ∇S = ħ Im(∇ψ/ψ), kg·m/s.
pub fn oracle_phase_gradient(jet: &PsiJet, hbar: f64, mask: &NodeMask) -> Result<[f64; 3]> {
    mask.check(jet.norm_sqr())?;
    let [(gx, _), (gz, _)] = jet.log_derivatives();
    Ok([hbar * gx.im, hbar * jet.ky, hbar * gz.im])
}

/// Quantum potential split by axis, J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumPotential {
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
    pub q: f64,
}

/// Q = −(ħ²/2m) ∇²R/R using ∂²R/R = Re(ψ''/ψ) + Im(ψ'/ψ)² on each axis.
pub fn oracle_quantum_potential(
    jet: &PsiJet,
    constants: &PhysicalConstants,
    mask: &NodeMask,
) -> Result<QuantumPotential> {
    mask.check(jet.norm_sqr())?;
    let pref = -constants.hbar * constants.hbar / (2.0 * constants.m);
    let axis = |g: Complex64, h: Complex64| pref * (h.re + g.im * g.im);
    let [(gx, hx), (gz, hz)] = jet.log_derivatives();
    let qx = axis(gx, hx);
    let qz = axis(gz, hz);
    let qy = axis(Complex64::new(0.0, jet.ky), Complex64::from(-jet.ky * jet.ky));
    Ok(QuantumPotential {
        qx,
        qy,
        qz,
        q: qx + qy + qz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{make_scenario, ScenarioKind, ScenarioOverrides};

    // Small enough that the h² truncation stays below 1e-7 for points
    // several widths from a packet centre.
    const H: f64 = 1e-11;

    fn single_packet() -> Scenario {
        let mut o = ScenarioOverrides::default();
        o.neg.amp = Some(1.0);
        o.pos.amp = Some(0.0);
        make_scenario(ScenarioKind::Custom, Some(&o)).unwrap()
    }

    fn crel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn packet_center_magnitude() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let j = eval_packet(&s, Side::Negative, Point::new(-5e-7, 0.0, 0.0, 0.0));
        let expected = 0.5 * 2.0 * PI / 4.9e-15;
        assert!((j.value.norm() - expected).abs() / expected < 1e-14);
        assert!((j.value.norm() - 6.411e14).abs() / 6.411e14 < 1e-4);
    }

    #[test]
    fn far_packet_is_suppressed() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let j = eval_packet(&s, Side::Negative, Point::new(5e-7, 0.0, 0.0, 0.0));
        let expected = 0.5 * 2.0 * PI / 4.9e-15 * (-(1e-6f64).powi(2) / (2.0 * 4.9e-15)).exp();
        assert!((j.value.norm() - expected).abs() / expected < 1e-12);
        assert!(j.value.norm() / 6.411e14 < (-100.0f64).exp());
    }

    #[test]
    fn y_log_derivative_is_plane_wave() {
        let s = Scenario::preset(ScenarioKind::Uwea);
        for &(x, y, z, t) in &[
            (1e-7, 0.0, 0.0, 0.0),
            (-2e-6, 0.1, 3e-7, 1.5e-9),
            (3e-6, 0.19, -1e-6, 7e-10),
        ] {
            let j = eval_superposition(&s, Point::new(x, y, z, t));
            let g = j.d_dy() / j.value;
            assert!((g - Complex64::new(0.0, s.packet_neg.ky)).norm() / s.packet_neg.ky < 1e-15);
        }
    }

    #[test]
    fn superposition_is_componentwise_sum() {
        let s = Scenario::preset(ScenarioKind::Ewua);
        let p = Point::new(3e-7, 0.0, -2e-7, 4e-10);
        let a = eval_packet(&s, Side::Negative, p);
        let b = eval_packet(&s, Side::Positive, p);
        let sum = eval_superposition(&s, p);
        assert_eq!(sum.value, a.value + b.value);
        assert_eq!(sum.d_dx, a.d_dx + b.d_dx);
        assert_eq!(sum.d2_dz2, a.d2_dz2 + b.d2_dz2);
    }

    #[test]
    fn superposition_at_packet_center_is_dominated_by_that_packet() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let p = Point::new(-5e-7, 0.0, 0.0, 0.0);
        let total = eval_superposition(&s, p).norm_sqr();
        let one = eval_packet(&s, Side::Negative, p).norm_sqr();
        assert!((total - one).abs() / one < 1e-40);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for kind in ScenarioKind::PRESETS {
            let s = Scenario::preset(kind);
            for &t in &[0.0, 3e-10, 1.5e-9] {
                for &(x, z) in &[(-5.3e-7, 2e-8), (4.1e-7, -6e-8), (1.2e-7, 1e-7), (-9e-7, 4e-7)] {
                    let p = Point::xz(x, z, t);
                    let j = eval_superposition(&s, p);
                    let at = |dx: f64, dz: f64| eval_superposition(&s, Point::xz(x + dx, z + dz, t)).value;
                    let fx = (at(H, 0.0) - at(-H, 0.0)) / (2.0 * H);
                    let fz = (at(0.0, H) - at(0.0, -H)) / (2.0 * H);
                    let fxx = (at(H, 0.0) - 2.0 * j.value + at(-H, 0.0)) / (H * H);
                    let fzz = (at(0.0, H) - 2.0 * j.value + at(0.0, -H)) / (H * H);
                    if j.norm_sqr() < 1e-20 * eval_superposition(&s, Point::xz(-5e-7, 0.0, t)).norm_sqr() {
                        continue;
                    }
                    assert!(crel(fx, j.d_dx) < 1e-6, "{kind} d/dx t={t} x={x}");
                    assert!(crel(fz, j.d_dz) < 1e-6, "{kind} d/dz t={t} x={x}");
                    assert!(crel(fxx, j.d2_dx2) < 1e-5, "{kind} d2/dx2 t={t} x={x}");
                    assert!(crel(fzz, j.d2_dz2) < 1e-5, "{kind} d2/dz2 t={t} x={x}");
                }
            }
        }
    }

    #[test]
    fn phase_gradient_y_component_is_hbar_ky() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let mask = NodeMask::zeros_only(5e-10);
        let j = eval_superposition(&s, Point::new(2e-7, 0.05, 1e-7, 5e-10));
        let g = oracle_phase_gradient(&j, s.constants.hbar, &mask).unwrap();
        assert_eq!(g[1], s.constants.hbar * s.packet_neg.ky);
        assert!((g[1] - 1.1842e-22).abs() / 1.1842e-22 < 1e-4);
        assert!((g[1] / s.constants.m - 1.3e8).abs() / 1.3e8 < 1e-4);
    }

    #[test]
    fn phase_gradient_vanishes_on_midplane() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        for &t in &[1e-10, 7.5e-10, 1.5e-9] {
            let mask = NodeMask::at(&s, t);
            for &z in &[0.0, 1e-7, -4e-7] {
                let j = eval_superposition(&s, Point::new(0.0, 0.02, z, t));
                let g = oracle_phase_gradient(&j, s.constants.hbar, &mask).unwrap();
                assert!(
                    g[0].abs() <= 1e-12 * s.constants.hbar * s.packet_neg.kx,
                    "t={t} z={z}: {}",
                    g[0]
                );
            }
        }
    }

    #[test]
    fn isolated_packet_center_moves_with_kx() {
        let s = single_packet();
        let mask = NodeMask::zeros_only(0.0);
        let j = eval_superposition(&s, Point::xz(-5e-7, 0.0, 0.0));
        let g = oracle_phase_gradient(&j, s.constants.hbar, &mask).unwrap();
        let expected = s.constants.hbar * s.packet_neg.kx;
        assert!((g[0] - expected).abs() / expected < 1e-14);
        assert!(g[2].abs() < 1e-14 * expected);
    }

    #[test]
    fn quantum_potential_of_gaussian_peak() {
        let s = single_packet();
        let c = s.constants;
        let mask = NodeMask::zeros_only(0.0);
        let j = eval_superposition(&s, Point::xz(-5e-7, 0.0, 0.0));
        let q = oracle_quantum_potential(&j, &c, &mask).unwrap();
        let expected = c.hbar * c.hbar / (2.0 * c.m * 4.9e-15);
        assert!((q.qx - expected).abs() / expected < 1e-12, "{} vs {expected}", q.qx);
        assert!((q.qz - expected).abs() / expected < 1e-12);
        assert_eq!(q.qy, 0.0);
    }

    #[test]
    fn qy_is_exactly_zero() {
        for kind in ScenarioKind::PRESETS {
            let s = Scenario::preset(kind);
            let mask = NodeMask::zeros_only(0.0);
            for &(x, y, z, t) in &[
                (0.0, 0.0, 0.0, 1e-9),
                (1e-6, 0.1, -2e-7, 2e-9),
                (-3e-7, 0.01, 5e-8, 1e-10),
            ] {
                let j = eval_superposition(&s, Point::new(x, y, z, t));
                let q = oracle_quantum_potential(&j, &s.constants, &mask).unwrap();
                assert_eq!(q.qy, 0.0);
            }
        }
    }

    #[test]
    fn node_is_signalled() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let mask = NodeMask::at(&s, 0.0);
        let j = eval_superposition(&s, Point::xz(3e-6, 3e-6, 0.0));
        assert!(oracle_phase_gradient(&j, s.constants.hbar, &mask).is_err());
        assert!(oracle_quantum_potential(&j, &s.constants, &mask).is_err());
    }
}
