//! Scalar observables: fringe visibility, quantum-potential valleys,
//! Born-rule equivariance distance and the continuity residual.

use crate::error::{Error, Result};
use crate::fields;
use crate::integrator::Trajectory;
use crate::mask::NodeMask;
use crate::oracle::eval_superposition;
use crate::scenario::{packet_state_at, Scenario, Side};
use crate::{linspace, Point};

/// Default visibility scan: z = 0, x ∈ [−2 µm, 2 µm], 2001 samples.
pub const SCAN_HALF_WIDTH: f64 = 2e-6;
pub const SCAN_POINTS: usize = 2001;

/// Intensity along a line of constant z.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeProfile {
    pub axis_positions: Vec<f64>,
    pub values: Vec<f64>,
    pub t: f64,
}

impl FringeProfile {
    pub fn sample(scenario: &Scenario, t: f64, z: f64, x_min: f64, x_max: f64, n: usize) -> Self {
        let axis_positions = linspace(x_min, x_max, n);
        let values = axis_positions
            .iter()
            .map(|&x| fields::intensity(scenario, Point::xz(x, z, t)))
            .collect();
        Self {
            axis_positions,
            values,
            t,
        }
    }

    /// The standard z = 0 scan.
    pub fn central_scan(scenario: &Scenario, t: f64) -> Self {
        Self::sample(scenario, t, 0.0, -SCAN_HALF_WIDTH, SCAN_HALF_WIDTH, SCAN_POINTS)
    }
}

/// Index of the first local minimum reached by walking downhill from
/// `start` in direction `step`; `None` if the walk hits the profile edge.
fn downhill(values: &[f64], start: usize, forward: bool) -> Option<usize> {
    let mut i = start;
    loop {
        let next = if forward {
            i.checked_add(1).filter(|&j| j < values.len())
        } else {
            i.checked_sub(1)
        };
        match next {
            Some(j) if values[j] <= values[i] => i = j,
            Some(_) => return Some(i),
            None => return None,
        }
    }
}

/// V = (I_max − I_min)/(I_max + I_min) around the global maximum, with
/// I_min the larger of the two adjacent minima.
pub fn central_fringe_visibility(profile: &FringeProfile) -> Result<f64> {
    let v = &profile.values;
    if v.len() < 3 {
        return Err(Error::NoFringe("profile has fewer than three samples".into()));
    }
    let (imax_idx, &imax) = v.iter().enumerate().fold(
        (0, &f64::NEG_INFINITY),
        |best, cur| if cur.1 > best.1 { cur } else { best },
    );
    let left = downhill(v, imax_idx, false);
    let right = downhill(v, imax_idx, true);
    let (Some(l), Some(r)) = (left, right) else {
        return Err(Error::NoFringe(
            "no interior minimum on both sides of the central maximum".into(),
        ));
    };
    let imin = v[l].max(v[r]);
    if !(imax + imin > 0.0) {
        return Err(Error::NoFringe("profile carries no intensity".into()));
    }
    Ok((imax - imin) / (imax + imin))
}

/// A local minimum of Q on the z = 0 line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Valley {
    pub x: f64,
    pub q: f64,
}

/// The quantum-potential minima nearest to x = 0 on each side (z = 0).
/// Masked samples are skipped.
pub fn first_q_valleys(scenario: &Scenario, t: f64, half_width: f64, n: usize) -> Result<(Valley, Valley)> {
    let mask = NodeMask::at(scenario, t);
    let line: Vec<(f64, f64)> = linspace(-half_width, half_width, n)
        .into_iter()
        .filter_map(|x| {
            fields::quantum_potential_masked(scenario, Point::xz(x, 0.0, t), &mask)
                .ok()
                .map(|q| (x, q.q))
        })
        .collect();
    let minima: Vec<Valley> = line
        .windows(3)
        .filter(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1)
        .map(|w| Valley { x: w[1].0, q: w[1].1 })
        .collect();
    let neg = minima.iter().filter(|v| v.x < 0.0).max_by(|a, b| a.x.total_cmp(&b.x));
    let pos = minima.iter().filter(|v| v.x > 0.0).min_by(|a, b| a.x.total_cmp(&b.x));
    match (neg, pos) {
        (Some(&n), Some(&p)) => Ok((n, p)),
        _ => Err(Error::NoFringe(
            "no quantum-potential valley on one side of x = 0".into(),
        )),
    }
}

/// x position of the largest R₁R₂ (interference envelope) on z = 0.
pub fn overlap_peak_x(scenario: &Scenario, t: f64, half_width: f64, n: usize) -> f64 {
    linspace(-half_width, half_width, n)
        .into_iter()
        .map(|x| (x, fields::overlap_envelope(scenario, Point::xz(x, 0.0, t))))
        .fold(
            (0.0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
        .0
}

/// Regular 2D histogram layout over (x, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nx: usize,
    pub nz: usize,
}

impl HistogramSpec {
    /// 40×40 bins over ±3.5 µm.
    pub fn plot_range() -> Self {
        Self {
            x_min: -3.5e-6,
            x_max: 3.5e-6,
            z_min: -3.5e-6,
            z_max: 3.5e-6,
            nx: 40,
            nz: 40,
        }
    }

    fn bin(&self, x: f64, z: f64) -> Option<usize> {
        let fx = (x - self.x_min) / (self.x_max - self.x_min);
        let fz = (z - self.z_min) / (self.z_max - self.z_min);
        if !(0.0..=1.0).contains(&fx) || !(0.0..=1.0).contains(&fz) {
            return None;
        }
        let ix = ((fx * self.nx as f64) as usize).min(self.nx - 1);
        let iz = ((fz * self.nz as f64) as usize).min(self.nz - 1);
        Some(iz * self.nx + ix)
    }

    /// Normalised bin masses of a point set; points outside are dropped.
    pub fn normalised_counts(&self, points: impl IntoIterator<Item = (f64, f64)>) -> Vec<f64> {
        let mut counts = vec![0.0; self.nx * self.nz];
        let mut total = 0.0;
        for (x, z) in points {
            if let Some(b) = self.bin(x, z) {
                counts[b] += 1.0;
                total += 1.0;
            }
        }
        if total > 0.0 {
            counts.iter_mut().for_each(|c| *c /= total);
        }
        counts
    }

    /// Normalised bin masses of R²(·, t), integrated by a midpoint rule with
    /// `sub`×`sub` nodes per bin.
    pub fn normalised_density(&self, scenario: &Scenario, t: f64, sub: usize) -> Vec<f64> {
        let (wx, wz) = (
            (self.x_max - self.x_min) / self.nx as f64,
            (self.z_max - self.z_min) / self.nz as f64,
        );
        let mut mass: Vec<f64> = (0..self.nx * self.nz)
            .map(|b| {
                let (ix, iz) = (b % self.nx, b / self.nx);
                let mut acc = 0.0;
                for j in 0..sub {
                    let z = self.z_min + wz * (iz as f64 + (j as f64 + 0.5) / sub as f64);
                    for i in 0..sub {
                        let x = self.x_min + wx * (ix as f64 + (i as f64 + 0.5) / sub as f64);
                        acc += fields::intensity(scenario, Point::xz(x, z, t));
                    }
                }
                acc
            })
            .collect();
        let total: f64 = mass.iter().sum();
        if total > 0.0 {
            mass.iter_mut().for_each(|m| *m /= total);
        }
        mass
    }
}

/// Midpoint nodes per bin edge when integrating R² over histogram bins.
pub const BIN_QUADRATURE: usize = 8;

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum()
}

/// L1 distance between the histogram of `points` and R²(·, t) on `bins`.
pub fn density_distance(points: &[(f64, f64)], scenario: &Scenario, t: f64, bins: &HistogramSpec) -> f64 {
    let counts = bins.normalised_counts(points.iter().copied());
    let density = bins.normalised_density(scenario, t, BIN_QUADRATURE);
    l1_distance(&counts, &density)
}

/// Equivariance check: endpoint histogram of completed trajectories against
/// the evolved density.
pub fn endpoint_density_distance(
    trajectories: &[Trajectory],
    scenario: &Scenario,
    t: f64,
    bins: &HistogramSpec,
) -> f64 {
    let ends: Vec<(f64, f64)> = trajectories
        .iter()
        .filter(|tr| tr.is_completed())
        .map(|tr| {
            let s = tr.last();
            (s.x, s.z)
        })
        .collect();
    density_distance(&ends, scenario, t, bins)
}

/// Characteristic magnitude of ∂R²/∂t at time t: peak intensity bound over
/// the fastest spreading time.
fn rate_scale(scenario: &Scenario, t: f64) -> f64 {
    let sn = packet_state_at(scenario, Side::Negative, t);
    let sp = packet_state_at(scenario, Side::Positive, t);
    let peak = sn.beta * scenario.packet_neg.amp + sp.beta * scenario.packet_pos.amp;
    peak * peak * scenario.constants.alpha / sn.dx_t_sq.min(sp.dx_t_sq)
}

/// |∂ₜR² + ∇·(R²∇S/m)| / max(|∂ₜR²|, |∇·(R²∇S/m)|).
///
/// ∂ₜR² is a centred difference of the closed-form intensity; the
/// divergence is α·Im(ψ̄∇²ψ) from the analytic jet. Points where both terms
/// are below 1e-12 of the rate scale report 0.
pub fn continuity_residual(scenario: &Scenario, point: Point, dt_probe: f64) -> Result<f64> {
    if !(dt_probe > 0.0) || point.t - dt_probe < 0.0 {
        return Err(Error::InvalidStep(format!(
            "probe step {dt_probe:e} must be positive and not reach before t = 0"
        )));
    }
    let jet = eval_superposition(scenario, point);
    NodeMask::at(scenario, point.t).check(jet.norm_sqr())?;

    let at = |t: f64| fields::intensity(scenario, Point { t, ..point });
    let dt_term = (at(point.t + dt_probe) - at(point.t - dt_probe)) / (2.0 * dt_probe);
    let div_term = scenario.constants.alpha * (jet.value.conj() * jet.transverse_laplacian()).im;

    let denom = dt_term.abs().max(div_term.abs());
    if denom <= f64::max(1e-300, 1e-12 * rate_scale(scenario, point.t)) {
        return Ok(0.0);
    }
    Ok((dt_term + div_term).abs() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{rejection_sample, Rect};
    use crate::scenario::{make_scenario, ScenarioKind, ScenarioOverrides, SCREEN_TIME};

    fn profile(values: Vec<f64>) -> FringeProfile {
        FringeProfile {
            axis_positions: linspace(0.0, 1.0, values.len()),
            values,
            t: 0.0,
        }
    }

    #[test]
    fn visibility_edge_cases() {
        assert!(matches!(
            central_fringe_visibility(&profile(vec![1.0; 9])),
            Err(Error::NoFringe(_))
        ));
        let v = central_fringe_visibility(&profile(vec![0.5, 0.0, 2.0, 5.0, 2.0, 0.0, 0.7])).unwrap();
        assert_eq!(v, 1.0);
        let v = central_fringe_visibility(&profile(vec![3.0, 1.0, 4.0, 1.0, 3.0, 2.0, 3.0])).unwrap();
        // max 4, adjacent minima 1 and 1
        assert!((v - 0.6).abs() < 1e-15);
        let v = central_fringe_visibility(&profile(vec![3.0, 1.0, 4.0, 3.5, 2.0, 3.0])).unwrap();
        assert!((v - (4.0 - 2.0) / 6.0).abs() < 1e-15);
        // monotone: no minimum on the right
        assert!(central_fringe_visibility(&profile(vec![0.0, 1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn visibility_is_scale_invariant() {
        let base = vec![0.2, 0.05, 0.9, 2.0, 1.1, 0.3, 0.8];
        let v = central_fringe_visibility(&profile(base.clone())).unwrap();
        for c in [1e-30, 0.1, 7.0, 1e30] {
            let w = central_fringe_visibility(&profile(base.iter().map(|x| x * c).collect())).unwrap();
            assert!((v - w).abs() < 1e-14);
        }
    }

    #[test]
    fn ewea_and_ewua_visibilities() {
        let v = central_fringe_visibility(&FringeProfile::central_scan(
            &Scenario::preset(ScenarioKind::Ewea),
            SCREEN_TIME,
        ))
        .unwrap();
        assert!(v >= 0.99, "{v}");
        let v = central_fringe_visibility(&FringeProfile::central_scan(
            &Scenario::preset(ScenarioKind::Ewua),
            SCREEN_TIME,
        ))
        .unwrap();
        assert!((v - 0.6).abs() <= 0.05, "{v}");
    }

    #[test]
    fn histogram_of_a_single_point() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let bins = HistogramSpec::plot_range();
        let pts = vec![(0.0, 0.0); 50];
        let counts = bins.normalised_counts(pts.iter().copied());
        let density = bins.normalised_density(&s, SCREEN_TIME, BIN_QUADRATURE);
        let b = counts.iter().position(|&c| c == 1.0).unwrap();
        let d = density_distance(&pts, &s, SCREEN_TIME, &bins);
        assert!((d - (2.0 - 2.0 * density[b])).abs() < 1e-12);
    }

    #[test]
    fn null_distance_is_sampling_noise() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let bins = HistogramSpec::plot_range();
        let domain = Rect::square(3.5e-6);
        let pts = rejection_sample(&s, SCREEN_TIME, domain, 20_000, 5).unwrap();
        let d = density_distance(&pts, &s, SCREEN_TIME, &bins);
        // E[L1] ≈ Σ √(2pᵢ/πN) for multinomial noise
        let density = bins.normalised_density(&s, SCREEN_TIME, BIN_QUADRATURE);
        let expected: f64 = density
            .iter()
            .map(|p| (2.0 * p / (std::f64::consts::PI * 20_000.0)).sqrt())
            .sum();
        assert!(d < 1.3 * expected && d > 0.7 * expected, "{d} vs {expected}");
    }

    #[test]
    fn continuity_holds_at_the_centre() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        let r = continuity_residual(&s, Point::xz(0.0, 0.0, 7.5e-10), 1e-13).unwrap();
        assert!(r < 1e-3, "{r}");
    }

    #[test]
    fn continuity_holds_for_a_single_packet() {
        let mut o = ScenarioOverrides::default();
        o.neg.amp = Some(1.0);
        o.pos.amp = Some(0.0);
        let s = make_scenario(ScenarioKind::Custom, Some(&o)).unwrap();
        for &(x, z) in &[(-5e-7, 0.0), (-3e-7, 1e-7), (2e-7, -4e-7)] {
            let r = continuity_residual(&s, Point::xz(x, z, 5e-10), 1e-13).unwrap();
            assert!(r < 1e-3, "{x} {z}: {r}");
        }
    }

    #[test]
    fn continuity_rejects_bad_probe() {
        let s = Scenario::preset(ScenarioKind::Ewea);
        assert!(continuity_residual(&s, Point::xz(0.0, 0.0, 5e-14), 1e-13).is_err());
        assert!(continuity_residual(&s, Point::xz(0.0, 0.0, 5e-10), 0.0).is_err());
    }

    #[test]
    fn ewua_valleys() {
        let s = Scenario::preset(ScenarioKind::Ewua);
        let (neg, pos) = first_q_valleys(&s, 7.5e-10, 3e-6, 6001).unwrap();
        assert!(neg.x < 0.0 && pos.x > 0.0);
        assert!(neg.q < pos.q);
    }

    #[test]
    fn uwea_overlap_starts_on_positive_side() {
        let s = Scenario::preset(ScenarioKind::Uwea);
        assert!(overlap_peak_x(&s, 3e-10, 3e-6, 6001) > 0.0);
    }
}
