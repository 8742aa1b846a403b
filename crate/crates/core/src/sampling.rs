//! Initial conditions: square lattices inside each pinhole and Born-rule
//! rejection sampling from the intensity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields;
use crate::scenario::{Scenario, Side};
use crate::{linspace, Point};

/// Half-width of the square Born-sampling window centred on the origin, m.
pub const BORN_HALF_WIDTH: f64 = 1e-6;
/// Side count of the prescan grid used to find the rejection majorant.
pub const PRESCAN_POINTS: usize = 201;
pub const MAJORANT_FACTOR: f64 = 1.05;
/// Minimum acceptance rate before the sampler gives up.
pub const MIN_ACCEPTANCE: f64 = 1e-4;
const STALL_CHECK_AFTER: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    SquareGrid,
    BornSampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSet {
    pub points: Vec<(f64, f64)>,
    pub provenance: Provenance,
    pub seed: Option<u64>,
}

impl InitialSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of points with x > 0.
    pub fn fraction_positive_x(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().filter(|p| p.0 > 0.0).count() as f64 / self.points.len() as f64
    }
}

/// Axis-aligned rectangle in the (x, z) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Rect {
    pub fn square(half_width: f64) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            z_min: -half_width,
            z_max: half_width,
        }
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.z_min..=self.z_max).contains(&z)
    }
}

/// n×n lattice per pinhole over the square of side Δx₀ centred on it;
/// negative pinhole first.
pub fn square_grid_initials(scenario: &Scenario, n: usize) -> Result<InitialSet> {
    if n == 0 {
        return Err(Error::param("n", "lattice side count must be at least 1"));
    }
    let mut points = Vec::with_capacity(2 * n * n);
    for side in Side::BOTH {
        let p = scenario.packet(side);
        let (cx, cz, half) = (p.center_x(), p.center_z(), p.dx0 / 2.0);
        let (xs, zs) = if n == 1 {
            (vec![cx], vec![cz])
        } else {
            (linspace(cx - half, cx + half, n), linspace(cz - half, cz + half, n))
        };
        for &z in &zs {
            for &x in &xs {
                points.push((x, z));
            }
        }
    }
    Ok(InitialSet {
        points,
        provenance: Provenance::SquareGrid,
        seed: None,
    })
}

/// Draws `count` points from R²(x, z, t) restricted to `domain` with a
/// uniform proposal and a prescan majorant. Deterministic in `seed`.
pub fn rejection_sample(scenario: &Scenario, t: f64, domain: Rect, count: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let density = |x: f64, z: f64| fields::intensity(scenario, Point::xz(x, z, t));
    let xs = linspace(domain.x_min, domain.x_max, PRESCAN_POINTS);
    let zs = linspace(domain.z_min, domain.z_max, PRESCAN_POINTS);
    let peak = zs
        .iter()
        .flat_map(|&z| xs.iter().map(move |&x| (x, z)))
        .map(|(x, z)| density(x, z))
        .fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::SamplerStall {
            accepted: 0,
            proposals: 0,
        });
    }
    let majorant = MAJORANT_FACTOR * peak;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut proposals = 0usize;
    while out.len() < count {
        let x = rng.random_range(domain.x_min..domain.x_max);
        let z = rng.random_range(domain.z_min..domain.z_max);
        let u: f64 = rng.random();
        proposals += 1;
        if u * majorant < density(x, z) {
            out.push((x, z));
        }
        if proposals >= STALL_CHECK_AFTER && (out.len() as f64) < MIN_ACCEPTANCE * proposals as f64 {
            return Err(Error::SamplerStall {
                accepted: out.len(),
                proposals,
            });
        }
    }
    Ok(out)
}

/// Born-rule initial positions: samples of R²(·, t = 0) over
/// x, z ∈ [−1 µm, 1 µm].
pub fn born_sample_initials(scenario: &Scenario, count: usize, seed: u64) -> Result<InitialSet> {
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    let points = rejection_sample(scenario, 0.0, Rect::square(BORN_HALF_WIDTH), count, seed)?;
    Ok(InitialSet {
        points,
        provenance: Provenance::BornSampled,
        seed: Some(seed),
    })
}
