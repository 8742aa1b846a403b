use crate::error::{Error, Result};
use crate::fields;
use crate::{Point, Scenario};

/// Relative depth of the node mask below the central-axis intensity.
pub const NODE_MASK_RATIO: f64 = 1e-12;

/// Intensity threshold below which ψ is treated as a node at one instant.
///
/// The threshold is `1e-12 · |ψ(0, 0, 0, t)|²`. Points with intensity below
/// it (or exactly zero) have no defined guidance velocity or quantum potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeMask {
    pub t: f64,
    pub threshold: f64,
}

impl NodeMask {
    pub fn at(scenario: &Scenario, t: f64) -> Self {
        let axis = fields::intensity(scenario, Point::xz(0.0, 0.0, t));
        Self {
            t,
            threshold: NODE_MASK_RATIO * axis,
        }
    }

    /// A mask that only rejects exact zeros.
    pub fn zeros_only(t: f64) -> Self {
        Self { t, threshold: 0.0 }
    }

    pub fn is_masked(&self, intensity: f64) -> bool {
        !(intensity > 0.0) || intensity < self.threshold
    }

    pub fn check(&self, intensity: f64) -> Result<()> {
        if self.is_masked(intensity) {
            Err(Error::DegenerateNode {
                intensity,
                threshold: self.threshold,
            })
        } else {
            Ok(())
        }
    }
}
