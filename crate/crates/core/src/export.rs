//! Plot-ready CSV output for field grids and trajectory ensembles.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::GridSpec;
use crate::error::{Error, Result};
use crate::fields;
use crate::integrator::Trajectory;
use crate::mask::NodeMask;
use crate::scenario::{Scenario, LONG_SCREEN_TIME, SCREEN_TIME};
use crate::{linspace, Point};

/// Which scalar field a grid export carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldKind {
    #[default]
    Intensity,
    QPotential,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Intensity => "intensity",
            FieldKind::QPotential => "qpotential",
        }
    }

    /// End of the default six-frame sequence.
    pub fn default_t_final(self) -> f64 {
        match self {
            FieldKind::Intensity => SCREEN_TIME,
            FieldKind::QPotential => LONG_SCREEN_TIME,
        }
    }

    pub fn default_frames(self) -> Vec<f64> {
        linspace(0.0, self.default_t_final(), 6)
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intensity" => Ok(FieldKind::Intensity),
            "qpotential" | "q" => Ok(FieldKind::QPotential),
            other => Err(Error::param(
                "which",
                format!("unknown field `{other}` (intensity|qpotential)"),
            )),
        }
    }
}

/// One evaluated frame; `None` marks a masked cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFrame {
    pub t: f64,
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
    /// z-outer, x-inner.
    pub values: Vec<Option<f64>>,
}

impl FieldFrame {
    pub fn masked_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,z,value")?;
        let nx = self.xs.len();
        for (k, v) in self.values.iter().enumerate() {
            let (x, z) = (self.xs[k % nx], self.zs[k / nx]);
            match v {
                Some(v) => writeln!(w, "{x:.16e},{z:.16e},{v:.16e}")?,
                None => writeln!(w, "{x:.16e},{z:.16e},")?,
            }
        }
        Ok(())
    }
}

pub fn evaluate_frame(scenario: &Scenario, grid: &GridSpec, which: FieldKind, t: f64) -> FieldFrame {
    let xs = linspace(grid.x_min, grid.x_max, grid.nx);
    let zs = linspace(grid.z_min, grid.z_max, grid.nz);
    let mask = NodeMask::at(scenario, t);
    let values = (0..grid.nx * grid.nz)
        .into_par_iter()
        .map(|k| {
            let p = Point::xz(xs[k % grid.nx], zs[k / grid.nx], t);
            match which {
                FieldKind::Intensity => Some(fields::intensity(scenario, p)),
                FieldKind::QPotential => fields::quantum_potential_masked(scenario, p, &mask).ok().map(|q| q.q),
            }
        })
        .collect();
    FieldFrame { t, xs, zs, values }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportSummary {
    pub files: Vec<PathBuf>,
    /// Masked cells summed over all frames.
    pub masked: usize,
}

/// Writes `<which>_<index>.csv` for every frame of `grid` into `out_dir`.
pub fn export_field_grid(
    scenario: &Scenario,
    grid: &GridSpec,
    which: FieldKind,
    out_dir: &Path,
) -> Result<ExportSummary> {
    grid.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut summary = ExportSummary {
        files: Vec::with_capacity(grid.frames.len()),
        masked: 0,
    };
    for (i, &t) in grid.frames.iter().enumerate() {
        let frame = evaluate_frame(scenario, grid, which, t);
        let path = out_dir.join(format!("{}_{i:03}.csv", which.name()));
        let mut w = BufWriter::new(File::create(&path)?);
        frame.write_csv(&mut w)?;
        w.flush()?;
        summary.masked += frame.masked_count();
        summary.files.push(path);
    }
    Ok(summary)
}

pub const TRAJECTORY_HEADER: &str = "traj_id,t,x,y,z,vx,vy,vz,status";

/// Returns the number of data rows written.
pub fn write_trajectories<W: Write>(trajectories: &[Trajectory], mut w: W) -> Result<usize> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    let mut rows = 0;
    for (id, tr) in trajectories.iter().enumerate() {
        let status = tr.status.as_str();
        for s in &tr.samples {
            writeln!(
                w,
                "{id},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{status}",
                s.t, s.x, s.y, s.z, s.vx, s.vy, s.vz
            )?;
            rows += 1;
        }
    }
    Ok(rows)
}

pub fn export_trajectories(trajectories: &[Trajectory], path: &Path) -> Result<usize> {
    if trajectories.is_empty() {
        return Err(Error::param("trajectories", "nothing to export"));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    let rows = write_trajectories(trajectories, &mut w)?;
    w.flush()?;
    Ok(rows)
}
