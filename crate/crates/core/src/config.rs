//! INI-style run configuration.
//!
//! ```text
//! [constants]
//! hbar = 1.0545718e-34
//! m = 9.10938356e-31
//!
//! [packet.neg]        # and [packet.pos]
//! x0 = 5e-7
//! dx0 = 7e-8
//!
//! [grid]
//! x_min = -3.5e-6
//! nx = 101
//! frames = 0, 3e-10, 6e-10
//!
//! [run]
//! scenario = uwea
//! born = 20000
//! seed = 7
//! ```
//!
//! Omitted keys take the preset values; unknown sections and keys are errors.
//! `#` and `;` start comments.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::export::FieldKind;
use crate::integrator::{DEFAULT_DT, DEFAULT_STRIDE};
use crate::scenario::{make_scenario, PacketOverrides, PacketParams, Scenario, ScenarioKind, ScenarioOverrides};

/// Spatial window, resolution and frame times of a field export.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nx: usize,
    pub nz: usize,
    pub frames: Vec<f64>,
}

pub const PLOT_HALF_WIDTH: f64 = 3.5e-6;
pub const DEFAULT_GRID_N: usize = 101;

impl GridSpec {
    /// ±3.5 µm, 101×101, six frames for `which`.
    pub fn plot_default(which: FieldKind) -> Self {
        Self {
            x_min: -PLOT_HALF_WIDTH,
            x_max: PLOT_HALF_WIDTH,
            z_min: -PLOT_HALF_WIDTH,
            z_max: PLOT_HALF_WIDTH,
            nx: DEFAULT_GRID_N,
            nz: DEFAULT_GRID_N,
            frames: which.default_frames(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max) || !(self.z_min < self.z_max) {
            return Err(Error::InvalidGrid("need x_min < x_max and z_min < z_max".into()));
        }
        if self.nx < 2 || self.nz < 2 {
            return Err(Error::InvalidGrid(format!(
                "nx = {}, nz = {}; both must be at least 2",
                self.nx, self.nz
            )));
        }
        if self.frames.is_empty() {
            return Err(Error::InvalidGrid("no frames".into()));
        }
        if self.frames.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidGrid("frame times must be finite and nonnegative".into()));
        }
        if self.frames.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("frame times must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// How trajectory starting points are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// n×n lattice inside each pinhole.
    Grid(usize),
    /// Born-rule samples of |ψ(t = 0)|².
    Born { count: usize, seed: u64 },
}

pub const DEFAULT_GRID_INIT: usize = 3;
pub const DEFAULT_SEED: u64 = 1;
/// Ensemble size of the equivariance check.
pub const DEFAULT_N_TRAJ: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// End time; `None` means the default of the chosen output.
    pub t_final: Option<f64>,
    pub dt: f64,
    pub stride: f64,
    pub init: InitMode,
    pub n_traj: usize,
    pub seed: u64,
    pub which: FieldKind,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            t_final: None,
            dt: DEFAULT_DT,
            stride: DEFAULT_STRIDE,
            init: InitMode::Grid(DEFAULT_GRID_INIT),
            n_traj: DEFAULT_N_TRAJ,
            seed: DEFAULT_SEED,
            which: FieldKind::Intensity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub grid: GridSpec,
    pub run: RunOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::preset(ScenarioKind::Ewea),
            grid: GridSpec::plot_default(FieldKind::Intensity),
            run: RunOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Section {
    Constants,
    PacketNeg,
    PacketPos,
    Grid,
    Run,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "constants" => Section::Constants,
            "packet.neg" => Section::PacketNeg,
            "packet.pos" => Section::PacketPos,
            "grid" => Section::Grid,
            "run" => Section::Run,
            _ => return None,
        })
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| err(line, format!("`{key}`: cannot parse `{value}`")))
}

fn packet_slot<'a>(o: &'a mut PacketOverrides, key: &str) -> Option<&'a mut Option<f64>> {
    Some(match key {
        "x0" => &mut o.x0,
        "z0" => &mut o.z0,
        "dx0" => &mut o.dx0,
        "kx" => &mut o.kx,
        "ky" => &mut o.ky,
        "kz" => &mut o.kz,
        "amp" => &mut o.amp,
        "chi" => &mut o.chi,
        _ => return None,
    })
}

#[derive(Default)]
struct GridKeys {
    x_min: Option<f64>,
    x_max: Option<f64>,
    z_min: Option<f64>,
    z_max: Option<f64>,
    nx: Option<usize>,
    nz: Option<usize>,
    frames: Option<Vec<f64>>,
}

#[derive(Default)]
struct RunKeys {
    scenario: Option<ScenarioKind>,
    t_final: Option<f64>,
    dt: Option<f64>,
    stride: Option<f64>,
    grid_init: Option<usize>,
    born: Option<usize>,
    seed: Option<u64>,
    n_traj: Option<usize>,
    which: Option<FieldKind>,
}

/// Parses a configuration document. Syntax errors carry their line number;
/// scenario and grid validation errors, which involve several keys, carry
/// line 0.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut overrides = ScenarioOverrides::default();
    let mut grid = GridKeys::default();
    let mut run = RunKeys::default();
    let mut section: Option<Section> = None;
    let mut seen_sections = HashSet::new();
    let mut seen_keys = HashSet::new();
    let mut init_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line, format!("malformed section header `{content}`")))?
                .trim();
            let s = Section::parse(name).ok_or_else(|| err(line, format!("unknown section `[{name}]`")))?;
            if !seen_sections.insert(s) {
                return Err(err(line, format!("section `[{name}]` appears twice")));
            }
            section = Some(s);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
        let sec = section.ok_or_else(|| err(line, format!("key `{key}` outside any section")))?;
        if !seen_keys.insert((sec, key.to_owned())) {
            return Err(err(line, format!("duplicate key `{key}`")));
        }
        let unknown = || err(line, format!("unknown key `{key}`"));

        match sec {
            Section::Constants => match key {
                "hbar" => overrides.hbar = Some(num(line, key, value)?),
                "m" => overrides.m = Some(num(line, key, value)?),
                _ => return Err(unknown()),
            },
            Section::PacketNeg | Section::PacketPos => {
                let o = if sec == Section::PacketNeg {
                    &mut overrides.neg
                } else {
                    &mut overrides.pos
                };
                let slot = packet_slot(o, key).ok_or_else(unknown)?;
                *slot = Some(num(line, key, value)?);
            }
            Section::Grid => match key {
                "x_min" => grid.x_min = Some(num(line, key, value)?),
                "x_max" => grid.x_max = Some(num(line, key, value)?),
                "z_min" => grid.z_min = Some(num(line, key, value)?),
                "z_max" => grid.z_max = Some(num(line, key, value)?),
                "nx" => grid.nx = Some(num(line, key, value)?),
                "nz" => grid.nz = Some(num(line, key, value)?),
                "frames" => {
                    grid.frames = Some(
                        value
                            .split(',')
                            .map(|v| num(line, key, v.trim()))
                            .collect::<Result<_>>()?,
                    )
                }
                _ => return Err(unknown()),
            },
            Section::Run => {
                match key {
                    "scenario" => run.scenario = Some(value.parse().map_err(|e: Error| err(line, e.to_string()))?),
                    "t_final" => run.t_final = Some(num(line, key, value)?),
                    "dt" => run.dt = Some(num(line, key, value)?),
                    "stride" => run.stride = Some(num(line, key, value)?),
                    "grid_init" => run.grid_init = Some(num(line, key, value)?),
                    "born" => run.born = Some(num(line, key, value)?),
                    "seed" => run.seed = Some(num(line, key, value)?),
                    "n_traj" => run.n_traj = Some(num(line, key, value)?),
                    "which" => run.which = Some(value.parse().map_err(|e: Error| err(line, e.to_string()))?),
                    _ => return Err(unknown()),
                }
                if matches!(key, "grid_init" | "born") {
                    init_line = line;
                }
            }
        }
    }

    let kind = run.scenario.unwrap_or(ScenarioKind::Ewea);
    let mut scenario = make_scenario(kind, Some(&overrides)).map_err(|e| err(0, e.to_string()))?;
    // a preset whose values were changed no longer carries that preset's reference values
    if kind != ScenarioKind::Custom && scenario != Scenario::preset(kind) {
        scenario.kind = ScenarioKind::Custom;
    }

    let defaults = RunOptions::default();
    let init = match (run.grid_init, run.born) {
        (Some(_), Some(_)) => return Err(err(init_line, "`grid_init` and `born` are mutually exclusive")),
        (Some(n), None) => InitMode::Grid(n),
        (None, Some(count)) => InitMode::Born {
            count,
            seed: run.seed.unwrap_or(DEFAULT_SEED),
        },
        (None, None) => defaults.init,
    };
    let which = run.which.unwrap_or_default();
    let options = RunOptions {
        t_final: run.t_final,
        dt: run.dt.unwrap_or(defaults.dt),
        stride: run.stride.unwrap_or(defaults.stride),
        init,
        n_traj: run.n_traj.unwrap_or(defaults.n_traj),
        seed: run.seed.unwrap_or(defaults.seed),
        which,
    };

    let base = GridSpec::plot_default(which);
    let grid = GridSpec {
        x_min: grid.x_min.unwrap_or(base.x_min),
        x_max: grid.x_max.unwrap_or(base.x_max),
        z_min: grid.z_min.unwrap_or(base.z_min),
        z_max: grid.z_max.unwrap_or(base.z_max),
        nx: grid.nx.unwrap_or(base.nx),
        nz: grid.nz.unwrap_or(base.nz),
        frames: grid.frames.unwrap_or_else(|| match options.t_final {
            Some(t) => crate::linspace(0.0, t, 6),
            None => base.frames,
        }),
    };
    grid.validate().map_err(|e| err(0, e.to_string()))?;

    Ok(RunConfig {
        scenario,
        grid,
        run: options,
    })
}

fn write_packet(out: &mut String, name: &str, p: &PacketParams) {
    let _ = writeln!(out, "\n[packet.{name}]");
    for (k, v) in [
        ("x0", p.x0),
        ("z0", p.z0),
        ("dx0", p.dx0),
        ("kx", p.kx),
        ("ky", p.ky),
        ("kz", p.kz),
        ("amp", p.amp),
        ("chi", p.chi),
    ] {
        let _ = writeln!(out, "{k} = {v:e}");
    }
}

/// Writes every key explicitly; floats use the shortest representation that
/// parses back to the same bits.
pub fn serialize(config: &RunConfig) -> String {
    let s = &config.scenario;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "[constants]\nhbar = {:e}\nm = {:e}",
        s.constants.hbar, s.constants.m
    );
    write_packet(&mut out, "neg", &s.packet_neg);
    write_packet(&mut out, "pos", &s.packet_pos);

    let g = &config.grid;
    let frames: Vec<String> = g.frames.iter().map(|t| format!("{t:e}")).collect();
    let _ = writeln!(
        out,
        "\n[grid]\nx_min = {:e}\nx_max = {:e}\nz_min = {:e}\nz_max = {:e}\nnx = {}\nnz = {}\nframes = {}",
        g.x_min,
        g.x_max,
        g.z_min,
        g.z_max,
        g.nx,
        g.nz,
        frames.join(", ")
    );

    let r = &config.run;
    let _ = writeln!(out, "\n[run]\nscenario = {}", s.kind);
    if let Some(t) = r.t_final {
        let _ = writeln!(out, "t_final = {t:e}");
    }
    let _ = writeln!(out, "dt = {:e}\nstride = {:e}", r.dt, r.stride);
    match r.init {
        InitMode::Grid(n) => {
            let _ = writeln!(out, "grid_init = {n}");
        }
        InitMode::Born { count, .. } => {
            let _ = writeln!(out, "born = {count}");
        }
    }
    let seed = match r.init {
        InitMode::Born { seed, .. } => seed,
        InitMode::Grid(_) => r.seed,
    };
    let _ = writeln!(out, "seed = {seed}\nn_traj = {}\nwhich = {}", r.n_traj, r.which);
    out
}

/// Scenario-only form of [`serialize`], with default grid and run sections.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    serialize(&RunConfig {
        scenario: *scenario,
        ..RunConfig::default()
    })
}
