//! `pinhole`: field grids, trajectories, visibility and model checks for the
//! two-pinhole Bohmian interference model.
//!
//! Exit status: 0 on success, 1 when a check or computation fails, 2 for
//! usage and configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pinhole_core::config::{parse_config, GridSpec, InitMode, RunConfig};
use pinhole_core::export::{export_field_grid, export_trajectories, FieldKind};
use pinhole_core::integrator::integrate_ensemble;
use pinhole_core::observables::{central_fringe_visibility, FringeProfile};
use pinhole_core::sampling::{born_sample_initials, square_grid_initials};
use pinhole_core::scenario::SCREEN_TIME;
use pinhole_core::verify::{run_verify, VerifyOptions};
use pinhole_core::{linspace, Scenario, ScenarioKind};

#[derive(Parser)]
#[command(
    name = "pinhole",
    version,
    about = "Two-pinhole interference in the de Broglie-Bohm picture"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export intensity or quantum-potential grids, one CSV per frame.
    Fields(FieldsArgs),
    /// Integrate a trajectory ensemble and export it as CSV.
    Trajectories(TrajectoryArgs),
    /// Print the central-fringe visibility on the z = 0 line.
    Visibility(VisibilityArgs),
    /// Run the model checks and print a report.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Ewea,
    Ewua,
    Uwea,
}

impl From<Preset> for ScenarioKind {
    fn from(p: Preset) -> Self {
        match p {
            Preset::Ewea => ScenarioKind::Ewea,
            Preset::Ewua => ScenarioKind::Ewua,
            Preset::Uwea => ScenarioKind::Uwea,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Intensity,
    Qpotential,
}

#[derive(Args)]
struct Common {
    /// Preset scenario.
    #[arg(long, value_enum, conflicts_with = "config")]
    scenario: Option<Preset>,
    /// INI configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// End time, s.
    #[arg(long)]
    t_final: Option<f64>,
}

#[derive(Args)]
struct FieldsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    which: Option<Which>,
    /// Number of frames, uniform over [0, t_final].
    #[arg(long)]
    frames: Option<usize>,
    /// Grid points per axis.
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    common: Common,
    /// RK4 step, s.
    #[arg(long)]
    dt: Option<f64>,
    /// n×n square lattice per pinhole.
    #[arg(long, value_name = "N", conflicts_with = "born")]
    grid_init: Option<usize>,
    /// N Born-rule samples of |psi(t = 0)|^2.
    #[arg(long, value_name = "N")]
    born: Option<usize>,
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct VisibilityArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Ensemble size of the equivariance check.
    #[arg(long)]
    n_traj: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Also write report.txt and report.kv here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print key=value lines instead of the text report.
    #[arg(long)]
    kv: bool,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
    Checks,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Usage)?;
            parse_config(&text)
                .with_context(|| format!("in {}", path.display()))
                .map_err(Failure::Usage)?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = common.scenario {
        cfg.scenario = Scenario::preset(p.into());
    }
    if let Some(t) = common.t_final {
        if t.is_nan() || t <= 0.0 {
            return Err(Failure::Usage(anyhow::anyhow!("--t-final must be positive")));
        }
        cfg.run.t_final = Some(t);
    }
    Ok(cfg)
}

fn fields(args: FieldsArgs) -> Result<(), Failure> {
    let mut cfg = load(&args.common)?;
    let which = match args.which {
        Some(Which::Intensity) => FieldKind::Intensity,
        Some(Which::Qpotential) => FieldKind::QPotential,
        None => cfg.run.which,
    };
    let frames_from_config = args.common.config.is_some() && args.frames.is_none() && args.common.t_final.is_none();
    let mut grid = if args.common.config.is_some() {
        cfg.grid.clone()
    } else {
        GridSpec::plot_default(which)
    };
    if !frames_from_config {
        let t_final = cfg.run.t_final.unwrap_or(which.default_t_final());
        grid.frames = linspace(0.0, t_final, args.frames.unwrap_or(6));
    }
    if let Some(n) = args.grid_n {
        grid.nx = n;
        grid.nz = n;
    }
    grid.validate().map_err(|e| Failure::Usage(e.into()))?;
    cfg.grid = grid;

    let summary = export_field_grid(&cfg.scenario, &cfg.grid, which, &args.out)
        .with_context(|| format!("writing to {}", args.out.display()))?;
    for f in &summary.files {
        println!("{}", f.display());
    }
    eprintln!(
        "{} frames of {} for {}, {} masked cells",
        summary.files.len(),
        which,
        cfg.scenario.kind,
        summary.masked
    );
    Ok(())
}

fn trajectories(args: TrajectoryArgs) -> Result<(), Failure> {
    let cfg = load(&args.common)?;
    let init = match (args.grid_init, args.born) {
        (Some(n), _) => InitMode::Grid(n),
        (None, Some(count)) => InitMode::Born {
            count,
            seed: args.seed.unwrap_or(cfg.run.seed),
        },
        (None, None) => match cfg.run.init {
            InitMode::Born { count, seed } => InitMode::Born {
                count,
                seed: args.seed.unwrap_or(seed),
            },
            grid => grid,
        },
    };
    let s = &cfg.scenario;
    let inits = match init {
        InitMode::Grid(n) => square_grid_initials(s, n),
        InitMode::Born { count, seed } => born_sample_initials(s, count, seed),
    }
    .map_err(|e| Failure::Usage(e.into()))?;
    let t_final = cfg.run.t_final.unwrap_or(SCREEN_TIME);
    let dt = args.dt.unwrap_or(cfg.run.dt);
    let stride = cfg.run.stride.max(dt);
    let trs = integrate_ensemble(s, &inits.points, 0.0, t_final, dt, stride).map_err(|e| Failure::Usage(e.into()))?;

    let path = args.out.join(format!("trajectories_{}.csv", s.kind));
    let rows = export_trajectories(&trs, &path).with_context(|| format!("writing {}", path.display()))?;
    let masked = trs.iter().filter(|t| !t.is_completed()).count();
    println!("{}", path.display());
    eprintln!("{} trajectories, {rows} rows, {masked} stopped at a node", trs.len());
    Ok(())
}

fn visibility(args: VisibilityArgs) -> Result<(), Failure> {
    let cfg = load(&args.common)?;
    let t = cfg.run.t_final.unwrap_or(SCREEN_TIME);
    let v =
        central_fringe_visibility(&FringeProfile::central_scan(&cfg.scenario, t)).context("measuring visibility")?;
    println!("scenario={}\nt={t:e}\nvisibility={v:.6}", cfg.scenario.kind);
    Ok(())
}

fn write_report(dir: &Path, text: &str, kv: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.txt"), text)?;
    fs::write(dir.join("report.kv"), kv)?;
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let cfg = load(&args.common)?;
    let defaults = VerifyOptions::default();
    let options = VerifyOptions {
        n_traj: args.n_traj.unwrap_or(if args.common.config.is_some() {
            cfg.run.n_traj
        } else {
            defaults.n_traj
        }),
        seed: args.seed.unwrap_or(cfg.run.seed),
        dt: args.dt.unwrap_or(cfg.run.dt),
    };
    if options.n_traj == 0 {
        return Err(Failure::Usage(anyhow::anyhow!("--n-traj must be at least 1")));
    }
    let report = run_verify(&cfg.scenario, &options);
    let (text, kv) = (format!("{report}\n"), report.key_values());
    print!("{}", if args.kv { &kv } else { &text });
    if let Some(dir) = &args.out {
        write_report(dir, &text, &kv).with_context(|| format!("writing report to {}", dir.display()))?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fields(a) => fields(a),
        Command::Trajectories(a) => trajectories(a),
        Command::Visibility(a) => visibility(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
