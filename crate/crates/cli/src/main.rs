mod commands;
mod config;
mod error;
mod input;
mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use config::{
    Command, Format, MapConfig, MapSource, OutputConfig, PolygonAction, PolygonConfig, PolygonSource, RingConfig,
    RingGeometry, RunConfig, SweepConfig, WellConfig,
};
use error::CliError;

/// Eigenpolygons of circulant polygon transformations and rings of coupled
/// quantum wells. Angles are radians, lengths nm, energies meV.
#[derive(Parser, Debug)]
#[command(name = "polyring", version, about)]
struct Cli {
    /// Rendering of the primary artifact on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write result.json and every table as CSV into this directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Write the run configuration to this file (replay with `run --config`).
    #[arg(long, global = true)]
    save_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decompose, inspect the spectrum of, or iterate a polygon under M(theta, lambda).
    Polygon(PolygonArgs),
    /// Bound states of one finite square well on a circle.
    Well(WellArgs),
    /// Overlap and Hamiltonian matrices of a ring of wells and their eigenstates.
    Ring(RingArgs),
    /// Map ring matrix entries onto M(theta, lambda).
    Map(MapArgs),
    /// Spectrum of M over a theta grid, sharded across workers.
    Sweep(SweepArgs),
    /// Replay a saved configuration.
    Run(RunArgs),
}

#[derive(Args, Debug)]
struct AngleArgs {
    /// theta in radians, inside (0, pi/2).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta_frac")]
    theta: Option<f64>,
    /// theta = P pi / Q.
    #[arg(long, num_args = 2, value_names = ["P", "Q"], allow_hyphen_values = true)]
    theta_frac: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    lambda: f64,
}

impl AngleArgs {
    /// Defaults to 2 pi / 5 when no angle is given.
    fn theta(&self) -> f64 {
        match (&self.theta, &self.theta_frac) {
            (Some(t), _) => *t,
            (None, Some(pq)) => pq[0] * PI / pq[1],
            (None, None) => 2.0 * PI / 5.0,
        }
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["random", "regular", "vertices", "file"])))]
struct PolygonArgs {
    /// Random polygon with N vertices drawn uniformly from [-1, 1]^2.
    #[arg(long, value_name = "N")]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Regular N-gon with vertices exp(2 pi i mu / N).
    #[arg(long, value_name = "N")]
    regular: Option<usize>,
    /// Inline vertices "re,im;re,im;...".
    #[arg(long, allow_hyphen_values = true)]
    vertices: Option<String>,
    /// One vertex per line, "re,im" or "re im"; '#' starts a comment.
    #[arg(long)]
    file: Option<PathBuf>,
    #[command(flatten)]
    angle: AngleArgs,
    #[command(subcommand)]
    action: PolygonCmd,
}

#[derive(Subcommand, Debug)]
enum PolygonCmd {
    /// Eigenpolygon coefficients and reconstruction residual.
    Decompose,
    /// Eigenvalues eta_k and the dominant index.
    Eigen,
    /// Normalised power iteration to the limit shape.
    Iterate {
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
    },
}

#[derive(Args, Debug)]
struct WellArgs {
    /// Well width L (nm).
    #[arg(long = "L")]
    width: f64,
    /// Well depth V0 (meV).
    #[arg(long = "V0")]
    depth: f64,
    /// Circle length l (nm).
    #[arg(long = "l")]
    circumference: f64,
    /// Potential offset V' (meV).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    shift: f64,
    /// Keep only the lowest COUNT states.
    #[arg(long)]
    count: Option<usize>,
    /// Bracketing grid points across the energy window.
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    /// Sample the ground-state wavefunction at this many points.
    #[arg(long)]
    psi_samples: Option<usize>,
}

#[derive(Args, Debug)]
struct RingGeometryArgs {
    /// Number of wells.
    #[arg(long)]
    n: usize,
    /// Well width L (nm).
    #[arg(long = "L")]
    width: f64,
    /// Well depth V0 (meV).
    #[arg(long = "V0")]
    depth: f64,
    /// Well spacing a (nm); the ring length is n a.
    #[arg(long = "a")]
    spacing: f64,
    /// Potential offset V' (meV).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    shift: f64,
}

impl RingGeometryArgs {
    fn config(&self) -> RingGeometry {
        RingGeometry { n: self.n, width: self.width, depth: self.depth, spacing: self.spacing, shift: self.shift }
    }
}

#[derive(Args, Debug)]
struct RingArgs {
    #[command(flatten)]
    geometry: RingGeometryArgs,
    /// Drop couplings beyond adjacent wells and report the resulting error.
    #[arg(long)]
    truncate_nn: bool,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("entries").required(true).args(["h11", "w_only", "n"])))]
struct MapArgs {
    #[command(flatten)]
    angle: AngleArgs,
    /// Raw diagonal entry H11 (meV).
    #[arg(long, allow_hyphen_values = true, requires = "h12")]
    h11: Option<f64>,
    /// Raw nearest-neighbour coupling H12 (meV).
    #[arg(long, allow_hyphen_values = true, requires = "h11")]
    h12: Option<f64>,
    /// Only the target entries W1, W2.
    #[arg(long)]
    w_only: bool,
    /// Ring geometry to assemble H from: number of wells.
    #[arg(long, requires_all = ["width", "depth", "spacing"])]
    n: Option<usize>,
    #[arg(long = "L")]
    width: Option<f64>,
    #[arg(long = "V0")]
    depth: Option<f64>,
    #[arg(long = "a")]
    spacing: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    shift: f64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-3)]
    theta_min: f64,
    #[arg(long, default_value_t = PI / 2.0 - 1e-3)]
    theta_max: f64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Shard count; POLYRING_WORKERS caps it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
}

fn build_command(cmd: Cmd) -> Result<Option<Command>, CliError> {
    Ok(Some(match cmd {
        Cmd::Polygon(a) => {
            let source = match (a.random, a.regular, a.vertices, a.file) {
                (Some(n), ..) => PolygonSource::Random { n, seed: a.seed },
                (_, Some(n), ..) => PolygonSource::Regular { n },
                (_, _, Some(list), _) => PolygonSource::Vertices { vertices: input::parse_inline(&list)? },
                (_, _, _, Some(path)) => PolygonSource::File { path },
                _ => unreachable!("clap enforces a polygon source"),
            };
            let action = match a.action {
                PolygonCmd::Decompose => PolygonAction::Decompose,
                PolygonCmd::Eigen => PolygonAction::Eigen,
                PolygonCmd::Iterate { tol, max_steps } => PolygonAction::Iterate { tol, max_steps },
            };
            Command::Polygon(PolygonConfig { source, theta: a.angle.theta(), lambda: a.angle.lambda, action })
        }
        Cmd::Well(a) => Command::Well(WellConfig {
            width: a.width,
            depth: a.depth,
            circumference: a.circumference,
            shift: a.shift,
            count: a.count,
            grid_points: a.grid,
            psi_samples: a.psi_samples,
        }),
        Cmd::Ring(a) => Command::Ring(RingConfig { geometry: a.geometry.config(), truncate_nn: a.truncate_nn }),
        Cmd::Map(a) => {
            let source = match (a.h11, a.h12, a.n) {
                (Some(h11), Some(h12), _) => MapSource::Raw { h11, h12 },
                (_, _, Some(n)) => MapSource::Ring(RingGeometry {
                    n,
                    width: a.width.unwrap_or(f64::NAN),
                    depth: a.depth.unwrap_or(f64::NAN),
                    spacing: a.spacing.unwrap_or(f64::NAN),
                    shift: a.shift,
                }),
                _ => MapSource::WOnly,
            };
            Command::Map(MapConfig { theta: a.angle.theta(), lambda: a.angle.lambda, source })
        }
        Cmd::Sweep(a) => Command::Sweep(SweepConfig {
            n: a.n,
            lambda: a.lambda,
            theta_min: a.theta_min,
            theta_max: a.theta_max,
            steps: a.steps,
            workers: a.workers,
        }),
        Cmd::Run(_) => return Ok(None),
    }))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match cli.command {
        Cmd::Run(RunArgs { config }) => {
            let mut c = RunConfig::load(&config)?;
            // Flags given on the command line override the saved output block.
            if cli.out_dir.is_some() {
                c.output.out_dir = cli.out_dir;
            }
            if cli.format != Format::default() {
                c.output.format = cli.format;
            }
            c
        }
        cmd => RunConfig {
            command: build_command(cmd)?.expect("non-run subcommand"),
            output: OutputConfig { format: cli.format, out_dir: cli.out_dir },
        },
    };
    if let Some(path) = &cli.save_config {
        config.save(path)?;
    }
    let out_dir = config.output.out_dir.as_deref();
    let report = commands::execute(&config.command, out_dir)?;
    output::emit(&config.command, &report, config.output.format, out_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
