//! Serializable run configuration. Every subcommand builds one of these, and
//! `run --config` replays it.

use std::path::{Path, PathBuf};

use polyring::quantum_well::WellGeometry;
use polyring::{IterationOptions, SearchOptions, TransformParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    /// Directory receiving one file per artifact; stdout only when absent.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Command {
    Polygon(PolygonConfig),
    Well(WellConfig),
    Ring(RingConfig),
    Map(MapConfig),
    Sweep(SweepConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolygonSource {
    Random { n: usize, seed: u64 },
    Regular { n: usize },
    Vertices { vertices: Vec<[f64; 2]> },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PolygonAction {
    Decompose,
    Eigen,
    Iterate { tol: f64, max_steps: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonConfig {
    pub source: PolygonSource,
    pub theta: f64,
    pub lambda: f64,
    pub action: PolygonAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellConfig {
    /// Well width `L` (nm).
    pub width: f64,
    /// Depth `V0` (meV).
    pub depth: f64,
    /// Circle length `l` (nm).
    pub circumference: f64,
    pub shift: f64,
    pub count: Option<usize>,
    pub grid_points: usize,
    /// Samples of the ground-state wavefunction over one period.
    pub psi_samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingGeometry {
    pub n: usize,
    pub width: f64,
    pub depth: f64,
    /// Well spacing `a` (nm).
    pub spacing: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    #[serde(flatten)]
    pub geometry: RingGeometry,
    pub truncate_nn: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSource {
    Raw { h11: f64, h12: f64 },
    WOnly,
    Ring(RingGeometry),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub theta: f64,
    pub lambda: f64,
    pub source: MapSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    pub lambda: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub steps: usize,
    /// Requested shard count; capped by `POLYRING_WORKERS`.
    pub workers: Option<usize>,
}

impl WellConfig {
    pub fn geometry(&self) -> Result<WellGeometry, CliError> {
        Ok(WellGeometry::new(self.width, self.circumference, self.depth)?.with_shift(self.shift)?)
    }

    pub fn search(&self) -> SearchOptions {
        SearchOptions { grid_points: self.grid_points, count_limit: self.count, ..SearchOptions::default() }
    }
}

impl RingGeometry {
    pub fn well(&self) -> Result<WellGeometry, CliError> {
        Ok(WellGeometry::for_ring(self.width, self.spacing, self.n, self.depth)?.with_shift(self.shift)?)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n < 3 {
            return Err(CliError::input(format!("--n must be at least 3, got {}", self.n)));
        }
        self.well()?;
        if self.width >= self.spacing {
            return Err(CliError::input(format!(
                "well width {} must be smaller than the spacing {}",
                self.width, self.spacing
            )));
        }
        Ok(())
    }
}

impl PolygonAction {
    pub fn iteration(&self) -> IterationOptions {
        match *self {
            PolygonAction::Iterate { tol, max_steps } => IterationOptions { tol, max_steps },
            _ => IterationOptions::default(),
        }
    }
}

fn positive(name: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CliError::input(format!("{name} must be finite and positive, got {value}")))
    }
}

impl Command {
    /// Checks every parameter against the preconditions of the operation it
    /// feeds, before any work is done.
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Command::Polygon(c) => {
                TransformParams::new(c.theta, c.lambda)?;
                match &c.source {
                    PolygonSource::Random { n, .. } | PolygonSource::Regular { n } if *n < 3 => {
                        return Err(CliError::input(format!("polygon needs at least 3 vertices, got {n}")));
                    }
                    PolygonSource::Vertices { vertices } if vertices.len() < 3 => {
                        return Err(CliError::input(format!(
                            "polygon needs at least 3 vertices, got {}",
                            vertices.len()
                        )));
                    }
                    _ => {}
                }
                if let PolygonAction::Iterate { tol, max_steps } = c.action {
                    positive("--tol", tol)?;
                    if max_steps == 0 {
                        return Err(CliError::input("--max-steps must be positive"));
                    }
                }
            }
            Command::Well(c) => {
                c.geometry()?;
                if c.grid_points < 2 {
                    return Err(CliError::input("--grid must be at least 2"));
                }
                if c.psi_samples == Some(0) {
                    return Err(CliError::input("--psi-samples must be positive"));
                }
            }
            Command::Ring(c) => c.geometry.validate()?,
            Command::Map(c) => {
                TransformParams::new(c.theta, c.lambda)?;
                match c.source {
                    MapSource::Raw { h11, h12 } => {
                        if !(h11.is_finite() && h12.is_finite()) {
                            return Err(CliError::input("--h11 and --h12 must be finite"));
                        }
                    }
                    MapSource::WOnly => {}
                    MapSource::Ring(g) => g.validate()?,
                }
            }
            Command::Sweep(c) => {
                TransformParams::new(c.theta_min, c.lambda)?;
                TransformParams::new(c.theta_max, c.lambda)?;
                if c.theta_min > c.theta_max {
                    return Err(CliError::input("--theta-min exceeds --theta-max"));
                }
                if c.n < 3 || c.steps == 0 || c.workers == Some(0) {
                    return Err(CliError::input("sweep needs n >= 3, steps >= 1 and workers >= 1"));
                }
            }
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(CliError::from)?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }
}
