use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use varilab_core::rigidity::PlaneAnchor;

/// Environment variable read for the default worker count.
pub const THREADS_ENV: &str = "VARILAB_THREADS";

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "varilab", version, about = "Numerical laboratory for integral 2-varifolds")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads; all cores when unset.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Report format. CSV is only offered for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Report path; stdout when omitted.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Generate a zoo surface and write it with its sidecar.
    Gen(GenArgs),
    /// Willmore energy and related integrals.
    Energy(InputArgs),
    /// Per-vertex mean curvature vectors (CSV) or a summary (JSON).
    Curvature(InputArgs),
    /// Density ratios and the monotone quantity at a point.
    Density(DensityArgs),
    /// Invert a mesh about a point and check the transformation law.
    Invert(InvertArgs),
    /// Comparison sphere and deviation metrics, optionally over an ε-sweep.
    Rigidity(RigidityArgs),
    /// Bochner identity and Liouville check on an analytic chart.
    Bochner(BochnerArgs),
    /// Run the acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Icosphere,
    PerturbedSphere,
    Ellipsoid,
    Torus,
    YPrism,
    DoubleBubble,
    MultiplicitySphere,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum, required_unless_present = "spec")]
    pub kind: Option<GenKind>,
    /// ZooSpec as a JSON file, instead of the flags below.
    #[arg(long, conflicts_with = "kind")]
    pub spec: Option<PathBuf>,
    /// Mesh path (.off or .obj); `<kind>.off` when omitted.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub subdiv: u32,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 2)]
    pub l: u32,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub m: i32,
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.2])]
    pub axes: Vec<f64>,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub major: f64,
    #[arg(long, default_value_t = 1.0)]
    pub minor: f64,
    /// Grid size around the tube; the long way gets twice as many.
    #[arg(long, default_value_t = 32)]
    pub n_minor: usize,
    #[arg(long, default_value_t = 16)]
    pub rings: usize,
    /// Truncation radius of the prism (open double bubble when set).
    #[arg(long)]
    pub truncation: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub theta: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct DensityArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Centre point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "vertex")]
    pub center: Option<Vec<f64>>,
    /// Centre at this vertex (vertex 0 when neither is given).
    #[arg(long)]
    pub vertex: Option<usize>,
    /// Radii schedule; eight log-spaced radii by default.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Also run the Li-Yau and diameter checks.
    #[arg(long)]
    pub li_yau: bool,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct InvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "vertex")]
    pub pole: Option<Vec<f64>>,
    /// Pole at this vertex (vertex 0 when neither is given).
    #[arg(long)]
    pub vertex: Option<usize>,
    /// Excision radius; 2.5× the pole's longest edge by default.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Write the inverted mesh here.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorArg {
    FarEndpoint,
    WeightedCentroid,
}

impl From<AnchorArg> for PlaneAnchor {
    fn from(a: AnchorArg) -> Self {
        match a {
            AnchorArg::FarEndpoint => PlaneAnchor::FarEndpoint,
            AnchorArg::WeightedCentroid => PlaneAnchor::WeightedCentroid,
        }
    }
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct RigidityArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// ε values: run on (2,0) perturbations of the input's radial projection.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2.5)]
    pub eta_factor: f64,
    #[arg(long, value_enum, default_value_t = AnchorArg::FarEndpoint)]
    pub anchor: AnchorArg,
    /// Largest acceptable max/min of each δ-normalized metric over a sweep.
    #[arg(long, default_value_t = 2.0)]
    pub spread_tolerance: f64,
    /// Write the vertexwise correspondence as CSV.
    #[arg(long)]
    pub correspondence: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Plane,
    Stereographic,
    ScaledStereographic,
    ComplexParabola,
    Catenoid,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct BochnerArgs {
    #[arg(long, value_enum, default_value_t = ChartKind::Stereographic)]
    pub chart: ChartKind,
    /// Grid spacing.
    #[arg(long, default_value_t = 1.0 / 32.0)]
    pub h: f64,
    /// Half-width L of the square [−L, L]².
    #[arg(long = "half-width", default_value_t = 2.0)]
    pub half_width: f64,
    /// Sphere radius (scaled chart) or plane scale.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Domain dilation of the scaled chart.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Coefficient of the complex parabola z ↦ (z, a z²).
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct SuiteArgs {
    /// Reduce mesh resolutions by one step.
    #[arg(long)]
    pub quick: bool,
    /// Only criteria whose module tag or id (e.g. `moebius`, `c7`) matches.
    #[arg(long)]
    pub filter: Option<String>,
}
