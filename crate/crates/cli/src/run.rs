use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use varilab_core::bochner::{bochner_report, charts, GridImmersion};
use varilab_core::curvature::{delta_from_willmore, energy_from_field, mean_curvature, willmore_energy};
use varilab_core::mesh::io::{load, save, sidecar_path};
use varilab_core::moebius::{default_eta, invert, verify_with_inversion};
use varilab_core::monotonicity::{default_radii, density_profile, li_yau_check};
use varilab_core::rigidity::{rigidity_pipeline, rigidity_sweep, spread_ratio, RigidityOptions, SweepRow};
use varilab_core::zoo::{analytic_reference, generate, ZooKind, ZooSpec};
use varilab_core::DiscreteVarifold;

use crate::config::{BochnerArgs, ChartKind, Command, DensityArgs, Format, GenArgs, GenKind, InvertArgs, RigidityArgs, RunConfig};
use crate::report::{mesh_hash, CliError, Provenance, Record, Report, CRITERIA_FAILED};
use crate::suite::{run_suite, SuiteOptions};

const MESH_UNITS: &str = "lengths in input units, areas in length², energies and densities dimensionless";

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Report,
    /// Tabular rendering, for subcommands that have one.
    pub csv: Option<String>,
}

impl Outcome {
    /// The text written to the report destination.
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.report)? + "\n"),
            Format::Csv => self.csv.clone().ok_or_else(|| CliError::usage("no CSV rendering for this subcommand")),
        }
    }
}

struct Partial {
    records: Vec<Record>,
    csv: Option<String>,
    hash: Option<String>,
    exit_code: i32,
}

impl Partial {
    fn new(records: Vec<Record>, csv: Option<String>, hash: Option<String>) -> Self {
        Self { records, csv, hash, exit_code: 0 }
    }
}

fn csv_supported(cmd: &Command) -> bool {
    !matches!(cmd, Command::Gen(_) | Command::Invert(_))
}

/// Runs one subcommand on a dedicated thread pool.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    if config.format == Format::Csv && !csv_supported(&config.command) {
        return Err(CliError::usage("no CSV rendering for this subcommand; use --format json"));
    }
    if config.threads == Some(0) {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let start = Instant::now();
    let part = pool.install(|| dispatch(&config.command))?;
    Ok(Outcome {
        exit_code: part.exit_code,
        report: Report {
            config: config.clone(),
            records: part.records,
            provenance: Provenance {
                tool: "varilab",
                version: env!("CARGO_PKG_VERSION"),
                mesh_sha256: part.hash,
                wall_time_s: start.elapsed().as_secs_f64(),
                threads,
            },
        },
        csv: part.csv,
    })
}

fn dispatch(cmd: &Command) -> Result<Partial, CliError> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Energy(a) => energy(&a.input),
        Command::Curvature(a) => curvature(&a.input),
        Command::Density(a) => density(a),
        Command::Invert(a) => inversion(a),
        Command::Rigidity(a) => rigidity(a),
        Command::Bochner(a) => bochner(a),
        Command::Suite(a) => {
            let report = run_suite(&SuiteOptions { quick: a.quick, filter: a.filter.clone() });
            if report.results.is_empty() {
                return Err(CliError::usage(format!("no criterion matches filter {:?}", a.filter)));
            }
            let csv = report.to_csv();
            let failed = !report.passed;
            let mut part = Partial::new(vec![Record::new("suite::run_suite", "per measurement, see label", &report)], Some(csv), None);
            if failed {
                part.exit_code = CRITERIA_FAILED;
            }
            Ok(part)
        }
    }
}

fn read_mesh(path: &Path) -> Result<(DiscreteVarifold, String), CliError> {
    let mesh = load(path)?;
    Ok((mesh, mesh_hash(path)?))
}

fn spec_from_flags(kind: GenKind, a: &GenArgs) -> ZooSpec {
    let k = match kind {
        GenKind::Icosphere => ZooKind::Icosphere { subdiv: a.subdiv, radius: a.radius },
        GenKind::PerturbedSphere => ZooKind::PerturbedSphere { subdiv: a.subdiv, l: a.l, m: a.m, epsilon: a.epsilon },
        GenKind::Ellipsoid => ZooKind::Ellipsoid { subdiv: a.subdiv, axes: [a.axes[0], a.axes[1], a.axes[2]] },
        GenKind::Torus => ZooKind::Torus { major: a.major, minor: a.minor, n_major: 2 * a.n_minor, n_minor: a.n_minor },
        GenKind::YPrism => {
            let r = a.truncation.unwrap_or(10.0);
            ZooKind::YPrism { rings: a.rings, half_length: r, truncation: r }
        }
        GenKind::DoubleBubble => {
            ZooKind::DoubleBubble { rings: a.rings, pole_distance: 1.0, truncation: a.truncation, half_length: a.truncation }
        }
        GenKind::MultiplicitySphere => ZooKind::MultiplicitySphere { subdiv: a.subdiv, theta: a.theta },
    };
    ZooSpec { kind: k, seed: a.seed, jitter: a.jitter, ambient_dim: a.dim }
}

fn gen(a: &GenArgs) -> Result<Partial, CliError> {
    let spec = match (&a.spec, a.kind) {
        (Some(p), _) => serde_json::from_str::<ZooSpec>(&fs::read_to_string(p)?)?,
        (None, Some(k)) => spec_from_flags(k, a),
        (None, None) => return Err(CliError::usage("either --kind or --spec is required")),
    };
    let mesh = generate(&spec)?;
    let path = a.mesh.clone().unwrap_or_else(|| PathBuf::from(format!("{}.off", spec.name())));
    save(&mesh, &path)?;
    let result = json!({
        "spec": spec,
        "mesh_path": path,
        "sidecar_path": sidecar_path(&path),
        "vertices": mesh.num_vertices(),
        "faces": mesh.num_faces(),
        "euler_characteristic": mesh.euler_characteristic(),
        "closed": mesh.is_closed(),
        "total_mass": mesh.total_mass(),
        "analytic_reference": analytic_reference(&spec).ok(),
    });
    Ok(Partial::new(vec![Record::new("zoo::generate", MESH_UNITS, &result)], None, Some(mesh_hash(&path)?)))
}

fn energy(input: &Path) -> Result<Partial, CliError> {
    let (mesh, hash) = read_mesh(input)?;
    let e = willmore_energy(&mesh)?;
    let delta = delta_from_willmore(e.willmore);
    let mut value = serde_json::to_value(e)?;
    value["delta"] = json!(delta);
    value["total_mass"] = json!(mesh.total_mass());
    let mut csv = String::from("quantity,value\n");
    if let Some(obj) = value.as_object() {
        for (k, v) in obj {
            let _ = writeln!(csv, "{k},{v}");
        }
    }
    Ok(Partial::new(vec![Record::new("curvature::willmore_energy", MESH_UNITS, &value)], Some(csv), Some(hash)))
}

fn curvature(input: &Path) -> Result<Partial, CliError> {
    let (mesh, hash) = read_mesh(input)?;
    let field = mean_curvature(&mesh)?;
    let valid = (0..mesh.num_vertices()).filter(|&v| field.is_valid(v)).count();
    let max_h = (0..mesh.num_vertices())
        .map(|v| field.h(v).iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let e = energy_from_field(&mesh, &field);
    let result = json!({
        "vertices": mesh.num_vertices(),
        "valid_vertices": valid,
        "max_mean_curvature_norm": max_h,
        "mean_sq_integral": e.mean_sq_integral,
        "gauss_integral": e.gauss_integral,
        "excluded_mass": e.excluded_mass,
    });
    let units = "curvature in 1/length, integrals dimensionless";
    Ok(Partial::new(vec![Record::new("curvature::mean_curvature", units, &result)], Some(field.to_csv()), Some(hash)))
}

fn density(a: &DensityArgs) -> Result<Partial, CliError> {
    let (mesh, hash) = read_mesh(&a.input)?;
    let center = match (&a.center, a.vertex) {
        (Some(c), _) => c.clone(),
        (None, v) => {
            let v = v.unwrap_or(0);
            if v >= mesh.num_vertices() {
                return Err(CliError::usage(format!("vertex {v} out of range")));
            }
            mesh.vertex(v).to_vec()
        }
    };
    let radii = a.radii.clone().unwrap_or_else(|| default_radii(&mesh));
    let profile = density_profile(&mesh, &center, &radii)?;
    let csv = profile.to_csv();
    let mut records = vec![Record::new("monotonicity::density_profile", "radii in length, ratios dimensionless", &profile)];
    if a.li_yau {
        let rep = li_yau_check(&mesh)?;
        records.push(Record::new("monotonicity::li_yau_check", MESH_UNITS, &rep));
    }
    Ok(Partial::new(records, Some(csv), Some(hash)))
}

fn inversion(a: &InvertArgs) -> Result<Partial, CliError> {
    let (mesh, hash) = read_mesh(&a.input)?;
    let (pole, near) = match (&a.pole, a.vertex) {
        (Some(p), _) => (p.clone(), mesh.nearest_vertex(p).0),
        (None, v) => {
            let v = v.unwrap_or(0);
            if v >= mesh.num_vertices() {
                return Err(CliError::usage(format!("vertex {v} out of range")));
            }
            (mesh.vertex(v).to_vec(), v)
        }
    };
    let eta = a.eta.unwrap_or_else(|| default_eta(&mesh, near));
    let inv = invert(&mesh, &pole, eta)?;
    let image_energy = energy_from_field(&inv.image, &inv.recomputed);
    let summary = json!({
        "pole": pole,
        "eta": eta,
        "excised_mass": inv.excised_mass,
        "image_vertices": inv.image.num_vertices(),
        "image_faces": inv.image.num_faces(),
        "image_willmore": image_energy.willmore,
    });
    let mut records = vec![Record::new("moebius::invert", MESH_UNITS, &summary)];
    if mesh.is_closed() {
        let rep = verify_with_inversion(&mesh, &inv)?;
        records.push(Record::new("moebius::verify_with_inversion", MESH_UNITS, &rep));
    }
    if let Some(p) = &a.mesh {
        save(&inv.image, p)?;
    }
    Ok(Partial::new(records, None, Some(hash)))
}

#[derive(Debug, Clone, Serialize)]
struct SweepLine {
    epsilon: f64,
    willmore: f64,
    delta: f64,
    sup_deviation: f64,
    conformal_log_sup: f64,
    laplace_defect: f64,
    w22_deviation: f64,
    residual_sup: f64,
    coverage: f64,
    sup_over_delta: Option<f64>,
    conformal_over_delta: Option<f64>,
    sqrt_laplace_over_delta: Option<f64>,
    w22_over_delta_sq: Option<f64>,
    residual_over_delta: Option<f64>,
}

impl From<&SweepRow> for SweepLine {
    fn from(row: &SweepRow) -> Self {
        let r = &row.report;
        let c = r.empirical_constants.as_ref();
        Self {
            epsilon: row.epsilon,
            willmore: r.willmore,
            delta: r.delta,
            sup_deviation: r.metrics.sup_deviation,
            conformal_log_sup: r.metrics.conformal_log_sup,
            laplace_defect: r.metrics.laplace_defect,
            w22_deviation: r.metrics.w22_deviation,
            residual_sup: r.plane.residual_sup,
            coverage: r.coverage,
            sup_over_delta: c.map(|c| c.sup_deviation_over_delta),
            conformal_over_delta: c.map(|c| c.conformal_log_over_delta),
            sqrt_laplace_over_delta: c.map(|c| c.sqrt_laplace_defect_over_delta),
            w22_over_delta_sq: c.map(|c| c.w22_deviation_over_delta_sq),
            residual_over_delta: c.map(|c| c.residual_over_delta),
        }
    }
}

/// max/min of an optional series; ∞ when any entry is missing.
fn spread(values: impl Iterator<Item = Option<f64>>) -> f64 {
    let v: Option<Vec<f64>> = values.collect();
    v.map(|v| spread_ratio(&v)).unwrap_or(f64::INFINITY)
}

fn rigidity(a: &RigidityArgs) -> Result<Partial, CliError> {
    if !(a.eta_factor > 0.0) {
        return Err(CliError::usage("--eta-factor must be positive"));
    }
    let (mesh, hash) = read_mesh(&a.input)?;
    let opts = RigidityOptions { eta_factor: a.eta_factor, anchor: a.anchor.into() };
    let units = "metrics in the frame where the comparison sphere is the unit sphere; δ dimensionless";
    if let Some(eps) = &a.sweep {
        let rows = rigidity_sweep(&mesh, eps, &opts)?;
        let lines: Vec<SweepLine> = rows.iter().map(SweepLine::from).collect();
        let spreads = json!({
            "sup_over_delta": spread(lines.iter().map(|l| l.sup_over_delta)),
            "conformal_over_delta": spread(lines.iter().map(|l| l.conformal_over_delta)),
            "sqrt_laplace_over_delta": spread(lines.iter().map(|l| l.sqrt_laplace_over_delta)),
        });
        let stable = spreads.as_object().is_some_and(|o| o.values().all(|v| v.as_f64().is_some_and(|s| s < a.spread_tolerance)));
        let mut csv = String::from(
            "epsilon,willmore,delta,sup_deviation,conformal_log_sup,laplace_defect,w22_deviation,residual_sup,coverage,sup_over_delta,conformal_over_delta,sqrt_laplace_over_delta\n",
        );
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for l in &lines {
            let _ = writeln!(
                csv,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{}",
                l.epsilon,
                l.willmore,
                l.delta,
                l.sup_deviation,
                l.conformal_log_sup,
                l.laplace_defect,
                l.w22_deviation,
                l.residual_sup,
                l.coverage,
                opt(l.sup_over_delta),
                opt(l.conformal_over_delta),
                opt(l.sqrt_laplace_over_delta)
            );
        }
        let result = json!({
            "empirical_constants": lines,
            "spread": spreads,
            "spread_tolerance": a.spread_tolerance,
            "stable": stable,
            "reports": rows,
        });
        return Ok(Partial::new(vec![Record::new("rigidity::rigidity_sweep", units, &result)], Some(csv), Some(hash)));
    }
    let report = rigidity_pipeline(&mesh, &opts)?;
    let csv = report.correspondence_csv();
    if let Some(p) = &a.correspondence {
        fs::write(p, &csv)?;
    }
    Ok(Partial::new(vec![Record::new("rigidity::rigidity_pipeline", units, &report)], Some(csv), Some(hash)))
}

fn chart(a: &BochnerArgs) -> Result<GridImmersion, CliError> {
    if !(a.h > 0.0 && a.half_width > 0.0) {
        return Err(CliError::usage("--h and --half-width must be positive"));
    }
    let (l, h) = (a.half_width, a.h);
    Ok(match a.chart {
        ChartKind::Plane => charts::plane(l, h, a.rho)?,
        ChartKind::Stereographic => charts::stereographic(l, h)?,
        ChartKind::ScaledStereographic => charts::scaled_stereographic(l, h, a.rho, a.lambda)?,
        ChartKind::ComplexParabola => charts::complex_parabola(l, h, a.a)?,
        ChartKind::Catenoid => charts::catenoid(l, h)?,
    })
}

fn bochner(a: &BochnerArgs) -> Result<Partial, CliError> {
    let g = chart(a)?;
    let rep = bochner_report(&g)?;
    let csv = g.conformal_factor().to_csv(0, g.nodes - 1);
    let units = "chart coordinates dimensionless; v = log of the conformal factor";
    Ok(Partial::new(vec![Record::new("bochner::bochner_report", units, &rep)], Some(csv), None))
}

/// Parses `args`, runs, writes the report and returns the exit code. Errors
/// go to stderr as one JSON line each.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let err = CliError::usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json_line());
            return err.exit_code();
        }
    };
    match run(&config).and_then(|out| {
        let text = out.render(config.format)?;
        match &config.output {
            Some(p) => fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(out.exit_code)
    }) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
    }
}
