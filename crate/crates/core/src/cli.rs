//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 on invalid input (arguments, configuration,
//! geometry, schedules), 1 on runtime failure (instability, non-convergence,
//! unwritable output). Every run with well-formed arguments writes
//! `manifest.json` into the output directory, listing SHA-256 digests of its
//! inputs and outputs together with the exit status.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{self, Config, ConfigError};
use crate::export::{emit_deck, DeckOptions, ExportError};
use crate::fiberpath::{self, FiberError, HelixStyle, WindingSpec};
use crate::geometry::{
    build_geometry_a, build_geometry_b, ActuatorSpec, DeviceSpec, GeometryAParams, GeometryBParams, GeometryError,
};
use crate::materials::{MaterialError, MaterialLibrary};
use crate::mechanics::calibrate::{default_anchors, ranking};
use crate::mechanics::{self, compose_device, Anchor, ConfigKey, Corridor, MechanicsError, SegmentModel, SolveResult};
use crate::plot::{render_plot, PlotError, PlotKind, Series};
use crate::postprocess::{self, io, PairSelection, PostprocessError, PressureSchedule};

const SECTIONS: [&str; 5] = ["geometry", "winding", "model", "schedule", "device"];

#[derive(Debug, Parser)]
#[command(
    name = "softbend",
    version,
    about = "Design and analysis workbench for fibre-reinforced soft bending actuators"
)]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Output directory.
    #[arg(long, short, global = true, env = "SOFTBEND_OUT", default_value = "softbend-out")]
    pub out: PathBuf,
    /// Configuration file (`[section]` headers, `key = value` lines).
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// JSON material database merged over the built-in library.
    #[arg(long, global = true)]
    pub material_db: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the actuator geometry; writes spec.json and cross_section.csv.
    Design,
    /// Generate fibre paths; writes fibre_<k>.csv and wind.json.
    Wind(WindingArgs),
    /// Quasi-static pressure response; writes result.csv and plots.
    Simulate(SimulateArgs),
    /// Simulate every style and turn-count combination.
    Sweep(SweepArgs),
    /// Post-process node histories and bench logs.
    Analyze(AnalyzeArgs),
    /// Write a neutral FEM deck.
    ExportDeck(WindingArgs),
    /// Fit model constants to reference values and rank the reference set.
    Calibrate(CalibrateArgs),
    /// Tip workspace over the pressure schedule.
    Workspace(WorkspaceArgs),
}

#[derive(Debug, Args, Clone)]
pub struct WindingArgs {
    /// Helix style, SH or DH.
    #[arg(long)]
    pub style: Option<HelixStyle>,
    /// Turn count.
    #[arg(long)]
    pub turns: Option<u32>,
}

#[derive(Debug, Args, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub winding: WindingArgs,
    /// Peak pressure in kPa, replacing the schedule's.
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Embed the actuator in the device body.
    #[arg(long)]
    pub device: bool,
    /// Include the rigid payload (implies --device).
    #[arg(long)]
    pub payload: bool,
}

#[derive(Debug, Args, Clone)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![HelixStyle::Sh, HelixStyle::Dh])]
    pub styles: Vec<HelixStyle>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![9u32, 18, 30, 50, 100])]
    pub turns: Vec<u32>,
    #[arg(long)]
    pub p_max: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct AnalyzeArgs {
    /// Initial node coordinates: `node_id,x0,y0,z0`.
    #[arg(long, requires = "displacements")]
    pub nodes: Option<PathBuf>,
    /// Node displacements: `node_id,t,ux_mm,uy_mm,uz_mm`.
    #[arg(long, requires = "nodes")]
    pub displacements: Option<PathBuf>,
    /// Tip node; defaults to the node nearest the flat-side tip edge.
    #[arg(long)]
    pub tip_node: Option<u64>,
    /// Fixed reference point `x,y,z` in mm; defaults to the flat-side base edge.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub reference: Option<Vec<f64>>,
    /// Bench log: `pressure_kPa,theta_deg,timestamp`.
    #[arg(long)]
    pub bench_log: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct CalibrateArgs {
    /// Angle anchor `LABEL@kPa=deg`, e.g. `SH30@100=90`. Repeatable.
    #[arg(long)]
    pub theta: Vec<String>,
    /// Twist anchor `LABEL@kPa=percent`.
    #[arg(long)]
    pub twist: Vec<String>,
    /// Expansion anchor `LABEL@kPa=mm`.
    #[arg(long)]
    pub expansion: Vec<String>,
    /// Reference configurations left out of the ranking.
    #[arg(long, value_delimiter = ',', default_values_t = vec!["DH50".to_string()])]
    pub exclude: Vec<String>,
}

#[derive(Debug, Args, Clone)]
pub struct WorkspaceArgs {
    #[command(flatten)]
    pub sim: SimulateArgs,
    /// Corridor radius in mm; defaults to the device body radius.
    #[arg(long)]
    pub corridor_radius: Option<f64>,
    /// Corridor length in mm; defaults to the device body length.
    #[arg(long)]
    pub corridor_length: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Validation(e.to_string())
            }
        }
    )*};
}
validation_from!(ConfigError, GeometryError, FiberError, MaterialError, PostprocessError, ExportError);

impl From<MechanicsError> for CliError {
    fn from(e: MechanicsError) -> Self {
        match e {
            MechanicsError::Instability { .. }
            | MechanicsError::Bracket { .. }
            | MechanicsError::NonConvergence { .. } => CliError::Runtime(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<PlotError> for CliError {
    fn from(e: PlotError) -> Self {
        CliError::Runtime(format!("plot: {e}"))
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
struct FileRecord {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    arguments: &'a [String],
    inputs: &'a [FileRecord],
    outputs: &'a [FileRecord],
    status: &'static str,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<&'a str>,
}

/// Output directory plus the record of what was read and written.
pub struct Run {
    out: PathBuf,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
}

impl Run {
    fn new(out: PathBuf) -> Self {
        Self { out, inputs: Vec::new(), outputs: Vec::new() }
    }

    fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        self.inputs.push(FileRecord { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(bytes)
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let bytes = contents.as_ref();
        let path = self.out.join(name);
        std::fs::create_dir_all(&self.out)
            .and_then(|_| std::fs::write(&path, bytes))
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        self.outputs.push(FileRecord { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    fn manifest(&mut self, command: &str, args: &[String], result: &Result<(), CliError>) {
        let (status, code, message) = match result {
            Ok(()) => ("ok", 0, None),
            Err(e) => ("failed", e.exit_code(), Some(e.message())),
        };
        let m = Manifest {
            tool: "softbend",
            version: crate::VERSION,
            command,
            arguments: args,
            inputs: &self.inputs,
            outputs: &self.outputs,
            status,
            exit_code: code,
            message,
        };
        let text = serde_json::to_string_pretty(&m).expect("manifest serialises") + "\n";
        let path = self.out.join("manifest.json");
        if let Err(e) = std::fs::create_dir_all(&self.out).and_then(|_| std::fs::write(&path, text)) {
            eprintln!("softbend: cannot write {}: {e}", path.display());
        }
    }
}

/// Everything a command needs from the configuration file and global flags.
struct Setup {
    config: Config,
    materials: MaterialLibrary,
}

impl Setup {
    fn load(cli: &Cli, run: &mut Run) -> Result<Self, CliError> {
        let config = match &cli.config {
            Some(p) => {
                let bytes = run.read_input(p)?;
                let text = String::from_utf8(bytes)
                    .map_err(|_| CliError::Validation(format!("{}: not UTF-8", p.display())))?;
                Config::parse(&text)?
            }
            None => Config::default(),
        };
        config.expect_sections(&SECTIONS)?;
        let materials = match &cli.material_db {
            Some(p) => {
                run.read_input(p)?;
                MaterialLibrary::load(p)?
            }
            None => MaterialLibrary::default(),
        };
        Ok(Self { config, materials })
    }

    fn spec(&self) -> Result<ActuatorSpec, CliError> {
        let section = self.config.section("geometry");
        let kind = self.config.raw("geometry", "type").unwrap_or("A");
        let spec = match kind.to_ascii_uppercase().as_str() {
            "A" => build_geometry_a(&config::apply(&GeometryAParams::default(), "geometry", section, &["type"])?)?,
            "B" => build_geometry_b(&config::apply(&GeometryBParams::default(), "geometry", section, &["type"])?)?,
            other => return Err(CliError::Validation(format!("[geometry] type must be A or B, got '{other}'"))),
        };
        for w in &spec.warnings {
            eprintln!("warning: {w}");
        }
        Ok(spec)
    }

    fn device(&self) -> Result<(DeviceSpec, bool, bool), CliError> {
        let d =
            config::apply(&DeviceSpec::default(), "device", self.config.section("device"), &["enabled", "payload"])?;
        let enabled = self.config.get::<bool>("device", "enabled")?.unwrap_or(false);
        let payload = self.config.get::<bool>("device", "payload")?.unwrap_or(false);
        Ok((d, enabled, payload))
    }

    /// The spec, composed into the device body when requested.
    fn device_spec(&self, spec: &ActuatorSpec, args: &SimulateArgs) -> Result<ActuatorSpec, CliError> {
        let (device, enabled, payload) = self.device()?;
        let payload = payload || args.payload;
        if enabled || args.device || payload {
            Ok(compose_device(spec, &device, payload)?)
        } else {
            Ok(spec.clone())
        }
    }

    fn style_turns(&self, args: &WindingArgs) -> Result<(HelixStyle, u32), CliError> {
        let style = match args.style {
            Some(s) => s,
            None => self.config.get::<HelixStyle>("winding", "style")?.unwrap_or(HelixStyle::Sh),
        };
        let turns = match args.turns {
            Some(t) => t,
            None => self.config.get::<u32>("winding", "turns")?.unwrap_or(30),
        };
        Ok((style, turns))
    }

    /// One winding per chamber.
    fn windings(&self, spec: &ActuatorSpec, style: HelixStyle, turns: u32) -> Result<Vec<WindingSpec>, CliError> {
        let base = config::apply(
            &WindingSpec::for_spec(spec, style, turns),
            "winding",
            self.config.section("winding"),
            &["style", "turns"],
        )?;
        let ws: Vec<WindingSpec> = (0..spec.chambers.len()).map(|k| base.clone().on_chamber(spec, k)).collect();
        for w in &ws {
            w.validate()?;
        }
        Ok(ws)
    }

    fn model(&self) -> Result<SegmentModel, CliError> {
        let m = config::apply(&SegmentModel::default(), "model", self.config.section("model"), &[])?;
        m.validate()?;
        Ok(m)
    }

    fn schedule(&self, p_max: Option<f64>) -> Result<PressureSchedule, CliError> {
        let section = self.config.section("schedule");
        let kind = self.config.raw("schedule", "kind").unwrap_or("proportional");
        let mut s = match kind {
            "proportional" => config::apply(
                &PressureSchedule::Proportional { t_end: 1.0, p_max: 100.0, samples: 11 },
                "schedule",
                section,
                &[],
            )?,
            "stepped" => config::apply(&PressureSchedule::bench_protocol(), "schedule", section, &[])?,
            "explicit" => {
                if let Some(extra) = section.and_then(|s| s.keys().find(|k| *k != "kind" && *k != "points")) {
                    return Err(ConfigError::UnknownKey { section: "schedule".into(), key: extra.clone() }.into());
                }
                let text = self.config.raw("schedule", "points").ok_or_else(|| {
                    CliError::Validation("[schedule] explicit schedules need points = t:p, ...".into())
                })?;
                let mut points = Vec::new();
                for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let pair =
                        item.split_once(':').and_then(|(t, p)| Some((t.trim().parse().ok()?, p.trim().parse().ok()?)));
                    points.push(pair.ok_or_else(|| CliError::Validation(format!("[schedule] bad point '{item}'")))?);
                }
                PressureSchedule::Explicit { points }
            }
            other => return Err(CliError::Validation(format!("[schedule] unknown kind '{other}'"))),
        };
        if let Some(p) = p_max {
            match &mut s {
                PressureSchedule::Proportional { p_max, .. } | PressureSchedule::Stepped { p_max, .. } => *p_max = p,
                PressureSchedule::Explicit { .. } => {
                    return Err(CliError::Validation("--p-max cannot rescale an explicit schedule".into()))
                }
            }
        }
        s.validate()?;
        Ok(s)
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let mut run = Run::new(cli.out.clone());
    let result = dispatch(&cli, &mut run);
    match &result {
        Ok(()) => {}
        Err(e) => eprintln!("softbend: {}", e.message()),
    }
    run.manifest(command_name(&cli.command), &args, &result);
    result.map_or_else(|e| e.exit_code(), |_| 0)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Design => "design",
        Command::Wind(_) => "wind",
        Command::Simulate(_) => "simulate",
        Command::Sweep(_) => "sweep",
        Command::Analyze(_) => "analyze",
        Command::ExportDeck(_) => "export-deck",
        Command::Calibrate(_) => "calibrate",
        Command::Workspace(_) => "workspace",
    }
}

fn dispatch(cli: &Cli, run: &mut Run) -> Result<(), CliError> {
    let setup = Setup::load(cli, run)?;
    match &cli.command {
        Command::Design => design(&setup, run),
        Command::Wind(a) => wind(&setup, run, a),
        Command::Simulate(a) => simulate(&setup, run, a),
        Command::Sweep(a) => sweep(&setup, run, a),
        Command::Analyze(a) => analyze(&setup, run, a),
        Command::ExportDeck(a) => export_deck(&setup, run, a),
        Command::Calibrate(a) => calibrate(&setup, run, a),
        Command::Workspace(a) => workspace(&setup, run, a),
    }
}

fn design(setup: &Setup, run: &mut Run) -> Result<(), CliError> {
    let spec = setup.spec()?;
    run.write("spec.json", spec.to_json() + "\n")?;
    run.write("cross_section.csv", spec.cross_section_csv())?;
    let m = &spec.metrics;
    println!(
        "chambers: {}  area: {:.3} mm^2  volume: {:.1} mm^3  min wall: {:.3} mm  length: {:.1} mm",
        spec.chambers.len(),
        m.cross_section_area,
        m.nominal_volume,
        m.min_wall,
        spec.total_length
    );
    Ok(())
}

#[derive(Serialize)]
struct WindReport {
    chamber: usize,
    style: HelixStyle,
    turns: u32,
    pitch_mm: f64,
    length_mm: f64,
    turn_density_per_mm: f64,
    crossings: usize,
    max_surface_deviation_mm: f64,
}

fn wind(setup: &Setup, run: &mut Run, args: &WindingArgs) -> Result<(), CliError> {
    let spec = setup.spec()?;
    let (style, turns) = setup.style_turns(args)?;
    let mut reports = Vec::new();
    for (k, w) in setup.windings(&spec, style, turns)?.iter().enumerate() {
        let path = fiberpath::generate_helix(&spec, w)?;
        let m = fiberpath::path_metrics(&path);
        run.write(&format!("fibre_{}.csv", k + 1), fiberpath::path_csv(&path))?;
        let r = WindReport {
            chamber: k,
            style,
            turns,
            pitch_mm: m.pitch,
            length_mm: m.total_length,
            turn_density_per_mm: m.turn_density,
            crossings: fiberpath::crossing_count(&path),
            max_surface_deviation_mm: fiberpath::surface_deviation(&path),
        };
        println!(
            "chamber {}: {}{} {}  pitch {:.4} mm  length {:.2} mm  crossings {}",
            k + 1,
            style,
            turns,
            w.chirality,
            r.pitch_mm,
            r.length_mm,
            r.crossings
        );
        reports.push(r);
    }
    run.write("wind.json", serde_json::to_string_pretty(&reports).expect("serialisable") + "\n")?;
    Ok(())
}

fn result_plots(run: &mut Run, label: &str, r: &SolveResult) -> Result<(), CliError> {
    if r.is_empty() {
        return Ok(());
    }
    run.write(
        "angle_pressure.svg",
        render_plot(PlotKind::AnglePressure, &[Series::new(label, r.pressures.clone(), r.theta.clone())])?,
    )?;
    run.write(
        "expansion_pressure.svg",
        render_plot(
            PlotKind::ExpansionPressure,
            &[Series::new(label, r.pressures.clone(), r.radial_expansion.clone())],
        )?,
    )?;
    run.write(
        "trajectory.svg",
        render_plot(
            PlotKind::Trajectory,
            &[Series::new(label, r.tip_xyz.iter().map(|t| t[0]).collect(), r.tip_xyz.iter().map(|t| t[2]).collect())],
        )?,
    )?;
    Ok(())
}

/// Runs a solve, returning the (possibly partial) result and the failure.
fn solve(
    spec: &ActuatorSpec,
    windings: &[WindingSpec],
    materials: &MaterialLibrary,
    schedule: &PressureSchedule,
    seg: &SegmentModel,
) -> (SolveResult, Option<MechanicsError>) {
    match mechanics::solve_quasi_static(spec, windings, materials, schedule, seg) {
        Ok(r) => (r, None),
        Err(MechanicsError::Instability { pressure_kpa, critical_kpa, expansion_mm, limit_mm, partial }) => {
            let r = (*partial).clone();
            (
                r,
                Some(MechanicsError::Instability {
                    pressure_kpa,
                    critical_kpa,
                    expansion_mm,
                    limit_mm,
                    partial: Box::new(SolveResult::default()),
                }),
            )
        }
        Err(e) => (SolveResult::default(), Some(e)),
    }
}

fn simulate(setup: &Setup, run: &mut Run, args: &SimulateArgs) -> Result<(), CliError> {
    let bare = setup.spec()?;
    let spec = setup.device_spec(&bare, args)?;
    let (style, turns) = setup.style_turns(&args.winding)?;
    let windings = setup.windings(&spec, style, turns)?;
    let seg = setup.model()?;
    let schedule = setup.schedule(args.p_max)?;
    let (r, err) = solve(&spec, &windings, &setup.materials, &schedule, &seg);
    if let Some(
        e @ (MechanicsError::Instability { .. }
        | MechanicsError::Bracket { .. }
        | MechanicsError::NonConvergence { .. }),
    ) = &err
    {
        let _ = e;
    } else if let Some(e) = err {
        return Err(e.into());
    }
    let label = format!("{style}{turns}");
    run.write("result.csv", r.to_csv())?;
    result_plots(run, &label, &r)?;
    if let (Some(p), Some(t)) = (r.pressures.last(), r.theta.last()) {
        println!("{label}: theta {t:.2} deg at {p:.1} kPa");
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn sweep(setup: &Setup, run: &mut Run, args: &SweepArgs) -> Result<(), CliError> {
    let spec = setup.spec()?;
    let seg = setup.model()?;
    let schedule = setup.schedule(args.p_max)?;
    schedule.monotone_legs()?;
    if args.styles.is_empty() || args.turns.is_empty() {
        return Err(CliError::Validation("sweep needs at least one style and one turn count".into()));
    }
    let mut keys = Vec::new();
    for &style in &args.styles {
        for &turns in &args.turns {
            keys.push((style, turns, setup.windings(&spec, style, turns)?));
        }
    }
    let results: Vec<(SolveResult, Option<MechanicsError>)> =
        keys.par_iter().map(|(_, _, ws)| solve(&spec, ws, &setup.materials, &schedule, &seg)).collect();

    let mut status: BTreeMap<(u32, HelixStyle), (f64, f64, String)> = BTreeMap::new();
    let mut series = Vec::new();
    let mut hard_failure = None;
    for ((style, turns, _), (r, err)) in keys.iter().zip(&results) {
        let label = format!("{style}{turns}");
        run.write(&format!("{label}.csv"), r.to_csv())?;
        let s = match err {
            None => "ok".to_string(),
            Some(MechanicsError::Instability { pressure_kpa, .. }) => format!("unstable at {pressure_kpa} kPa"),
            Some(e) => {
                hard_failure.get_or_insert_with(|| format!("{label}: {e}"));
                format!("failed: {e}")
            }
        };
        let theta = r.theta.last().copied().unwrap_or(f64::NAN);
        let reached = r.pressures.last().copied().unwrap_or(f64::NAN);
        status.insert((*turns, *style), (theta, reached, s));
        if !r.is_empty() {
            series.push(Series::new(label, r.pressures.clone(), r.theta.clone()));
        }
    }
    let mut summary = String::from("turns");
    for style in &args.styles {
        summary.push_str(&format!(",{style}_theta_deg,{style}_pressure_kPa,{style}_status"));
    }
    summary.push('\n');
    let mut turns_sorted = args.turns.clone();
    turns_sorted.sort_unstable();
    turns_sorted.dedup();
    for t in turns_sorted {
        summary.push_str(&t.to_string());
        for style in &args.styles {
            let (theta, p, s) = &status[&(t, *style)];
            summary.push_str(&format!(",{theta:.2},{p:.1},{s}"));
        }
        summary.push('\n');
    }
    run.write("summary.csv", &summary)?;
    if !series.is_empty() {
        run.write("sweep_angle_pressure.svg", render_plot(PlotKind::AnglePressure, &series)?)?;
    }
    print!("{summary}");
    match hard_failure {
        Some(m) => Err(CliError::Runtime(m)),
        None => Ok(()),
    }
}

fn analyze(setup: &Setup, run: &mut Run, args: &AnalyzeArgs) -> Result<(), CliError> {
    if args.nodes.is_none() && args.bench_log.is_none() {
        return Err(CliError::Validation("analyze needs --nodes with --displacements, or --bench-log".into()));
    }
    let spec = setup.spec()?;
    let schedule = setup.schedule(None)?;
    let mut summary = serde_json::Map::new();
    if let (Some(np), Some(dp)) = (&args.nodes, &args.displacements) {
        let nodes = io::parse_nodes(run.read_input(np)?.as_slice(), &np.display().to_string())?;
        let hist = io::parse_histories(run.read_input(dp)?.as_slice(), &nodes, &dp.display().to_string())?;
        let reference = match &args.reference {
            Some(v) => [v[0], v[1], v[2]],
            None => postprocess::angle::reference_point(&spec),
        };
        let tip_id = match args.tip_node {
            Some(id) => id,
            None => {
                let target = [0.0, spec.flat_y, spec.total_length];
                let d =
                    |p: &[f64; 3]| (p[0] - target[0]).powi(2) + (p[1] - target[1]).powi(2) + (p[2] - target[2]).powi(2);
                nodes
                    .iter()
                    .filter(|(id, _)| hist.contains_key(id))
                    .min_by(|a, b| d(&a.1).total_cmp(&d(&b.1)).then(a.0.cmp(&b.0)))
                    .map(|n| n.0)
                    .ok_or(PostprocessError::Empty("displaced nodes".into()))?
            }
        };
        let tip = hist.get(&tip_id).ok_or(PostprocessError::MissingHistory(tip_id))?;
        let mut csv = String::from("t,pressure_kPa,theta_deg\n");
        let (mut ps, mut ths) = (Vec::new(), Vec::new());
        for &(t, _) in &tip.samples {
            let p = schedule.time_to_pressure(t)?;
            let th = postprocess::bending_angle(reference, tip, t)?;
            csv.push_str(&format!("{t:.6},{p:.6},{th:.6}\n"));
            ps.push(p);
            ths.push(th);
        }
        run.write("angles.csv", &csv)?;
        run.write(
            "angle_pressure.svg",
            render_plot(PlotKind::AnglePressure, &[Series::new(format!("node {tip_id}"), ps, ths.clone())])?,
        )?;
        summary.insert("tip_node".into(), tip_id.into());
        summary.insert("max_theta_deg".into(), ths.iter().cloned().fold(0.0, f64::max).into());

        match postprocess::select_radial_pairs(&nodes, &spec, &PairSelection::default()) {
            Ok(pairs) => {
                let mut pcsv = String::from("station_z_mm,flat_node,curved_node,initial_distance_mm\n");
                for p in &pairs {
                    pcsv.push_str(&format!("{:.6},{},{},{:.6}\n", p.station_z, p.flat, p.curved, p.initial_distance));
                }
                run.write("pairs.csv", &pcsv)?;
                let mut ecsv = String::from("t,pressure_kPa,mean_mm");
                for k in 0..pairs.len() {
                    ecsv.push_str(&format!(",pair_{:02}_mm", k + 1));
                }
                ecsv.push('\n');
                let (mut ep, mut em) = (Vec::new(), Vec::new());
                for &(t, _) in &tip.samples {
                    let e = postprocess::radial_expansion(&pairs, &hist, t)?;
                    let p = schedule.time_to_pressure(t)?;
                    ecsv.push_str(&format!("{t:.6},{p:.6},{:.6}", e.mean));
                    for v in &e.per_pair {
                        ecsv.push_str(&format!(",{v:.6}"));
                    }
                    ecsv.push('\n');
                    ep.push(p);
                    em.push(e.mean);
                }
                run.write("expansion.csv", &ecsv)?;
                run.write(
                    "expansion_pressure.svg",
                    render_plot(PlotKind::ExpansionPressure, &[Series::new("mean", ep, em.clone())])?,
                )?;
                summary.insert(
                    "max_mean_expansion_mm".into(),
                    em.iter().cloned().fold(f64::NEG_INFINITY, f64::max).into(),
                );
            }
            Err(e @ (PostprocessError::Coverage { .. } | PostprocessError::Empty(_))) => {
                eprintln!("warning: radial expansion skipped: {e}");
                summary.insert("expansion_skipped".into(), e.to_string().into());
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(bp) = &args.bench_log {
        let (fwd, bwd) = io::parse_bench_log(run.read_input(bp)?.as_slice(), &bp.display().to_string())?;
        let h = postprocess::hysteresis_ratio(&fwd, &bwd)?;
        let (f, b) = (fwd.sorted(), bwd.sorted());
        let mut csv = String::from("pressure_kPa,theta_forward_deg,theta_backward_deg,gap_deg\n");
        for i in 0..f.pressures.len() {
            csv.push_str(&format!("{:.6},{:.6},{:.6},{:.6}\n", f.pressures[i], f.theta[i], b.theta[i], h.gap[i].1));
        }
        run.write("hysteresis.csv", &csv)?;
        run.write(
            "hysteresis.svg",
            render_plot(
                PlotKind::Hysteresis,
                &[
                    Series::new("inflation", f.pressures.clone(), f.theta.clone()),
                    Series::new("deflation", b.pressures.clone(), b.theta.clone()),
                ],
            )?,
        )?;
        summary.insert("hysteresis_ratio_pct".into(), h.ratio_pct.into());
        summary.insert("loop_area_ratio_pct".into(), h.loop_area_ratio_pct.into());
        println!("hysteresis ratio {:.2}%  loop area ratio {:.2}%", h.ratio_pct, h.loop_area_ratio_pct);
    }
    run.write("analysis.json", serde_json::to_string_pretty(&summary).expect("serialisable") + "\n")?;
    Ok(())
}

fn export_deck(setup: &Setup, run: &mut Run, args: &WindingArgs) -> Result<(), CliError> {
    let bare = setup.spec()?;
    let (_, enabled, payload) = setup.device()?;
    let spec =
        setup.device_spec(&bare, &SimulateArgs { winding: args.clone(), p_max: None, device: enabled, payload })?;
    let (style, turns) = setup.style_turns(args)?;
    let mut paths = Vec::new();
    for w in setup.windings(&spec, style, turns)? {
        paths.push(fiberpath::generate_helix(&spec, &w)?);
    }
    let seg = setup.model()?;
    let opts = DeckOptions { silicone: seg.silicone.clone(), ..Default::default() };
    let deck = emit_deck(&spec, &paths, &setup.materials, &setup.schedule(None)?, &opts)?;
    run.write("actuator.deck", deck.serialize())?;
    println!(
        "deck: {} solid group(s), {} fibre set(s), {} pressure load(s)",
        deck.solids.len(),
        deck.fibres.len(),
        deck.loads.len()
    );
    Ok(())
}

fn parse_anchor(text: &str, kind: &str) -> Result<Anchor, CliError> {
    let bad = || CliError::Validation(format!("bad {kind} anchor '{text}' (expected LABEL@kPa=value)"));
    let (lhs, value) = text.split_once('=').ok_or_else(bad)?;
    let (label, p) = lhs.split_once('@').ok_or_else(bad)?;
    let config = ConfigKey::parse(label).map_err(CliError::Validation)?;
    let pressure_kpa: f64 = p.trim().parse().map_err(|_| bad())?;
    let v: f64 = value.trim().parse().map_err(|_| bad())?;
    Ok(match kind {
        "theta" => Anchor::Theta { config, pressure_kpa, theta_deg: v },
        "twist" => Anchor::Twist { config, pressure_kpa, twist_pct: v },
        _ => Anchor::Expansion { config, pressure_kpa, expansion_mm: v },
    })
}

fn calibrate(setup: &Setup, run: &mut Run, args: &CalibrateArgs) -> Result<(), CliError> {
    let spec = setup.spec()?;
    let start = setup.model()?;
    let mut anchors = Vec::new();
    for (list, kind) in [(&args.theta, "theta"), (&args.twist, "twist"), (&args.expansion, "expansion")] {
        for a in list {
            anchors.push(parse_anchor(a, kind)?);
        }
    }
    if anchors.is_empty() {
        anchors = default_anchors();
    }
    let report = mechanics::calibrate(&spec, &setup.materials, &anchors, &start)?;
    let exclude: Vec<&str> = args.exclude.iter().map(String::as_str).collect();
    let rank = ranking(&spec, &setup.materials, &report.model, &exclude)?;
    #[derive(Serialize)]
    struct Out<'a> {
        anchors: &'a [Anchor],
        calibration: &'a mechanics::CalibrationReport,
        kendall_tau: f64,
        excluded: &'a [String],
    }
    let out = Out { anchors: &anchors, calibration: &report, kendall_tau: rank.tau, excluded: &args.exclude };
    run.write("calibration.json", serde_json::to_string_pretty(&out).expect("serialisable") + "\n")?;
    let mut csv = String::from("config,pressure_kPa,reference_deg,predicted_deg,reached_kPa\n");
    for r in &rank.rows {
        csv.push_str(&format!(
            "{},{:.1},{:.2},{:.4},{:.1}\n",
            r.config, r.pressure_kpa, r.reference_deg, r.predicted_deg, r.reached_kpa
        ));
    }
    run.write("ranking.csv", &csv)?;
    let m = &report.model;
    run.write(
        "model.ini",
        format!(
            "[model]\nn0 = {}\ndrive_gain = {}\nk_twist = {}\nexpansion_scale = {}\n",
            m.n0, m.drive_gain, m.k_twist, m.expansion_scale
        ),
    )?;
    for r in &report.residuals {
        println!(
            "{} {} @ {} kPa: target {:.4}, predicted {:.4}",
            r.kind, r.config, r.pressure_kpa, r.target, r.predicted
        );
    }
    println!("kendall tau {:.4} over {} configurations", rank.tau, rank.rows.len());
    Ok(())
}

fn workspace(setup: &Setup, run: &mut Run, args: &WorkspaceArgs) -> Result<(), CliError> {
    let bare = setup.spec()?;
    let spec = setup.device_spec(&bare, &args.sim)?;
    let (style, turns) = setup.style_turns(&args.sim.winding)?;
    let windings = setup.windings(&spec, style, turns)?;
    let seg = setup.model()?;
    let schedule = setup.schedule(args.sim.p_max)?;
    let (device, _, _) = setup.device()?;
    let mut corridor = Corridor::from_device(&device);
    if let Some(r) = args.corridor_radius {
        corridor.radius = r;
    }
    if let Some(l) = args.corridor_length {
        corridor.length = l;
    }
    if !(corridor.radius > 0.0 && corridor.length > 0.0) {
        return Err(CliError::Validation("corridor dimensions must be positive".into()));
    }
    let (r, err) = solve(&spec, &windings, &setup.materials, &schedule, &seg);
    if let Some(e) = &err {
        if !matches!(e, MechanicsError::Instability { .. }) {
            return Err(err.expect("checked").into());
        }
    }
    let rep = mechanics::workspace::report_from(&r, Some(corridor));
    run.write("workspace.csv", rep.to_csv())?;
    run.write("workspace.json", serde_json::to_string_pretty(&rep).expect("serialisable") + "\n")?;
    if !r.is_empty() {
        run.write(
            "trajectory.svg",
            render_plot(
                PlotKind::Trajectory,
                &[Series::new(
                    format!("{style}{turns}"),
                    r.tip_xyz.iter().map(|t| t[0]).collect(),
                    r.tip_xyz.iter().map(|t| t[2]).collect(),
                )],
            )?,
        )?;
    }
    println!(
        "max reach {:.2} mm  swept area {:.2} mm^2  fits corridor: {}",
        rep.max_reach,
        rep.swept_area,
        rep.fits_corridor.unwrap_or(false)
    );
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}
