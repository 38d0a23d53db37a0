//! Command-line front end for the `spinsim` binary.
//!
//! Every file written is named by an explicit flag; tabular outputs get a
//! `<file>.manifest.json` companion recording inputs and digests.

pub mod output;
pub mod sweep;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigOverrides, SimConfig};
use crate::dynamics::{log_delays, odmr_linewidth_floor, G2Method};
use crate::error::{invalid, Error, Result};
use crate::estimators::{estimate_zfs, hyperfine, AtomicTable, GeometryParams, OrbitalComposition};
use crate::photonstats::{
    compute_g2, correct_value, estimate_rates_three_level, fit_empirical_data, monte_carlo_run, poisson_stream, tags,
    BackgroundRatio, DelayWindow, FitData, FitOptions, G2Binning,
};
use crate::spin::FieldVector;
use crate::symmetry::{all_level_diagrams, enumerate_level_diagrams, GroundSpin};
use output::{CsvTable, RunManifest};
use sweep::{
    g2_sweep, g2_sweep_table, odmr_map, pl_map, pl_map_table, G2SweepSpec, SweepDirection, SweepMode, SweepSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spinsim", version, about = "Spin-dependent photophysics of quantum emitters")]
pub struct Cli {
    /// Worker threads for sweeps and correlation (0 = all cores).
    #[arg(long, global = true, env = "SPINSIM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Level-diagram enumeration.
    #[command(subcommand)]
    Diagrams(DiagramsCommand),
    /// Steady-state PL over a magnetic-field sweep.
    PlMap(PlMapArgs),
    /// ODMR PL variation over a magnetic-field sweep.
    OdmrMap(OdmrMapArgs),
    /// Simulated g²(t) over in-plane field angles, with empirical fits.
    G2Sim(G2SimArgs),
    /// Fit the empirical multi-exponential model to a g² histogram.
    G2Fit(G2FitArgs),
    /// Cross-correlate a two-channel time-tag stream into a g² histogram.
    Correlate(CorrelateArgs),
    /// Simulate a time-tag stream (Monte-Carlo trajectory or Poisson clicks).
    TagsSim(TagsSimArgs),
    /// Three-level rate inversion from fitted g² parameters.
    Rates(RatesArgs),
    /// Zero-field-splitting and hyperfine estimates.
    #[command(subcommand)]
    Estimate(EstimateCommand),
}

#[derive(Debug, Subcommand)]
pub enum DiagramsCommand {
    List {
        #[arg(long, value_enum)]
        ground: Option<GroundArg>,
        /// Include alternate coupling variants.
        #[arg(long)]
        variants: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GroundArg {
    Singlet,
    Triplet,
}

impl From<GroundArg> for GroundSpin {
    fn from(g: GroundArg) -> Self {
        match g {
            GroundArg::Singlet => GroundSpin::Singlet,
            GroundArg::Triplet => GroundSpin::Triplet,
        }
    }
}

/// Model selection: a JSON config or a reference preset, then per-key overrides.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Reference model used when no config file is given.
    #[arg(long, value_enum, default_value = "singlet")]
    pub preset: GroundArg,
    /// Diagram, e.g. `b`, `g.2` or `triplet-e`.
    #[arg(long)]
    pub diagram: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub e_over_d: Option<f64>,
    #[arg(long)]
    pub t1_us: Option<f64>,
    #[arg(long)]
    pub gamma_s_mhz: Option<f64>,
    #[arg(long)]
    pub gamma_e_mhz: Option<f64>,
    #[arg(long)]
    pub gamma_isc1_mhz: Option<f64>,
    #[arg(long)]
    pub gamma_isc2_mhz: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

impl ModelArgs {
    pub fn resolve(&self) -> Result<SimConfig> {
        let base = match (&self.config, self.preset) {
            (Some(p), _) => SimConfig::from_path(p)?,
            (None, GroundArg::Singlet) => SimConfig::singlet_reference(),
            (None, GroundArg::Triplet) => SimConfig::triplet_reference(),
        };
        base.with_overrides(&ConfigOverrides {
            diagram: self.diagram.clone(),
            e_over_d: self.e_over_d,
            t1_us: self.t1_us,
            gamma_s_mhz: self.gamma_s_mhz,
            gamma_e_mhz: self.gamma_e_mhz,
            gamma_isc1_mhz: self.gamma_isc1_mhz,
            gamma_isc2_mhz: self.gamma_isc2_mhz,
            epsilon: self.epsilon,
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Map,
    Phi,
    Magnitude,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisArg {
    InPlane,
    Z,
}

/// Field sweep in reduced units `gμB B/D`.
#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "map")]
    pub mode: ModeArg,
    /// Half-width of the in-plane map, or end of a magnitude sweep.
    #[arg(long, default_value_t = 2.0)]
    pub b_max: f64,
    /// Odd grid size per axis for maps.
    #[arg(long, default_value_t = 21)]
    pub grid_n: usize,
    /// Field magnitude for angle sweeps.
    #[arg(long, default_value_t = 0.5)]
    pub b: f64,
    /// Samples for angle and magnitude sweeps.
    #[arg(long, default_value_t = 360)]
    pub n_points: usize,
    /// Direction of a magnitude sweep.
    #[arg(long, value_enum, default_value = "in-plane")]
    pub axis: AxisArg,
    /// In-plane angle of a magnitude sweep, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi_deg: f64,
}

impl SweepArgs {
    pub fn mode(&self) -> SweepMode {
        match self.mode {
            ModeArg::Map => SweepMode::InPlaneMap { b_max: self.b_max, grid_n: self.grid_n },
            ModeArg::Phi => SweepMode::PhiSweep { b: self.b, n_points: self.n_points },
            ModeArg::Magnitude => SweepMode::MagnitudeSweep {
                direction: match self.axis {
                    AxisArg::Z => SweepDirection::Z,
                    AxisArg::InPlane => SweepDirection::InPlane { phi: self.phi_deg.to_radians() },
                },
                b_max: self.b_max,
                n_points: self.n_points,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct PlMapArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OdmrMapArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// 1-based master-equation states mixed by the drive, e.g. `3,4`.
    #[arg(long, value_delimiter = ',', default_values_t = [3, 4])]
    pub pair: Vec<usize>,
    /// Drive-induced mixing rate, MHz.
    #[arg(long, default_value_t = 100.0)]
    pub gamma_odmr: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Eigen,
    Rk4,
}

impl From<MethodArg> for G2Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => G2Method::Auto,
            MethodArg::Eigen => G2Method::Eigen,
            MethodArg::Rk4 => G2Method::Rk4,
        }
    }
}

#[derive(Debug, Args)]
pub struct G2SimArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// In-plane field magnitude, reduced units.
    #[arg(long, default_value_t = 0.5)]
    pub b: f64,
    /// Explicit angles in degrees; overrides `--n-phi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi_deg: Vec<f64>,
    /// Evenly spaced angles over [0°, 90°].
    #[arg(long, default_value_t = 16)]
    pub n_phi: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub t_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points_per_decade: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    /// Start from the steady state (control run, g² ≡ 1).
    #[arg(long)]
    pub steady_start: bool,
    /// Model orders for the empirical fit; `0` disables fitting.
    #[arg(long, value_delimiter = ',', default_values_t = [2])]
    pub orders: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON file for the per-angle fits.
    #[arg(long)]
    pub fits_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct G2FitArgs {
    /// CSV with columns `t_s,g2,sigma`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3])]
    pub orders: Vec<usize>,
    /// Signal fraction ρ for background correction before fitting.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Relative reduced-χ² gain required to accept a higher order.
    #[arg(long, default_value_t = 0.1)]
    pub improvement_threshold: f64,
    /// Seed for restart jitter.
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TagFormat {
    Csv,
    Bin,
}

fn tag_format(explicit: Option<TagFormat>, path: &Path) -> TagFormat {
    explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => TagFormat::Bin,
        _ => TagFormat::Csv,
    })
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub tags: PathBuf,
    /// Defaults to `bin` for `.bin` files, CSV otherwise.
    #[arg(long, value_enum)]
    pub format: Option<TagFormat>,
    /// Linear bin width, seconds.
    #[arg(long, conflicts_with = "log_ppd")]
    pub bin_width: Option<f64>,
    /// Log bins per decade.
    #[arg(long)]
    pub log_ppd: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    #[arg(long)]
    pub t_max: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TagsSimArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// In-plane field magnitude, reduced units.
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi_deg: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub bz: f64,
    /// Independent Poisson click rates `r0,r1` in Hz instead of a trajectory.
    #[arg(long, value_delimiter = ',')]
    pub poisson: Option<Vec<f64>>,
    #[arg(long)]
    pub duration_s: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<TagFormat>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RatesArgs {
    /// Antibunching time, seconds.
    #[arg(long, allow_hyphen_values = true)]
    pub tau1: f64,
    /// Bunching time, seconds.
    #[arg(long, allow_hyphen_values = true)]
    pub tau2: f64,
    /// Bunching amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub c2: f64,
    /// Saturation parameter Γe/Γs.
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EstimateCommand {
    /// Spin-spin D and E (GHz) from the electron-pair displacement (Å).
    Zfs {
        #[arg(long, allow_hyphen_values = true)]
        x12: f64,
        #[arg(long, allow_hyphen_values = true)]
        y12: f64,
        #[arg(long, allow_hyphen_values = true)]
        z12: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contact and dipolar hyperfine parameters (MHz).
    Hyperfine {
        /// Species label in the atomic table, e.g. B11 or N14.
        #[arg(long)]
        species: String,
        /// `sigma` (sp²) or `pi` (p).
        #[arg(long)]
        orbital: String,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Alternative atomic table (JSON list of species).
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

/// Parses `args`, runs the command on a sized thread pool and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| invalid(format!("cannot build thread pool: {e}")))?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Diagrams(DiagramsCommand::List { ground, variants, out }) => {
            let list: Vec<_> = match (ground, variants) {
                (Some(g), false) => enumerate_level_diagrams(g.into()),
                (Some(g), true) => {
                    let g: GroundSpin = g.into();
                    all_level_diagrams().into_iter().filter(|d| d.ground_spin == g).collect()
                }
                (None, false) => {
                    let mut v = enumerate_level_diagrams(GroundSpin::Singlet);
                    v.extend(enumerate_level_diagrams(GroundSpin::Triplet));
                    v
                }
                (None, true) => all_level_diagrams(),
            };
            emit_json(
                "diagrams list",
                json!({ "ground": ground.map(GroundSpin::from), "variants": variants }),
                &list,
                out,
            )
        }
        Command::PlMap(a) => {
            let spec = SweepSpec { mode: a.sweep.mode(), config: a.model.resolve()? };
            let points = pl_map(&spec)?;
            let table = pl_map_table(&spec.mode, &points)?;
            emit_table("pl-map", serde_json::to_value(&spec)?, None, &table, &a.out)
        }
        Command::OdmrMap(a) => {
            let spec = SweepSpec { mode: a.sweep.mode(), config: a.model.resolve()? };
            let [i, j] = a.pair[..] else {
                return Err(invalid("--pair takes exactly two state labels"));
            };
            let pair = (i, j);
            let table = odmr_map(&spec, pair, a.gamma_odmr)?;
            let floor = odmr_linewidth_floor(&spec.config.rate_parameters()?);
            let inputs = json!({
                "sweep": spec, "pair": [pair.0, pair.1], "gamma_odmr_mhz": a.gamma_odmr,
                "linewidth_floor_khz": floor,
            });
            emit_table("odmr-map", inputs, None, &table, &a.out)
        }
        Command::G2Sim(a) => cmd_g2_sim(a),
        Command::G2Fit(a) => cmd_g2_fit(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::TagsSim(a) => cmd_tags_sim(a),
        Command::Rates(a) => {
            let r = estimate_rates_three_level(a.tau1, a.tau2, a.c2, a.x)?;
            emit_json("rates", serde_json::to_value(&a)?, &r, a.out.clone())
        }
        Command::Estimate(EstimateCommand::Zfs { x12, y12, z12, out }) => {
            let geom = GeometryParams::new(x12, y12, z12)?;
            let z = estimate_zfs(&geom)?;
            emit_json("estimate zfs", serde_json::to_value(geom)?, &z, out)
        }
        Command::Estimate(EstimateCommand::Hyperfine { species, orbital, eta, table, out }) => {
            let t = match &table {
                Some(p) => AtomicTable::from_path(p)?,
                None => AtomicTable::builtin(),
            };
            let orb = OrbitalComposition::named(&orbital, eta)?;
            let sp = t.get(&species)?;
            let h = hyperfine(sp, &orb)?;
            let inputs = json!({ "species": sp, "orbital": orbital, "composition": orb });
            emit_json("estimate hyperfine", inputs, &h, out)
        }
    }
}

fn cmd_g2_sim(a: G2SimArgs) -> Result<()> {
    let config = a.model.resolve()?;
    let phis: Vec<f64> = if a.phi_deg.is_empty() {
        match a.n_phi {
            0 => return Err(invalid("n_phi must be >= 1")),
            1 => vec![0.0],
            n => (0..n).map(|k| (90.0 * k as f64 / (n - 1) as f64).to_radians()).collect(),
        }
    } else {
        a.phi_deg.iter().map(|d| d.to_radians()).collect()
    };
    let orders: Vec<usize> = a.orders.iter().copied().filter(|&n| n != 0).collect();
    let spec = G2SweepSpec {
        config,
        b: a.b,
        phis,
        delays: log_delays(a.t_min, a.t_max, a.points_per_decade)?,
        method: a.method.into(),
        steady_start: a.steady_start,
        orders,
    };
    let points = g2_sweep(&spec)?;
    let table = g2_sweep_table(&points)?;
    let inputs = json!({
        "config": spec.config, "b": spec.b, "phi_deg": spec.phis.iter().map(|p| p.to_degrees()).collect::<Vec<_>>(),
        "t_min_s": a.t_min, "t_max_s": a.t_max, "points_per_decade": a.points_per_decade,
        "method": spec.method, "steady_start": spec.steady_start, "orders": spec.orders,
    });
    let mut manifest = RunManifest::new("g2-sim", inputs, None)?;
    manifest.write_output(&a.out, table.render().as_bytes())?;
    if let Some(path) = &a.fits_out {
        let fits: Vec<_> = points
            .iter()
            .map(|p| json!({ "phi_deg": p.phi.to_degrees(), "pl_mhz": p.pl, "method": p.curve.method, "fit": p.fit }))
            .collect();
        manifest.write_output(path, (serde_json::to_string_pretty(&fits)? + "\n").as_bytes())?;
    }
    manifest.finish(&a.out)?;
    Ok(())
}

fn cmd_g2_fit(a: G2FitArgs) -> Result<()> {
    let table = CsvTable::parse(&std::fs::read_to_string(&a.input)?)?;
    let col = |name: &str| table.column(name).ok_or_else(|| Error::Parse(format!("missing column `{name}`")));
    let (t, mut y, mut sigma) = (col("t_s")?, col("g2")?, col("sigma")?);
    if let Some(rho) = a.rho {
        let rho = BackgroundRatio::new(rho)?;
        let r2 = rho.value() * rho.value();
        y.iter_mut().for_each(|v| *v = correct_value(*v, rho));
        sigma.iter_mut().for_each(|s| *s /= r2);
    }
    let data = FitData::from_points(&t, y, sigma)?;
    let opts = FitOptions {
        orders: a.orders.clone(),
        improvement_threshold: a.improvement_threshold,
        seed: a.seed,
        ..Default::default()
    };
    let fit = fit_empirical_data(&data, &opts)?;
    let inputs = json!({ "input": a.input, "rho": a.rho, "options": opts });
    let mut manifest = RunManifest::new("g2-fit", inputs, Some(a.seed))?;
    manifest.write_output(&a.out, (serde_json::to_string_pretty(&fit)? + "\n").as_bytes())?;
    manifest.finish(&a.out)?;
    Ok(())
}

fn read_tags(path: &Path, format: Option<TagFormat>) -> Result<Vec<tags::TimeTagRecord>> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    match tag_format(format, path) {
        TagFormat::Csv => tags::read_csv(f),
        TagFormat::Bin => tags::read_binary(f),
    }
}

fn cmd_correlate(a: CorrelateArgs) -> Result<()> {
    let binning = match (a.bin_width, a.log_ppd) {
        (Some(width), None) => G2Binning::Linear { width },
        (None, Some(points_per_decade)) => G2Binning::Log { points_per_decade },
        _ => return Err(invalid("exactly one of --bin-width or --log-ppd is required")),
    };
    let window = DelayWindow::new(a.t_min, a.t_max)?;
    let records = read_tags(&a.tags, a.format)?;
    let hist = compute_g2(&records, &binning, &window)?;
    let mut table = CsvTable::new(&["t_s", "g2", "sigma"]);
    for ((t, v), s) in hist.centers().into_iter().zip(&hist.values).zip(&hist.poisson_sigma) {
        table.push(vec![t, *v, *s])?;
    }
    let inputs = json!({ "tags": a.tags, "binning": binning, "window": window, "total_counts": hist.total_counts() });
    emit_table("correlate", inputs, None, &table, &a.out)
}

fn cmd_tags_sim(a: TagsSimArgs) -> Result<()> {
    let (records, inputs) = match &a.poisson {
        Some(rates) => {
            let &[r0, r1] = &rates[..] else {
                return Err(invalid("--poisson takes exactly two rates"));
            };
            let r = [r0, r1];
            (poisson_stream(r, a.duration_s, a.seed)?, json!({ "poisson_hz": r, "duration_s": a.duration_s }))
        }
        None => {
            let config = a.model.resolve()?;
            let field = FieldVector::new(a.b, a.phi_deg.to_radians(), a.bz)?;
            let run = monte_carlo_run(&config.rate_matrix(&field)?, a.duration_s, a.seed)?;
            let inputs = json!({
                "config": config, "field": field, "duration_s": a.duration_s, "transitions": run.transitions,
            });
            (run.tags, inputs)
        }
    };
    let mut bytes = Vec::new();
    match tag_format(a.format, &a.out) {
        TagFormat::Csv => tags::write_csv(&mut bytes, &records)?,
        TagFormat::Bin => tags::write_binary(&mut bytes, &records)?,
    }
    let mut manifest = RunManifest::new("tags-sim", inputs, Some(a.seed))?;
    manifest.write_output(&a.out, &bytes)?;
    manifest.finish(&a.out)?;
    Ok(())
}

fn emit_table(command: &str, inputs: serde_json::Value, seed: Option<u64>, table: &CsvTable, out: &Path) -> Result<()> {
    let mut manifest = RunManifest::new(command, inputs, seed)?;
    manifest.write_output(out, table.render().as_bytes())?;
    manifest.finish(out)?;
    Ok(())
}

/// Pretty JSON to `out` (with a manifest) or to stdout.
fn emit_json<T: Serialize>(command: &str, inputs: serde_json::Value, value: &T, out: Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => {
            let mut manifest = RunManifest::new(command, inputs, None)?;
            manifest.write_output(&path, text.as_bytes())?;
            manifest.finish(&path)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
