//! Command-line front end.
//!
//! Data goes to `--out` or standard output; summaries and diagnostics go to
//! standard error. Exit codes: 0 success, 1 invalid configuration, 2 tolerance
//! exceeded under `--check`, 3 runtime failure.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::diffops::{born_infeld_residual, minimal_residual, residual_survey, TravelingWave};
use crate::energy::{gamma_energy_scan, shift_energy_scan, QuadratureSpec};
use crate::error::Error;
use crate::identity::{
    imag_log_sin_check, ramanujan_lhs, ramanujan_partial_sum, sine_product_check, sum_of_sums_check,
    theorem1_difference_check, theorem2_sampled_errors, ComplexPoint, DecompositionSpec, IdentityPoint,
};
use crate::mesh::{export_csv, export_obj, figure1_mesh, multi_sheet_mesh, parse_obj, CsvTable, Figure1Preset, Mesh};
use crate::surface::{BranchPolicy, GrainAngle, Helicoid, Point, Rect, Scherk, DEFAULT_CORE_RADIUS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scherk", version, about = "Scherk's first surface: heights, identities, residuals, energies and meshes")]
pub struct Cli {
    /// Worker threads for parallel loops (outputs do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 20_240_521)]
    pub seed: u64,

    /// Write the payload here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Exit with status 2 if the reported maximum error exceeds --tol.
    #[arg(long, global = true, requires = "tol")]
    pub check: bool,

    #[arg(long, global = true)]
    pub tol: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Height and derivatives at one point (JSON).
    Eval(EvalArgs),
    /// Minimal-surface residual on a grid (CSV).
    Residual(ResidualArgs),
    /// Sampled identity checks (JSON).
    Identity(IdentityArgs),
    /// Born-Infeld residual of traveling waves (JSON).
    Bi(BiArgs),
    /// Energy scans (CSV).
    Energy(EnergyArgs),
    /// Multi-sheet OBJ mesh.
    Mesh(MeshArgs),
    /// Stacked three-sheet mesh of the right-angle surface (OBJ).
    Figure1,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub sheet: i64,
    /// Evaluate the helicoid instead of Scherk's surface.
    #[arg(long)]
    pub helicoid: bool,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub helicoid: bool,
    /// `x_min:x_max:y_min:y_max`; defaults to [-4, 4] x [0, ell].
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, default_value_t = 81)]
    pub grid: usize,
    /// Nodes closer than this to a core are excluded.
    #[arg(long, default_value_t = DEFAULT_CORE_RADIUS)]
    pub exclude: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IdentityKind {
    Ramanujan,
    Sumofsums,
    Theorem1,
    Theorem2,
    Logsin,
    Sineproduct,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(value_enum)]
    pub kind: IdentityKind,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub pairs: Option<u64>,
    /// Single point instead of random samples (ramanujan, sumofsums).
    #[arg(long, allow_hyphen_values = true, requires = "b")]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "a")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Profile {
    Sin,
    Tanh,
    Cubic,
    All,
}

#[derive(Debug, Args)]
pub struct BiArgs {
    #[arg(long, value_enum, default_value_t = Profile::All)]
    pub profile: Profile,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EnergyMode {
    Gamma,
    Shift,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long, value_enum)]
    pub mode: EnergyMode,
    /// Grain angle; the shift mode uses `beta = alpha / 2`.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// `lo:hi:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long = "L", default_value_t = 8.0)]
    pub half_width: f64,
    /// Simpson nodes per direction (odd).
    #[arg(long, default_value_t = 129)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub alpha: f64,
    /// `x_min:x_max:y_min:y_max`; defaults to [-4, 4] x [-ell, ell].
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, default_value_t = 65)]
    pub grid: usize,
    /// Comma-separated sheet indices.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub sheets: String,
}

/// Failure of a run, with its exit status.
#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidAngle(_)
            | Error::InvalidParameter(_)
            | Error::PoleAtB(_)
            | Error::InvalidPair(_)
            | Error::BadBracket { .. } => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Payload plus the error figure compared against `--tol`.
struct Report {
    payload: Vec<u8>,
    max_error: Option<f64>,
    summary: serde_json::Value,
}

fn json_payload<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("reports serialize");
    v.push(b'\n');
    v
}

fn csv_payload<T: CsvTable + ?Sized>(table: &T) -> Outcome<Vec<u8>> {
    let mut buf = Vec::new();
    export_csv(table, &mut buf)?;
    Ok(buf)
}

fn obj_payload(mesh: &Mesh) -> Outcome<Vec<u8>> {
    let mut buf = Vec::new();
    export_obj(mesh, &mut buf)?;
    Ok(buf)
}

fn parse_floats(s: &str, count: usize, what: &str) -> Outcome<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| config(format!("cannot parse {what} '{s}'")))?;
    if parts.len() != count || parts.iter().any(|v| !v.is_finite()) {
        return Err(config(format!("{what} '{s}' needs {count} finite values separated by ':'")));
    }
    Ok(parts)
}

fn parse_window(s: &str) -> Outcome<Rect> {
    let v = parse_floats(s, 4, "window")?;
    Ok(Rect::new(v[0], v[1], v[2], v[3])?)
}

fn parse_range(s: &str) -> Outcome<Vec<f64>> {
    let mut parts = s.split(':');
    let (lo, hi, count) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(lo), Some(hi), Some(c), None) => (lo, hi, c),
        _ => return Err(config(format!("range '{s}' must be lo:hi:count"))),
    };
    let lo: f64 = lo.parse().map_err(|_| config(format!("bad range start '{lo}'")))?;
    let hi: f64 = hi.parse().map_err(|_| config(format!("bad range end '{hi}'")))?;
    let count: usize = count.parse().map_err(|_| config(format!("bad range count '{count}'")))?;
    if !(lo.is_finite() && hi.is_finite()) || count == 0 || (count > 1 && lo >= hi) {
        return Err(config(format!("range '{s}' must have lo < hi and count >= 1")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect())
}

fn parse_sheets(s: &str) -> Outcome<Vec<i64>> {
    let sheets: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| config(format!("cannot parse sheets '{s}'")))?;
    if sheets.is_empty() {
        return Err(config("at least one sheet is required"));
    }
    Ok(sheets)
}

fn eval(a: &EvalArgs) -> Outcome<Report> {
    let p = Point::new(a.x, a.y);
    if !(a.x.is_finite() && a.y.is_finite()) {
        return Err(config("point must be finite"));
    }
    let branch = BranchPolicy::Sheet(a.sheet);
    let value = if a.helicoid {
        if a.alpha.is_some() {
            return Err(config("--alpha does not apply to the helicoid"));
        }
        let h = Helicoid::new();
        let s = h.height(p, branch)?;
        let g = h.gradient(p).ok();
        let r = minimal_residual(&h, p).ok();
        json!({"surface": "helicoid", "x": a.x, "y": a.y, "z": s.z, "sheet": a.sheet,
               "near_core": s.near_core, "gradient": g, "residual": r})
    } else {
        let alpha = a.alpha.ok_or_else(|| config("--alpha is required for Scherk's surface"))?;
        let s = Scherk::from_alpha(alpha)?;
        let sample = s.height(p, branch)?;
        let g = s.gradient(p).ok();
        let r = minimal_residual(&s, p).ok();
        json!({"surface": "scherk", "alpha": alpha, "x": a.x, "y": a.y, "z": sample.z, "sheet": a.sheet,
               "near_core": sample.near_core, "gradient": g, "residual": r,
               "ell": s.angle().ell(), "jump_quantum": s.angle().jump_quantum()})
    };
    Ok(Report { payload: json_payload(&value), max_error: None, summary: json!({"command": "eval"}) })
}

fn residual(a: &ResidualArgs) -> Outcome<Report> {
    if a.grid < 2 {
        return Err(config("--grid must be at least 2"));
    }
    let report = if a.helicoid {
        let window = match &a.window {
            Some(w) => parse_window(w)?,
            None => Rect::new(0.5, 4.0, 0.5, 4.0)?,
        };
        residual_survey(&Helicoid::new(), &window, a.grid, a.grid, a.exclude)?
    } else {
        let s = Scherk::from_alpha(a.alpha)?;
        let window = match &a.window {
            Some(w) => parse_window(w)?,
            None => Rect::new(-4.0, 4.0, 0.0, s.angle().ell())?,
        };
        residual_survey(&s, &window, a.grid, a.grid, a.exclude)?
    };
    let summary = json!({"command": "residual", "max_abs": report.max_abs, "rms": report.rms,
                         "excluded": report.excluded, "nodes": report.nodes.len()});
    Ok(Report { payload: csv_payload(&report)?, max_error: Some(report.max_abs), summary })
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

#[derive(Serialize)]
struct IdentitySummary {
    kind: String,
    samples: usize,
    max_error: f64,
    #[serde(flatten)]
    extra: serde_json::Value,
}

fn identity(a: &IdentityArgs, seed: u64) -> Outcome<Report> {
    if a.samples == 0 {
        return Err(config("--samples must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let single = a.a.zip(a.b);
    let (kind, max_error, extra) = match a.kind {
        IdentityKind::Ramanujan => {
            let pairs = a.pairs.unwrap_or(1000);
            if pairs == 0 {
                return Err(config("--pairs must be at least 1"));
            }
            let points = identity_points(&mut rng, a.samples, single)?;
            let (mut max_err, mut max_bound, mut sound) = (0.0f64, 0.0f64, true);
            for q in points {
                let r = ramanujan_partial_sum(q, pairs, 0.0)?;
                let err = (r.value - ramanujan_lhs(q)).abs();
                sound &= err <= r.tail_bound;
                max_err = max_err.max(err);
                max_bound = max_bound.max(r.tail_bound);
            }
            ("ramanujan", max_err, json!({"pairs": pairs, "max_tail_bound": max_bound, "sound": sound}))
        }
        IdentityKind::Sumofsums => {
            let n = a.n.unwrap_or(3);
            if n == 0 {
                return Err(config("--n must be at least 1"));
            }
            let points = identity_points(&mut rng, a.samples, single)?;
            let mut max_err = 0.0f64;
            for q in points {
                max_err = max_err.max(sum_of_sums_check(q, n)?);
            }
            ("sumofsums", max_err, json!({"n": n}))
        }
        IdentityKind::Theorem1 => {
            let g = GrainAngle::new(a.alpha.unwrap_or(1.0))?;
            let pairs = a.pairs.unwrap_or(2000);
            if pairs == 0 {
                return Err(config("--pairs must be at least 1"));
            }
            let ell = g.ell();
            let mut max_err = 0.0f64;
            for _ in 0..a.samples {
                let p = Point::new(uniform(&mut rng, 0.25, 2.0), uniform(&mut rng, 0.05, 0.95) * ell);
                let r = Point::new(uniform(&mut rng, 0.25, 2.0), uniform(&mut rng, 0.05, 0.95) * ell);
                max_err = max_err.max(theorem1_difference_check(p, r, g, pairs)?);
            }
            ("theorem1", max_err, json!({"alpha": g.alpha(), "pairs": pairs}))
        }
        IdentityKind::Theorem2 => {
            let spec = DecompositionSpec::new(a.n.unwrap_or(2), a.beta.unwrap_or(PI / 3.0))?;
            let (gradient, central, elsewhere) = theorem2_sampled_errors(&spec, a.samples, &mut rng)?;
            (
                "theorem2",
                gradient.max(central).max(elsewhere),
                json!({"n": spec.n(), "beta": spec.beta(), "beta_tilde": spec.beta_tilde(),
                       "max_gradient_error": gradient, "max_central_cell_error": central,
                       "max_mod_constant_error": elsewhere}),
            )
        }
        IdentityKind::Logsin => {
            let mut max_err = 0.0f64;
            for _ in 0..a.samples {
                let y = loop {
                    let y = uniform(&mut rng, -3.0, 3.0);
                    if y.sin().abs() > 0.05 {
                        break y;
                    }
                };
                max_err = max_err.max(imag_log_sin_check(ComplexPoint::new(y, uniform(&mut rng, -3.0, 3.0)))?);
            }
            ("logsin", max_err, json!({}))
        }
        IdentityKind::Sineproduct => {
            let n = a.n.unwrap_or(3);
            if n == 0 {
                return Err(config("--n must be at least 1"));
            }
            let mut max_err = 0.0f64;
            for _ in 0..a.samples {
                let z = ComplexPoint::new(uniform(&mut rng, -2.0, 2.0), uniform(&mut rng, -2.0, 2.0));
                max_err = max_err.max(sine_product_check(z, n)?);
            }
            ("sineproduct", max_err, json!({"n": n}))
        }
    };
    let samples = if single.is_some() { 1 } else { a.samples };
    let summary = IdentitySummary { kind: kind.into(), samples, max_error, extra };
    Ok(Report {
        payload: json_payload(&summary),
        max_error: Some(max_error),
        summary: json!({"command": "identity", "kind": kind, "max_error": max_error}),
    })
}

fn identity_points(rng: &mut ChaCha8Rng, samples: usize, single: Option<(f64, f64)>) -> Outcome<Vec<IdentityPoint>> {
    if let Some((a, b)) = single {
        return Ok(vec![IdentityPoint::new(a, b)?]);
    }
    (0..samples)
        .map(|_| Ok(IdentityPoint::new(uniform(rng, -3.0, 3.0), uniform(rng, 0.1, PI - 0.1))?))
        .collect()
}

fn bi(a: &BiArgs, seed: u64) -> Outcome<Report> {
    if a.samples == 0 {
        return Err(config("--samples must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles: &[Profile] = match a.profile {
        Profile::All => &[Profile::Sin, Profile::Tanh, Profile::Cubic],
        Profile::Sin => &[Profile::Sin],
        Profile::Tanh => &[Profile::Tanh],
        Profile::Cubic => &[Profile::Cubic],
    };
    let mut rows = Vec::new();
    let mut max_err = 0.0f64;
    for &profile in profiles {
        for direction in [-1, 1] {
            let wave = match profile {
                Profile::Sin => TravelingWave::sine(direction)?,
                Profile::Tanh => TravelingWave::tanh(direction)?,
                _ => TravelingWave::cubic([0.3, -1.1, 0.7, 0.25], direction)?,
            };
            let mut worst = 0.0f64;
            for _ in 0..a.samples {
                let r = born_infeld_residual(&wave, uniform(&mut rng, -3.0, 3.0), uniform(&mut rng, -3.0, 3.0))?;
                worst = worst.max(r.abs());
            }
            max_err = max_err.max(worst);
            let name = format!("{profile:?}").to_lowercase();
            rows.push(json!({"profile": name, "direction": direction, "max_residual": worst}));
        }
    }
    let value = json!({"samples": a.samples, "max_error": max_err, "cases": rows});
    Ok(Report { payload: json_payload(&value), max_error: Some(max_err), summary: json!({"command": "bi", "max_error": max_err}) })
}

fn energy(a: &EnergyArgs) -> Outcome<Report> {
    let q = QuadratureSpec::square(a.half_width, a.grid)?;
    let g = GrainAngle::new(a.alpha)?;
    let (scan, metric) = match a.mode {
        EnergyMode::Gamma => {
            let values = parse_range(a.range.as_deref().unwrap_or("0.8:1.2:9"))?;
            if values.iter().any(|&v| v <= 0.0) {
                return Err(config("gamma values must be positive"));
            }
            let scan = gamma_energy_scan(g, &values, &q)?;
            let metric = (scan.stationary_estimate - 1.0).abs();
            (scan, metric)
        }
        EnergyMode::Shift => {
            let values = parse_range(a.range.as_deref().unwrap_or("-0.5:0.5:21"))?;
            let spec = DecompositionSpec::new(2, 0.5 * a.alpha)?;
            let scan = shift_energy_scan(&spec, &values, &q)?;
            // Asymmetry between mirrored shifts and the slope at zero.
            let mut metric = scan.derivative_at_reference.abs();
            for (i, &v) in scan.values.iter().enumerate() {
                if let Some(j) = scan.values.iter().position(|&w| w == -v) {
                    metric = metric.max((scan.energies[i] - scan.energies[j]).abs());
                }
            }
            (scan, metric)
        }
    };
    let summary = json!({"command": "energy", "parameter": scan.parameter,
                         "stationary_estimate": scan.stationary_estimate,
                         "derivative_at_reference": scan.derivative_at_reference, "max_error": metric});
    Ok(Report { payload: csv_payload(&scan)?, max_error: Some(metric), summary })
}

/// Largest coordinate change after an export/parse round trip, or infinity on
/// a count mismatch or invalid mesh.
fn round_trip_error(mesh: &Mesh, text: &[u8]) -> Outcome<f64> {
    let parsed = parse_obj(std::str::from_utf8(text).map_err(|e| Failure::Runtime(e.to_string()))?)?;
    if !mesh.is_valid() || parsed.vertices.len() != mesh.vertices.len() || parsed.triangles != mesh.triangles {
        return Ok(f64::INFINITY);
    }
    let err = mesh
        .vertices
        .iter()
        .zip(&parsed.vertices)
        .flat_map(|(a, b)| (0..3).map(move |k| (a[k] - b[k]).abs()))
        .fold(0.0f64, f64::max);
    Ok(err)
}

fn mesh_report(mesh: &Mesh, command: &str) -> Outcome<Report> {
    let payload = obj_payload(mesh)?;
    let err = round_trip_error(mesh, &payload)?;
    let summary = json!({"command": command, "vertices": mesh.vertices.len(), "triangles": mesh.triangles.len(),
                         "dropped": mesh.dropped, "round_trip_error": err});
    Ok(Report { payload, max_error: Some(err), summary })
}

fn mesh(a: &MeshArgs) -> Outcome<Report> {
    if a.grid < 2 {
        return Err(config("--grid must be at least 2"));
    }
    let s = Scherk::from_alpha(a.alpha)?;
    let ell = s.angle().ell();
    let window = match &a.window {
        Some(w) => parse_window(w)?,
        None => Rect::new(-4.0, 4.0, -ell, ell)?,
    };
    let sheets = parse_sheets(&a.sheets)?;
    let m = multi_sheet_mesh(&s, &window, a.grid, a.grid, &sheets, 0.5 * s.angle().jump_quantum())?;
    mesh_report(&m, "mesh")
}

fn figure1() -> Outcome<Report> {
    mesh_report(&figure1_mesh(&Figure1Preset::default())?, "figure1")
}

fn dispatch(cli: &Cli) -> Outcome<Report> {
    match &cli.command {
        Command::Eval(a) => eval(a),
        Command::Residual(a) => residual(a),
        Command::Identity(a) => identity(a, cli.seed),
        Command::Bi(a) => bi(a, cli.seed),
        Command::Energy(a) => energy(a),
        Command::Mesh(a) => mesh(a),
        Command::Figure1 => figure1(),
    }
}

fn execute(cli: &Cli) -> Outcome<Option<f64>> {
    let report = dispatch(cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, &report.payload)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&report.payload)?;
            stdout.flush()?;
        }
    }
    eprintln!("{}", report.summary);
    Ok(report.max_error)
}

/// Parse `args` (including the program name) and run; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(tol) = cli.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            eprintln!("error: --tol must be a finite non-negative number");
            return EXIT_CONFIG;
        }
    }
    if cli.check && matches!(cli.command, Command::Eval(_)) {
        eprintln!("error: eval reports no error figure; --check does not apply");
        return EXIT_CONFIG;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
    }
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Failure::Runtime(e.to_string())),
        },
        None => execute(&cli),
    };
    match result {
        Ok(max_error) => {
            if cli.check {
                let tol = cli.tol.expect("clap enforces --tol with --check");
                let err = max_error.unwrap_or(0.0);
                if !(err <= tol) {
                    eprintln!("check failed: max error {err:e} exceeds tolerance {tol:e}");
                    return EXIT_TOLERANCE;
                }
            }
            EXIT_OK
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.8:1.2:3").unwrap(), vec![0.8, 1.0, 1.2]);
        assert_eq!(parse_range("1:2:1").unwrap(), vec![1.0]);
        assert!(parse_range("1:0:3").is_err());
        assert!(parse_range("1:2").is_err());
        assert!(parse_range("a:2:3").is_err());
    }

    #[test]
    fn windows_and_sheets() {
        let w = parse_window("-4:4:0:1").unwrap();
        assert_eq!((w.x_min, w.y_max), (-4.0, 1.0));
        assert!(parse_window("4:-4:0:1").is_err());
        assert_eq!(parse_sheets("-1,0,1").unwrap(), vec![-1, 0, 1]);
        assert!(parse_sheets("x").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["scherk", "bogus"]), EXIT_CONFIG);
        assert_eq!(run(["scherk", "eval", "--alpha", "0", "--x", "1", "--y", "1"]), EXIT_CONFIG);
        assert_eq!(run(["scherk", "--help"]), EXIT_OK);
    }
}
