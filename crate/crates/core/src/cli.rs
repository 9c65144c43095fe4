//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or unreadable input, 2 domain error
//! (point not exterior, invalid or non-convex surface), 3 solver
//! non-convergence, 4 failed verification.
//!
//! Orbit CSV columns: `index`, then every vertex `z_k` flattened in the
//! ambient layout (`z0_x1 .. z0_xm, z0_y1 .. z0_ym, z1_x1, ..`), then the
//! multipliers `a0 ..`, then `area_value`, `residual`, `is_isolated`. A
//! trailing `#` line carries the summary.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::dual_map::{
    dual_map, inverse_consistency, random_exterior_point, symplecticity_defect, Direction,
    MapResult,
};
use crate::error::Error;
use crate::orbit::{
    closure_residual, criticality_check, functional_f, multistart_search_with, round_trip_defect,
    OrbitSet, OrbitSolution, PolishOptions, SearchOptions, TangencyTuple, DEFAULT_SEED,
    DEFAULT_STARTS,
};
use crate::sharpness::{critical_orbits_of_f, sharpness_experiment, CriticalOrbitOfF};
use crate::surface::{SupportSurface, SurfaceKind, SurfaceSpec};
use crate::symplectic::AmbientVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Usage = 1,
    Domain = 2,
    Convergence = 3,
    Verification = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn of(err: &Error) -> Self {
        match err {
            Error::NoConvergence { .. } => ExitStatus::Convergence,
            Error::Io(_) | Error::SurfaceSpec { .. } => ExitStatus::Usage,
            _ => ExitStatus::Domain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "dual-billiard",
    version,
    about = "Dual billiard maps and their 3-periodic orbits in linear symplectic space"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the dual billiard map once.
    Map(MapArgs),
    /// Iterate the map from a starting point.
    Trajectory(TrajectoryArgs),
    /// Multistart search for periodic orbits.
    Orbits(OrbitsArgs),
    /// Run the invariant checks on a surface.
    Verify(VerifyArgs),
    /// Exact-count experiment on a perturbed sphere.
    Sharpness(SharpnessArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Surface description file.
    #[arg(long)]
    pub surface: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated coordinates, x-block then y-block.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Point,
    #[arg(long, default_value = "forward")]
    pub direction: Direction,
    /// Map residual tolerance, relative to `1 + |z|`.
    #[arg(long, value_parser = parse_tol)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct OrbitsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = DEFAULT_STARTS)]
    pub starts: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Odd period; counts are only meaningful for 3.
    #[arg(long, default_value_t = 3)]
    pub period: usize,
    /// Newton convergence threshold on the closure residual.
    #[arg(long, value_parser = parse_tol)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 200)]
    pub starts: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Random exterior points and triples per check.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Replace every check threshold by this value.
    #[arg(long, value_parser = parse_tol)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SharpnessArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = DEFAULT_STARTS)]
    pub starts: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

/// Coordinates given as a comma list.
#[derive(Debug, Clone)]
pub struct Point(pub Vec<f64>);

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let values = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("invalid coordinate {t:?}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Point(values))
}

fn parse_tol(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

/// A float written with 17 significant digits (`null` if not finite).
#[derive(Debug, Clone, Copy)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let text = if self.0.is_finite() {
            format!("{:.16e}", self.0)
        } else {
            "null".to_string()
        };
        RawValue::from_string(text)
            .map_err(serde::ser::Error::custom)?
            .serialize(serializer)
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn nums(v: &AmbientVector) -> Vec<Num> {
    v.iter().map(|&x| Num(x)).collect()
}

struct Failure {
    status: ExitStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure {
            status: ExitStatus::of(&err),
            message: err.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(String, ExitStatus), Failure>;

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Results go to `stdout` unless `--out` is given.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            return if err.use_stderr() {
                let _ = write!(stderr, "{}", err.render());
                ExitStatus::Usage.code()
            } else {
                let _ = write!(stdout, "{}", err.render());
                ExitStatus::Ok.code()
            };
        }
    };
    let common = match &cli.command {
        Command::Map(a) => &a.common,
        Command::Trajectory(a) => &a.map.common,
        Command::Orbits(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Sharpness(a) => &a.common,
    };
    let outcome = load_surface(common).and_then(|s| match &cli.command {
        Command::Map(a) => cmd_map(&s, a),
        Command::Trajectory(a) => cmd_trajectory(&s, a),
        Command::Orbits(a) => cmd_orbits(&s, a),
        Command::Verify(a) => cmd_verify(&s, a),
        Command::Sharpness(a) => cmd_sharpness(&s, a),
    });
    match outcome {
        Ok((text, status)) => {
            let written = match &common.out {
                Some(path) => std::fs::write(path, &text),
                None => stdout.write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => status.code(),
                Err(err) => {
                    let _ = writeln!(stderr, "error: {err}");
                    ExitStatus::Usage.code()
                }
            }
        }
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.status.code()
        }
    }
}

fn load_surface(common: &Common) -> std::result::Result<SupportSurface, Failure> {
    let spec = SurfaceSpec::from_path(&common.surface).map_err(|err| Failure {
        status: ExitStatus::of(&err),
        message: format!("{}: {err}", common.surface.display()),
    })?;
    Ok(SupportSurface::from_spec(&spec)?)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn point_arg(s: &SupportSurface, point: &[f64]) -> std::result::Result<AmbientVector, Failure> {
    let z = DVector::from_column_slice(point);
    s.dim().validate(&z)?;
    Ok(z)
}

fn map_once(
    s: &SupportSurface,
    z: &AmbientVector,
    args: &MapArgs,
) -> crate::error::Result<MapResult> {
    match args.tol {
        Some(tol) => crate::dual_map::dual_map_with(
            s,
            z,
            args.direction,
            &crate::dual_map::MapOptions {
                tol,
                ..Default::default()
            },
        ),
        None => dual_map(s, z, args.direction),
    }
}

#[derive(serde::Serialize)]
struct MapRecord {
    image: Vec<Num>,
    tangency_normal: Vec<Num>,
    tangency_point: Vec<Num>,
    multiplier: Num,
    residual: Num,
    iterations: usize,
}

fn cmd_map(s: &SupportSurface, args: &MapArgs) -> CmdResult {
    let z = point_arg(s, &args.point.0)?;
    let res = map_once(s, &z, args)?;
    let text = match args.common.format {
        Format::Json => to_json(&MapRecord {
            image: nums(&res.image),
            tangency_normal: nums(&res.tangency_normal),
            tangency_point: nums(&res.tangency_point),
            multiplier: Num(res.multiplier),
            residual: Num(res.residual),
            iterations: res.iterations,
        }),
        Format::Csv => {
            let d = z.len();
            let mut header: Vec<String> = Vec::new();
            for prefix in ["image", "normal", "point"] {
                header.extend(coord_names(prefix, d));
            }
            header.extend(["multiplier", "residual", "iterations"].map(String::from));
            let mut row: Vec<String> = Vec::new();
            for v in [&res.image, &res.tangency_normal, &res.tangency_point] {
                row.extend(v.iter().map(|&x| num(x)));
            }
            row.push(num(res.multiplier));
            row.push(num(res.residual));
            row.push(res.iterations.to_string());
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
    };
    Ok((text, ExitStatus::Ok))
}

/// `x1 .. xm, y1 .. ym` with a prefix.
fn coord_names(prefix: &str, d: usize) -> Vec<String> {
    let m = d / 2;
    (0..d)
        .map(|k| {
            if k < m {
                format!("{prefix}_x{}", k + 1)
            } else {
                format!("{prefix}_y{}", k - m + 1)
            }
        })
        .collect()
}

fn cmd_trajectory(s: &SupportSurface, args: &TrajectoryArgs) -> CmdResult {
    let mut z = point_arg(s, &args.map.point.0)?;
    let mut points = vec![z.clone()];
    for step in 1..=args.steps {
        let res = map_once(s, &z, &args.map).map_err(|err| Failure {
            status: ExitStatus::of(&err),
            message: format!("step {step}: {err}"),
        })?;
        z = res.image;
        points.push(z.clone());
    }
    let text = match args.map.common.format {
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Trajectory {
                direction: Direction,
                points: Vec<Vec<Num>>,
            }
            to_json(&Trajectory {
                direction: args.map.direction,
                points: points.iter().map(nums).collect(),
            })
        }
        Format::Csv => {
            let mut out = String::new();
            let mut header = vec!["step".to_string()];
            header.extend(coord_names("z", z.len()));
            let _ = writeln!(out, "{}", header.join(","));
            for (k, p) in points.iter().enumerate() {
                let row: Vec<String> = p.iter().map(|&x| num(x)).collect();
                let _ = writeln!(out, "{k},{}", row.join(","));
            }
            out
        }
    };
    Ok((text, ExitStatus::Ok))
}

#[derive(serde::Serialize)]
struct OrbitRecord {
    index: usize,
    vertices: Vec<Vec<Num>>,
    tangency_normals: Vec<Vec<Num>>,
    multipliers: Vec<Num>,
    area_value: Num,
    residual: Num,
    is_isolated: bool,
}

impl OrbitRecord {
    fn new(index: usize, o: &OrbitSolution) -> Self {
        Self {
            index,
            vertices: o.vertices.iter().map(nums).collect(),
            tangency_normals: o.tuple.normals().iter().map(nums).collect(),
            multipliers: o.tuple.multipliers().iter().map(|&a| Num(a)).collect(),
            area_value: Num(o.area_value),
            residual: Num(o.residual),
            is_isolated: o.is_isolated,
        }
    }

    fn csv_row(index: usize, o: &OrbitSolution) -> String {
        let mut row = vec![index.to_string()];
        for z in &o.vertices {
            row.extend(z.iter().map(|&x| num(x)));
        }
        row.extend(o.tuple.multipliers().iter().map(|&a| num(a)));
        row.push(num(o.area_value));
        row.push(num(o.residual));
        row.push(o.is_isolated.to_string());
        row.join(",")
    }
}

#[derive(serde::Serialize)]
struct FamilyRecord {
    hits: usize,
    representative: OrbitRecord,
}

#[derive(serde::Serialize)]
struct Summary {
    surface: String,
    period: usize,
    /// Distinct isolated orbits; `null` when a non-isolated family makes the
    /// number of orbits infinite.
    count: Option<usize>,
    isolated: usize,
    families: usize,
    starts: usize,
    seed: u64,
    attempted: usize,
    converged: usize,
    failed: usize,
    rejected_backtracking: usize,
    rejected_zero_area: usize,
    rejected_duplicates: usize,
    non_isolated: usize,
    dedup_tolerance: Num,
}

impl Summary {
    fn new(s: &SupportSurface, set: &OrbitSet, period: usize, starts: usize, seed: u64) -> Self {
        let st = set.stats;
        Self {
            surface: s.kind_name().to_string(),
            period,
            count: (!set.has_families()).then_some(set.count()),
            isolated: set.count(),
            families: set.families.len(),
            starts,
            seed,
            attempted: st.attempted,
            converged: st.converged,
            failed: st.failed,
            rejected_backtracking: st.rejected_backtracking,
            rejected_zero_area: st.rejected_zero_area,
            rejected_duplicates: st.rejected_duplicates,
            non_isolated: st.non_isolated,
            dedup_tolerance: Num(set.dedup_tolerance),
        }
    }

    fn csv_line(&self) -> String {
        let count = match self.count {
            Some(c) => c.to_string(),
            None => "family".to_string(),
        };
        format!(
            "# surface={} period={} count={count} isolated={} families={} starts={} seed={} \
             attempted={} converged={} failed={} rejected_backtracking={} \
             rejected_zero_area={} rejected_duplicates={} non_isolated={}",
            self.surface,
            self.period,
            self.isolated,
            self.families,
            self.starts,
            self.seed,
            self.attempted,
            self.converged,
            self.failed,
            self.rejected_backtracking,
            self.rejected_zero_area,
            self.rejected_duplicates,
            self.non_isolated,
        )
    }
}

fn orbit_csv_header(d: usize, n: usize) -> String {
    let mut header = vec!["index".to_string()];
    for k in 0..n {
        header.extend(coord_names(&format!("z{k}"), d));
    }
    header.extend((0..n).map(|k| format!("a{k}")));
    header.extend(["area_value", "residual", "is_isolated"].map(String::from));
    header.join(",")
}

fn orbits_output(
    s: &SupportSurface,
    set: &OrbitSet,
    summary: &Summary,
    format: Format,
) -> String {
    match format {
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Output<'a> {
                orbits: Vec<OrbitRecord>,
                families: Vec<FamilyRecord>,
                summary: &'a Summary,
            }
            to_json(&Output {
                orbits: set
                    .orbits
                    .iter()
                    .enumerate()
                    .map(|(i, o)| OrbitRecord::new(i, o))
                    .collect(),
                families: set
                    .families
                    .iter()
                    .enumerate()
                    .map(|(i, f)| FamilyRecord {
                        hits: f.hits,
                        representative: OrbitRecord::new(set.count() + i, &f.representative),
                    })
                    .collect(),
                summary,
            })
        }
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "{}", orbit_csv_header(s.dim().ambient(), summary.period));
            let rows = set
                .orbits
                .iter()
                .chain(set.families.iter().map(|f| &f.representative));
            for (i, o) in rows.enumerate() {
                let _ = writeln!(out, "{}", OrbitRecord::csv_row(i, o));
            }
            let _ = writeln!(out, "{}", summary.csv_line());
            out
        }
    }
}

fn cmd_orbits(s: &SupportSurface, args: &OrbitsArgs) -> CmdResult {
    if args.period < 3 || args.period.is_multiple_of(2) {
        return Err(Error::InvalidPeriod(args.period).into());
    }
    let mut polish = PolishOptions::default();
    if let Some(tol) = args.tol {
        polish.tol = tol;
    }
    let set = multistart_search_with(
        s,
        &SearchOptions {
            n_starts: args.starts,
            rng_seed: args.seed,
            period: args.period,
            polish,
            ..SearchOptions::default()
        },
    )?;
    let summary = Summary::new(s, &set, args.period, args.starts, args.seed);
    Ok((orbits_output(s, &set, &summary, args.common.format), ExitStatus::Ok))
}

#[derive(serde::Serialize)]
struct CheckRecord {
    check: &'static str,
    value: Num,
    threshold: Num,
    pass: bool,
}

fn cmd_verify(s: &SupportSurface, args: &VerifyArgs) -> CmdResult {
    let tol = |default: f64| args.tol.unwrap_or(default);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut checks = Vec::new();
    let mut push = |check: &'static str, value: f64, threshold: f64, below: bool| {
        let pass = if below {
            value < threshold
        } else {
            value > threshold
        };
        checks.push(CheckRecord {
            check,
            value: Num(value),
            threshold: Num(threshold),
            pass,
        });
    };

    let points: Vec<_> = (0..args.samples)
        .map(|_| random_exterior_point(s, &mut rng, 1.2, 3.0))
        .collect();
    let mut sym: f64 = 0.0;
    let mut inv: f64 = 0.0;
    for z in &points {
        sym = sym.max(symplecticity_defect(s, z)?);
        inv = inv.max(inverse_consistency(s, z)?);
    }
    push("symplecticity_defect", sym, tol(1e-5), true);
    push("inverse_consistency", inv, tol(1e-8), true);

    let dim = s.dim();
    let mut sym_f: f64 = 0.0;
    for _ in 0..args.samples {
        let q: Vec<_> = (0..3).map(|_| s.point(&dim.random_unit(&mut rng))).collect();
        let t = dim.random_unit(&mut rng) * s.diameter();
        let f = functional_f(&q)?;
        let cyc = functional_f(&[q[1].clone(), q[2].clone(), q[0].clone()])?;
        let swap = functional_f(&[q[1].clone(), q[0].clone(), q[2].clone()])?;
        let moved: Vec<_> = q.iter().map(|p| p + &t).collect();
        let shifted = functional_f(&moved)?;
        sym_f = sym_f
            .max((f - cyc).abs())
            .max((f + swap).abs())
            .max((f - shifted).abs());
    }
    push("functional_symmetries", sym_f, tol(1e-10), true);

    let set = multistart_search_with(
        s,
        &SearchOptions {
            n_starts: args.starts,
            rng_seed: args.seed,
            ..SearchOptions::default()
        },
    )?;
    let found: Vec<&OrbitSolution> = set
        .orbits
        .iter()
        .chain(set.families.iter().map(|f| &f.representative))
        .collect();
    let diam = s.diameter();
    let mut closure: f64 = 0.0;
    let mut crit: f64 = 0.0;
    let mut trip: f64 = 0.0;
    let mut area = f64::INFINITY;
    for o in &found {
        closure = closure.max(closure_residual(s, &o.tuple).norm());
        crit = crit.max(criticality_check(s, o));
        trip = trip.max(round_trip_defect(s, o)?);
        area = area.min(o.area_value.abs() / (diam * diam));
    }
    push("orbits_found", found.len() as f64, 0.0, false);
    push("orbit_closure_residual", closure, tol(1e-10), true);
    push("orbit_criticality", crit, tol(1e-8), true);
    push("orbit_round_trip", trip, tol(1e-8), true);
    push(
        "orbit_area_over_diameter_squared",
        area,
        PolishOptions::default().zero_area_factor,
        false,
    );

    let status = if checks.iter().all(|c| c.pass) {
        ExitStatus::Ok
    } else {
        ExitStatus::Verification
    };
    let text = match args.common.format {
        Format::Json => to_json(&checks),
        Format::Csv => {
            let mut out = String::from("check,value,threshold,pass\n");
            for c in &checks {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    c.check,
                    num(c.value.0),
                    num(c.threshold.0),
                    c.pass
                );
            }
            out
        }
    };
    Ok((text, status))
}

#[derive(serde::Serialize)]
struct CriticalRecord {
    index_i: usize,
    branch: crate::sharpness::Branch,
    eta: Num,
    critical_value: Num,
    representative: Vec<Num>,
}

impl From<&CriticalOrbitOfF> for CriticalRecord {
    fn from(c: &CriticalOrbitOfF) -> Self {
        Self {
            index_i: c.index_i,
            branch: c.branch,
            eta: Num(c.eta),
            critical_value: Num(c.critical_value),
            representative: nums(&c.representative),
        }
    }
}

fn cmd_sharpness(s: &SupportSurface, args: &SharpnessArgs) -> CmdResult {
    let SurfaceKind::PerturbedSphere(params) = s.kind() else {
        return Err(Error::InvalidParameter(format!(
            "sharpness needs a perturbed_sphere surface, got {}",
            s.kind_name()
        ))
        .into());
    };
    let crits = critical_orbits_of_f(params)?;
    let report = sharpness_experiment(params, args.starts, args.seed)?;
    let summary = Summary::new(s, &report.set, 3, args.starts, args.seed);
    let status = if report.success() {
        ExitStatus::Ok
    } else {
        ExitStatus::Verification
    };
    let text = match args.common.format {
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Output<'a> {
                expected: usize,
                count: usize,
                count_doubled: usize,
                stable: bool,
                bijection: bool,
                success: bool,
                critical_orbits: Vec<CriticalRecord>,
                seed_matches: &'a [Option<usize>],
                seed_iterations: &'a [Option<usize>],
                orbits: Vec<OrbitRecord>,
                summary: &'a Summary,
            }
            to_json(&Output {
                expected: report.expected,
                count: report.count,
                count_doubled: report.count_doubled,
                stable: report.is_stable(),
                bijection: report.is_bijection(),
                success: report.success(),
                critical_orbits: crits.iter().map(CriticalRecord::from).collect(),
                seed_matches: &report.seed_matches,
                seed_iterations: &report.seed_iterations,
                orbits: report
                    .set
                    .orbits
                    .iter()
                    .enumerate()
                    .map(|(i, o)| OrbitRecord::new(i, o))
                    .collect(),
                summary: &summary,
            })
        }
        Format::Csv => {
            let mut out = orbits_output(s, &report.set, &summary, Format::Csv);
            let matches: Vec<String> = report
                .seed_matches
                .iter()
                .map(|m| m.map_or("none".to_string(), |i| i.to_string()))
                .collect();
            let _ = writeln!(
                out,
                "# expected={} count={} count_doubled={} stable={} bijection={} success={} seed_matches={}",
                report.expected,
                report.count,
                report.count_doubled,
                report.is_stable(),
                report.is_bijection(),
                report.success(),
                matches.join(";")
            );
            out
        }
    };
    Ok((text, status))
}

/// Rebuilds a tuple from a JSON orbit record's normals and multipliers.
pub fn tuple_from_record(record: &serde_json::Value) -> crate::error::Result<TangencyTuple> {
    let bad = || Error::InvalidParameter("malformed orbit record".to_string());
    let vector = |v: &serde_json::Value| -> crate::error::Result<AmbientVector> {
        let coords = v
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|c| c.as_f64().ok_or_else(bad))
            .collect::<crate::error::Result<Vec<_>>>()?;
        Ok(DVector::from_vec(coords))
    };
    let normals = record["tangency_normals"]
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(vector)
        .collect::<crate::error::Result<Vec<_>>>()?;
    let multipliers = vector(&record["multipliers"])?.iter().copied().collect();
    TangencyTuple::from_directions(normals, multipliers)
}
