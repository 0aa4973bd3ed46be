//! Command-line front end for the `fracstab` engine.
//!
//! [`run`] takes the argument vector and two writers and returns the process
//! exit code, so tests can drive it without spawning processes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use fracstab::char_eq::{CharParams, SystemSpec};
use fracstab::classifier::{classify, qscan, Verdict, VerdictKind};
use fracstab::error::Error;
use fracstab::gamma_curve::{sample_curve, CurveParams};
use fracstab::root_oracle::{count_unstable_roots, RootCountReport};
use fracstab::simulator::{estimate_decay, integrate};

pub const EXIT_STABLE: i32 = 0;
pub const EXIT_UNSTABLE: i32 = 1;
pub const EXIT_MARGINAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser, Debug)]
#[command(name = "fracstab", version)]
#[command(about = "Stability of two-dimensional multi-order Caputo fractional linear systems")]
pub struct Cli {
    /// Write CSV output to this path (a manifest is written alongside)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Emit records as single-line JSON objects
    #[arg(long, global = true)]
    pub json: bool,

    /// Seed recorded in the run manifest
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify a system as stable or unstable for its orders
    Classify(SystemArgs),
    /// Sample the critical curve in the (a11, a22) plane
    Curve(CurveArgs),
    /// Rasterize the stable region over the order square (0, 1]²
    Qscan(ScanArgs),
    /// Count characteristic roots in the closed right half-plane
    Roots(RootArgs),
    /// Integrate the initial value problem and fit the decay exponent
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SystemArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a11: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub a12: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub a21: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub a22: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q2: f64,
}

impl SystemArgs {
    fn spec(&self) -> fracstab::error::Result<SystemSpec> {
        SystemSpec::new(self.a11, self.a12, self.a21, self.a22, self.q1, self.q2)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CurveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q2: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3.0)]
    pub omega_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 601)]
    pub n: usize,
}

/// Diagonal and determinant, given directly or through the full matrix.
#[derive(Args, Debug, Clone, Serialize)]
pub struct DiagonalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a11: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub a22: f64,
    /// det(A); required unless --a12 and --a21 are given
    #[arg(long, allow_hyphen_values = true, required_unless_present_all = ["a12", "a21"])]
    pub delta: Option<f64>,
    #[arg(
        long,
        allow_hyphen_values = true,
        requires = "a21",
        conflicts_with = "delta"
    )]
    pub a12: Option<f64>,
    #[arg(
        long,
        allow_hyphen_values = true,
        requires = "a12",
        conflicts_with = "delta"
    )]
    pub a21: Option<f64>,
}

impl DiagonalArgs {
    fn determinant(&self) -> f64 {
        match (self.delta, self.a12, self.a21) {
            (Some(d), _, _) => d,
            (None, Some(b), Some(c)) => self.a11 * self.a22 - b * c,
            _ => unreachable!("clap enforces delta or both off-diagonal entries"),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub diagonal: DiagonalArgs,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RootArgs {
    #[command(flatten)]
    pub diagonal: DiagonalArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub q1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q2: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub x0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub y0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub h: f64,
    /// Fraction of the trajectory used for the decay fit
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.5)]
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub timestamp: String,
}

/// Exit code for a verdict kind.
pub fn exit_code_for_kind(kind: VerdictKind) -> i32 {
    match kind {
        VerdictKind::StableAllOrders | VerdictKind::StableForOrders => EXIT_STABLE,
        VerdictKind::UnstableAllOrders | VerdictKind::UnstableForOrders => EXIT_UNSTABLE,
        VerdictKind::MarginalOnCurve => EXIT_MARGINAL,
    }
}

/// Exit code for an engine error.
pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::InvalidOrder(_) | Error::InvalidArgument(_) | Error::DomainError(_) => EXIT_USAGE,
        Error::DeltaZeroUnclassified => EXIT_MARGINAL,
        Error::NotDecaying { .. } => EXIT_UNSTABLE,
        Error::CommensurateOrders { .. }
        | Error::BracketFailure { .. }
        | Error::DeltaNotPositive(_)
        | Error::ContourThroughRoot { .. }
        | Error::NotRational(_)
        | Error::DimensionCap(_)
        | Error::StepCap(_) => EXIT_DATA,
        Error::RefinementLimit(_) | Error::NoConvergence(_) => EXIT_INTERNAL,
    }
}

/// Formats a float with 17 significant digits, independent of locale.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

enum Failure {
    Engine(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    /// Prints one record, as JSON or as `key=value` pairs.
    fn record<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        let json = serde_json::to_value(value).map_err(|e| Failure::Io(e.to_string()))?;
        if self.cli.json {
            writeln!(self.stdout, "{json}")?;
            return Ok(());
        }
        let mut line = String::new();
        if let serde_json::Value::Object(map) = json {
            for (k, v) in map {
                if !line.is_empty() {
                    line.push(' ');
                }
                match v {
                    serde_json::Value::Number(n) if n.is_f64() => {
                        let _ = write!(line, "{k}={}", fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
                    }
                    serde_json::Value::String(s) => {
                        let _ = write!(line, "{k}={s}");
                    }
                    other => {
                        let _ = write!(line, "{k}={other}");
                    }
                }
            }
        }
        writeln!(self.stdout, "{line}")?;
        Ok(())
    }

    /// Writes CSV to `--out` (plus manifest) or to standard output.
    fn emit_csv<A: Serialize>(
        &mut self,
        command: &str,
        args: &A,
        csv: &str,
    ) -> Result<(), Failure> {
        match &self.cli.out {
            Some(path) => {
                fs::write(path, csv)?;
                let manifest = manifest(command, args, self.cli, path)?;
                let body =
                    serde_json::to_string(&manifest).map_err(|e| Failure::Io(e.to_string()))?;
                fs::write(manifest_path(path), body + "\n")?;
            }
            None => self.stdout.write_all(csv.as_bytes())?,
        }
        Ok(())
    }
}

/// `curve.csv` → `curve.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn manifest<A: Serialize>(
    command: &str,
    args: &A,
    cli: &Cli,
    out: &Path,
) -> Result<RunManifest, Failure> {
    let mut inputs = BTreeMap::new();
    flatten_inputs(
        &serde_json::to_value(args).map_err(|e| Failure::Io(e.to_string()))?,
        &mut inputs,
    );
    if let Some(seed) = cli.seed {
        inputs.insert("seed".into(), seed.into());
    }
    Ok(RunManifest {
        command: command.into(),
        inputs,
        outputs: vec![out.display().to_string()],
        tool_version: env!("CARGO_PKG_VERSION").into(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    })
}

fn flatten_inputs(v: &serde_json::Value, into: &mut BTreeMap<String, serde_json::Value>) {
    if let serde_json::Value::Object(map) = v {
        for (k, v) in map {
            match v {
                serde_json::Value::Object(_) => flatten_inputs(v, into),
                serde_json::Value::Null => {}
                _ => {
                    into.insert(k.replace('_', "-"), v.clone());
                }
            }
        }
    }
}

#[derive(Serialize)]
struct RootsRecord {
    n_unstable: usize,
    l: f64,
    #[serde(rename = "L")]
    upper: f64,
    winding_turns: f64,
    contour_samples: usize,
    refinement_depth: u32,
}

impl From<&RootCountReport> for RootsRecord {
    fn from(r: &RootCountReport) -> Self {
        Self {
            n_unstable: r.n_unstable,
            l: r.bounds.lower,
            upper: r.bounds.upper,
            winding_turns: r.winding_turns,
            contour_samples: r.contour_samples,
            refinement_depth: r.refinement_depth,
        }
    }
}

#[derive(Serialize)]
struct GrowthRecord {
    growth_flagged: bool,
    terminated_early: bool,
    initial_norm: f64,
    final_norm: f64,
}

fn cmd_classify(ctx: &mut Ctx, args: &SystemArgs) -> Result<i32, Failure> {
    let verdict: Verdict = classify(&args.spec()?)?;
    ctx.record(&verdict)?;
    Ok(exit_code_for_kind(verdict.kind))
}

fn cmd_curve(ctx: &mut Ctx, args: &CurveArgs) -> Result<i32, Failure> {
    let cp = CurveParams::new(args.delta, args.q1, args.q2)?;
    let points = sample_curve(&cp, args.omega_min, args.omega_max, args.n)?;
    let mut csv = String::from("omega,a11,a22\n");
    for p in &points {
        let _ = writeln!(
            csv,
            "{},{},{}",
            fmt_f64(p.omega),
            fmt_f64(p.a11),
            fmt_f64(p.a22)
        );
    }
    ctx.emit_csv("curve", args, &csv)?;
    Ok(EXIT_STABLE)
}

fn cmd_qscan(ctx: &mut Ctx, args: &ScanArgs) -> Result<i32, Failure> {
    let d = &args.diagonal;
    let scan = qscan(d.a11, d.a22, d.determinant(), args.grid)?;
    let mut csv = String::from("q1,q2,stable\n");
    for (q1, q2, kind) in scan.iter() {
        let flag = match kind {
            VerdictKind::MarginalOnCurve => 2,
            k if k.is_stable() => 1,
            _ => 0,
        };
        let _ = writeln!(csv, "{},{},{flag}", fmt_f64(q1), fmt_f64(q2));
    }
    ctx.emit_csv("qscan", args, &csv)?;
    Ok(EXIT_STABLE)
}

fn cmd_roots(ctx: &mut Ctx, args: &RootArgs) -> Result<i32, Failure> {
    let d = &args.diagonal;
    let p = CharParams::new(d.a11, d.a22, d.determinant(), args.q1, args.q2)?;
    let report = count_unstable_roots(&p)?;
    ctx.record(&RootsRecord::from(&report))?;
    Ok(if report.n_unstable == 0 {
        EXIT_STABLE
    } else {
        EXIT_UNSTABLE
    })
}

fn cmd_simulate(ctx: &mut Ctx, args: &SimulateArgs) -> Result<i32, Failure> {
    let spec = args.system.spec()?;
    let traj = integrate(&spec, [args.x0, args.y0], args.t_end, args.h)?;
    let norms = traj.norms();
    let mut csv = String::with_capacity(traj.states.len() * 96);
    csv.push_str("t,x,y,norm\n");
    for ((t, s), r) in traj.times.iter().zip(&traj.states).zip(&norms) {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(s[0]),
            fmt_f64(s[1]),
            fmt_f64(*r)
        );
    }
    ctx.emit_csv("simulate", args, &csv)?;
    match estimate_decay(&traj, args.tail) {
        Ok(est) => {
            ctx.record(&est)?;
            Ok(EXIT_STABLE)
        }
        Err(Error::NotDecaying {
            initial_norm,
            final_norm,
        }) => {
            ctx.record(&GrowthRecord {
                growth_flagged: traj.growth_flagged(),
                terminated_early: traj.terminated_early,
                initial_norm,
                final_norm,
            })?;
            Ok(EXIT_UNSTABLE)
        }
        Err(e) => Err(e.into()),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_STABLE
            };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };

    let mut ctx = Ctx { cli: &cli, stdout };
    let outcome = match &cli.command {
        Command::Classify(a) => cmd_classify(&mut ctx, a),
        Command::Curve(a) => cmd_curve(&mut ctx, a),
        Command::Qscan(a) => cmd_qscan(&mut ctx, a),
        Command::Roots(a) => cmd_roots(&mut ctx, a),
        Command::Simulate(a) => cmd_simulate(&mut ctx, a),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Engine(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            if matches!(
                (&cli.command, &e),
                (Command::Roots(_), Error::DeltaNotPositive(_))
            ) {
                let _ = writeln!(
                    stderr,
                    "hint: root counting needs det(A) > 0; `fracstab classify` decides det(A) <= 0 directly"
                );
            }
            exit_code_for_error(&e)
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INTERNAL
        }
    }
}
