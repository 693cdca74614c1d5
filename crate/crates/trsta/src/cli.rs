//! Command-line front end: `trsta validate|simulate|sweep|work`.
//!
//! Flags may be backed by a `key=value` config file (`--config PATH`);
//! explicit flags win over file entries, which win over built-in defaults.
//! Output files are CSV (one header row, `#`-prefixed provenance comments,
//! floats with 17 significant digits) or JSON reports with an embedded
//! `provenance` object. Identical configurations produce byte-identical
//! files.
//!
//! Exit codes: 0 success, 1 numerical or I/O failure, 2 usage/config error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::propagate::{
    evolve, evolve_trajectory, propagator_distance, PureState2, TimeGrid, DEFAULT_STEPS,
};
use crate::protocol::{AeDrive, AeParams, Drive, TrDrive};
use crate::rescale::{RescaleMap, Speedup};
use crate::robustness::{pi_pulse_fidelity, sweep, uniform_grid, SweepKind, SweepSpec};
use crate::workstats::{compare_protocols, work_distribution, EqualityRow, ThermalSpec};
use crate::{hamiltonian, Error};

/// Gap tolerance for the work-equality report; the command fails when any
/// reference-versus-compressed gap exceeds it.
pub const WORK_GAP_TOL: f64 = 1e-6;
/// Propagator-equality tolerance used by `validate`.
pub const PROPAGATOR_TOL: f64 = 1e-6;
/// Residual tolerance for map properties, drive composition, and boundary
/// matching in `validate`.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance on the peak-amplitude law in `validate`.
pub const PEAK_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "trsta",
    version,
    about = "Time-rescaled shortcuts to adiabatic two-level population inversion"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandKind,
}

#[derive(Subcommand, Debug)]
enum CommandKind {
    /// Check rescaling-map properties, drive identities, and propagator equality
    Validate(CommonArgs),
    /// Integrate population trajectories and write plot-ready CSV files
    Simulate(CommonArgs),
    /// Sweep systematic control errors and tabulate fidelity curves
    Sweep(CommonArgs),
    /// Compare work statistics between the reference and compressed protocols
    Work(CommonArgs),
}

impl CommandKind {
    fn name(&self) -> &'static str {
        match self {
            CommandKind::Validate(_) => "validate",
            CommandKind::Simulate(_) => "simulate",
            CommandKind::Sweep(_) => "sweep",
            CommandKind::Work(_) => "work",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            CommandKind::Validate(a)
            | CommandKind::Simulate(a)
            | CommandKind::Sweep(a)
            | CommandKind::Work(a) => a,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    /// Peak Rabi frequency of the reference pulse
    #[arg(long)]
    omega0: Option<f64>,

    /// Chirp-rate constant of the detuning ramp
    #[arg(long)]
    beta_chirp: Option<f64>,

    /// Characteristic timescale; the protocol window is 8·t0
    #[arg(long)]
    t0: Option<f64>,

    /// Contraction parameters, comma separated (e.g. --a 2,5,10)
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,

    /// Integration steps per protocol window
    #[arg(long)]
    steps: Option<usize>,

    /// Rabi-amplitude error grid LO:HI:N (sweep)
    #[arg(long, value_name = "LO:HI:N", allow_hyphen_values = true)]
    eps_range: Option<RangeSpec>,

    /// Detuning-chirp error grid LO:HI:N (sweep)
    #[arg(long, value_name = "LO:HI:N", allow_hyphen_values = true)]
    delta_range: Option<RangeSpec>,

    /// Inverse temperatures, comma separated (work)
    #[arg(long, value_delimiter = ',')]
    beta_thermal: Option<Vec<f64>>,

    /// Output path; per-a files get an `_a<value>` suffix
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format for data files and reports
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,

    /// key=value config file; explicit flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Uniform grid described as LO:HI:N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        uniform_grid(self.lo, self.hi, self.n)
    }
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected LO:HI:N, got {s:?}"));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|e| format!("bad LO in {s:?}: {e}"))?;
        let hi: f64 = parts[1].trim().parse().map_err(|e| format!("bad HI in {s:?}: {e}"))?;
        let n: usize = parts[2].trim().parse().map_err(|e| format!("bad N in {s:?}: {e}"))?;
        if n == 0 {
            return Err(format!("grid size must be >= 1 in {s:?}"));
        }
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(format!("need finite LO <= HI in {s:?}"));
        }
        if n == 1 && lo != hi {
            return Err(format!("a single-point grid needs LO == HI in {s:?}"));
        }
        Ok(Self { lo, hi, n })
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything a command needs, fully resolved from flags, config file, and
/// per-command defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: AeParams,
    pub a_values: Vec<f64>,
    pub steps: usize,
    pub eps_range: Option<RangeSpec>,
    pub delta_range: Option<RangeSpec>,
    pub beta_thermal: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

enum AppError {
    /// Bad flags or config file: exit 2.
    Config(String),
    /// Numerical or I/O failure while running: exit 1.
    Run(String),
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError::Run(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Run(format!("I/O error: {e}"))
    }
}

/// Parse arguments and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };

    let command = cli.command;
    let resolved = resolve_config(command.name(), command.args());
    let outcome = resolved.and_then(|cfg| match &command {
        CommandKind::Validate(_) => cmd_validate(&cfg),
        CommandKind::Simulate(_) => cmd_simulate(&cfg),
        CommandKind::Sweep(_) => cmd_sweep(&cfg),
        CommandKind::Work(_) => cmd_work(&cfg),
    });

    match outcome {
        Ok(code) => code,
        Err(AppError::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(AppError::Run(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

// ---------------------------------------------------------------------------
// configuration resolution

fn resolve_config(command: &str, args: &CommonArgs) -> Result<RunConfig, AppError> {
    let file = match &args.config {
        Some(path) => parse_config_file(path).map_err(AppError::Config)?,
        None => CommonArgs::default(),
    };

    let pick = |flag: Option<f64>, from_file: Option<f64>| flag.or(from_file);

    let omega0 = pick(args.omega0, file.omega0).unwrap_or(2.0);
    let beta_chirp = pick(args.beta_chirp, file.beta_chirp).unwrap_or(std::f64::consts::SQRT_2);
    let t0 = pick(args.t0, file.t0).unwrap_or(1.0);
    let params = AeParams::new(omega0, beta_chirp, t0)
        .map_err(|e| AppError::Config(e.to_string()))?;

    let a_values = args
        .a
        .clone()
        .or(file.a.clone())
        .unwrap_or_else(|| default_a_values(command));
    if a_values.is_empty() {
        return Err(AppError::Config("need at least one contraction parameter".into()));
    }
    if let Some(bad) = a_values.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(AppError::Config(format!(
            "contraction parameters must be finite and > 0, got {bad}"
        )));
    }

    let steps = args.steps.or(file.steps).unwrap_or(DEFAULT_STEPS);
    if steps == 0 {
        return Err(AppError::Config("steps must be >= 1".into()));
    }

    let eps_range = args.eps_range.or(file.eps_range);
    let delta_range = args.delta_range.or(file.delta_range);
    if eps_range.is_some() && delta_range.is_some() {
        return Err(AppError::Config(
            "choose one of --eps-range or --delta-range per sweep".into(),
        ));
    }

    let beta_thermal = args
        .beta_thermal
        .clone()
        .or(file.beta_thermal.clone())
        .unwrap_or_else(|| vec![0.1, 1.0, 10.0]);
    if beta_thermal.is_empty() {
        return Err(AppError::Config("need at least one inverse temperature".into()));
    }
    if let Some(bad) = beta_thermal.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(AppError::Config(format!(
            "inverse temperatures must be finite and >= 0, got {bad}"
        )));
    }

    let format = args.format.or(file.format).unwrap_or(match command {
        "validate" | "work" => OutputFormat::Json,
        _ => OutputFormat::Csv,
    });

    Ok(RunConfig {
        params,
        a_values,
        steps,
        eps_range,
        delta_range,
        beta_thermal,
        out: args.out.clone().or(file.out.clone()),
        format,
    })
}

fn default_a_values(command: &str) -> Vec<f64> {
    match command {
        "validate" => vec![2.0],
        "work" => vec![2.0, 10.0],
        _ => vec![1.0, 2.0, 10.0],
    }
}

/// `key = value` file, one entry per line, `#` comments. Keys mirror the
/// long flags (underscores and dashes are interchangeable).
fn parse_config_file(path: &Path) -> Result<CommonArgs, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut cfg = CommonArgs::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {raw:?}", lineno + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let ctx = |e: String| format!("line {}: {e}", lineno + 1);
        match key.as_str() {
            "omega0" => cfg.omega0 = Some(parse_num(value).map_err(ctx)?),
            "beta-chirp" => cfg.beta_chirp = Some(parse_num(value).map_err(ctx)?),
            "t0" => cfg.t0 = Some(parse_num(value).map_err(ctx)?),
            "a" => cfg.a = Some(parse_list(value).map_err(ctx)?),
            "steps" => {
                cfg.steps = Some(
                    value
                        .parse()
                        .map_err(|e| ctx(format!("bad steps {value:?}: {e}")))?,
                )
            }
            "eps-range" => cfg.eps_range = Some(value.parse().map_err(ctx)?),
            "delta-range" => cfg.delta_range = Some(value.parse().map_err(ctx)?),
            "beta-thermal" => cfg.beta_thermal = Some(parse_list(value).map_err(ctx)?),
            "out" => cfg.out = Some(PathBuf::from(value)),
            "format" => {
                cfg.format = Some(match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => return Err(ctx(format!("format must be csv or json, got {other:?}"))),
                })
            }
            other => return Err(ctx(format!("unknown key {other:?}"))),
        }
    }
    Ok(cfg)
}

fn parse_num(s: &str) -> Result<f64, String> {
    s.parse().map_err(|e| format!("bad number {s:?}: {e}"))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| parse_num(p.trim()))
        .collect()
}

// ---------------------------------------------------------------------------
// shared output helpers

/// 17 significant digits, enough to reproduce any f64 exactly.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize, Debug, Clone)]
struct Provenance {
    omega0: f64,
    beta_chirp: f64,
    t0: f64,
    t_f: f64,
    a: Vec<f64>,
    steps: usize,
}

impl Provenance {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            omega0: cfg.params.omega0(),
            beta_chirp: cfg.params.beta_chirp(),
            t0: cfg.params.t0(),
            t_f: cfg.params.total_duration(),
            a: cfg.a_values.clone(),
            steps: cfg.steps,
        }
    }

    /// `#`-prefixed comment block for CSV files.
    fn comment_block(&self, command: &str, extra: &[(&str, String)]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# trsta {command}");
        let _ = writeln!(s, "# omega0 = {}", self.omega0);
        let _ = writeln!(s, "# beta_chirp = {}", self.beta_chirp);
        let _ = writeln!(s, "# t0 = {}", self.t0);
        let _ = writeln!(s, "# t_f = {}", self.t_f);
        let _ = writeln!(
            s,
            "# a = {}",
            self.a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(s, "# steps = {}", self.steps);
        for (k, v) in extra {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }
}

fn write_text(path: &Path, content: &str) -> Result<(), AppError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// Emit a report to `--out` or stdout.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), AppError> {
    match out {
        Some(path) => write_text(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Insert `_a<value>` before the extension when several files are written.
fn path_for_a(base: &Path, a: f64, multi: bool) -> PathBuf {
    if !multi {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|s| s.to_string_lossy().into_owned());
    let name = match ext {
        Some(ext) => format!("{stem}_a{a}.{ext}"),
        None => format!("{stem}_a{a}"),
    };
    base.with_file_name(name)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, AppError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| AppError::Run(format!("JSON encoding failed: {e}")))
}

// ---------------------------------------------------------------------------
// validate

#[derive(Serialize, Debug)]
struct NamedCheck {
    name: String,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

impl NamedCheck {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let name = name.into();
        Self {
            name,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Serialize, Debug)]
struct ValidateEntry {
    a: f64,
    speedup: Speedup,
    checks: Vec<NamedCheck>,
    pass: bool,
}

#[derive(Serialize, Debug)]
struct ValidateReport {
    command: &'static str,
    provenance: Provenance,
    entries: Vec<ValidateEntry>,
    pass: bool,
}

fn cmd_validate(cfg: &RunConfig) -> Result<i32, AppError> {
    let params = cfg.params;
    let t_f = params.total_duration();
    let reference = AeDrive::new(params);
    let u_ref = evolve(&reference, &TimeGrid::new(0.0, t_f, cfg.steps)?)?;

    let mut entries = Vec::new();
    for &a in &cfg.a_values {
        let map = RescaleMap::new(a, t_f)?;
        let drive = TrDrive::new(params, map)?;
        let map_report = map.validate(IDENTITY_TOL);
        let mut checks: Vec<NamedCheck> = map_report
            .checks
            .iter()
            .map(|c| NamedCheck::new(c.name, c.residual, c.tolerance))
            .collect();

        // closed-form waveforms versus slope × remapped reference, on a grid
        let dur = drive.duration();
        let n_grid = 800;
        let mut comp_rabi = 0.0_f64;
        let mut comp_det = 0.0_f64;
        for k in 0..=n_grid {
            let tau = if k == n_grid { dur } else { dur * k as f64 / n_grid as f64 };
            let slope = map.derivative(tau)?;
            let t = map.eval(tau)?.min(t_f);
            comp_rabi = comp_rabi.max((drive.rabi(tau)? - slope * params.rabi(t)?).abs());
            comp_det = comp_det.max((drive.detuning(tau)? - slope * params.detuning(t)?).abs());
        }
        let scale = params.omega0();
        checks.push(NamedCheck::new(
            "composition identity: rabi waveform",
            comp_rabi / scale,
            IDENTITY_TOL,
        ));
        checks.push(NamedCheck::new(
            "composition identity: detuning waveform",
            comp_det / scale,
            IDENTITY_TOL,
        ));

        // boundary matching at both window ends
        checks.push(NamedCheck::new(
            "boundary match: rabi at start",
            (drive.rabi(0.0)? - params.rabi(0.0)?).abs(),
            IDENTITY_TOL,
        ));
        checks.push(NamedCheck::new(
            "boundary match: rabi at end",
            (drive.rabi(dur)? - params.rabi(t_f)?).abs(),
            IDENTITY_TOL,
        ));
        checks.push(NamedCheck::new(
            "boundary match: detuning at start",
            (drive.detuning(0.0)? - params.detuning(0.0)?).abs(),
            IDENTITY_TOL,
        ));
        checks.push(NamedCheck::new(
            "boundary match: detuning at end",
            (drive.detuning(dur)? - params.detuning(t_f)?).abs(),
            IDENTITY_TOL,
        ));

        // peak amplitude law on a grid containing the mid-window node;
        // the (2a-1)·Ω₀ law only applies to actual shortcuts (a >= 1)
        if a >= 1.0 {
            let n_peak = 4000;
            let mut peak = 0.0_f64;
            for k in 0..=n_peak {
                let tau = if k == n_peak { dur } else { dur * k as f64 / n_peak as f64 };
                peak = peak.max(drive.rabi(tau)?);
            }
            checks.push(NamedCheck::new(
                "peak amplitude equals (2a-1)*omega0",
                (peak - drive.peak_rabi()).abs(),
                PEAK_TOL,
            ));
        }

        // compressed evolution reproduces the reference propagator
        let u_tr = evolve(&drive, &TimeGrid::new(0.0, dur, cfg.steps)?)?;
        checks.push(NamedCheck::new(
            "propagator equality (phase-insensitive)",
            propagator_distance(&u_ref, &u_tr),
            PROPAGATOR_TOL,
        ));

        let pass = checks.iter().all(|c| c.pass);
        entries.push(ValidateEntry {
            a,
            speedup: map_report.speedup,
            checks,
            pass,
        });
    }

    let pass = entries.iter().all(|e| e.pass);
    let report = ValidateReport {
        command: "validate",
        provenance: Provenance::new(cfg),
        entries,
        pass,
    };

    for entry in &report.entries {
        let verdict = if entry.pass { "PASS" } else { "FAIL" };
        println!("a = {}: {verdict}", entry.a);
        if entry.speedup == Speedup::Slower {
            println!("  warning: a < 1 rescales to a slower protocol, not a shortcut");
        }
        for c in &entry.checks {
            println!(
                "  [{}] {:<45} residual {:.3e} (tol {:.0e})",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            );
        }
    }

    if let Some(path) = &cfg.out {
        write_text(path, &to_json(&report)?)?;
    } else if cfg.format == OutputFormat::Json {
        print!("{}", to_json(&report)?);
    }

    Ok(if pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct TrajectoryRow {
    time: f64,
    p1: f64,
    p2: f64,
    rabi: f64,
    detuning: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p1_ad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p2_ad: Option<f64>,
}

fn cmd_simulate(cfg: &RunConfig) -> Result<i32, AppError> {
    let params = cfg.params;
    let multi = cfg.a_values.len() > 1;
    let ext = match cfg.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let base = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("trajectory.{ext}")));

    for &a in &cfg.a_values {
        let drive = TrDrive::with_contraction(params, a)?;
        let dur = drive.duration();
        let grid = TimeGrid::new(0.0, dur, cfg.steps)?;
        let traj = evolve_trajectory(&drive, &grid, &PureState2::basis_1())?;

        let reference = a == 1.0;
        let mut rows = Vec::with_capacity(traj.len());
        for (t, psi) in &traj {
            let (p1, p2) = psi.populations();
            let (p1_ad, p2_ad) = if reference {
                let (x, y) = params.adiabatic_populations(*t)?;
                (Some(x), Some(y))
            } else {
                (None, None)
            };
            rows.push(TrajectoryRow {
                time: *t,
                p1,
                p2,
                rabi: drive.rabi(*t)?,
                detuning: drive.detuning(*t)?,
                p1_ad,
                p2_ad,
            });
        }

        let path = path_for_a(&base, a, multi);
        let provenance = Provenance {
            a: vec![a],
            ..Provenance::new(cfg)
        };
        let content = match cfg.format {
            OutputFormat::Csv => {
                let mut s = provenance.comment_block("simulate", &[("window", format!("[0, {dur}]"))]);
                let header = if reference {
                    "time,P1,P2,rabi,detuning,P1_ad,P2_ad"
                } else {
                    "time,P1,P2,rabi,detuning"
                };
                let _ = writeln!(s, "{header}");
                for r in &rows {
                    let mut line = format!(
                        "{},{},{},{},{}",
                        fmt_f(r.time),
                        fmt_f(r.p1),
                        fmt_f(r.p2),
                        fmt_f(r.rabi),
                        fmt_f(r.detuning)
                    );
                    if let (Some(x), Some(y)) = (r.p1_ad, r.p2_ad) {
                        let _ = write!(line, ",{},{}", fmt_f(x), fmt_f(y));
                    }
                    let _ = writeln!(s, "{line}");
                }
                s
            }
            OutputFormat::Json => to_json(&serde_json::json!({
                "command": "simulate",
                "provenance": provenance,
                "rows": rows,
            }))?,
        };
        write_text(&path, &content)?;

        let (_, p2_final) = traj.last().expect("non-empty trajectory").1.populations();
        println!(
            "a = {a}: wrote {} ({} rows, window [0, {dur}], final P2 = {:.6})",
            path.display(),
            rows.len(),
            p2_final
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// sweep

fn cmd_sweep(cfg: &RunConfig) -> Result<i32, AppError> {
    let (kind, values) = match (cfg.eps_range, cfg.delta_range) {
        (Some(r), None) => (SweepKind::RabiError, r.values()),
        (None, Some(r)) => (SweepKind::DetuningError, r.values()),
        (None, None) => (SweepKind::RabiError, SweepSpec::default_values()),
        (Some(_), Some(_)) => unreachable!("rejected during config resolution"),
    };
    let spec = SweepSpec::new(kind, values, cfg.a_values.clone(), cfg.params)
        .map_err(|e| AppError::Config(e.to_string()))?
        .with_steps(cfg.steps);
    let result = sweep(&spec)?;

    let rabi_kind = kind == SweepKind::RabiError;
    let provenance = Provenance::new(cfg);
    let content = match cfg.format {
        OutputFormat::Csv => {
            let mut s = provenance.comment_block("sweep", &[("error_kind", kind.label().into())]);
            let header = if rabi_kind {
                "a,error_kind,error_value,fidelity,pi_pulse_fidelity"
            } else {
                "a,error_kind,error_value,fidelity"
            };
            let _ = writeln!(s, "{header}");
            for r in &result.rows {
                let mut line = format!(
                    "{},{},{},{}",
                    fmt_f(r.a),
                    kind.label(),
                    fmt_f(r.error_value),
                    fmt_f(r.fidelity)
                );
                if rabi_kind {
                    let _ = write!(line, ",{}", fmt_f(pi_pulse_fidelity(r.error_value)));
                }
                let _ = writeln!(s, "{line}");
            }
            s
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = result
                .rows
                .iter()
                .map(|r| {
                    let mut v = serde_json::json!({
                        "a": r.a,
                        "error_kind": kind.label(),
                        "error_value": r.error_value,
                        "fidelity": r.fidelity,
                    });
                    if rabi_kind {
                        v["pi_pulse_fidelity"] =
                            serde_json::json!(pi_pulse_fidelity(r.error_value));
                    }
                    v
                })
                .collect();
            to_json(&serde_json::json!({
                "command": "sweep",
                "provenance": provenance,
                "error_kind": kind.label(),
                "rows": rows,
            }))?
        }
    };
    emit(&cfg.out, &content)?;

    eprintln!(
        "sweep {}: {} rows, min fidelity {:.6}, max spread across a {:.2e}",
        kind.label(),
        result.rows.len(),
        result.min_fidelity(),
        result.max_spread_across_a()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// work

#[derive(Serialize)]
struct WorkReport {
    command: &'static str,
    provenance: Provenance,
    beta_thermal: Vec<f64>,
    tolerance: f64,
    rows: Vec<EqualityRow>,
    max_gap: f64,
    pass: bool,
}

fn cmd_work(cfg: &RunConfig) -> Result<i32, AppError> {
    let mut rows: Vec<EqualityRow> = Vec::new();
    for &beta in &cfg.beta_thermal {
        let spec = ThermalSpec::new(beta).map_err(|e| AppError::Config(e.to_string()))?;
        let report = compare_protocols(&cfg.params, &cfg.a_values, &spec, cfg.steps)?;
        rows.extend(report.rows);
    }
    let max_gap = rows.iter().map(|r| r.mean_gap.max(r.fluct_gap)).fold(0.0, f64::max);
    let pass = max_gap <= WORK_GAP_TOL;

    let report = WorkReport {
        command: "work",
        provenance: Provenance::new(cfg),
        beta_thermal: cfg.beta_thermal.clone(),
        tolerance: WORK_GAP_TOL,
        rows,
        max_gap,
        pass,
    };

    let content = match cfg.format {
        OutputFormat::Json => to_json(&report)?,
        OutputFormat::Csv => {
            let mut s = report.provenance.comment_block(
                "work",
                &[(
                    "beta_thermal",
                    report
                        .beta_thermal
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                )],
            );
            let _ = writeln!(s, "a,beta,mean_ref,mean_tr,fluct_ref,fluct_tr,mean_gap,fluct_gap");
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    fmt_f(r.a),
                    fmt_f(r.beta),
                    fmt_f(r.mean_ref),
                    fmt_f(r.mean_tr),
                    fmt_f(r.fluct_ref),
                    fmt_f(r.fluct_tr),
                    fmt_f(r.mean_gap),
                    fmt_f(r.fluct_gap)
                );
            }
            s
        }
    };
    emit(&cfg.out, &content)?;

    // work atoms alongside the report when writing to a file
    if let Some(out) = &cfg.out {
        let stem = out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "work".into());
        let atoms_path = out.with_file_name(format!("{stem}_atoms.csv"));
        write_text(&atoms_path, &work_atoms_csv(cfg)?)?;
    }

    eprintln!(
        "work equality: {} rows, max gap {max_gap:.3e} (tolerance {WORK_GAP_TOL:.0e}) -> {}",
        report.rows.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 1 })
}

/// Four TPM atoms per (a, β) for both the reference and compressed runs.
fn work_atoms_csv(cfg: &RunConfig) -> Result<String, AppError> {
    let params = cfg.params;
    let t_f = params.total_duration();
    let reference = AeDrive::new(params);
    let u_ref = evolve(&reference, &TimeGrid::new(0.0, t_f, cfg.steps)?)?;
    let h_i = hamiltonian(&reference.sample(0.0)?);
    let h_f = hamiltonian(&reference.sample(t_f)?);

    let mut s = Provenance::new(cfg).comment_block("work-atoms", &[]);
    let _ = writeln!(s, "protocol,a,beta,from,to,work,probability");
    for &beta in &cfg.beta_thermal {
        let spec = ThermalSpec::new(beta).map_err(|e| AppError::Config(e.to_string()))?;
        let d = work_distribution(&u_ref, &h_i, &h_f, &spec)?;
        for atom in &d.atoms {
            let _ = writeln!(
                s,
                "reference,{},{},{:?},{:?},{},{}",
                fmt_f(1.0),
                fmt_f(beta),
                atom.from,
                atom.to,
                fmt_f(atom.work),
                fmt_f(atom.probability)
            );
        }
        for &a in &cfg.a_values {
            let drive = TrDrive::with_contraction(params, a)?;
            let u = evolve(&drive, &TimeGrid::new(0.0, drive.duration(), cfg.steps)?)?;
            let hi_tr = hamiltonian(&drive.sample(0.0)?);
            let hf_tr = hamiltonian(&drive.sample(drive.duration())?);
            let d = work_distribution(&u, &hi_tr, &hf_tr, &spec)?;
            for atom in &d.atoms {
                let _ = writeln!(
                    s,
                    "rescaled,{},{},{:?},{:?},{},{}",
                    fmt_f(a),
                    fmt_f(beta),
                    atom.from,
                    atom.to,
                    fmt_f(atom.work),
                    fmt_f(atom.probability)
                );
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_spec_parsing() {
        let r: RangeSpec = "-0.2:0.2:41".parse().unwrap();
        assert_eq!(r, RangeSpec { lo: -0.2, hi: 0.2, n: 41 });
        let vals = r.values();
        assert_eq!(vals.len(), 41);
        assert_eq!(vals[0], -0.2);
        assert_eq!(vals[40], 0.2);
        assert!("0.2:41".parse::<RangeSpec>().is_err());
        assert!("0.3:0.1:5".parse::<RangeSpec>().is_err());
        assert!("0:1:0".parse::<RangeSpec>().is_err());
        assert!("a:b:3".parse::<RangeSpec>().is_err());
        let single: RangeSpec = "0.5:0.5:1".parse().unwrap();
        assert_eq!(single.values(), vec![0.5]);
    }

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "# comment\nomega0 = 3.0\nbeta_chirp=1.0\na = 2, 5\nsteps = 100\nformat = json\n",
        )
        .unwrap();
        let cfg = parse_config_file(&path).unwrap();
        assert_eq!(cfg.omega0, Some(3.0));
        assert_eq!(cfg.beta_chirp, Some(1.0));
        assert_eq!(cfg.a, Some(vec![2.0, 5.0]));
        assert_eq!(cfg.steps, Some(100));
        assert_eq!(cfg.format, Some(OutputFormat::Json));

        std::fs::write(&path, "nonsense = 1\n").unwrap();
        assert!(parse_config_file(&path).is_err());
        std::fs::write(&path, "omega0\n").unwrap();
        assert!(parse_config_file(&path).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "omega0 = 3.0\nsteps = 77\n").unwrap();
        let args = CommonArgs {
            omega0: Some(4.0),
            config: Some(path),
            ..Default::default()
        };
        let cfg = resolve_config("simulate", &args).map_err(|_| ()).unwrap();
        assert_eq!(cfg.params.omega0(), 4.0);
        assert_eq!(cfg.steps, 77);
    }

    #[test]
    fn per_command_defaults() {
        let cfg = resolve_config("validate", &CommonArgs::default()).map_err(|_| ()).unwrap();
        assert_eq!(cfg.a_values, vec![2.0]);
        assert_eq!(cfg.steps, DEFAULT_STEPS);
        let cfg = resolve_config("work", &CommonArgs::default()).map_err(|_| ()).unwrap();
        assert_eq!(cfg.a_values, vec![2.0, 10.0]);
        assert_eq!(cfg.beta_thermal, vec![0.1, 1.0, 10.0]);
        let cfg = resolve_config("sweep", &CommonArgs::default()).map_err(|_| ()).unwrap();
        assert_eq!(cfg.a_values, vec![1.0, 2.0, 10.0]);
    }

    #[test]
    fn rejects_contradictory_ranges() {
        let args = CommonArgs {
            eps_range: Some("0:0.1:2".parse().unwrap()),
            delta_range: Some("0:0.1:2".parse().unwrap()),
            ..Default::default()
        };
        assert!(matches!(resolve_config("sweep", &args), Err(AppError::Config(_))));
    }

    #[test]
    fn suffixed_paths() {
        let p = path_for_a(Path::new("out/traj.csv"), 2.0, true);
        assert_eq!(p, PathBuf::from("out/traj_a2.csv"));
        let p = path_for_a(Path::new("traj.csv"), 2.5, true);
        assert_eq!(p, PathBuf::from("traj_a2.5.csv"));
        let p = path_for_a(Path::new("traj.csv"), 2.0, false);
        assert_eq!(p, PathBuf::from("traj.csv"));
    }

    #[test]
    fn float_formatting_has_17_significant_digits() {
        assert_eq!(fmt_f(1.0), "1.0000000000000000e0");
        let x = 0.1 + 0.2;
        let parsed: f64 = fmt_f(x).parse().unwrap();
        assert_eq!(parsed.to_bits(), x.to_bits());
    }
}
