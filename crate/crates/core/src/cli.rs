//! Command-line front end.
//!
//! Output is deterministic: identical arguments (including `--seed`) give
//! byte-identical output. Floats are written in shortest round-trip form.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage, 3 domain, 4 convergence,
//! 5 concentration regime, 6 validation failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eos::Regime;
use crate::error::Error;
use crate::exec::Execution;
use crate::limits::{self, LimitClass};
use crate::rarefaction::first_invariant;
use crate::setup::{Direction, PistonProblem, ProfileSample, WaveKind};
use crate::solution::{self, ExactSolution};

pub const SCHEMA: &str = "mcg-piston/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_CONCENTRATION: i32 = 5;
pub const EXIT_VALIDATION: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "mcg-piston", version, about = "Exact piston solutions for a modified Chaplygin gas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and print a summary.
    #[command(allow_negative_numbers = true)]
    Solve(RunConfig),
    /// Sample the self-similar profile on [1.2 * leftmost speed, 0].
    #[command(allow_negative_numbers = true)]
    Profile(RunConfig),
    /// Solve along a range of theta or M0.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        config: RunConfig,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Cross-check against the finite-volume solver, or the weak form in the concentration regime.
    #[command(allow_negative_numbers = true)]
    Validate {
        #[command(flatten)]
        config: RunConfig,
        /// A `solve` JSON document to compare against.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
    /// Classify the A -> 0 limit and report its data.
    #[command(allow_negative_numbers = true)]
    Limit(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    Theta,
    M0,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long)]
    pub m0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value = "proceeding")]
    pub direction: Direction,
    /// Number of profile rows.
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Finest finite-volume grid.
    #[arg(long, default_value_t = 2000)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub t_final: f64,
    #[arg(long, default_value_t = 0.9)]
    pub cfl: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized validation suite.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub sweep: SweepAxis,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long)]
    pub count: usize,
    /// Space values geometrically instead of linearly.
    #[arg(long)]
    pub log: bool,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Degenerate { .. } => EXIT_DOMAIN,
        Error::Convergence { .. } | Error::NonFinite(_) => EXIT_CONVERGENCE,
        Error::ConcentrationRegime { .. } => EXIT_CONCENTRATION,
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            f.code
        }
    }
}

/// Runs a parsed command; returns the exit code on success paths that still signal (validation).
pub fn execute(command: &Command) -> Result<i32, Failure> {
    match command {
        Command::Solve(c) => {
            check_config(c)?;
            let text = render_solve(c)?;
            emit(c.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Profile(c) => {
            check_config(c)?;
            let text = render_profile(c)?;
            emit(c.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Sweep { config, sweep } => {
            check_config(config)?;
            let text = render_sweep(config, sweep)?;
            emit(config.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Validate { config, golden } => {
            check_config(config)?;
            if config.grid_n < 128 {
                return Err(Failure::usage(format!("--grid-n must be >= 128 for the convergence ladder, got {}", config.grid_n)));
            }
            let report = validate(config, golden.as_deref())?;
            emit(config.out.as_deref(), &render_validation(config, &report))?;
            Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::Limit(c) => {
            check_config(c)?;
            let text = render_limit(c)?;
            emit(c.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
    }
}

fn check_config(c: &RunConfig) -> Result<(), Failure> {
    if !(c.m0.is_finite() && c.m0 > 0.0) {
        return Err(Failure::usage(format!("--m0 must be finite and > 0, got {}", c.m0)));
    }
    if !(c.alpha > 0.0 && c.alpha <= 1.0) {
        return Err(Failure::usage(format!("--alpha must lie in (0, 1], got {}", c.alpha)));
    }
    if !(0.0..1.0).contains(&c.theta) {
        return Err(Failure::usage(format!("--theta must lie in [0, 1), got {}", c.theta)));
    }
    if c.samples < 2 {
        return Err(Failure::usage(format!("--samples must be >= 2, got {}", c.samples)));
    }
    if c.grid_n < crate::fvm::MIN_CELLS {
        return Err(Failure::usage(format!("--grid-n must be >= {}, got {}", crate::fvm::MIN_CELLS, c.grid_n)));
    }
    if !(c.t_final.is_finite() && c.t_final > 0.0) {
        return Err(Failure::usage(format!("--t-final must be finite and > 0, got {}", c.t_final)));
    }
    if !(c.cfl > 0.0 && c.cfl <= 1.0) {
        return Err(Failure::usage(format!("--cfl must lie in (0, 1], got {}", c.cfl)));
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure { code: EXIT_IO, message: format!("cannot write {}: {e}", path.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn problem_of(c: &RunConfig) -> Result<PistonProblem, Failure> {
    Ok(PistonProblem::new(c.m0, c.direction, c.alpha, c.theta)?)
}

/// Shortest round-trip decimal form.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub m0: f64,
    pub alpha: f64,
    pub theta: f64,
    pub direction: Direction,
    pub a: f64,
    pub b: f64,
}

impl InputEcho {
    fn of(p: &PistonProblem, theta: f64) -> Self {
        Self { m0: p.m0, alpha: p.gas.alpha, theta, direction: p.direction, a: p.gas.a, b: p.gas.b }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "wave", rename_all = "snake_case")]
pub enum WaveSummary {
    Shock {
        rho1: f64,
        sigma: f64,
        p1: f64,
        rh_mass: f64,
        rh_momentum: f64,
        f_residual: f64,
        lax_ok: bool,
    },
    Rarefaction {
        rho1: f64,
        eta_head: f64,
        eta_tail: f64,
        w0: f64,
        p1: f64,
        tail_residual: f64,
        u_tail: f64,
    },
    GcgRarefaction {
        rho1: f64,
        eta_head: f64,
        eta_tail: f64,
        w0: f64,
    },
    ChaplyginContact {
        rho1: f64,
        sigma: f64,
    },
}

impl WaveSummary {
    fn of(exact: &ExactSolution) -> Result<Self, Failure> {
        Ok(match exact {
            ExactSolution::Shock(s) => WaveSummary::Shock {
                rho1: s.rho1,
                sigma: s.sigma,
                p1: s.p1,
                rh_mass: s.rh_residual.0,
                rh_momentum: s.rh_residual.1,
                f_residual: s.f_residual,
                lax_ok: s.lax_ok,
            },
            ExactSolution::Rarefaction(r) => WaveSummary::Rarefaction {
                rho1: r.rho1,
                eta_head: r.eta_head,
                eta_tail: r.eta_tail,
                w0: r.w0,
                p1: r.gas.pressure(r.rho1)?,
                tail_residual: r.tail.relative_residual,
                u_tail: r.sample(r.eta_tail)?.u,
            },
            ExactSolution::GcgRarefaction(f) => {
                WaveSummary::GcgRarefaction { rho1: f.rho1, eta_head: f.eta_head, eta_tail: f.eta_tail, w0: f.w }
            }
            ExactSolution::ChaplyginContact(c) => WaveSummary::ChaplyginContact { rho1: c.rho1, sigma: c.sigma },
        })
    }

    pub fn rho1(&self) -> f64 {
        match *self {
            WaveSummary::Shock { rho1, .. }
            | WaveSummary::Rarefaction { rho1, .. }
            | WaveSummary::GcgRarefaction { rho1, .. }
            | WaveSummary::ChaplyginContact { rho1, .. } => rho1,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            WaveSummary::Shock { .. } => "shock",
            WaveSummary::Rarefaction { .. } => "rarefaction",
            WaveSummary::GcgRarefaction { .. } => "gcg_rarefaction",
            WaveSummary::ChaplyginContact { .. } => "chaplygin_contact",
        }
    }

    /// Shock or contact speed, or the fan tail.
    fn speed(&self) -> f64 {
        match *self {
            WaveSummary::Shock { sigma, .. } | WaveSummary::ChaplyginContact { sigma, .. } => sigma,
            WaveSummary::Rarefaction { eta_tail, .. } | WaveSummary::GcgRarefaction { eta_tail, .. } => eta_tail,
        }
    }

    /// Residual pair: jump conditions for shocks, (tail equation, u at tail) for fans.
    fn residuals(&self) -> (f64, f64) {
        match *self {
            WaveSummary::Shock { rh_mass, rh_momentum, .. } => (rh_mass, rh_momentum),
            WaveSummary::Rarefaction { tail_residual, u_tail, .. } => (tail_residual, u_tail),
            _ => (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDocument {
    pub schema: String,
    pub command: String,
    pub input: InputEcho,
    pub solution: WaveSummary,
}

fn solve_document(c: &RunConfig) -> Result<SolveDocument, Failure> {
    let p = problem_of(c)?;
    let exact = solution::solve(&p)?;
    Ok(SolveDocument {
        schema: SCHEMA.into(),
        command: "solve".into(),
        input: InputEcho::of(&p, c.theta),
        solution: WaveSummary::of(&exact)?,
    })
}

fn render_solve(c: &RunConfig) -> Result<String, Failure> {
    let doc = solve_document(c)?;
    Ok(match c.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&doc),
        Format::Csv => {
            let row = SweepRow::from_summary(&doc.input, Ok(&doc.solution));
            format!("{SWEEP_HEADER}\n{}\n", row.csv())
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub schema: String,
    pub command: String,
    pub input: InputEcho,
    pub wave_kind: WaveKind,
    pub samples: Vec<ProfileSample>,
}

pub const PROFILE_HEADER: &str = "xi,rho,u,p";

fn render_profile(c: &RunConfig) -> Result<String, Failure> {
    let p = problem_of(c)?;
    let concentration = p.gas.a == 0.0
        && p.direction == Direction::Proceeding
        && limits::classify_limit(p.gas.alpha, p.m0) == LimitClass::Concentration;
    let profile = if concentration {
        solution::measure_limit_profile(&p, c.samples)?
    } else {
        solution::solve(&p)?.profile(&p, c.samples)?
    };
    profile.validate(&p.gas)?;
    Ok(match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from(PROFILE_HEADER);
            s.push('\n');
            for r in &profile.samples {
                let _ = writeln!(s, "{},{},{},{}", num(r.xi), num(r.rho), num(r.u), num(r.p));
            }
            s
        }
        Format::Json => to_json(&ProfileDocument {
            schema: SCHEMA.into(),
            command: "profile".into(),
            input: InputEcho::of(&p, c.theta),
            wave_kind: profile.wave_kind,
            samples: profile.samples,
        }),
    })
}

pub const SWEEP_HEADER: &str = "m0,alpha,theta,direction,status,wave,rho1,speed,residual_1,residual_2,limit_class";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m0: f64,
    pub alpha: f64,
    pub theta: f64,
    pub direction: Direction,
    /// `ok`, or the error class that stopped this row.
    pub status: String,
    pub wave: Option<String>,
    pub rho1: Option<f64>,
    pub speed: Option<f64>,
    pub residual_1: Option<f64>,
    pub residual_2: Option<f64>,
    pub limit_class: LimitClass,
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Convergence { .. } => "convergence",
        Error::ConcentrationRegime { .. } => "concentration",
        Error::Degenerate { .. } => "degenerate",
        Error::NonFinite(_) => "non_finite",
    }
}

impl SweepRow {
    fn from_summary(input: &InputEcho, outcome: Result<&WaveSummary, &Error>) -> Self {
        let limit_class = limits::classify_limit(input.alpha, input.m0);
        let base = Self {
            m0: input.m0,
            alpha: input.alpha,
            theta: input.theta,
            direction: input.direction,
            status: "ok".into(),
            wave: None,
            rho1: None,
            speed: None,
            residual_1: None,
            residual_2: None,
            limit_class,
        };
        match outcome {
            Ok(w) => {
                let (r1, r2) = w.residuals();
                Self {
                    wave: Some(w.name().into()),
                    rho1: Some(w.rho1()),
                    speed: Some(w.speed()),
                    residual_1: Some(r1),
                    residual_2: Some(r2),
                    ..base
                }
            }
            Err(e) => Self { status: status_of(e).into(), ..base },
        }
    }

    fn csv(&self) -> String {
        let class = match self.limit_class {
            LimitClass::IntegralShock => "integral_shock",
            LimitClass::Concentration => "concentration",
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(self.m0),
            num(self.alpha),
            num(self.theta),
            self.direction,
            self.status,
            self.wave.as_deref().unwrap_or(""),
            opt_num(self.rho1),
            opt_num(self.speed),
            opt_num(self.residual_1),
            opt_num(self.residual_2),
            class
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub schema: String,
    pub command: String,
    pub axis: String,
    pub rows: Vec<SweepRow>,
}

/// `count` values from `from` to `to` inclusive, linear or geometric.
pub fn sweep_values(args: &SweepArgs) -> Result<Vec<f64>, Failure> {
    if args.count == 0 {
        return Err(Failure::usage("--count must be >= 1"));
    }
    if !(args.from.is_finite() && args.to.is_finite()) {
        return Err(Failure::usage("--from and --to must be finite"));
    }
    if args.log && !(args.from > 0.0 && args.to > 0.0) {
        return Err(Failure::usage("--log needs --from and --to > 0"));
    }
    if args.count == 1 {
        return Ok(vec![args.from]);
    }
    let last = (args.count - 1) as f64;
    Ok((0..args.count)
        .map(|k| {
            let f = k as f64 / last;
            if args.log {
                (args.from.ln() + f * (args.to.ln() - args.from.ln())).exp()
            } else {
                args.from + f * (args.to - args.from)
            }
        })
        .collect())
}

fn render_sweep(c: &RunConfig, args: &SweepArgs) -> Result<String, Failure> {
    let values = sweep_values(args)?;
    let rows = Execution::default().map(&values, |&v| {
        let (m0, theta) = match args.sweep {
            SweepAxis::Theta => (c.m0, v),
            SweepAxis::M0 => (v, c.theta),
        };
        let input = InputEcho { m0, alpha: c.alpha, theta, direction: c.direction, a: f64::NAN, b: f64::NAN };
        let outcome = PistonProblem::new(m0, c.direction, c.alpha, theta)
            .and_then(|p| solution::solve(&p))
            .and_then(|exact| WaveSummary::of(&exact).map_err(|f| Error::Domain(f.message)));
        SweepRow::from_summary(&input, outcome.as_ref())
    });
    Ok(match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from(SWEEP_HEADER);
            s.push('\n');
            for r in &rows {
                s.push_str(&r.csv());
                s.push('\n');
            }
            s
        }
        Format::Json => to_json(&SweepDocument {
            schema: SCHEMA.into(),
            command: "sweep".into(),
            axis: match args.sweep {
                SweepAxis::Theta => "theta".into(),
                SweepAxis::M0 => "m0".into(),
            },
            rows,
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `<` or `>=`: how `value` must compare with `threshold`.
    pub op: String,
    pub value: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), op: "<".into(), value: value.is_finite().then_some(value), threshold, passed: value < threshold }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), op: ">=".into(), value: value.is_finite().then_some(value), threshold, passed: value >= threshold }
    }

    fn failed(name: &str) -> Self {
        Self { name: name.into(), op: "<".into(), value: None, threshold: 0.0, passed: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationDocument {
    pub schema: String,
    pub command: String,
    pub input: InputEcho,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub const RANDOM_SUITE_SIZE: usize = 20;
pub const VALIDATION_HEADER: &str = "name,op,value,threshold,passed";

fn validate(c: &RunConfig, golden: Option<&Path>) -> Result<ValidationDocument, Failure> {
    let p = problem_of(c)?;
    let exec = Execution::default();
    let mut checks = Vec::new();

    let concentration = p.gas.a == 0.0
        && p.direction == Direction::Proceeding
        && limits::classify_limit(p.gas.alpha, p.m0) == LimitClass::Concentration;
    if concentration {
        let ms = limits::measure_solution(p.gas.alpha, p.m0)?;
        let bank = limits::default_bank();
        let coarse = limits::verify_weak_form(&ms, &bank, 256, exec)?.max_residual;
        let fine = limits::verify_weak_form(&ms, &bank, 512, exec)?.max_residual;
        let mut wrong = ms;
        wrong.w_rho_slope = 1.5;
        let perturbed = limits::verify_weak_form(&wrong, &bank, 256, exec)?.max_residual;
        checks.push(Check::below("weak_form_residual", coarse, 1e-6));
        checks.push(Check::at_least("weak_form_order", (coarse / fine).log2(), 1.8));
        checks.push(Check::at_least("weak_form_detects_perturbation", perturbed, 1e-2));
    } else {
        let exact = solution::solve(&p)?;
        checks.extend(exact_checks(&p, &exact)?);
        let n = c.grid_n;
        let ladder = [n / 8, n / 4, n / 2, n];
        let cv = solution::cross_validate(&p, &exact, &ladder, c.t_final, c.cfl, exec)?;
        let finest = cv.levels.last().expect("ladder is non-empty");
        checks.push(Check::below("fvm_l1_density", finest.l1_error, 1e-2));
        if let Some(e) = finest.shock_position_error {
            checks.push(Check::below("fvm_shock_position", e, 0.02));
        }
        checks.push(Check::at_least("fvm_smooth_order", cv.smooth_order, 0.8));
        checks.push(Check::below("fvm_wall_velocity", finest.wall_velocity.abs(), 1e-2));
        checks.push(Check::below("fvm_mass_defect", finest.mass_defect, 1e-10));
    }

    checks.push(random_suite(p.direction, c.seed, exec));
    if let Some(path) = golden {
        checks.extend(golden_checks(c, path));
    }
    let passed = checks.iter().all(|k| k.passed);
    Ok(ValidationDocument {
        schema: SCHEMA.into(),
        command: "validate".into(),
        input: InputEcho::of(&p, c.theta),
        checks,
        passed,
    })
}

/// Defining-equation residuals of an exact solution.
fn exact_checks(p: &PistonProblem, exact: &ExactSolution) -> Result<Vec<Check>, Failure> {
    let mut checks = Vec::new();
    match exact {
        ExactSolution::Shock(s) => {
            checks.push(Check::below("rh_mass", s.rh_residual.0.abs(), 1e-10));
            checks.push(Check::below("rh_momentum", s.rh_residual.1.abs(), 1e-10));
            if p.gas.regime() == Regime::Modified {
                checks.push(Check::at_least("lax", if s.lax_ok { 1.0 } else { 0.0 }, 1.0));
            }
        }
        ExactSolution::Rarefaction(r) => {
            checks.push(Check::below("fan_u_tail", r.sample(r.eta_tail)?.u.abs(), 1e-10));
            checks.push(Check::below("fan_rho_head", (r.sample(r.eta_head)?.rho - 1.0).abs(), 1e-10));
            let mut worst: f64 = 0.0;
            for k in 0..256 {
                let eta = r.eta_head + (r.eta_tail - r.eta_head) * k as f64 / 255.0;
                let st = r.sample(eta)?;
                worst = worst.max((first_invariant(&p.gas, st.rho, st.u)? - r.w0).abs());
            }
            checks.push(Check::below("fan_invariant", worst, 1e-10));
        }
        ExactSolution::GcgRarefaction(f) => {
            checks.push(Check::below("fan_u_tail", f.sample(f.eta_tail)?.1.abs(), 1e-10));
        }
        ExactSolution::ChaplyginContact(_) => {}
    }
    Ok(checks)
}

/// Seeded batch of random modified-gas problems in the same direction; value is the failure count.
fn random_suite(direction: Direction, seed: u64, exec: Execution) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64, f64)> = (0..RANDOM_SUITE_SIZE)
        .map(|_| {
            let m0 = rng.gen_range(0.05f64.ln()..20f64.ln()).exp();
            (m0, rng.gen_range(0.05..0.95), rng.gen_range(0.01..0.99))
        })
        .collect();
    let failures = exec
        .map(&draws, |&(m0, alpha, theta)| {
            let ok = PistonProblem::new(m0, direction, alpha, theta)
                .map_err(Failure::from)
                .and_then(|p| {
                    let exact = solution::solve(&p)?;
                    Ok(exact_checks(&p, &exact)?.iter().all(|k| k.passed))
                })
                .unwrap_or(false);
            usize::from(!ok)
        })
        .into_iter()
        .sum::<usize>();
    Check::below("random_suite_failures", failures as f64, 0.5)
}

fn golden_checks(c: &RunConfig, path: &Path) -> Vec<Check> {
    let golden: SolveDocument = match std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|s| serde_json::from_str(&s).map_err(|e| e.to_string()))
    {
        Ok(g) => g,
        Err(_) => return vec![Check::failed("golden_parse")],
    };
    let current = match solve_document(c) {
        Ok(d) => d,
        Err(_) => return vec![Check::failed("golden_solve")],
    };
    let a = serde_json::to_value(&golden.solution).unwrap_or_default();
    let b = serde_json::to_value(&current.solution).unwrap_or_default();
    let (Some(a), Some(b)) = (a.as_object(), b.as_object()) else {
        return vec![Check::failed("golden_parse")];
    };
    if a.get("wave") != b.get("wave") {
        return vec![Check::failed("golden_wave")];
    }
    b.iter()
        .filter_map(|(key, vb)| {
            let vb = vb.as_f64()?;
            let name = format!("golden_{key}");
            let Some(va) = a.get(key).and_then(|v| v.as_f64()) else {
                return Some(Check::failed(&name));
            };
            let rel = (va - vb).abs() / vb.abs().max(1e-300);
            // residual fields are compared absolutely
            let err = if key.contains("residual") || key.starts_with("rh_") || key == "u_tail" { (va - vb).abs() } else { rel };
            Some(Check::below(&name, err, 1e-12))
        })
        .collect()
}

fn render_validation(c: &RunConfig, doc: &ValidationDocument) -> String {
    match c.format.unwrap_or(Format::Json) {
        Format::Json => to_json(doc),
        Format::Csv => {
            let mut s = String::from(VALIDATION_HEADER);
            s.push('\n');
            for k in &doc.checks {
                let _ = writeln!(s, "{},{},{},{},{}", k.name, k.op, opt_num(k.value), num(k.threshold), k.passed);
            }
            s
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitDocument {
    pub schema: String,
    pub command: String,
    pub m0: f64,
    pub alpha: f64,
    pub direction: Direction,
    pub limit_class: LimitClass,
    /// Shock density approached as `A -> 0` (integral-shock regime).
    pub limit_rho1: Option<f64>,
    pub w_rho_slope: Option<f64>,
    pub w_p_const: Option<f64>,
    pub interior_pressure: Option<f64>,
    /// Terminal density behind a receding piston with `A = 0`.
    pub receding_rho1: Option<f64>,
    /// Fan tail (`alpha < 1`) or contact speed (`alpha = 1`) behind a receding piston.
    pub receding_speed: Option<f64>,
}

pub const LIMIT_HEADER: &str =
    "m0,alpha,direction,limit_class,limit_rho1,w_rho_slope,w_p_const,interior_pressure,receding_rho1,receding_speed";

fn render_limit(c: &RunConfig) -> Result<String, Failure> {
    let (alpha, m0) = (c.alpha, c.m0);
    let class = limits::classify_limit(alpha, m0);
    let mut doc = LimitDocument {
        schema: SCHEMA.into(),
        command: "limit".into(),
        m0,
        alpha,
        direction: c.direction,
        limit_class: class,
        limit_rho1: None,
        w_rho_slope: None,
        w_p_const: None,
        interior_pressure: None,
        receding_rho1: None,
        receding_speed: None,
    };
    match c.direction {
        Direction::Proceeding => match class {
            LimitClass::IntegralShock => doc.limit_rho1 = Some(limits::gcg_limit_density(alpha, m0)?),
            LimitClass::Concentration => {
                let ms = limits::measure_solution(alpha, m0)?;
                doc.w_rho_slope = Some(ms.w_rho_slope);
                doc.w_p_const = Some(ms.w_p_const);
                doc.interior_pressure = Some(ms.interior_pressure());
            }
        },
        Direction::Receding => {
            if alpha == 1.0 {
                let contact = limits::chaplygin_receding_density(m0)?;
                doc.receding_rho1 = Some(contact.rho1);
                doc.receding_speed = Some(contact.sigma);
            } else {
                let fan = limits::GcgFan::new(alpha, m0)?;
                doc.receding_rho1 = Some(fan.rho1);
                doc.receding_speed = Some(fan.eta_tail);
            }
        }
    }
    Ok(match c.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&doc),
        Format::Csv => {
            let class = match doc.limit_class {
                LimitClass::IntegralShock => "integral_shock",
                LimitClass::Concentration => "concentration",
            };
            format!(
                "{LIMIT_HEADER}\n{},{},{},{},{},{},{},{},{},{}\n",
                num(doc.m0),
                num(doc.alpha),
                doc.direction,
                class,
                opt_num(doc.limit_rho1),
                opt_num(doc.w_rho_slope),
                opt_num(doc.w_p_const),
                opt_num(doc.interior_pressure),
                opt_num(doc.receding_rho1),
                opt_num(doc.receding_speed)
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(extra: &[&str]) -> SweepArgs {
        let mut a = SweepArgs { sweep: SweepAxis::Theta, from: 1e-2, to: 1e-10, count: 5, log: true };
        if extra.contains(&"linear") {
            a = SweepArgs { sweep: SweepAxis::M0, from: 0.5, to: 1.5, count: 3, log: false };
        }
        a
    }

    #[test]
    fn sweep_values_log_and_linear() {
        let v = sweep_values(&args(&[])).unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[2] - 1e-6).abs() < 1e-18);
        assert_eq!(sweep_values(&args(&["linear"])).unwrap(), vec![0.5, 1.0, 1.5]);
        let empty = SweepArgs { count: 0, ..args(&[]) };
        assert_eq!(sweep_values(&empty).unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_DOMAIN);
        assert_eq!(exit_code(&Error::ConcentrationRegime { m0_sq: 4.0, threshold: 2.0 }), EXIT_CONCENTRATION);
        assert_eq!(exit_code(&Error::NonFinite("x")), EXIT_CONVERGENCE);
    }

    #[test]
    fn num_is_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::SQRT_2] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
