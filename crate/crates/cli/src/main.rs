//! `qneclab`: entropy scans, flows, cocycle and extensivity checks, and the
//! seeded verification suites.

mod output;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use qneclab::verify::{known_unattainable, run_suite, Suite, VerifyConfig};
use qneclab::{
    bekenstein_check, coboundary_check, counterexample, entropy_half_line, entropy_half_line_derivatives, entropy_interval, exponentiate,
    extensivity_report, flow_jet, vacuum_energy, Diffeomorphism, Direction, Error, FieldSpec, FlowConfig, Picture, QuadConfig, VectorField,
};

use output::{Cell, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "qneclab", version, about = "Relative entropies of diffeomorphism-induced states in chiral CFT")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Central charge.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1.0)]
    c: f64,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    quad_tol: f64,
    /// Absolute tolerance of the flow integrator.
    #[arg(long, global = true, default_value_t = 1e-12)]
    ode_abs_tol: f64,
    /// Relative tolerance of the flow integrator.
    #[arg(long, global = true, default_value_t = 1e-10)]
    ode_rel_tol: f64,
    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Scan the relative entropy of `Exp(f)` over a grid of cuts or radii.
    Entropy(EntropyArgs),
    /// Jet and Schwarzian of `Exp(t f)` at one point or on a grid.
    Flow(FlowArgs),
    /// The cos² flow at unit time and its non-convex exchanged entropy.
    Counterexample,
    /// Compare `S(−r, r)` with `π r E` for several radii.
    Bekenstein(BekensteinArgs),
    /// Bott cocycle and its coboundary on up to three circle flows.
    CocycleCheck(CocycleArgs),
    /// Deviation from additivity of the half-line entropy for a pair of fields.
    Extensivity(ExtensivityArgs),
    /// Run a seeded invariant suite, or all of them.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    HalfLine,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    StateVsVacuum,
    VacuumVsState,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::StateVsVacuum => Direction::StateVsVacuum,
            DirectionArg::VacuumVsState => Direction::VacuumVsState,
        }
    }
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::StateVsVacuum => "state_vs_vacuum",
        Direction::VacuumVsState => "vacuum_vs_state",
    }
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = -2.0)]
    t0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 2.0)]
    t1: f64,
    #[arg(long, default_value_t = 41)]
    steps: usize,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    /// JSON field spec.
    #[arg(long)]
    field: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::HalfLine)]
    kind: Kind,
    #[arg(long, value_enum, default_value_t = DirectionArg::StateVsVacuum)]
    direction: DirectionArg,
    /// Flow time of `Exp(t f)`.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    time: f64,
    /// Cut points for half-lines; radii of `(−r, r)` for intervals.
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct FlowArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    t: f64,
    /// Single evaluation point; overrides the grid.
    #[arg(long, allow_negative_numbers = true)]
    u: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = -2.0)]
    u0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 2.0)]
    u1: f64,
    #[arg(long, default_value_t = 41)]
    steps: usize,
}

#[derive(Debug, Args)]
struct BekensteinArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    time: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0, 4.0])]
    radii: Vec<f64>,
    /// Both directions when omitted.
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
}

#[derive(Debug, Args)]
struct CocycleArgs {
    /// Up to three circle field specs; missing maps are the identity.
    #[arg(long = "field", num_args = 1)]
    fields: Vec<PathBuf>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    t: f64,
}

#[derive(Debug, Args)]
struct ExtensivityArgs {
    #[arg(long)]
    field1: PathBuf,
    #[arg(long)]
    field2: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite name or `all`.
    suite: String,
    /// Random draws per property.
    #[arg(long, default_value_t = 4)]
    samples: usize,
    #[arg(long, hide = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Numerical(String),
    /// A check ran and reported a violation; the table is still written.
    Violated(Table),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violated(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

/// Attaches the operation and evaluation point to a library error.
fn at<'a, P: std::fmt::Display + 'a>(op: &'a str, point: P) -> impl Fn(Error) -> Failure + 'a {
    move |e| {
        let msg = format!("{op} at {point}: {e}");
        match e {
            Error::InvalidParameter(_)
            | Error::PictureMismatch { .. }
            | Error::OrderOutOfRange(_)
            | Error::NotLocalized
            | Error::EndpointNotFixed { .. } => Failure::Invalid(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

struct Run {
    c: f64,
    quad: QuadConfig,
    flow: FlowConfig,
    seed: u64,
}

impl Run {
    fn new(a: &RunArgs) -> Result<Self, Failure> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(a.c) {
            return Err(Failure::Invalid(format!("--c must be positive, got {}", a.c)));
        }
        if !positive(a.quad_tol) {
            return Err(Failure::Invalid(format!("--quad-tol must be positive, got {}", a.quad_tol)));
        }
        let flow = FlowConfig { abs_tol: a.ode_abs_tol, rel_tol: a.ode_rel_tol, ..FlowConfig::default() };
        flow.validate().map_err(at("flow configuration", "startup"))?;
        Ok(Self { c: a.c, quad: QuadConfig { abs_tol: a.quad_tol, ..QuadConfig::default() }, flow, seed: a.seed })
    }

    fn map(&self, field: &VectorField, t: f64) -> Result<Diffeomorphism, Failure> {
        exponentiate(field, t, &self.flow).map_err(at("exponentiate", format!("t = {t}")))
    }
}

fn load_field(path: &Path) -> Result<VectorField, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let spec = FieldSpec::from_json(&text).map_err(|e| Failure::Invalid(format!("invalid field spec in {}: {e}", path.display())))?;
    spec.build().map_err(|e| Failure::Invalid(format!("invalid field spec in {}: {e}", path.display())))
}

fn grid(t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    if steps == 0 || !t0.is_finite() || !t1.is_finite() {
        return Err(Failure::Invalid(format!("grid needs finite ends and at least one step, got {t0}..{t1} in {steps}")));
    }
    if steps == 1 {
        return Ok(vec![t0]);
    }
    Ok((0..steps).map(|i| t0 + (t1 - t0) * i as f64 / (steps - 1) as f64).collect())
}

/// Evaluates rows in parallel, keeping input order and the first error.
fn rows<T, F>(points: &[T], f: F) -> Result<Vec<Vec<Cell>>, Failure>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Cell>, Failure> + Send + Sync,
{
    points.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

fn cmd_entropy(run: &Run, a: &EntropyArgs) -> Result<Table, Failure> {
    let field = load_field(&a.field)?;
    let rho = run.map(&field, a.time)?;
    let dir = Direction::from(a.direction);
    let pts = grid(a.grid.t0, a.grid.t1, a.grid.steps)?;
    match a.kind {
        Kind::HalfLine => {
            let mut table = Table::new(vec!["t", "S", "dS", "d2S", "quad_err"]);
            table.rows = rows(&pts, |&t| {
                let s = entropy_half_line(&rho, t, run.c, dir, &run.quad).map_err(at("entropy", format!("t = {t}")))?;
                let d = entropy_half_line_derivatives(&rho, t, run.c, dir, &run.quad).map_err(at("entropy derivatives", format!("t = {t}")))?;
                Ok(vec![t.into(), s.value.into(), d.d1.into(), d.d2.into(), (s.quad_err + d.quad_err).into()])
            })?;
            Ok(table)
        }
        Kind::Interval => {
            if pts.iter().any(|&r| r <= 0.0) {
                return Err(Failure::Invalid("interval radii must be positive; set --t0 and --t1 above 0".into()));
            }
            let e = vacuum_energy(&rho, run.c, dir, &run.quad).map_err(at("vacuum energy", "whole line"))?;
            let mut table = Table::new(vec!["r", "S", "energy", "bound", "margin", "quad_err"]);
            table.rows = rows(&pts, |&r| {
                let s = entropy_interval(&rho, -r, r, run.c, dir, &run.quad).map_err(at("interval entropy", format!("r = {r}")))?;
                let bound = PI * r * e.value;
                let err = s.quad_err + PI * r * e.abs_err;
                Ok(vec![r.into(), s.value.into(), e.value.into(), bound.into(), (bound - s.value).into(), err.into()])
            })?;
            Ok(table)
        }
    }
}

fn cmd_flow(run: &Run, a: &FlowArgs) -> Result<Table, Failure> {
    let field = load_field(&a.field)?;
    let pts = match a.u {
        Some(u) => vec![u],
        None => grid(a.u0, a.u1, a.steps)?,
    };
    let mut table = Table::new(vec!["u", "value", "d1", "d2", "d3", "schwarzian"]);
    table.rows = rows(&pts, |&u| {
        let j = flow_jet(&field, a.t, u, &run.flow).map_err(at("flow", format!("u = {u}")))?;
        Ok(vec![u.into(), j.value.into(), j.d1.into(), j.d2.into(), j.d3.into(), j.schwarzian().into()])
    })?;
    Ok(table)
}

fn cmd_counterexample(run: &Run) -> Result<Table, Failure> {
    let r = counterexample(run.c, &run.flow, &run.quad).map_err(at("counterexample", "cos2 flow"))?;
    let mut table = Table::new(vec!["quantity", "value", "target", "tolerance", "pass"]);
    let mut row = |name: &str, value: f64, target: f64, tol: f64| {
        table.push(vec![name.into(), value.into(), target.into(), tol.into(), ((value - target).abs() <= tol).into()]);
    };
    row("closed_form_residual", r.closed_form_residual, 0.0, 1e-9);
    row("ratio_at_zero", r.ratio_at_zero, qneclab::counterexample::RATIO_TARGET, 1e-6);
    row("integral", r.integral, qneclab::counterexample::INTEGRAL_TARGET, 0.05);
    row("s2_quarter", r.s2_quarter, r.s2_target, 0.05 * r.s2_target.abs());
    row("s2_quarter_direct", r.s2_quarter_direct, r.s2_target, 0.05 * r.s2_target.abs());
    Ok(table)
}

fn cmd_bekenstein(run: &Run, a: &BekensteinArgs) -> Result<Table, Failure> {
    let field = load_field(&a.field)?;
    let rho = run.map(&field, a.time)?;
    let dirs = match a.direction {
        Some(d) => vec![Direction::from(d)],
        None => vec![Direction::StateVsVacuum, Direction::VacuumVsState],
    };
    let cases: Vec<(Direction, f64)> = dirs.iter().flat_map(|&d| a.radii.iter().map(move |&r| (d, r))).collect();
    let mut table = Table::new(vec!["r", "direction", "S", "bound", "margin", "quad_err", "pass"]);
    table.rows = rows(&cases, |&(d, r)| {
        let b = bekenstein_check(&rho, r, run.c, d, &run.quad).map_err(at("bekenstein", format!("r = {r}")))?;
        Ok(vec![r.into(), direction_name(d).into(), b.entropy.into(), b.bound.into(), b.margin.into(), b.quad_err.into(), b.pass.into()])
    })?;
    Ok(table)
}

fn cmd_cocycle(run: &Run, a: &CocycleArgs) -> Result<Table, Failure> {
    if a.fields.len() > 3 {
        return Err(Failure::Invalid(format!("at most three --field specs, got {}", a.fields.len())));
    }
    let mut maps = Vec::new();
    for path in &a.fields {
        let f = load_field(path)?;
        if f.picture() != Picture::Circle {
            return Err(Failure::Invalid(format!("{} is not a circle field", path.display())));
        }
        maps.push(run.map(&f, a.t)?);
    }
    maps.resize(3, Diffeomorphism::identity(Picture::Circle));
    let rec = coboundary_check(&maps[0], &maps[1], &maps[2], &run.quad).map_err(at("coboundary", "triple"))?;
    let mut table = Table::new(vec!["B12", "B12_3", "B1_23", "B23", "coboundary_residual", "quad_err"]);
    table.push(vec![rec.B12.into(), rec.B12_3.into(), rec.B1_23.into(), rec.B23.into(), rec.coboundary_residual.into(), rec.quad_err.into()]);
    Ok(table)
}

fn cmd_extensivity(run: &Run, a: &ExtensivityArgs) -> Result<Table, Failure> {
    let (f1, f2) = (load_field(&a.field1)?, load_field(&a.field2)?);
    let pts = grid(a.grid.t0, a.grid.t1, a.grid.steps)?;
    let mut table = Table::new(vec!["t", "s_exact", "eps0", "eps1", "eps2", "eps3", "bound", "satisfied", "quad_err"]);
    table.rows = rows(&pts, |&t| {
        let r = extensivity_report(&f1, &f2, t, run.c, &run.flow, &run.quad).map_err(at("extensivity", format!("t = {t}")))?;
        Ok(vec![
            t.into(),
            r.s_exact.into(),
            r.eps0.into(),
            r.eps1.into(),
            r.eps2.into(),
            r.eps3.into(),
            r.bound.into(),
            r.satisfied.into(),
            r.quad_err.into(),
        ])
    })?;
    Ok(table)
}

fn cmd_verify(run: &Run, a: &VerifyArgs) -> Result<Table, Failure> {
    let suites: Vec<Suite> = if a.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![a.suite.parse().map_err(|e: Error| Failure::Invalid(e.to_string()))?]
    };
    if a.samples == 0 || !(a.tolerance_scale.is_finite() && a.tolerance_scale >= 0.0) {
        return Err(Failure::Invalid("--samples must be positive and --tolerance-scale nonnegative".into()));
    }
    let cfg = VerifyConfig {
        seed: run.seed,
        c: run.c,
        quad: run.quad,
        flow: run.flow,
        samples: a.samples,
        tolerance_scale: a.tolerance_scale,
    };
    let outcomes: Vec<_> = suites.par_iter().flat_map_iter(|&s| run_suite(s, &cfg)).collect();
    let mut table = Table::new(vec!["suite", "property", "checks", "max_residual", "tolerance", "pass", "note"]);
    let mut failed = 0;
    for o in &outcomes {
        let note = match (&o.error, o.pass) {
            (Some(e), _) => e.clone(),
            (None, false) => known_unattainable(o.suite, &o.property).map(|w| format!("known: {w}")).unwrap_or_default(),
            (None, true) => String::new(),
        };
        failed += usize::from(!o.pass);
        // A non-finite residual is already a failed property, not a numerical error.
        let residual = if o.max_residual.is_finite() { Cell::Num(o.max_residual) } else { Cell::Text(o.max_residual.to_string()) };
        table.push(vec![
            o.suite.name().into(),
            o.property.clone().into(),
            o.checks.into(),
            residual,
            o.tolerance.into(),
            o.pass.into(),
            note.into(),
        ]);
    }
    eprintln!("{} properties, {failed} failed", outcomes.len());
    if failed > 0 {
        Err(Failure::Violated(table))
    } else {
        Ok(table)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("QNECLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Invalid(format!("QNECLAB_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Invalid(format!("cannot size thread pool: {e}")))
}

fn write(table: &Table, args: &RunArgs) -> Result<(), Failure> {
    let text = table.render(args.format);
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    let run = Run::new(&cli.run)?;
    let result = match &cli.cmd {
        Cmd::Entropy(a) => cmd_entropy(&run, a),
        Cmd::Flow(a) => cmd_flow(&run, a),
        Cmd::Counterexample => cmd_counterexample(&run),
        Cmd::Bekenstein(a) => cmd_bekenstein(&run, a),
        Cmd::CocycleCheck(a) => cmd_cocycle(&run, a),
        Cmd::Extensivity(a) => cmd_extensivity(&run, a),
        Cmd::Verify(a) => cmd_verify(&run, a),
    };
    let table = match result {
        Ok(t) => t,
        Err(Failure::Violated(t)) => {
            write(&t, &cli.run)?;
            return Err(Failure::Violated(t));
        }
        Err(e) => return Err(e),
    };
    if let Some((col, row)) = table.first_non_finite() {
        return Err(Failure::Numerical(format!("non-finite value in column {col}, row {row}")));
    }
    write(&table, &cli.run)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                Failure::Invalid(m) | Failure::Numerical(m) => eprintln!("error: {m}"),
                Failure::Violated(_) => {}
            }
            ExitCode::from(e.code())
        }
    }
}
