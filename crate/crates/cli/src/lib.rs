//! The `nsl` command-line tool.

pub mod expr;
pub mod parse;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nsl_core::constants::{k_pn, zstar_norm};
use nsl_core::functionals::{
    cheeger_fd, cheeger_surrogate, gagliardo_p, hajlasz_minimal, nguyen_a, nguyen_b, scale_energies, EnergySpec,
    ScalarField,
};
use nsl_core::limits::{bbm_sweep, extrapolate, ks_sweep, nguyen_sweep, SweepResult};
use nsl_core::parallel::with_workers;
use nsl_core::space::{kernel_comparability, load_space, save_space};
use nsl_core::verify::{self, VerificationReport};
use nsl_core::{build_space, KernelSpec, MetricMeasureSpace};

pub use expr::{parse_field_expr, FieldExpr, ParseError};

const AFTER_HELP: &str = "\
Spaces are given as a saved .space file or a generator spec:
  interval:N[:alpha]   cell-centered grid on [0,1], density x^alpha
  circle:N             unit circle, arc-length metric; x is the angle in [0, 2pi)
  torus2d:NXxNY        flat unit torus
  gauge:N[:body]       grid on [0,1]^2 with the gauge of body (ball, square[:h], ellipse:a:b)
  sierpinski:L         level-L gasket graph
  @spec.json           any spec as JSON, including weighted graphs

Field expressions use x, y, z (coordinates), pi, + - * / ^, sin, cos, exp,
abs, min, max. Spaces without coordinates need --field-csv.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error.";

#[derive(Debug, Parser)]
#[command(
    name = "nsl",
    version,
    about = "Nonlocal Sobolev energies on finite metric measure spaces"
)]
#[command(after_help = AFTER_HELP)]
pub struct RunConfig {
    /// Worker threads; results do not depend on it. NSL_WORKERS overrides.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,

    /// Run on a single worker.
    #[arg(long, global = true)]
    pub deterministic: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a space and save it.
    Gen(GenArgs),
    /// Euclidean constants, or the doubling constants of a space.
    Constants(ConstantsArgs),
    /// Evaluate one energy.
    Energy(EnergyArgs),
    /// Sweep a parameter toward its limit and extrapolate.
    Sweep(SweepArgs),
    /// Run verification checks.
    Verify(VerifyArgs),
    /// Summarize a saved sweep CSV or verification JSON.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator spec.
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write this field, evaluated on the space, as CSV.
    #[arg(long, requires = "field_out")]
    pub field: Option<String>,
    #[arg(long)]
    pub field_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Dimension for K_{p,N}.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Body for the anisotropic norm: ball, square[:h], ellipse:a:b.
    #[arg(long, requires = "xi")]
    pub body: Option<String>,
    /// Covector for the anisotropic norm, comma separated.
    #[arg(long)]
    pub xi: Option<String>,
    /// Report c_D and C_rho of this space instead.
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long, default_value = "rho1")]
    pub kernel: KernelSpec,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Space file or generator spec.
    #[arg(long)]
    pub space: String,
    /// Field expression.
    #[arg(long, conflicts_with = "field_csv", required_unless_present = "field_csv")]
    pub field: Option<String>,
    /// Field values, one per line.
    #[arg(long)]
    pub field_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value = "rho1")]
    pub kernel: KernelSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnergyKind {
    Gagliardo,
    NguyenA,
    NguyenB,
    Scale,
    Slope,
    Fd,
    Hajlasz,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Defaults to gagliardo with --s, nguyen-a with --delta (nguyen-b when
    /// --r is also set), scale with --t.
    #[arg(long, value_enum)]
    pub kind: Option<EnergyKind>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Hölder order of the Hajłasz constraint.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Bbm,
    Nguyen,
    Ks,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    /// start:stop:step or a comma list; defaults depend on the space.
    #[arg(long)]
    pub s_grid: Option<String>,
    #[arg(long)]
    pub delta_grid: Option<String>,
    #[arg(long)]
    pub t_grid: Option<String>,
    /// CSV of (parameter, value).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the limit estimate here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    All,
    Annuli,
    Mean,
    Fubini,
    NguyenAveraging,
    SRoutes,
    Hks,
    Mollifier,
    UpperGradient,
    Hajlasz,
    TwoSided,
}

const ALL_CHECKS: [Check; 10] = [
    Check::Annuli,
    Check::Mean,
    Check::Fubini,
    Check::NguyenAveraging,
    Check::SRoutes,
    Check::Hks,
    Check::Mollifier,
    Check::UpperGradient,
    Check::Hajlasz,
    Check::TwoSided,
];

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    pub suite: Vec<Check>,
    /// Scales for the ball checks; default D/16, D/8, D/4, D/2.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Radii for the annuli check; default h_min·2^k.
    #[arg(long)]
    pub r_grid: Option<String>,
    /// Fractional order for the Fubini identity.
    #[arg(long, default_value_t = 0.7)]
    pub s: f64,
    /// Averaging exponent for the Nguyen identity.
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// Truncation for the Nguyen identity and cutoff for the Hajłasz
    /// constraints; defaults to half the oscillation and 8 h_min.
    #[arg(long)]
    pub r: Option<f64>,
    /// Scale of the upper gradient check; defaults to D/8.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Tolerance on |M_t f - f|_p at the smallest scale.
    #[arg(long, default_value_t = verify::MOLLIFIER_EPS)]
    pub mollifier_eps: f64,
    /// Write all reports as a JSON array.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Sweep CSV written by `sweep --out`.
    #[arg(long, conflicts_with = "verify", required_unless_present = "verify")]
    pub sweep: Option<PathBuf>,
    /// Exponent the sweep was run with.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Verification JSON written by `verify --json`.
    #[arg(long)]
    pub verify: Option<PathBuf>,
}

/// How a command ended when it did not error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ChecksFailed,
}

pub fn run_from_env() -> i32 {
    match RunConfig::try_parse() {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

fn resolve_workers(cfg: &RunConfig) -> Result<usize> {
    if cfg.deterministic {
        return Ok(1);
    }
    if let Ok(v) = std::env::var("NSL_WORKERS") {
        let k: usize = v
            .trim()
            .parse()
            .with_context(|| format!("NSL_WORKERS=`{v}` is not a worker count"))?;
        if k == 0 {
            bail!("NSL_WORKERS must be at least 1");
        }
        return Ok(k);
    }
    Ok(match cfg.workers {
        Some(k) => k as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    })
}

pub fn run(cfg: &RunConfig) -> i32 {
    let result = resolve_workers(cfg).and_then(|k| with_workers(k, || dispatch(&cfg.command)));
    match result {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::ChecksFailed) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Constants(a) => constants(a),
        Command::Energy(a) => energy(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => run_verify(a),
        Command::Report(a) => report(a),
    }
    .map(|ok| ok.unwrap_or(Outcome::Success))
}

fn open_space(arg: &str) -> Result<MetricMeasureSpace> {
    let path = Path::new(arg);
    if path.is_file() {
        return load_space(path).with_context(|| format!("cannot load space file {arg}"));
    }
    let spec = parse::parse_space_spec(arg).with_context(|| format!("--space {arg} is neither a file nor a spec"))?;
    build_space(&spec).with_context(|| format!("cannot build space {arg}"))
}

pub fn field_from_expr(space: &MetricMeasureSpace, text: &str) -> Result<ScalarField> {
    let e = parse_field_expr(text).map_err(|e| anyhow!("field `{text}`: {e}"))?;
    let coords = space.coords().ok_or_else(|| {
        anyhow!(
            "space {} has no coordinates; pass the field with --field-csv",
            space.name()
        )
    })?;
    e.check_dim(coords.dim).with_context(|| format!("field `{text}`"))?;
    ScalarField::from_coords(space, text, |c| e.eval(c)).with_context(|| format!("field `{text}`"))
}

fn open_field(space: &MetricMeasureSpace, a: &FieldArgs) -> Result<ScalarField> {
    let u = match (&a.field, &a.field_csv) {
        (Some(text), _) => field_from_expr(space, text)?,
        (None, Some(path)) => {
            ScalarField::read_csv(path).with_context(|| format!("cannot read field {}", path.display()))?
        }
        (None, None) => bail!("pass --field or --field-csv"),
    };
    u.check_len(space)
        .with_context(|| "field does not fit the space".to_string())?;
    Ok(u)
}

/// The refined space and the same expression on it, when both exist.
fn refine(space: &MetricMeasureSpace, a: &FieldArgs) -> Result<Option<(MetricMeasureSpace, ScalarField)>> {
    let (Some(spec), Some(text)) = (space.spec().and_then(|s| s.refined()), &a.field) else {
        return Ok(None);
    };
    let fine = build_space(&spec)?;
    let u = field_from_expr(&fine, text)?;
    Ok(Some((fine, u)))
}

fn grid_arg(name: &str, text: &Option<String>) -> Result<Option<Vec<f64>>> {
    text.as_deref()
        .map(|t| parse::parse_grid(t).with_context(|| format!("--{name} {t}")))
        .transpose()
}

fn gen(a: &GenArgs) -> Result<Option<Outcome>> {
    let spec = parse::parse_space_spec(&a.spec).with_context(|| format!("--spec {}", a.spec))?;
    let space = build_space(&spec).with_context(|| format!("cannot build {}", a.spec))?;
    save_space(&space, &a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    if let (Some(text), Some(path)) = (&a.field, &a.field_out) {
        field_from_expr(&space, text)?
            .write_csv(path)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    println!(
        "wrote {}: {} with {} points, diameter {}, mesh {}",
        a.out.display(),
        space.name(),
        space.n(),
        space.diameter(),
        space.min_distance()
    );
    Ok(None)
}

fn constants(a: &ConstantsArgs) -> Result<Option<Outcome>> {
    let mut any = false;
    if let Some(dim) = a.dim {
        println!("K_{{{},{}}} = {}", a.p, dim, k_pn(a.p, dim)?);
        any = true;
    }
    if let (Some(body), Some(xi)) = (&a.body, &a.xi) {
        let xi = parse::parse_grid(xi).with_context(|| format!("--xi {xi}"))?;
        let body = parse::parse_body(body, xi.len())?;
        println!("|xi|_(Z*,{}) = {}", a.p, zstar_norm(&body, a.p, &xi)?);
        any = true;
    }
    if let Some(arg) = &a.space {
        let space = open_space(arg)?;
        let rep = kernel_comparability(&space, &a.kernel)?;
        println!("{}", serde_json::to_string(&rep)?);
        any = true;
    }
    if !any {
        bail!("nothing to compute; pass --dim, --body with --xi, or --space");
    }
    Ok(None)
}

fn energy(a: &EnergyArgs) -> Result<Option<Outcome>> {
    let space = open_space(&a.field.space)?;
    let u = open_field(&space, &a.field)?;
    let kind = match (a.kind, a.s, a.delta, a.r, a.t) {
        (Some(k), ..) => k,
        (None, Some(_), ..) => EnergyKind::Gagliardo,
        (None, None, Some(_), Some(_), _) => EnergyKind::NguyenB,
        (None, None, Some(_), None, _) => EnergyKind::NguyenA,
        (None, None, None, _, Some(_)) => EnergyKind::Scale,
        _ => bail!("pass --kind, or one of --s, --delta, --t"),
    };
    let mut spec = EnergySpec::new(a.field.p, a.field.kernel.clone());
    spec.s = a.s;
    spec.delta = a.delta;
    spec.r = a.r;
    spec.t = a.t;
    match kind {
        EnergyKind::Gagliardo => println!("{}", gagliardo_p(&space, &u, &spec)?),
        EnergyKind::NguyenA => println!("{}", nguyen_a(&space, &u, &spec)?),
        EnergyKind::NguyenB => println!("{}", nguyen_b(&space, &u, &spec)?),
        EnergyKind::Scale => {
            let e = scale_energies(&space, &u, &spec)?;
            println!("K={} H={} S={}", e.k, e.h, e.s);
        }
        EnergyKind::Slope => println!("{}", cheeger_surrogate(&space, &u, a.field.p)?.0),
        EnergyKind::Fd => println!("{}", cheeger_fd(&space, &u, a.field.p)?.0),
        EnergyKind::Hajlasz => {
            let res = hajlasz_minimal(&space, &u, a.field.p, a.sigma, a.r.unwrap_or(f64::INFINITY))?;
            println!("{}", serde_json::to_string(&res)?);
        }
    }
    Ok(None)
}

fn sweep(a: &SweepArgs) -> Result<Option<Outcome>> {
    let space = open_space(&a.field.space)?;
    let u = open_field(&space, &a.field)?;
    let (p, kernel) = (a.field.p, &a.field.kernel);
    let result = match a.mode {
        SweepMode::Bbm => {
            let grid = grid_arg("s-grid", &a.s_grid)?.unwrap_or_else(|| verify::default_s_grid(&space));
            bbm_sweep(&space, &u, p, kernel, &grid)?
        }
        SweepMode::Nguyen => {
            let osc = u.oscillation();
            let grid = grid_arg("delta-grid", &a.delta_grid)?.unwrap_or_else(|| {
                [0.5, 0.2, 0.1, 0.08, 0.06, 0.04, 0.02]
                    .iter()
                    .map(|f| f * osc)
                    .collect()
            });
            nguyen_sweep(&space, &u, p, kernel, &grid)?
        }
        SweepMode::Ks => {
            let grid = grid_arg("t-grid", &a.t_grid)?.unwrap_or_else(|| verify::default_t_grid(&space));
            ks_sweep(&space, &u, p, &grid)?
        }
    };
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = &a.out {
        result
            .write_csv(path)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let est = extrapolate(&result)?;
    let json = serde_json::to_string(&est)?;
    match &a.json {
        Some(path) => write_text(path, &json)?,
        None => println!("{json}"),
    }
    Ok(None)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut body = text.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    std::fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))
}

fn run_verify(a: &VerifyArgs) -> Result<Option<Outcome>> {
    let space = open_space(&a.field.space)?;
    let u = open_field(&space, &a.field)?;
    let (p, kernel) = (a.field.p, &a.field.kernel);
    let checks: Vec<Check> = if a.suite.contains(&Check::All) {
        ALL_CHECKS.to_vec()
    } else {
        a.suite.clone()
    };
    let t_grid = grid_arg("t-grid", &a.t_grid)?.unwrap_or_else(|| verify::default_t_grid(&space));
    let r_grid = grid_arg("r-grid", &a.r_grid)?.unwrap_or_else(|| verify::default_r_grid(&space));
    let refined = if checks.iter().any(|c| matches!(c, Check::Hajlasz | Check::TwoSided)) {
        refine(&space, &a.field)?
    } else {
        None
    };
    let refined = refined.as_ref().map(|(s, f)| (s, f));
    let mut reports: Vec<VerificationReport> = Vec::new();
    for check in checks {
        let rep = match check {
            Check::All => continue,
            Check::Annuli => verify::check_annuli_bound(&space, kernel, p, &r_grid),
            Check::Mean => verify::check_mean_comparison(&space, &u, p, &t_grid),
            Check::Fubini => verify::check_fubini_identity(&space, &u, p, a.s, kernel),
            Check::NguyenAveraging => {
                let r = a.r.unwrap_or(0.5 * u.oscillation()).max(f64::MIN_POSITIVE);
                verify::check_nguyen_averaging(&space, &u, p, a.eps, r, kernel)
            }
            Check::SRoutes => verify::check_s_reformulation(&space, &u, p, &t_grid),
            Check::Hks => verify::check_hks(&space, &u, p, &t_grid),
            Check::Mollifier => verify::check_mollifier(&space, std::slice::from_ref(&u), p, &t_grid, a.mollifier_eps),
            Check::UpperGradient => {
                let t = a.t.unwrap_or(space.diameter() / 8.0);
                verify::check_upper_gradient_scale(&space, &u, t, a.samples)
            }
            Check::Hajlasz => {
                let r = a.r.unwrap_or(8.0 * space.min_distance());
                verify::check_hajlasz_bound(&space, &u, p, r, verify::HAJLASZ_BUDGET, refined)
            }
            Check::TwoSided => {
                verify::two_sided_report(&space, &u, p, kernel, refined, &verify::TwoSidedOptions::default())
            }
        };
        let rep = rep.with_context(|| format!("check {check:?} on {}", space.name()))?;
        print!("{rep}");
        reports.push(rep);
    }
    if let Some(path) = &a.json {
        write_text(path, &serde_json::to_string_pretty(&reports)?)?;
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!("{} checks, {} failed", reports.len(), failed);
    Ok(Some(if failed == 0 {
        Outcome::Success
    } else {
        Outcome::ChecksFailed
    }))
}

fn report(a: &ReportArgs) -> Result<Option<Outcome>> {
    if let Some(path) = &a.sweep {
        let sweep =
            SweepResult::read_csv(path, a.p).with_context(|| format!("cannot read sweep {}", path.display()))?;
        let est = extrapolate(&sweep)?;
        println!(
            "{} sweep of {} points: limit {} ({:?} fit, residual {:.3e}{})",
            sweep.param,
            sweep.grid.len(),
            est.limit,
            est.model,
            est.residual,
            if est.non_monotone { ", non-monotone" } else { "" }
        );
        println!("{}", serde_json::to_string(&est)?);
        return Ok(None);
    }
    let path = a.verify.as_ref().ok_or_else(|| anyhow!("pass --sweep or --verify"))?;
    let raw = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let reports: Vec<serde_json::Value> =
        serde_json::from_str(&raw).with_context(|| format!("{} is not a verification report list", path.display()))?;
    let mut failed = 0;
    for r in &reports {
        let pass = r["pass"].as_bool().unwrap_or(false);
        let records = r["records"].as_array().map_or(0, |v| v.len());
        let bad = r["records"]
            .as_array()
            .map_or(0, |v| v.iter().filter(|x| x["pass"] == false).count());
        println!(
            "{:<22} {:<18} {} ({} records, {} failing)",
            r["check"].as_str().unwrap_or("?"),
            r["space"].as_str().unwrap_or("?"),
            if pass { "PASS" } else { "FAIL" },
            records,
            bad
        );
        if !pass {
            failed += 1;
        }
    }
    Ok(Some(if failed == 0 {
        Outcome::Success
    } else {
        Outcome::ChecksFailed
    }))
}
