mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nopa_bell::analytic::{bmax_analytic, eve_bmax_analytic, lambda_from_r, DEFAULT_SERIES_TOL};
use nopa_bell::audit::{fock_bell_damped, fock_bell_eve, run_audit, AuditSpec};
use nopa_bell::sweep::{format_sig, run_sweep, write_sweep_csv, write_threshold_csv, SweepSpec, SweepVariable};
use nopa_bell::threshold::{fit_rmax, refit_coefficient, r_from_gamma, threshold_curve, DEFAULT_BISECTION_TOL};
use nopa_bell::{BellResult, ChannelParams, Execution, FockCutoff, Scenario, ScenarioMode};

use config::{resolve_output, Config, LoadError};

#[derive(Debug, Parser)]
#[command(name = "nopa", version, about = "Bell nonlocality of a two-mode squeezed vacuum through lossy channels")]
struct Cli {
    /// Defaults file with `key = value` lines (cutoff, series_tol, bisect_tol,
    /// audit_tol, trace_tol, out_dir).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Evaluate grid points on a single thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form Bell factor for one squeezing and pair of channels.
    Bell(BellArgs),
    /// Bell factor of the Alice–Eve state.
    Eve(EveArgs),
    /// Bell factor over a grid of R, r or gamma; writes CSV.
    Sweep(SweepArgs),
    /// Threshold loss R_max versus squeezing; writes CSV.
    Threshold(ThresholdArgs),
    /// Compare exact thresholds with the exponential rules.
    FitCheck(FitCheckArgs),
    /// Compare the closed form with the truncated Fock-space computation.
    OracleAudit(AuditArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Squeezing {
    /// Squeezing parameter r.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// tanh r, as an alternative to --r.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
struct FixedSqueezing {
    /// Squeezing held fixed (R and gamma sweeps).
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// tanh r, as an alternative to --r.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
}

#[derive(Debug, Args)]
struct Damping {
    /// Reflectivity of Alice's channel.
    #[arg(long = "R", id = "damping_a", conflicts_with = "gamma_a", allow_negative_numbers = true)]
    r_a: Option<f64>,
    /// Absorption coefficient of Alice's channel, instead of --R.
    #[arg(long = "gamma", id = "gamma_a", allow_negative_numbers = true)]
    gamma_a: Option<f64>,
    /// Reflectivity of Bob's channel (defaults to Alice's).
    #[arg(long = "R2", id = "damping_b", conflicts_with = "gamma_b", allow_negative_numbers = true)]
    r_b: Option<f64>,
    /// Absorption coefficient of Bob's channel, instead of --R2.
    #[arg(long = "gamma2", id = "gamma_b", allow_negative_numbers = true)]
    gamma_b: Option<f64>,
}

#[derive(Debug, Args)]
struct BellArgs {
    #[command(flatten)]
    squeezing: Squeezing,
    #[command(flatten)]
    damping: Damping,
    /// Also evaluate the Fock-space path and print the discrepancy.
    #[arg(long)]
    oracle: bool,
    /// Fock cutoff per mode for --oracle.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Relative tolerance of the α series.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct EveArgs {
    #[command(flatten)]
    squeezing: Squeezing,
    /// Reflectivity of Bob's channel.
    #[arg(long = "R", id = "damping_b", conflicts_with = "gamma_b", allow_negative_numbers = true)]
    r_b: Option<f64>,
    /// Absorption coefficient of Bob's channel, instead of --R.
    #[arg(long = "gamma", id = "gamma_b", allow_negative_numbers = true)]
    gamma_b: Option<f64>,
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variable {
    #[value(name = "R")]
    Damping,
    #[value(name = "r")]
    Squeezing,
    #[value(name = "gamma")]
    Gamma,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Symmetric,
    Asymmetric,
}

impl From<Mode> for ScenarioMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Symmetric => ScenarioMode::Symmetric,
            Mode::Asymmetric => ScenarioMode::Asymmetric,
        }
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Swept quantity.
    #[arg(long = "var", value_enum, default_value = "R")]
    variable: Variable,
    #[arg(long, allow_negative_numbers = true)]
    start: f64,
    #[arg(long, allow_negative_numbers = true)]
    stop: f64,
    #[arg(long, allow_negative_numbers = true)]
    step: f64,
    /// Symmetric: R_A = R_B = R; asymmetric: R_A = 0, R_B = R.
    #[arg(long, value_enum, default_value = "symmetric")]
    mode: Mode,
    #[command(flatten)]
    squeezing: FixedSqueezing,
    /// Damping held fixed in r sweeps.
    #[arg(long = "R", id = "damping_a", conflicts_with = "gamma_a", allow_negative_numbers = true)]
    damping: Option<f64>,
    #[arg(long = "gamma", id = "gamma_a", allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output file (`-` for stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, value_enum, default_value = "symmetric")]
    mode: Mode,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    start: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    stop: f64,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    step: f64,
    /// Bisection tolerance on R.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitCheckArgs {
    /// Check one scenario only (default: both).
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, default_value_t = 1.5)]
    start: f64,
    #[arg(long, default_value_t = 3.0)]
    stop: f64,
    #[arg(long, default_value_t = 0.25)]
    step: f64,
    /// Largest accepted relative error of the rule.
    #[arg(long, default_value_t = 0.10)]
    max_error: f64,
    /// Also report the least-squares coefficient c in R_max ≈ c·e^{-r}.
    #[arg(long)]
    refit: bool,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    /// Comma-separated λ values.
    #[arg(long, value_delimiter = ',', conflicts_with = "rs")]
    lambdas: Option<Vec<f64>>,
    /// Comma-separated squeezing values, instead of --lambdas.
    #[arg(long, value_delimiter = ',')]
    rs: Option<Vec<f64>>,
    /// Comma-separated R values used for both channels.
    #[arg(long, value_delimiter = ',')]
    dampings: Option<Vec<f64>>,
    #[arg(long)]
    cutoff: Option<usize>,
    /// Bound on |ΔB_max|.
    #[arg(long)]
    tol: Option<f64>,
    /// Bound on the trace distance between the two state constructions.
    #[arg(long)]
    trace_tol: Option<f64>,
}

enum Failure {
    Audit(String),
    Lib(nopa_bell::Error),
    Usage(String),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        use nopa_bell::Error as E;
        match self {
            Failure::Audit(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Lib(E::Convergence { .. } | E::Divergence { .. } | E::Bracketing { .. }) => 3,
            Failure::Lib(_) => 2,
            Failure::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Audit(m) | Failure::Usage(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<nopa_bell::Error> for Failure {
    fn from(e: nopa_bell::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.into())
    }
}

type CmdResult = Result<(), Failure>;

struct Ctx {
    config: Config,
    exec: Execution,
}

impl Ctx {
    fn series_tol(&self, flag: Option<f64>) -> f64 {
        flag.or(self.config.series_tol).unwrap_or(DEFAULT_SERIES_TOL)
    }

    fn cutoff(&self, flag: Option<usize>, r: f64) -> Result<FockCutoff, Failure> {
        match flag.or(self.config.cutoff) {
            Some(d) => Ok(FockCutoff::new(d)?),
            None => Ok(FockCutoff::for_squeezing(r)),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let config = match &cli.config {
        Some(path) => Config::load(path).map_err(|e| match e {
            LoadError::Io(e) => Failure::Io(e),
            LoadError::Parse(m) => Failure::Usage(format!("invalid config {m}")),
        })?,
        None => Config::default(),
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let ctx = Ctx { config, exec };
    match cli.command {
        Command::Bell(a) => cmd_bell(&ctx, a),
        Command::Eve(a) => cmd_eve(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Threshold(a) => cmd_threshold(&ctx, a),
        Command::FitCheck(a) => cmd_fit_check(&ctx, a),
        Command::OracleAudit(a) => cmd_oracle_audit(&ctx, a),
    }
}

/// `--r` wins as given; `--lambda` is mapped back through artanh.
fn squeezing_r(r: Option<f64>, lambda: Option<f64>) -> Result<Option<f64>, Failure> {
    match (r, lambda) {
        (Some(r), _) => {
            lambda_from_r(r)?;
            Ok(Some(r))
        }
        (None, Some(l)) => {
            ChannelParams::from_lambda(l, 0.0, 0.0)?;
            Ok(Some(l.atanh()))
        }
        (None, None) => Ok(None),
    }
}

fn damping(r: Option<f64>, gamma: Option<f64>) -> Result<Option<f64>, Failure> {
    match (r, gamma) {
        (Some(r), _) => Ok(Some(r)),
        (None, Some(g)) => Ok(Some(r_from_gamma(g)?)),
        (None, None) => Ok(None),
    }
}

fn channel(s: &Squeezing, r_a: f64, r_b: f64) -> Result<ChannelParams, Failure> {
    Ok(match (s.r, s.lambda) {
        (Some(r), _) => ChannelParams::new(r, r_a, r_b)?,
        (None, Some(l)) => ChannelParams::from_lambda(l, r_a, r_b)?,
        (None, None) => unreachable!("clap requires one of --r/--lambda"),
    })
}

/// Diagnostics that are usually tiny.
fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn print_bell(out: &mut impl Write, p: &ChannelParams, b: &BellResult) -> io::Result<()> {
    writeln!(out, "r={}", format_sig(p.r()))?;
    writeln!(out, "lambda={}", format_sig(p.lambda()))?;
    writeln!(out, "R_A={}", format_sig(p.r_a()))?;
    writeln!(out, "R_B={}", format_sig(p.r_b()))?;
    writeln!(out, "alpha={}", format_sig(b.alpha))?;
    writeln!(out, "beta={}", format_sig(b.beta))?;
    writeln!(out, "bmax={}", format_sig(b.bmax))?;
    writeln!(out, "violated={}", b.violated)?;
    writeln!(out, "terms_used={}", b.terms_used)?;
    writeln!(out, "tail_estimate={}", sci(b.tail_estimate))
}

fn print_oracle(out: &mut impl Write, cutoff: FockCutoff, fock: f64, analytic: f64, deficit: f64) -> io::Result<()> {
    writeln!(out, "cutoff={}", cutoff.dim())?;
    writeln!(out, "bmax_fock={}", format_sig(fock))?;
    writeln!(out, "delta_bmax={}", sci((fock - analytic).abs()))?;
    writeln!(out, "trace_deficit={}", sci(deficit))
}

fn cmd_bell(ctx: &Ctx, a: BellArgs) -> CmdResult {
    let r_a = damping(a.damping.r_a, a.damping.gamma_a)?.unwrap_or(0.0);
    let r_b = damping(a.damping.r_b, a.damping.gamma_b)?.unwrap_or(r_a);
    let params = channel(&a.squeezing, r_a, r_b)?;
    let b = bmax_analytic(&params, ctx.series_tol(a.tol))?;
    let mut out = io::stdout().lock();
    print_bell(&mut out, &params, &b)?;
    if a.oracle {
        let cutoff = ctx.cutoff(a.cutoff, params.r())?;
        let fock = fock_bell_damped(&params, cutoff)?;
        print_oracle(&mut out, cutoff, fock.horodecki.bmax, b.bmax, fock.diagnostics.trace_deficit)?;
    }
    Ok(())
}

fn cmd_eve(ctx: &Ctx, a: EveArgs) -> CmdResult {
    let r_b = damping(a.r_b, a.gamma_b)?.unwrap_or(0.0);
    let r = squeezing_r(a.squeezing.r, a.squeezing.lambda)?.expect("clap requires one of --r/--lambda");
    let b = eve_bmax_analytic(r, r_b, ctx.series_tol(a.tol))?;
    let mut out = io::stdout().lock();
    writeln!(out, "r={}", format_sig(r))?;
    writeln!(out, "R_B={}", format_sig(r_b))?;
    writeln!(out, "alpha={}", format_sig(b.alpha))?;
    writeln!(out, "beta={}", format_sig(b.beta))?;
    writeln!(out, "bmax={}", format_sig(b.bmax))?;
    writeln!(out, "violated={}", b.violated)?;
    writeln!(out, "terms_used={}", b.terms_used)?;
    writeln!(out, "tail_estimate={}", sci(b.tail_estimate))?;
    if a.oracle {
        let cutoff = ctx.cutoff(a.cutoff, r)?;
        let fock = fock_bell_eve(lambda_from_r(r)?, r_b, cutoff)?;
        print_oracle(&mut out, cutoff, fock.horodecki.bmax, b.bmax, fock.diagnostics.trace_deficit)?;
    }
    Ok(())
}

/// Writes through `emit` to the resolved file, or stdout.
fn write_output(
    path: Option<PathBuf>,
    emit: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> CmdResult {
    match path {
        None => {
            let mut out = io::stdout().lock();
            emit(&mut out)?;
            out.flush()?;
        }
        Some(path) => {
            let io_err = |e: io::Error, p: &Path| Failure::Io(anyhow::Error::new(e).context(format!("writing {}", p.display())));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(e, dir))?;
            }
            let file = File::create(&path).map_err(|e| io_err(e, &path))?;
            let mut w = BufWriter::new(file);
            emit(&mut w).and_then(|()| w.flush()).map_err(|e| io_err(e, &path))?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_sweep(ctx: &Ctx, a: SweepArgs) -> CmdResult {
    let fixed_r = squeezing_r(a.squeezing.r, a.squeezing.lambda)?;
    let fixed_damping = damping(a.damping, a.gamma)?;
    let (variable, r, damp) = match a.variable {
        Variable::Squeezing => {
            if fixed_r.is_some() {
                return Err(Failure::Usage("--r/--lambda cannot be fixed in an r sweep".into()));
            }
            (SweepVariable::Squeezing, 0.0, fixed_damping.unwrap_or(0.0))
        }
        Variable::Damping | Variable::Gamma => {
            if fixed_damping.is_some() {
                return Err(Failure::Usage("--R/--gamma cannot be fixed in an R or gamma sweep".into()));
            }
            let r = fixed_r.ok_or_else(|| Failure::Usage("R and gamma sweeps need --r or --lambda".into()))?;
            let v = if matches!(a.variable, Variable::Damping) { SweepVariable::Damping } else { SweepVariable::Gamma };
            (v, r, 0.0)
        }
    };
    let spec = SweepSpec {
        variable,
        start: a.start,
        stop: a.stop,
        step: a.step,
        mode: a.mode.into(),
        r,
        damping: damp,
        series_tol: ctx.series_tol(a.tol),
    };
    let rows = run_sweep(&spec, ctx.exec)?;
    let name = format!("sweep_{}_{}.csv", variable_name(a.variable), spec.mode.name());
    write_output(resolve_output(a.out.as_deref(), &ctx.config, &name), |w| write_sweep_csv(&rows, w))
}

fn variable_name(v: Variable) -> &'static str {
    match v {
        Variable::Damping => "R",
        Variable::Squeezing => "r",
        Variable::Gamma => "gamma",
    }
}

fn squeezing_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, Failure> {
    let spec = SweepSpec {
        variable: SweepVariable::Squeezing,
        start,
        stop,
        step,
        mode: ScenarioMode::Symmetric,
        r: 0.0,
        damping: 0.0,
        series_tol: DEFAULT_SERIES_TOL,
    };
    Ok(spec.grid()?)
}

fn cmd_threshold(ctx: &Ctx, a: ThresholdArgs) -> CmdResult {
    if !(a.start >= 0.1) {
        return Err(Failure::Lib(nopa_bell::Error::Domain(format!("threshold curves start at r >= 0.1, got {}", a.start))));
    }
    let rs = squeezing_grid(a.start, a.stop, a.step)?;
    let tol = a.tol.or(ctx.config.bisect_tol).unwrap_or(DEFAULT_BISECTION_TOL);
    let mode: ScenarioMode = a.mode.into();
    let points = threshold_curve(mode, &rs, tol, ctx.exec).into_iter().collect::<Result<Vec<_>, _>>()?;
    let name = format!("threshold_{}.csv", mode.name());
    write_output(resolve_output(a.out.as_deref(), &ctx.config, &name), |w| write_threshold_csv(&points, w))
}

fn cmd_fit_check(ctx: &Ctx, a: FitCheckArgs) -> CmdResult {
    let modes = match a.mode {
        Some(m) => vec![ScenarioMode::from(m)],
        None => vec![ScenarioMode::Symmetric, ScenarioMode::Asymmetric],
    };
    let rs = squeezing_grid(a.start, a.stop, a.step)?;
    let tol = a.tol.or(ctx.config.bisect_tol).unwrap_or(DEFAULT_BISECTION_TOL);
    let mut out = io::stdout().lock();
    let mut worst: Option<(ScenarioMode, f64, f64)> = None;
    for mode in modes {
        let points = threshold_curve(mode, &rs, tol, ctx.exec).into_iter().collect::<Result<Vec<_>, _>>()?;
        writeln!(out, "{} (c = {})", mode.name(), mode.fit_coefficient())?;
        for p in &points {
            let fit = fit_rmax(Scenario::new(mode, p.r));
            let err = p.rel_fit_error();
            let verdict = if !fit.in_validity_range {
                "outside validity range"
            } else if err <= a.max_error {
                "ok"
            } else {
                "FAIL"
            };
            writeln!(
                out,
                "  r={} r_max={} fit={} rel_error={} {verdict}",
                format_sig(p.r),
                format_sig(p.r_max),
                format_sig(fit.value),
                format_sig(err)
            )?;
            if fit.in_validity_range && worst.is_none_or(|(_, _, e)| err > e) {
                worst = Some((mode, p.r, err));
            }
        }
        if a.refit {
            if let Some(c) = refit_coefficient(&points) {
                writeln!(out, "  refit c={}", format_sig(c))?;
            }
        }
    }
    match worst {
        Some((mode, r, err)) if err > a.max_error => Err(Failure::Audit(format!(
            "{} rule off by {} at r = {} (limit {})",
            mode.name(),
            format_sig(err),
            format_sig(r),
            a.max_error
        ))),
        _ => Ok(()),
    }
}

fn cmd_oracle_audit(ctx: &Ctx, a: AuditArgs) -> CmdResult {
    let mut spec = AuditSpec::default();
    if let Some(ls) = a.lambdas {
        spec.lambdas = ls;
    }
    if let Some(rs) = a.rs {
        spec.lambdas = rs.iter().map(|&r| lambda_from_r(r)).collect::<Result<_, _>>()?;
    }
    if let Some(ds) = a.dampings {
        spec.dampings = ds;
    }
    if let Some(d) = a.cutoff.or(ctx.config.cutoff) {
        spec.cutoff = FockCutoff::new(d)?;
    }
    if let Some(t) = a.tol.or(ctx.config.audit_tol) {
        spec.tol = t;
    }
    if let Some(t) = a.trace_tol.or(ctx.config.trace_tol) {
        spec.trace_tol = t;
    }
    spec.series_tol = ctx.series_tol(None);
    let report = run_audit(&spec, ctx.exec)?;

    let mut out = io::stdout().lock();
    writeln!(out, "points={} cutoff={}", report.points.len(), spec.cutoff.dim())?;
    if let Some(p) = report.worst_delta() {
        writeln!(
            out,
            "worst delta_bmax={} at lambda={} R_A={} R_B={}",
            sci(p.delta_bmax),
            format_sig(p.lambda),
            format_sig(p.r_a),
            format_sig(p.r_b)
        )?;
    }
    if let Some(p) = report.worst_trace_distance() {
        writeln!(
            out,
            "worst trace_distance={} at lambda={} R_A={} R_B={}",
            sci(p.trace_distance),
            format_sig(p.lambda),
            format_sig(p.r_a),
            format_sig(p.r_b)
        )?;
    }
    let failures: Vec<_> = report.failures().collect();
    for p in &failures {
        writeln!(
            out,
            "FAIL lambda={} R_A={} R_B={} bmax_analytic={} bmax_fock={} delta_bmax={} trace_distance={} trace_deficit={}",
            format_sig(p.lambda),
            format_sig(p.r_a),
            format_sig(p.r_b),
            format_sig(p.bmax_analytic),
            format_sig(p.bmax_fock),
            sci(p.delta_bmax),
            sci(p.trace_distance),
            sci(p.trace_deficit)
        )?;
    }
    if failures.is_empty() {
        writeln!(out, "audit passed")?;
        Ok(())
    } else {
        Err(Failure::Audit(format!("{} of {} audit points out of tolerance", failures.len(), report.points.len())))
    }
}
