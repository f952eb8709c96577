use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use couette_cli::commands;
use couette_cli::config::VerifyMode;
use couette_cli::{CliError, Outcome, RunConfig};
use couette_core::stability::Theorem;
use couette_core::{Annulus, FlowFamily, FlowSpec};

/// Explicit Couette-Taylor flows: evaluation, verification and stability certificates.
///
/// Every run echoes its fully resolved configuration as the first line of
/// stderr; feeding that line back through --config reproduces the run.
#[derive(Parser, Debug)]
#[command(name = "couette", version)]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (a directory for `appendix`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Absolute tolerance for exact checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    r1: Option<f64>,
    #[arg(long, global = true)]
    r2: Option<f64>,
    /// Flow family, e.g. couette_inner_rotating or spiral_pc_vorticity_on_outer.
    #[arg(long, global = true)]
    family: Option<FlowFamily>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Velocity, pressure and vorticity along a radial line (CSV).
    Eval(EvalArgs),
    /// Residual and boundary audits (JSON); exit 1 above tolerance.
    Verify(VerifyArgs),
    /// Stability certificate of the configured flow (JSON).
    Stability(CertArgs),
    /// Certificates over an (alpha, beta[, gamma]) grid (CSV, optional SVG).
    Map(MapArgs),
    /// Poincare-type bounds and test-field Rayleigh quotients (JSON).
    Poincare(PoincareArgs),
    /// Smallest singular values of the discretised Sturm-Liouville operator (CSV).
    Slscan(SlScanArgs),
    /// Radius asymptotics, bound and test-field tables (CSV).
    Appendix,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    n_rho: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    mode: Option<VerifyMode>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    boundary_samples: Option<usize>,
    /// Amplitude of the perturbation lattice.
    #[arg(long)]
    noise: Option<f64>,
    /// Finite-difference step relative to R2 - R1.
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    fd_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct CertArgs {
    #[arg(long)]
    theorem: Option<Theorem>,
    /// Known value of the functional constant, used instead of the computable bound.
    #[arg(long)]
    bound: Option<f64>,
}

#[derive(Args, Debug)]
struct MapArgs {
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
    alpha_range: Option<Vec<f64>>,
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
    beta_range: Option<Vec<f64>>,
    #[arg(long)]
    n_alpha: Option<usize>,
    #[arg(long)]
    n_beta: Option<usize>,
    /// Comma-separated gamma slices for vorticity families.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gammas: Option<Vec<f64>>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    cert: CertArgs,
}

#[derive(Args, Debug)]
struct PoincareArgs {
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct SlScanArgs {
    /// Comma-separated azimuthal wavenumbers.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Option<Vec<i32>>,
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
    alpha_range: Option<Vec<f64>>,
    #[arg(long)]
    n_alpha: Option<usize>,
    /// Grid nodes on [R1, R2].
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn pair(v: Option<Vec<f64>>) -> Option<[f64; 2]> {
    v.map(|v| [v[0], v[1]])
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.tol, cli.tol);
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    if cli.out.is_some() {
        cfg.out.clone_from(&cli.out);
    }
    if cli.r1.is_some() || cli.r2.is_some() {
        cfg.annulus = Annulus::new(cli.r1.unwrap_or(cfg.annulus.r_inner()), cli.r2.unwrap_or(cfg.annulus.r_outer()))?;
    }
    let flow_flags = cli.family.is_some() || cli.alpha.is_some() || cli.beta.is_some() || cli.gamma.is_some();
    if flow_flags && !matches!(cli.command, Command::Map(_)) {
        // a new family starts from the rest state rather than inheriting parameters
        let base = match cli.family {
            Some(f) if f != cfg.flow.family => FlowSpec::rest(f),
            _ => cfg.flow,
        };
        cfg.flow = FlowSpec::new(
            base.family,
            cli.alpha.unwrap_or(base.alpha),
            cli.beta.unwrap_or(base.beta),
            cli.gamma.unwrap_or(base.gamma),
        )?;
    }
    match &cli.command {
        Command::Eval(a) => {
            set(&mut cfg.eval.n_rho, a.n_rho);
            set(&mut cfg.eval.theta, a.theta);
            set(&mut cfg.eval.z, a.z);
        }
        Command::Verify(a) => {
            let o = &mut cfg.verify;
            set(&mut o.mode, a.mode);
            set(&mut o.n_samples, a.samples);
            set(&mut o.n_boundary, a.boundary_samples);
            set(&mut o.noise, a.noise);
            set(&mut o.fd_step, a.fd_step);
            set(&mut o.fd_tol, a.fd_tol);
        }
        Command::Stability(a) => {
            if a.theorem.is_some() {
                cfg.stability.theorem = a.theorem;
            }
            if a.bound.is_some() {
                cfg.stability.user_bound = a.bound;
            }
        }
        Command::Map(a) => {
            let o = &mut cfg.map;
            set(&mut o.family, cli.family);
            set(&mut o.alpha, pair(a.alpha_range.clone()));
            set(&mut o.beta, pair(a.beta_range.clone()));
            set(&mut o.n_alpha, a.n_alpha);
            set(&mut o.n_beta, a.n_beta);
            set(&mut o.gammas, a.gammas.clone());
            if a.svg.is_some() {
                o.svg.clone_from(&a.svg);
            }
            if a.cert.theorem.is_some() {
                o.theorem = a.cert.theorem;
            }
            if a.cert.bound.is_some() {
                o.user_bound = a.cert.bound;
            }
        }
        Command::Poincare(a) => set(&mut cfg.poincare.eps, a.eps.clone()),
        Command::Slscan(a) => {
            let o = &mut cfg.slscan;
            set(&mut o.ks, a.k.clone());
            set(&mut o.alpha, pair(a.alpha_range.clone()));
            set(&mut o.n_alpha, a.n_alpha);
            set(&mut o.n, a.n);
            set(&mut o.threshold, a.threshold);
        }
        Command::Appendix => {}
    }
    if cfg.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Eval(_) => commands::eval(cfg),
        Command::Verify(_) => commands::verify(cfg),
        Command::Stability(_) => commands::stability(cfg),
        Command::Map(_) => commands::map(cfg),
        Command::Poincare(_) => commands::poincare(cfg),
        Command::Slscan(_) => commands::slscan(cfg),
        Command::Appendix => commands::appendix(cfg),
    }
}

#[cfg(feature = "parallel")]
fn run_on_pool(jobs: Option<usize>, f: impl FnOnce() -> Result<Outcome, CliError> + Send) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn run_on_pool(
    _jobs: Option<usize>,
    f: impl FnOnce() -> Result<Outcome, CliError> + Send,
) -> Result<Outcome, CliError> {
    f()
}

fn write_outputs(cfg: &RunConfig, out: &Outcome, to_stdout: bool) -> Result<(), CliError> {
    for (path, contents) in &out.extra_files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, contents)?;
    }
    match (&cfg.out, to_stdout) {
        (Some(path), false) => std::fs::write(path, &out.text)?,
        _ => print!("{}", out.text),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = resolve(&cli)?;
    eprintln!("{}", cfg.to_json_line());
    let out = run_on_pool(cfg.jobs, || dispatch(&cli.command, &cfg))?;
    // appendix treats --out as a directory and has already routed its tables
    write_outputs(&cfg, &out, matches!(cli.command, Command::Appendix))?;
    Ok(out.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("couette: check failed (see report)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("couette: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
