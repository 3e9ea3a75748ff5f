use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybrid_teleport::averaging::QuadratureSpec;
use hybrid_teleport::harness::{
    run_point, run_sweep, run_verify, write_csv, BackendPolicy, Preset, RGrid, SweepConfig, DEFAULT_VERIFY_ALPHAS,
    DEFAULT_VERIFY_RS,
};
use hybrid_teleport::teleport::{Backend, Direction};

const EXIT_VALIDATION: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;

/// Teleportation between single-rail photonic and coherent-state qubits
/// over a lossy hybrid channel.
#[derive(Parser, Debug)]
#[command(name = "hybrid-teleport", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Average fidelity and success probability over an (alpha, r) grid, as CSV.
    Sweep(SweepArgs),
    /// Cross-check backends and closed forms; exits 2 on any failure.
    Verify(VerifyArgs),
    /// One input state, with the full Bell-outcome breakdown, as JSON.
    Point(PointArgs),
}

#[derive(Args, Debug)]
struct QuadArgs {
    /// Gauss-Legendre nodes in cos(theta).
    #[arg(long)]
    n_theta: Option<usize>,
    /// Uniform nodes in phi.
    #[arg(long)]
    n_phi: Option<usize>,
    /// Convergence tolerance for node doubling.
    #[arg(long)]
    tolerance: Option<f64>,
}

impl QuadArgs {
    fn spec(&self, base: QuadratureSpec) -> hybrid_teleport::Result<QuadratureSpec> {
        QuadratureSpec::new(
            self.n_theta.unwrap_or(base.n_theta),
            self.n_phi.unwrap_or(base.n_phi),
            self.tolerance.unwrap_or(base.tolerance),
        )
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Start from a figure preset (fig1..fig4); other flags override it.
    #[arg(long)]
    preset: Option<Preset>,
    /// Directions, comma separated (s2c, c2s, p2c, c2p).
    #[arg(long, value_delimiter = ',')]
    direction: Vec<Direction>,
    /// Coherent amplitudes, comma separated.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    r_steps: Option<usize>,
    /// analytic, numeric or both.
    #[arg(long)]
    backend: Option<BackendPolicy>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Loss parameters r, comma separated.
    #[arg(long, value_delimiter = ',')]
    r: Vec<f64>,
    /// Write the report here (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of one line per check.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long)]
    direction: Direction,
    /// Bloch polar angle in [0, pi].
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Bloch azimuth in [0, 2 pi).
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    /// analytic or numeric.
    #[arg(long, default_value = "analytic")]
    backend: Backend,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Verification,
}

impl From<hybrid_teleport::Error> for Failure {
    fn from(e: hybrid_teleport::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut cfg = args.preset.map(SweepConfig::preset).unwrap_or_else(|| {
        let mut c = SweepConfig::preset(Preset::Fig1);
        c.directions = Direction::ALL.to_vec();
        c
    });
    if !args.direction.is_empty() {
        cfg.directions = args.direction;
    }
    if !args.alpha.is_empty() {
        cfg.alphas = args.alpha;
    }
    cfg.r = RGrid::new(
        args.r_min.unwrap_or(cfg.r.min),
        args.r_max.unwrap_or(cfg.r.max),
        args.r_steps.unwrap_or(cfg.r.steps),
    )?;
    if let Some(b) = args.backend {
        cfg.backend = b;
    }
    cfg.quadrature = args.quad.spec(cfg.quadrature)?;
    cfg.validate()?;
    let records = run_sweep(&cfg)?;
    let mut out = output(args.out.as_ref())?;
    write_csv(&records, &mut out)?;
    out.flush()?;
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let alphas = if args.alpha.is_empty() { DEFAULT_VERIFY_ALPHAS.to_vec() } else { args.alpha };
    let rs = if args.r.is_empty() { DEFAULT_VERIFY_RS.to_vec() } else { args.r };
    let spec = args.quad.spec(QuadratureSpec::default())?;
    let report = run_verify(&alphas, &rs, &spec)?;
    let mut out = output(args.out.as_ref())?;
    if args.json {
        serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Validation(e.to_string()))?;
        writeln!(out)?;
    } else {
        write!(out, "{report}")?;
    }
    out.flush()?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn point(args: PointArgs) -> Result<(), Failure> {
    let report = run_point(args.direction, args.theta, args.phi, args.alpha, args.r, args.backend)?;
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Validation(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Point(a) => point(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_VERIFY_FAILED)
        }
    }
}
