use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hhbound::bounds::{constant_a, constant_a_oracle, constant_m, constant_m_oracle};
use hhbound::convexity::{classify_region, GridSpec};
use hhbound::harness::{run_suite, verify_case, CaseOutcome, SuiteConfig, VerifyOptions};
use hhbound::quadrature::{envelope_excess, residual_lemma11, residual_lemma12, INNER_TOLERANCE};
use hhbound::{BoundCase, ConvexityParams, DifferentiablePair, DomainSpec, Error, Interval, RealFunction, TheoremId};

/// Exit code when a bound or an identity fails to hold.
const EXIT_VIOLATION: u8 = 2;
const EXIT_ERROR: u8 = 1;

const IDENTITY_TOLERANCE: f64 = 1e-7;
const ENVELOPE_TOLERANCE: f64 = 1e-10;
const ENVELOPE_SAMPLES: usize = 1001;

#[derive(Parser)]
#[command(name = "hhbound", version, about = "Hermite-Hadamard type bounds for (alpha, m)-convex derivatives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one case, or run a suite from a JSON config.
    Verify(VerifyArgs),
    /// Tabulate (alpha, m)-convexity of f over a parameter grid.
    Classify(ClassifyArgs),
    /// Print the constants M and A next to their quadrature values.
    Constants(ConstantsArgs),
    /// Check both kernel identities and the weight envelope.
    Identities(IdentitiesArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite configuration (JSON).
    #[arg(long, conflicts_with_all = ["f", "g", "bundled"])]
    config: Option<PathBuf>,
    /// Run the suite shipped with the crate.
    #[arg(long, conflicts_with_all = ["f", "g"])]
    bundled: bool,
    #[arg(long)]
    f: Option<RealFunction>,
    #[arg(long)]
    g: Option<RealFunction>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long, default_value = "T21")]
    theorem: TheoremId,
    /// Report directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    f: RealFunction,
    #[arg(long)]
    bstar: f64,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    ms: Vec<f64>,
    #[arg(long, default_value_t = 51)]
    nx: usize,
    #[arg(long, default_value_t = 51)]
    ny: usize,
    #[arg(long, default_value_t = 51)]
    nt: usize,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long)]
    alpha: f64,
}

#[derive(Args)]
struct IdentitiesArgs {
    #[arg(long)]
    f: RealFunction,
    #[arg(long)]
    g: RealFunction,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Verify(args) => verify(args),
        Command::Classify(args) => classify(args),
        Command::Constants(args) => constants(args),
        Command::Identities(args) => identities(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    }
}

fn seed_override() -> Result<Option<u64>, Error> {
    match std::env::var("HHBOUND_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("HHBOUND_SEED must be an unsigned integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let config = if let Some(path) = &args.config {
        Some(SuiteConfig::from_path(path)?)
    } else if args.bundled {
        Some(SuiteConfig::bundled())
    } else {
        None
    };
    match config {
        Some(config) => verify_suite(config, &args),
        None => verify_single(&args),
    }
}

fn verify_suite(mut config: SuiteConfig, args: &VerifyArgs) -> Result<ExitCode, Error> {
    if let Some(seed) = seed_override()? {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(jobs) = args.jobs {
        config.jobs = jobs;
    }
    let result = run_suite(&config)?;
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |v| format!("{v:e}"));
    println!(
        "reports={} violations={} hypothesis_rejections={} errors={} max_tightness={} min_tightness={} wall_time={:.3}s",
        result.reports.len(),
        result.violations,
        result.hypothesis_rejections,
        result.errors.len(),
        fmt_opt(result.max_tightness),
        fmt_opt(result.min_tightness),
        result.wall_time.as_secs_f64(),
    );
    println!("written to {}", config.output_dir.display());
    Ok(status(result.violations == 0))
}

fn verify_single(args: &VerifyArgs) -> Result<ExitCode, Error> {
    let missing: Vec<&str> = [
        ("--f", args.f.is_none()),
        ("--g", args.g.is_none()),
        ("--a", args.a.is_none()),
        ("--b", args.b.is_none()),
        ("--x", args.x.is_none()),
        ("--q", args.q.is_none()),
        ("--alpha", args.alpha.is_none()),
        ("--m", args.m.is_none()),
    ]
    .into_iter()
    .filter_map(|(name, absent)| absent.then_some(name))
    .collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "give --config, --bundled, or every case flag (missing {})",
            missing.join(", ")
        )));
    }
    let (f, g) = (args.f.clone().expect("checked"), args.g.clone().expect("checked"));
    let (a, b, x) = (args.a.expect("checked"), args.b.expect("checked"), args.x.expect("checked"));
    let (q, alpha, m) = (args.q.expect("checked"), args.alpha.expect("checked"), args.m.expect("checked"));
    let iv = Interval::new(a, b)?;
    let params = ConvexityParams::new(alpha, m)?;
    let pair = DifferentiablePair::from_function(f, DomainSpec::new(b / m)?)?;
    let case = BoundCase::with_measured_sup(pair, g, iv, x, q, params)?;
    match verify_case(&case, args.theorem, &VerifyOptions::default())? {
        CaseOutcome::Verified(r) => {
            println!("lhs={:e} rhs={:e} holds={}", r.lhs, r.rhs, r.holds);
            Ok(status(r.holds))
        }
        CaseOutcome::HypothesisRejected(v) => {
            match v.witness {
                Some(w) => println!(
                    "hypothesis rejected: witness x={:e} y={:e} t={:e} gap={:e}",
                    w.x, w.y, w.t, w.gap
                ),
                None => println!("hypothesis rejected"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn classify(args: ClassifyArgs) -> Result<ExitCode, Error> {
    let grid = GridSpec::new(args.nx, args.ny, args.nt)?;
    let matrix = classify_region(&args.f, DomainSpec::new(args.bstar)?, &args.alphas, &args.ms, grid)?;
    let mut csv = String::from("alpha,m,holds,witness_x,witness_y,witness_t,gap\n");
    for (alpha, m, v) in matrix.cells() {
        match v.witness {
            Some(w) => csv.push_str(&format!("{alpha},{m},{},{:e},{:e},{:e},{:e}\n", v.holds, w.x, w.y, w.t, w.gap)),
            None => csv.push_str(&format!("{alpha},{m},{},,,,\n", v.holds)),
        }
    }
    match &args.out {
        Some(path) => fs::write(path, csv)?,
        None => io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn relative_deviation(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

fn constants(args: ConstantsArgs) -> Result<ExitCode, Error> {
    let iv = Interval::new(args.a, args.b)?;
    let m = constant_m(iv, args.x, args.alpha)?;
    let a = constant_a(iv, args.x, args.alpha)?;
    let m_oracle = constant_m_oracle(iv, args.x, args.alpha, INNER_TOLERANCE)?.value;
    let a_oracle = constant_a_oracle(iv, args.x, args.alpha, INNER_TOLERANCE)?.value;
    println!("M={m:e} A={a:e}");
    println!("M_oracle={m_oracle:e} A_oracle={a_oracle:e}");
    println!(
        "rel_dev_M={:e} rel_dev_A={:e}",
        relative_deviation(m, m_oracle),
        relative_deviation(a, a_oracle)
    );
    Ok(ExitCode::SUCCESS)
}

fn identities(args: IdentitiesArgs) -> Result<ExitCode, Error> {
    let iv = Interval::new(args.a, args.b)?;
    let domain = DomainSpec::new(args.b.max(f64::MIN_POSITIVE))?;
    let pair = DifferentiablePair::from_function(args.f, domain)?;
    let case = BoundCase::with_measured_sup(pair, args.g.clone(), iv, args.x, 1.0, ConvexityParams::convex())?;
    let r11 = residual_lemma11(&case)?;
    let r12 = residual_lemma12(&case)?;
    let envelope = envelope_excess(&args.g, iv, args.x, ENVELOPE_SAMPLES)?;
    println!("kernel_identity lhs={:e} rhs={:e} residual={:e}", r11.lhs, r11.rhs, r11.residual);
    println!("weight_identity lhs={:e} rhs={:e} residual={:e}", r12.lhs, r12.rhs, r12.residual);
    println!("envelope_excess={envelope:e}");
    let ok = r11.residual <= IDENTITY_TOLERANCE && r12.residual <= IDENTITY_TOLERANCE && envelope <= ENVELOPE_TOLERANCE;
    Ok(status(ok))
}
