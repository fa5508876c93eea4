use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use octo_core::verify::{self, read_json, run_checks, write_json, Certificate, CheckStatus};
use octo_core::{
    count_triples, is_automorphism, kernel_u, structure_report, FieldPrime, FpMatrix, G2Sampler,
    PGroupContext,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "octo",
    version,
    about = "Octonions, G2(p), and the p-group P_U over F_p"
)]
struct Cli {
    /// Odd prime characteristic.
    #[arg(long, global = true)]
    p: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the basis multiplication table.
    Table,
    /// Sample, check and count elements of G2(p)
    #[command(subcommand)]
    G2(G2Command),
    /// Compute U = ker f~ and write it in subspace JSON.
    Kernel,
    /// Checks on the exterior square as a G2-module
    #[command(subcommand)]
    Module(ModuleCommand),
    /// Build, verify and describe the p-group P_U
    #[command(subcommand)]
    Group(GroupCommand),
    /// Run the full verification pipeline and emit a certificate.
    Cert,
}

#[derive(Subcommand)]
enum G2Command {
    /// Emit sampled G2(p) elements as a JSON array of 7x7 matrices.
    Sample {
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Re-verify the automorphism property of each matrix in a file.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Staged exhaustive count of basic triples (p <= 7).
    CountTriples,
}

#[derive(Subcommand)]
enum ModuleCommand {
    /// Invariance, equivariance, spinning and Hom-space checks.
    Verify,
}

#[derive(Subcommand)]
enum GroupCommand {
    /// Serialise p and U.
    Build,
    /// Group-law, exponent, structure and automorphism-lift checks.
    Verify,
    /// Print the structure report.
    Report,
}

/// Errors that map to exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

macro_rules! out {
    ($($arg:tt)*) => {
        std::io::Write::write_fmt(&mut std::io::stdout().lock(), format_args!($($arg)*))
    };
}

macro_rules! outln {
    () => { out!("\n") };
    ($($arg:tt)*) => { out!("{}\n", format_args!($($arg)*)) };
}

fn prime(cli: &Cli) -> anyhow::Result<FieldPrime> {
    let raw = cli.p.ok_or_else(|| UsageError("--p is required".into()))?;
    FieldPrime::new(raw).map_err(|e| UsageError(e.to_string()).into())
}

fn emit<T: Serialize + ?Sized>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    match out {
        Some(path) => write_json(path, value)?,
        None => outln!("{}", serde_json::to_string_pretty(value)?)?,
    }
    Ok(())
}

fn print_report(cert: &Certificate, json: bool) -> anyhow::Result<()> {
    if json {
        outln!("{}", serde_json::to_string_pretty(cert)?)?;
        return Ok(());
    }
    for c in &cert.checks {
        let status = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::PaperTrusted => "TRUSTED",
        };
        out!(
            "{status:<8} {:<45} samples={:<6} {:>6} ms",
            c.name,
            c.samples,
            c.runtime_ms
        )?;
        if let Some(w) = &c.witness {
            out!("  witness: {w}")?;
        }
        outln!()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Table => {
            if cli.json || out.is_some() {
                emit(out, &verify::table_json())?;
            } else {
                out!("{}", octo_core::octonion::table().render())?;
            }
            Ok(true)
        }
        Command::G2(G2Command::Sample { count }) => {
            let p = prime(cli)?;
            let elems = G2Sampler::new(p, cli.seed).batch(*count)?;
            let mats: Vec<&FpMatrix> = elems.iter().map(|g| g.matrix()).collect();
            emit(out, &mats)?;
            Ok(true)
        }
        Command::G2(G2Command::Check { input }) => {
            let mats: Vec<FpMatrix> = read_json(input).map_err(|e| UsageError(e.to_string()))?;
            let mut ok = true;
            for (i, m) in mats.iter().enumerate() {
                let check = is_automorphism(m);
                ok &= check.holds();
                outln!(
                    "{i}: {}",
                    if check.holds() {
                        "automorphism".to_string()
                    } else {
                        format!("{check:?}")
                    }
                )?;
            }
            Ok(ok)
        }
        Command::G2(G2Command::CountTriples) => {
            let p = prime(cli)?;
            let counts = count_triples(p, cli.seed).map_err(|e| UsageError(e.to_string()))?;
            if cli.json {
                emit(out, &counts)?;
            } else {
                outln!("n_x          = {}", counts.n_x)?;
                outln!("n_y_given_x  = {}", counts.n_y_given_x)?;
                outln!("n_z_given_xy = {}", counts.n_z_given_xy)?;
                outln!("product      = {}", counts.product)?;
                outln!(
                    "stage counts independent of choice: {}",
                    counts.stages_independent()
                )?;
            }
            Ok(counts.stages_independent())
        }
        Command::Kernel => {
            let p = prime(cli)?;
            emit(out, &kernel_u(p))?;
            Ok(true)
        }
        Command::Module(ModuleCommand::Verify) => {
            let p = prime(cli)?;
            let cert = run_checks(p, cli.samples, cli.seed, |c| c.module == "exterior")?;
            print_report(&cert, cli.json)?;
            let ok = cert.failures().next().is_none();
            Ok(ok)
        }
        Command::Group(GroupCommand::Build) => {
            let p = prime(cli)?;
            emit(out, &PGroupContext::for_prime(p))?;
            Ok(true)
        }
        Command::Group(GroupCommand::Verify) => {
            let p = prime(cli)?;
            let cert = run_checks(p, cli.samples, cli.seed, |c| c.module == "group")?;
            print_report(&cert, cli.json)?;
            let ok = cert.failures().next().is_none();
            Ok(ok)
        }
        Command::Group(GroupCommand::Report) => {
            let p = prime(cli)?;
            outln!(
                "{}",
                serde_json::to_string(&structure_report(&PGroupContext::for_prime(p)))?
            )?;
            Ok(true)
        }
        Command::Cert => {
            let p = prime(cli)?;
            let cert = verify::run_pipeline(p, cli.samples, cli.seed)?;
            if let Some(path) = out {
                write_json(path, &cert).with_context(|| format!("writing {}", path.display()))?;
            }
            print_report(&cert, cli.json && out.is_none())?;
            if cert.checks.len() != verify::REGISTRY.len() {
                bail!("pipeline aborted after {} checks", cert.checks.len());
            }
            Ok(cert.all_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<std::io::Error>()
        .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}
