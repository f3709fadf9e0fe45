use anyhow::{anyhow, Context};
use cachewright_core::converse::text::{parse_certificate, write_certificate};
use cachewright_core::converse::{check_certificate, generate, tightness_check, Bound, ConverseError};
use cachewright_core::model::{Demand, NetworkConfig};
use cachewright_core::scheme::SchemeError;
use cachewright_core::tradeoff::{assemble_known_curve, emit_csv};
use cachewright_core::verify::{roundtrip, verify_exhaustive, SchemeKind, VerifyError};
use cachewright_core::{fmt_ratio, Rational};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

const VERIFY_MAX_K: usize = 8;
const CONVERSE_MAX_K: usize = 10;
const VERIFY_FILE_BYTES: usize = 97;

#[derive(Parser)]
#[command(name = "cachewright", version, about = "Coded caching schemes, tradeoff curves and converse certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Net {
    /// Number of files.
    #[arg(long)]
    n: usize,
    /// Number of users.
    #[arg(long)]
    k: usize,
    /// Field modulus; chosen from K when omitted.
    #[arg(long)]
    prime: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Send one file through placement, delivery and decoding.
    Roundtrip {
        #[command(flatten)]
        net: Net,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated file index per user.
        #[arg(long)]
        demand: String,
        #[arg(long, default_value_t = 1)]
        user: usize,
        #[arg(long, default_value = "new")]
        scheme: SchemeKind,
    },
    /// Decode every user under every demand and report as JSON.
    Verify {
        #[command(flatten)]
        net: Net,
        #[arg(long, default_value = "new")]
        scheme: SchemeKind,
        #[arg(long, env = "CACHEWRIGHT_JOBS", default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Emit the best known rate-memory curve as CSV.
    Tradeoff {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 33)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate and check a lower-bound certificate.
    Converse {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "auto")]
        theorem: Theorem,
        /// Write the certificate here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    #[value(name = "2")]
    Two,
    #[value(name = "4")]
    Four,
    Auto,
}

/// Error paired with the exit status it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn usage(err: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, err: err.into() }
}

fn failed(err: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 1, err: err.into() }
}

type Outcome = Result<(), Failure>;

fn config(net: &Net) -> Result<NetworkConfig, Failure> {
    NetworkConfig::new(net.n, net.k, net.prime).map_err(usage)
}

fn write_out(path: &PathBuf, bytes: &[u8]) -> Outcome {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())).map_err(usage)
}

fn cmd_roundtrip(net: &Net, input: &PathBuf, out: &PathBuf, demand: &str, user: usize, scheme: SchemeKind) -> Outcome {
    let cfg = config(net)?;
    let bytes = std::fs::read(input).with_context(|| format!("reading {}", input.display())).map_err(usage)?;
    let demand = Demand::parse(demand, &cfg).map_err(usage)?;
    let rt = match roundtrip(&cfg, scheme, &demand, user, &bytes) {
        Ok(rt) => rt,
        Err(e @ (VerifyError::Scheme(SchemeError::DemandNotInD(_)) | VerifyError::Model(_) | VerifyError::BadUser { .. })) => {
            return Err(usage(e))
        }
        Err(e) => return Err(failed(e)),
    };
    write_out(out, &rt.output)?;
    println!("M={} R={}", fmt_ratio(&rt.m), fmt_ratio(&rt.r));
    if rt.output != bytes {
        return Err(failed(anyhow!("user {user} decoded bytes that differ from the input")));
    }
    Ok(())
}

fn cmd_verify(net: &Net, scheme: SchemeKind, jobs: usize, out: Option<&PathBuf>, force: bool) -> Outcome {
    if net.k > VERIFY_MAX_K && !force {
        return Err(usage(anyhow!("K={} exceeds {VERIFY_MAX_K}; pass --force to run anyway", net.k)));
    }
    let cfg = config(net)?;
    let report = verify_exhaustive(&cfg, scheme, jobs, VERIFY_FILE_BYTES).map_err(usage)?;
    let value = serde_json::to_value(&report).map_err(usage)?;
    let json = serde_json::to_string_pretty(&value).map_err(usage)? + "\n";
    print!("{json}");
    if let Some(path) = out {
        write_out(path, json.as_bytes())?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(failed(anyhow!("{} decoding failures; point matches: {}", report.failures.len(), report.point_matches)))
    }
}

fn cmd_tradeoff(n: usize, k: usize, samples: usize, out: Option<&PathBuf>) -> Outcome {
    let curve = assemble_known_curve(n, k).map_err(usage)?;
    let csv = emit_csv(&curve, samples).map_err(usage)?;
    match out {
        Some(path) => write_out(path, csv.as_bytes()),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn short(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        fmt_ratio(q)
    }
}

fn cmd_converse(n: usize, k: usize, theorem: Theorem, out: Option<&PathBuf>, force: bool) -> Outcome {
    if k > CONVERSE_MAX_K && !force {
        return Err(usage(anyhow!("K={k} exceeds {CONVERSE_MAX_K}; pass --force to run anyway")));
    }
    let bound = match theorem {
        Theorem::Two => Bound::ManyFiles,
        Theorem::Four => Bound::FewFiles,
        Theorem::Auto => Bound::auto(n, k),
    };
    let classify = |e: ConverseError| match e {
        ConverseError::OutOfCaseRange { .. } | ConverseError::UndefinedDemandTable { .. } => usage(e),
        other => failed(other),
    };
    let cert = generate(n, k, bound).map_err(classify)?;
    let text = write_certificate(&cert);
    if let Some(path) = out {
        write_out(path, text.as_bytes())?;
    }
    let reparsed = parse_certificate(&text).map_err(|e| failed(anyhow!("{e:?}")))?;
    let report = check_certificate(&reparsed).map_err(failed)?;
    let tight = tightness_check(n, k, bound).map_err(classify)?;
    eprintln!("bound {}: {} axioms", bound.number(), report.axiom_count);
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    let corner = if tight.tight {
        format!("tight at M={}", short(&tight.m))
    } else {
        format!(
            "not tight at M={}: bound {} vs achievable {}",
            fmt_ratio(&tight.m),
            fmt_ratio(&tight.bound_rate),
            fmt_ratio(&tight.achievable_rate)
        )
    };
    println!("{} {verdict}; {corner}", cert.target.compact());
    if !report.passed() {
        eprintln!("{}", report.describe());
        return Err(failed(anyhow!("certificate check failed")));
    }
    if !tight.tight {
        return Err(failed(anyhow!("bound does not meet the achievable corner")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Roundtrip { net, input, out, demand, user, scheme } => {
            cmd_roundtrip(net, input, out, demand, *user, *scheme)
        }
        Command::Verify { net, scheme, jobs, out, force } => cmd_verify(net, *scheme, *jobs, out.as_ref(), *force),
        Command::Tradeoff { n, k, samples, out } => cmd_tradeoff(*n, *k, *samples, out.as_ref()),
        Command::Converse { n, k, theorem, out, force } => cmd_converse(*n, *k, *theorem, out.as_ref(), *force),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
