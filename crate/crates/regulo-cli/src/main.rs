//! Command-line front end: builds coefficient tables, certifies
//! unimodality, sweeps the k = 4 profile, cross-checks against the
//! partition oracle, and runs the numerical audits.
//!
//! Exit codes: 0 all checks verified, 1 a mathematical check refuted
//! (the report carries a witness), 2 operational failure.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use regulo::audit::{
    check_constants, check_identities, run_bound_audit, BoundAudit, ConstantsAudit, IdentityAudit,
};
use regulo::checker::{
    certify_unimodality, check_recurrence_general, check_recurrence_general_sweep,
    check_recurrence_k4, check_recurrence_k4_sweep, k4_exception_profile, CertificateStatus,
    CertifyOptions, VerificationCertificate,
};
use regulo::oracle::{count, count_table_with, enumerate, OracleOptions, TableMode};
use regulo::params::{threshold_m_max, total_degree, PolyParams};
use regulo::poly::DensePolynomial;
use regulo::quad::QuadratureSpec;
use regulo::report::{envelope, to_json, write_json, KIND_AUDIT, KIND_CERTIFICATE, KIND_K4_PROFILE};
use regulo::{checkpoint, Error};

type CliResult = Result<ExitCode, Box<dyn std::error::Error + Send + Sync>>;

#[derive(Parser)]
#[command(
    name = "regulo",
    version,
    about = "Exact-arithmetic unimodality verifier for regular distinct-part partition polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one coefficient table and print a summary of it
    Build(BuildArgs),
    /// Certify unimodality of the whole family above (k, m0)
    Verify(VerifyArgs),
    /// Sweep the k = 4 exception profile
    K4Profile(K4ProfileArgs),
    /// Count or list the partitions themselves, independently of the
    /// polynomial arithmetic
    Oracle(OracleArgs),
    /// Check the level-to-level coefficient recurrences
    Recurrence(RecurrenceArgs),
    /// Numerically audit the analytic positivity argument
    Audit(AuditArgs),
    /// Run the preset of corollary-scale verification jobs
    CertifyCorollaries(CorollariesArgs),
}

/// Flags shared by every polynomial-building command.
#[derive(Args)]
struct ResourceArgs {
    /// Memory ceiling for coefficient storage, in MiB
    #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(64..))]
    memory_limit: u64,
}

impl ResourceArgs {
    fn ceiling_bytes(&self) -> u64 {
        self.memory_limit << 20
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    k: i64,
    #[arg(long)]
    m: i64,
    /// Write the binary coefficient snapshot into this directory
    #[arg(long, env = "REGULO_CHECKPOINT_DIR")]
    checkpoint_dir: Option<PathBuf>,
    /// Write the JSON summary here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    k: i64,
    /// First level of the family; the base case is checked outright
    #[arg(long)]
    m0: i64,
    /// Cap the sweep below the analytic threshold (the certificate then
    /// covers only the capped range)
    #[arg(long)]
    m_max: Option<u64>,
    /// Keep a rolling checkpoint plus sidecar here after every level
    #[arg(long, env = "REGULO_CHECKPOINT_DIR")]
    checkpoint_dir: Option<PathBuf>,
    /// Resume from the rolling checkpoint if one is present
    #[arg(long)]
    resume: bool,
    /// Write the certificate here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args)]
struct K4ProfileArgs {
    /// Last level of the sweep
    #[arg(long, default_value_t = 64)]
    m_max: u32,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableModeArg {
    Dp,
    Pure,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    k: i64,
    #[arg(long)]
    m: i64,
    /// Weight to count and list
    #[arg(long)]
    n: Option<i64>,
    /// Print the whole count table instead of a single weight
    #[arg(long)]
    table: bool,
    /// Table construction mode
    #[arg(long, value_enum, default_value_t = TableModeArg::Dp)]
    mode: TableModeArg,
    /// Worker threads for the pure-enumeration table walk
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
    /// Stop listing partitions beyond this many
    #[arg(long, default_value_t = 1000)]
    enum_cap: usize,
}

#[derive(Args)]
struct RecurrenceArgs {
    #[arg(long)]
    k: i64,
    #[arg(long)]
    m: i64,
    /// Check a single position instead of sweeping every coefficient
    #[arg(long)]
    n: Option<i64>,
    /// Use the general block recurrence even at k = 4
    #[arg(long)]
    general: bool,
}

#[derive(Args)]
struct AuditArgs {
    /// Family index for the bound audits
    #[arg(long, default_value_t = 4)]
    k: u32,
    /// Levels for the bound audits (past the 8k^(3/2) threshold)
    #[arg(long = "m", num_args = 1.., default_values_t = [64u32, 70])]
    ms: Vec<u32>,
    /// Frequencies sampled per bound audit
    #[arg(long, default_value_t = 20)]
    mu_samples: usize,
    /// Envelope points sampled per audit
    #[arg(long, default_value_t = 100)]
    theta_samples: usize,
    /// x samples for the identity suite (paired with --n-samples)
    #[arg(long, default_value_t = 100)]
    x_samples: usize,
    /// n samples for the identity suite
    #[arg(long, default_value_t = 10)]
    n_samples: usize,
    /// k values for the constants audit
    #[arg(long = "constants-k", num_args = 1.., default_values_t = [4u32, 5, 6])]
    constants_k: Vec<u32>,
    /// Absolute quadrature tolerance per integral
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CorollariesArgs {
    /// Restrict to these k (the k = 10 job only runs when asked for
    /// explicitly, here or via --include-deferred)
    #[arg(long, num_args = 1..)]
    only: Vec<u32>,
    /// Include the deferred full-scale k = 10 job
    #[arg(long)]
    include_deferred: bool,
    /// Independent verification jobs to run concurrently
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    /// Directory for the per-family certificates
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    #[arg(long, env = "REGULO_CHECKPOINT_DIR")]
    checkpoint_dir: Option<PathBuf>,
    #[arg(long)]
    resume: bool,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Serialize)]
struct BuildSummary {
    k: u32,
    m: u32,
    degree: u64,
    factor_count: u64,
    coefficient_sum: String,
    coeff_digest: String,
    checkpoint: Option<PathBuf>,
}

#[derive(Serialize)]
struct RecurrenceReport {
    k: i64,
    m: i64,
    n: Option<i64>,
    holds: bool,
    first_failure: Option<u64>,
}

#[derive(Serialize)]
struct CombinedAudit {
    identities: IdentityAudit,
    constants: ConstantsAudit,
    bounds: Vec<BoundAudit>,
    all_passed: bool,
}

#[derive(Serialize)]
struct CorollaryJobResult {
    k: u32,
    m0: u32,
    status: CertificateStatus,
    threshold_m_max: u64,
    certificate_path: PathBuf,
    seconds: f64,
}

#[derive(Serialize)]
struct CorollariesSummary {
    jobs: Vec<CorollaryJobResult>,
    all_verified: bool,
}

fn emit<T: Serialize>(
    kind: &'static str,
    body: T,
    output: Option<&PathBuf>,
) -> Result<(), Error> {
    let report = envelope(kind, body);
    match output {
        Some(path) => write_json(&report, path),
        None => {
            print!("{}", to_json(&report)?);
            Ok(())
        }
    }
}

fn run_build(args: &BuildArgs) -> CliResult {
    let poly = DensePolynomial::build_with_ceiling(args.k, args.m, args.resources.ceiling_bytes())?;
    let params = poly.params();
    let checkpoint = match &args.checkpoint_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = checkpoint::checkpoint_file(dir, params.k, params.m);
            checkpoint::save(&poly, &path)?;
            Some(path)
        }
        None => None,
    };
    emit(
        "build-summary",
        BuildSummary {
            k: params.k,
            m: params.m,
            degree: params.degree,
            factor_count: params.factor_count(),
            coefficient_sum: poly.coefficient_sum().to_string(),
            coeff_digest: poly.digest(),
            checkpoint,
        },
        args.output.as_ref(),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn report_refutation(cert: &VerificationCertificate) {
    if let Some(w) = &cert.witness {
        eprintln!(
            "refuted at m = {}, n = {}: coefficient drops from {} to {}",
            w.m, w.n, w.previous, w.current
        );
    }
}

fn run_verify(args: &VerifyArgs) -> CliResult {
    let opts = CertifyOptions {
        m_max: args.m_max,
        memory_ceiling: args.resources.ceiling_bytes(),
        checkpoint_dir: args.checkpoint_dir.clone(),
        resume: args.resume,
        verbose: true,
    };
    let cert = certify_unimodality(args.k, args.m0, &opts)?;
    let refuted = matches!(cert.status, CertificateStatus::Refuted);
    if refuted {
        report_refutation(&cert);
    }
    emit(KIND_CERTIFICATE, cert, args.output.as_ref())?;
    Ok(if refuted {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn run_k4_profile(args: &K4ProfileArgs) -> CliResult {
    let report = k4_exception_profile(args.m_max, args.resources.ceiling_bytes())?;
    let ok = report.all_match;
    if !ok {
        for row in report
            .rows
            .iter()
            .filter(|r| !r.matches_expected || !r.leading_ok)
        {
            eprintln!(
                "profile mismatch at m = {}: violations {:?}, expected {:?}",
                row.m, row.violations, row.expected
            );
        }
    }
    emit(KIND_K4_PROFILE, report, args.output.as_ref())?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_oracle(args: &OracleArgs) -> CliResult {
    if args.table {
        let opts = OracleOptions {
            threads: args.threads as usize,
            ..OracleOptions::default()
        };
        let mode = match args.mode {
            TableModeArg::Dp => TableMode::DynamicProgramming,
            TableModeArg::Pure => TableMode::PureEnumeration,
        };
        let table = count_table_with(args.k, args.m, mode, &opts)?;
        for (n, c) in table.iter().enumerate() {
            println!("{n} {c}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let Some(n) = args.n else {
        return Err("pass --n WEIGHT for a single count, or --table for the whole table".into());
    };
    let total = count(args.k, args.m, n)?;
    println!("{total}");
    match enumerate(args.k, args.m, n, args.enum_cap) {
        Ok(parts) => {
            for p in &parts {
                println!("{p}");
            }
        }
        Err(Error::OutputCap { cap }) => {
            eprintln!("more than {cap} partitions; listing suppressed (raise --enum-cap)");
        }
        Err(e) => return Err(e.into()),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_recurrence(args: &RecurrenceArgs) -> CliResult {
    let use_k4 = args.k == 4 && !args.general;
    let (holds, first_failure) = match args.n {
        Some(n) => {
            let ok = if use_k4 {
                check_recurrence_k4(args.m, n)?
            } else {
                check_recurrence_general(args.k, args.m, n)?
            };
            (ok, (!ok).then(|| n.max(0) as u64))
        }
        None => {
            let failure = if use_k4 {
                check_recurrence_k4_sweep(args.m)?
            } else {
                check_recurrence_general_sweep(args.k, args.m)?
            };
            (failure.is_none(), failure)
        }
    };
    emit(
        "recurrence-check",
        RecurrenceReport {
            k: args.k,
            m: args.m,
            n: args.n,
            holds,
            first_failure,
        },
        None,
    )?;
    if holds {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "recurrence fails first at n = {}",
            first_failure.expect("failing position")
        );
        Ok(ExitCode::from(1))
    }
}

fn run_audit(args: &AuditArgs) -> CliResult {
    if !args.tolerance.is_finite() || args.tolerance <= 0.0 {
        return Err(format!("--tolerance must be a positive number, got {}", args.tolerance).into());
    }
    let spec = QuadratureSpec {
        abs_tolerance: args.tolerance,
        ..QuadratureSpec::default()
    };
    let identities = check_identities(args.x_samples, args.n_samples, 0x5eed)?;
    let constants = check_constants(&args.constants_k, 4, args.theta_samples.min(40), &spec)?;
    let mut bounds = Vec::with_capacity(args.ms.len());
    for &m in &args.ms {
        eprintln!("bound audit at k = {}, m = {m}", args.k);
        bounds.push(run_bound_audit(
            args.k,
            m,
            args.mu_samples,
            args.theta_samples,
            &spec,
        )?);
    }
    let all_passed =
        identities.passed && constants.all_passed && bounds.iter().all(|b| b.all_passed);
    emit(
        KIND_AUDIT,
        CombinedAudit {
            identities,
            constants,
            bounds,
            all_passed,
        },
        args.output.as_ref(),
    )?;
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// The corollary-scale jobs. The k = 10 run peaks near 2.9M coefficients
/// of over 2000 bits each and is deferred unless asked for.
const COROLLARY_JOBS: [(u32, u32); 6] = [(5, 0), (6, 0), (7, 0), (9, 0), (8, 2), (10, 0)];

fn run_corollaries(args: &CorollariesArgs) -> CliResult {
    let ceiling = args.resources.ceiling_bytes();
    let selected: Vec<(u32, u32)> = COROLLARY_JOBS
        .iter()
        .copied()
        .filter(|&(k, _)| {
            let chosen = args.only.is_empty() || args.only.contains(&k);
            let deferred = k == 10 && !args.include_deferred && !args.only.contains(&10);
            chosen && !deferred
        })
        .collect();
    if selected.is_empty() {
        return Err("no jobs selected".into());
    }
    eprintln!("planned jobs:");
    for &(k, m0) in &selected {
        let threshold = threshold_m_max(k);
        let degree = total_degree(k as i64, threshold as i64)?;
        let est = PolyParams::new(k as i64, threshold as i64)?.estimated_bytes();
        eprintln!(
            "  k = {k}, m0 = {m0}: levels {m0}..={threshold}, final degree {degree}, about {} MiB peak",
            (est >> 20).max(1)
        );
    }
    std::fs::create_dir_all(&args.output_dir)?;

    let queue: Mutex<VecDeque<(u32, u32)>> = Mutex::new(selected.iter().copied().collect());
    let results: Mutex<Vec<CorollaryJobResult>> = Mutex::new(Vec::new());
    let failures: Mutex<Vec<Box<dyn std::error::Error + Send + Sync>>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..(args.jobs as usize).min(selected.len()) {
            scope.spawn(|| loop {
                let job = queue.lock().expect("queue lock").pop_front();
                let Some((k, m0)) = job else { break };
                let opts = CertifyOptions {
                    m_max: None,
                    memory_ceiling: ceiling,
                    checkpoint_dir: args.checkpoint_dir.clone(),
                    resume: args.resume,
                    verbose: true,
                };
                let started = Instant::now();
                match certify_unimodality(k as i64, m0 as i64, &opts) {
                    Ok(cert) => {
                        let path = args
                            .output_dir
                            .join(format!("regulo-certificate-k{k}-m0{m0}.json"));
                        if let Err(e) = write_json(&envelope(KIND_CERTIFICATE, &cert), &path) {
                            failures.lock().expect("failure lock").push(e.into());
                            break;
                        }
                        if matches!(cert.status, CertificateStatus::Refuted) {
                            report_refutation(&cert);
                        }
                        eprintln!(
                            "k = {k}, m0 = {m0}: {:?} in {:.1}s",
                            cert.status,
                            started.elapsed().as_secs_f64()
                        );
                        results
                            .lock()
                            .expect("result lock")
                            .push(CorollaryJobResult {
                                k,
                                m0,
                                status: cert.status,
                                threshold_m_max: cert.threshold_m_max,
                                certificate_path: path,
                                seconds: started.elapsed().as_secs_f64(),
                            });
                    }
                    Err(e) => {
                        failures.lock().expect("failure lock").push(e.into());
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = failures.into_inner().expect("failure lock").pop() {
        return Err(e);
    }
    let mut jobs = results.into_inner().expect("result lock");
    jobs.sort_by_key(|r| (r.k, r.m0));
    let all_verified = jobs
        .iter()
        .all(|r| matches!(r.status, CertificateStatus::Verified));
    let summary = CorollariesSummary { jobs, all_verified };
    emit("corollary-summary", summary, None)?;
    Ok(if all_verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(args) => run_build(args),
        Command::Verify(args) => run_verify(args),
        Command::K4Profile(args) => run_k4_profile(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Recurrence(args) => run_recurrence(args),
        Command::Audit(args) => run_audit(args),
        Command::CertifyCorollaries(args) => run_corollaries(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
