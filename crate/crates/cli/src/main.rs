use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qnop_cli::config::{apply, parse_config};
use qnop_cli::{emit, run_experiment, CliError, ExperimentId, ExperimentSpec};

#[derive(Parser, Debug)]
#[command(name = "qnop", version, about = "Quasi-Newton operator benchmarks and oracle suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment: table2, table3, example1, systems or lab.
    Run(RunArgs),
    /// Run the lab oracle suites only.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// RNG seed for the lab suites.
    #[arg(long)]
    seed: Option<u64>,
    /// csv or markdown.
    #[arg(long)]
    format: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all hardware threads).
    #[arg(long)]
    workers: Option<usize>,
    /// Trials per lab oracle.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    experiment: Option<String>,
    /// Comma-separated labels, e.g. "BFGS,IP-LBFGS(N=5,d=3)".
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated B₀ scales.
    #[arg(long)]
    lambdas: Option<String>,
    /// Comma-separated projection windows.
    #[arg(long)]
    d: Option<String>,
    /// Comma-separated L-BFGS memories.
    #[arg(long = "N")]
    memories: Option<String>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Include wall time in the output.
    #[arg(long)]
    timing: bool,
    /// key = value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
}

fn settings(common: &Common) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    if let Some(v) = common.seed {
        out.push(("seed", v.to_string()));
    }
    if let Some(v) = &common.format {
        out.push(("format", v.clone()));
    }
    if let Some(v) = &common.out {
        out.push(("out", v.display().to_string()));
    }
    if let Some(v) = common.workers {
        out.push(("workers", v.to_string()));
    }
    if let Some(v) = common.trials {
        out.push(("trials", v.to_string()));
    }
    out
}

fn build_spec(cmd: &Command) -> Result<ExperimentSpec, CliError> {
    match cmd {
        Command::Verify(args) => {
            let mut spec = ExperimentSpec::new(ExperimentId::Lab);
            for (k, v) in settings(&args.common) {
                apply(&mut spec, k, &v)?;
            }
            Ok(spec)
        }
        Command::Run(args) => {
            let file = match &args.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                    parse_config(&text)?
                }
                None => Default::default(),
            };
            let mut flags: Vec<(&str, String)> = Vec::new();
            let id = match &args.experiment {
                Some(v) => v.parse()?,
                None => file
                    .get("experiment")
                    .ok_or_else(|| CliError::Usage("--experiment is required".into()))?
                    .parse()?,
            };
            let mut spec = ExperimentSpec::new(id);
            for (k, v) in &file {
                apply(&mut spec, k, v)?;
            }
            for (k, v) in [("methods", &args.methods), ("lambdas", &args.lambdas), ("d", &args.d), ("N", &args.memories)] {
                if let Some(v) = v {
                    flags.push((k, v.clone()));
                }
            }
            if let Some(v) = args.max_iters {
                flags.push(("max_iters", v.to_string()));
            }
            if args.timing {
                flags.push(("timing", "true".into()));
            }
            flags.extend(settings(&args.common));
            for (k, v) in flags {
                apply(&mut spec, k, &v)?;
            }
            Ok(spec)
        }
    }
}

fn real_main() -> Result<i32, CliError> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return Ok(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            });
        }
    };
    let spec = build_spec(&cli.command)?;
    let report = run_experiment(&spec)?;
    if let Some(text) = emit(&report, spec.format, spec.out.as_deref())? {
        print!("{text}");
    }
    for o in report.oracles.iter().filter(|o| !o.clean()) {
        eprintln!("violation: {o}");
    }
    for r in report.rows.iter().filter(|r| r.status != qnop_cli::RunStatus::Converged) {
        eprintln!("not converged: {} {} lambda={:?} ({})", r.problem, r.method, r.lambda, r.status.as_str());
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let code = match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qnop: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
