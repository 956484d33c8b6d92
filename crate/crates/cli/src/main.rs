mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use config::{Format, Overrides, RunConfig};
use error::{CliError, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};

/// First-order convex optimization runs, rate certificates and
/// convex-analysis property checks.
#[derive(Parser)]
#[command(name = "fom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Run,
    Certify,
    Props,
    Lasso,
}

#[derive(Subcommand)]
enum Command {
    /// Run an algorithm and write its history (CSV: k,f,best,step,gamma).
    Run(Common),
    /// Run or load a record and check it against its convergence rate
    /// (CSV: k,gap,bound,margin).
    Certify(Common),
    /// Sample a convex-analysis property and report violations.
    Props(Common),
    /// Solve and certify a LASSO instance.
    Lasso(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Config file; repeat to run several independent instances.
    #[arg(long, required = true)]
    config: Vec<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Number of instances processed in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn execute(kind: Kind, path: &Path, overrides: &Overrides, several: bool) -> Result<bool, CliError> {
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(overrides);
    if several && cfg.output_path().is_none() {
        return Err(CliError::Config("output.path is required when running several configs".into()));
    }
    match kind {
        Kind::Run => commands::cmd_run(&cfg),
        Kind::Certify => commands::cmd_certify(&cfg),
        Kind::Props => commands::cmd_props(&cfg),
        Kind::Lasso => commands::cmd_lasso(&cfg),
    }
}

fn exit_code(result: &Result<bool, CliError>) -> u8 {
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => e.exit_code(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Run(c) => (Kind::Run, c),
        Command::Certify(c) => (Kind::Certify, c),
        Command::Props(c) => (Kind::Props, c),
        Command::Lasso(c) => (Kind::Lasso, c),
    };
    if common.jobs == 0 {
        eprintln!("fom: config error: --jobs must be at least 1");
        return ExitCode::from(EXIT_CONFIG);
    }
    if common.config.len() > 1 && common.out.is_some() {
        eprintln!("fom: config error: --out cannot be shared by several configs; set output.path in each");
        return ExitCode::from(EXIT_CONFIG);
    }
    let overrides = Overrides {
        seed: common.seed,
        out: common.out.clone(),
        format: common.format,
        max_iter: common.max_iter,
        tol: common.tol,
    };

    let next = AtomicUsize::new(0);
    let codes = Mutex::new(vec![EXIT_PASS; common.config.len()]);
    std::thread::scope(|scope| {
        for _ in 0..common.jobs.min(common.config.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = common.config.get(i) else { break };
                let result = execute(kind, path, &overrides, common.config.len() > 1);
                if let Err(e) = &result {
                    eprintln!("fom: {}: {e}", path.display());
                }
                codes.lock().expect("no panics while held")[i] = exit_code(&result);
            });
        }
    });
    let codes = codes.into_inner().expect("threads joined");
    // the most severe outcome wins; config errors outrank everything
    let worst = codes
        .iter()
        .copied()
        .max_by_key(|&c| match c {
            EXIT_CONFIG => 10,
            c => c,
        })
        .unwrap_or(EXIT_PASS);
    ExitCode::from(worst)
}
