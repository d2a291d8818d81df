//! `sofic`: configuration-driven entropy experiments.
//!
//! Every failure is reported as one line of JSON on stderr. Exit codes:
//! 0 ok, 1 invalid input, 2 size guard exceeded.

mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sofic_core::Error;

use config::{Config, Kind};

#[derive(Parser)]
#[command(name = "sofic", version, about = "Sofic and classical entropy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named by the config's `kind`.
    Run(RunArgs),
    /// Følner-box entropy table.
    Classical(RunArgs),
    /// Exact microstate counts over a sofic schedule.
    SoficCount(RunArgs),
    /// Monte Carlo microstate counts over a sofic schedule.
    SoficMc(RunArgs),
    /// Multiplicative and freeness defects of sofic maps.
    Defects(RunArgs),
    /// Upper-sofic block entropy and good-function counts.
    BlockEntropy(RunArgs),
    /// Relative entropy of a process over a symbol factor.
    Relative(RunArgs),
    /// Exact sofic table against the classical rate, with residuals.
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

struct Failure {
    code: u8,
    kind: &'static str,
    field: Option<String>,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind, field) = match &e {
            Error::Guard { .. } => (2, "guard", None),
            Error::Invalid { field, .. } => (1, "validation", Some(field.clone())),
            _ => (1, "validation", None),
        };
        Failure {
            code,
            kind,
            field,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        kind: "io",
        field: None,
        message: format!("{}: {e}", path.display()),
    }
}

fn report(f: &Failure) {
    let err = json!({ "error": { "kind": f.kind, "field": f.field, "message": f.message } });
    eprintln!("{err}");
}

fn execute(args: &RunArgs, forced: Option<Kind>) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config).map_err(|e| io_failure(&args.config, e))?;
    let cfg = Config::parse(&text)?;
    let kind = cfg.resolve_kind(forced)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Failure {
            code: 1,
            kind: "validation",
            field: Some("threads".into()),
            message: e.to_string(),
        })?;
    let out = pool.install(|| run::execute(&cfg, kind, args.seed))?;
    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    for (name, body) in [("summary.json", &out.summary), ("table.csv", &out.csv)] {
        let path = args.out.join(name);
        fs::write(&path, body).map_err(|e| io_failure(&path, e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        report(&Failure {
            code: 101,
            kind: "internal",
            field: None,
            message: info.to_string(),
        });
    }));
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report(&Failure {
                code: 1,
                kind: "usage",
                field: None,
                message: e.to_string().trim_end().to_string(),
            });
            return ExitCode::from(1);
        }
    };
    let (args, forced) = match &cli.command {
        Command::Run(a) => (a, None),
        Command::Classical(a) => (a, Some(Kind::Classical)),
        Command::SoficCount(a) => (a, Some(Kind::SoficCount)),
        Command::SoficMc(a) => (a, Some(Kind::SoficMc)),
        Command::Defects(a) => (a, Some(Kind::Defects)),
        Command::BlockEntropy(a) => (a, Some(Kind::BlockEntropy)),
        Command::Relative(a) => (a, Some(Kind::Relative)),
        Command::Compare(a) => (a, Some(Kind::Compare)),
    };
    match execute(args, forced) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f);
            ExitCode::from(f.code)
        }
    }
}
