use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lab_cli::criteria;
use lab_cli::oracle::OracleRequest;
use lab_cli::output::OutDir;
use lab_cli::tasks::{execute, Task};
use lab_cli::{init_threads, LabConfig, LabError, Result};

/// Coupling experiments on finite windows of diagonal products.
#[derive(Parser)]
#[command(name = "lab", version)]
struct Cli {
    /// TOML configuration; the built-in default (`kappa = 3`) when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Profile sequences, ρ_bij and hypothesis verdicts.
    Profile,
    /// Marked-group invariants: z2xz3, s3, a5 or a table file.
    Group { name: String },
    /// Følner cardinalities and growth rows.
    Folner {
        #[arg(long)]
        n_max: u64,
    },
    /// Bijection and distance laws of the ℤ-coupling.
    Zcoupling {
        #[command(subcommand)]
        action: ZAction,
    },
    /// Injection and distance audits of the diagonal coupling.
    Ddcoupling {
        #[command(subcommand)]
        action: DdAction,
    },
    /// Independent reference computations, appended to provenance.json.
    Oracle {
        #[command(subcommand)]
        request: OracleCmd,
    },
    /// One acceptance criterion (1 to 11).
    Criterion { id: u8 },
    /// All acceptance criteria.
    Acceptance,
    /// The task list of the configuration, in order.
    Run,
}

#[derive(Subcommand)]
enum ZAction {
    Verify {
        #[arg(long)]
        n: usize,
    },
    Sums,
}

#[derive(Subcommand)]
enum DdAction {
    Verify {
        #[arg(long)]
        n: usize,
    },
    Audit {
        /// Generator name such as `t+`, `a1`, `b1`.
        #[arg(long = "gen")]
        generator: String,
        #[arg(long)]
        n: usize,
    },
    Sums,
}

#[derive(Subcommand)]
enum OracleCmd {
    VarbaseDecompose {
        #[arg(long)]
        x: String,
        /// Comma-separated radices.
        #[arg(long, value_delimiter = ',', required = true)]
        base: Vec<u64>,
        #[arg(long)]
        unbounded: bool,
    },
    CarryCount {
        #[arg(long, value_delimiter = ',', required = true)]
        base: Vec<u64>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
    },
    Diameter {
        #[arg(long)]
        group: String,
    },
    FolnerCount {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        i: usize,
        #[arg(long, default_value_t = 1)]
        j: usize,
    },
    WordLength {
        /// Element in text form, e.g. `t=0; L0: 2:3`.
        #[arg(long)]
        element: String,
        #[arg(long, default_value_t = 1)]
        margin: i64,
    },
}

impl From<OracleCmd> for OracleRequest {
    fn from(c: OracleCmd) -> Self {
        match c {
            OracleCmd::VarbaseDecompose { x, base, unbounded } => {
                OracleRequest::VarbaseDecompose { x, base, unbounded }
            }
            OracleCmd::CarryCount { base, k, m } => OracleRequest::CarryCount { base, k, m },
            OracleCmd::Diameter { group } => OracleRequest::Diameter { group },
            OracleCmd::FolnerCount { n, i, j } => OracleRequest::FolnerCount { n, i, j },
            OracleCmd::WordLength { element, margin } => {
                OracleRequest::WordLength { element, margin }
            }
        }
    }
}

fn tasks_for(command: Command, cfg: &LabConfig) -> Vec<Task> {
    match command {
        Command::Profile => vec![Task::Profile],
        Command::Group { name } => vec![Task::Group { group: name }],
        Command::Folner { n_max } => vec![Task::Folner { n_max }],
        Command::Zcoupling {
            action: ZAction::Verify { n },
        } => vec![Task::ZcouplingVerify { n }],
        Command::Zcoupling {
            action: ZAction::Sums,
        } => vec![Task::ZcouplingSums],
        Command::Ddcoupling {
            action: DdAction::Verify { n },
        } => vec![Task::DdcouplingVerify { n }],
        Command::Ddcoupling {
            action: DdAction::Audit { generator, n },
        } => vec![Task::DdcouplingAudit { n, generator }],
        Command::Ddcoupling {
            action: DdAction::Sums,
        } => vec![Task::DdcouplingSums],
        Command::Oracle { request } => vec![Task::Oracle {
            request: request.into(),
        }],
        Command::Criterion { id } => vec![Task::Criterion { id }],
        Command::Acceptance => Vec::new(),
        Command::Run => cfg.tasks.clone(),
    }
}

fn acceptance(out: &mut OutDir) -> Result<()> {
    let results = criteria::run_all();
    for r in &results {
        println!("{}", r.line());
    }
    out.write_json("acceptance.json", &results)?;
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.id.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(LabError::invariant(
            "acceptance",
            "criteria",
            format!("failing: {}", failed.join(", ")),
        ))
    }
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(path) => LabConfig::load(path)?,
        None => LabConfig::default(),
    };
    let root = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("lab_out"));
    let mut out = OutDir::new(root);
    if matches!(cli.command, Command::Acceptance) {
        return acceptance(&mut out);
    }
    for task in tasks_for(cli.command, &cfg) {
        let done = execute(&cfg, &task, &mut out).map_err(|e| {
            if let LabError::Invariant(f) = &e {
                // Best effort: the failure record must not mask the failure itself.
                let _ = out.write_json("failure.json", f);
                eprintln!("{}", serde_json::to_string(f).expect("failure serializes"));
            }
            e
        })?;
        println!("{}: {}", done.task, done.message);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
