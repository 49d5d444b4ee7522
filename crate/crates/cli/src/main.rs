use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use opfold_cli::{emit_tables, run, Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "opfold",
    version,
    about = "Exact verification of Sobolev-type orthogonal polynomial identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every task on the built-in Laguerre–Sobolev configuration.
    VerifyPaper {
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output directory (defaults to the config's `output`, then `opfold-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Record wall-clock timings in the report (makes it non-reproducible).
    #[arg(long)]
    timings: bool,
}

fn execute(config: RunConfig, output: OutputArgs) -> ExitCode {
    let resolved = match config.resolve() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = output
        .out
        .or_else(|| resolved.config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("opfold-out"));
    let bundle = run(&resolved, output.timings);
    for (name, entry) in &bundle.report.entries {
        println!("{:<6} {name}", entry.status.to_string());
    }
    match emit_tables(&bundle, output.format, &dir) {
        Ok(paths) => println!("wrote {} files to {}", paths.len(), dir.display()),
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(2);
        }
    }
    if bundle.report.failed() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, output } => match RunConfig::from_path(&config) {
            Ok(c) => execute(c, output),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::VerifyPaper { output } => execute(RunConfig::paper(), output),
    }
}
