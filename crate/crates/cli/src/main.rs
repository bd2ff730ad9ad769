//! `agilemap`: validate, analyse, export and serve agile map files.
//!
//! Exit codes: 0 success, 1 violations or findings, 2 usage or I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "agilemap", version, about = "Typed relation graph over agile practices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and check a map file against the meta-model.
    Validate {
        file: PathBuf,
        /// Machine-readable report.
        #[arg(long)]
        json: bool,
    },
    /// List every practice transitively required by the given ones.
    Closure {
        file: PathBuf,
        #[arg(required = true)]
        ids: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Check a selection for missing requirements, suggestions and alternatives.
    Select {
        file: PathBuf,
        /// Comma-separated practice ids, e.g. `AP28,AP32`.
        #[arg(long, allow_hyphen_values = true)]
        choose: String,
        /// Also print the composition plan when the selection is complete.
        #[arg(long)]
        plan: bool,
        #[arg(long)]
        include_excluded: bool,
        #[arg(long)]
        json: bool,
    },
    /// Write the map as DOT or JSON to stdout.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long)]
        include_excluded: bool,
        /// Group DOT nodes into one cluster per category.
        #[arg(long)]
        cluster_by_category: bool,
    },
    /// Print practice and relation counts.
    Stats {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Serve the HTTP API (and optionally a built UI) for the map.
    Serve {
        file: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Directory with the built web UI.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Dot,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { file, json } => commands::validate(&file, json),
        Command::Closure { file, ids, json } => commands::closure(&file, &ids, json),
        Command::Select { file, choose, plan, include_excluded, json } => {
            commands::select(&file, &choose, plan, include_excluded, json)
        }
        Command::Export { file, format, include_excluded, cluster_by_category } => {
            commands::export(&file, format == ExportFormat::Dot, include_excluded, cluster_by_category)
        }
        Command::Stats { file, json } => commands::stats(&file, json),
        Command::Serve { file, port, bind, ui_dir } => commands::serve(&file, &bind, port, ui_dir),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
