use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use defcat_cli::{load, run, Flags};

/// Exact deformation theory of skeletal monoidal categories and functors.
#[derive(Parser)]
#[command(name = "defcat", version)]
struct Cli {
    /// One of check, cohomology, classify, deform, obstruct, products, units, hochschild, compare.
    command: String,
    /// Workspace document (JSON).
    document: PathBuf,
    /// Complex kind: category, functor, bimodule, fibred, total, coarse or transformation.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long = "max-order")]
    max_order: Option<usize>,
    /// Worker threads for block assembly; output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let doc = match load(&cli.document) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let flags = Flags { kind: cli.kind, degree: cli.degree, order: cli.order, max_order: cli.max_order };
    match run(&cli.command, &doc, &flags) {
        Ok(report) => {
            print!("{}", report.render());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
