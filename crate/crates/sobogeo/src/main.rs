use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sobogeo::{run_file, RunError, Task};

/// Geodesics on curve spaces and the circle diffeomorphism group.
#[derive(Parser)]
#[command(name = "sobogeo", version)]
struct Cli {
    task: Task,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write plots.csv in long format (series, x, y).
    #[arg(long)]
    emit_plots: bool,
}

fn fail(err: &RunError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&RunError::config(e.to_string().trim_end())),
    };
    match run_file(cli.task, &cli.config, cli.out.as_deref(), cli.emit_plots) {
        Ok(cfg) => {
            println!("{}", cfg.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
