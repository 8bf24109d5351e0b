use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "maupertuis", version, about = "Fixed-energy hyperbolic orbits by loop minimization")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute the run described by a JSON config file.
    Run { config: PathBuf },
    /// Export plain CSV plot series from the artifacts of a `continue` run.
    PlotData {
        run_dir: PathBuf,
        /// Destination directory; defaults to `<run_dir>/plot`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::Run { config } => maupertuis_cli::run_file(&config),
        Cmd::PlotData { run_dir, out } => {
            let dest = out.unwrap_or_else(|| run_dir.join("plot"));
            match maupertuis_cli::export_plot_data(&run_dir, &dest) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    0
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    1
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
