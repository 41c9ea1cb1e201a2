use clap::{Parser, Subcommand};
use kahler_flow::cli::{self, CliError, Command, ConeSection, RunConfig};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Kähler-Ricci flow laboratory.
#[derive(Parser)]
#[command(name = "krflow", version)]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the curvature identity and pointwise inequality suites.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        /// Coarse `n = 1` grid; the fine grid is twice as dense.
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monge-Ampère flow on a flat torus chart.
    FlowTorus {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rotation-invariant flow on the Riemann sphere.
    FlowP1 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximal existence time and terminal behavior of a class.
    Cone {
        #[arg(long)]
        model: String,
        /// Comma-separated coefficients, e.g. `1,3` or `1/2,2`.
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dispatch on the `command` key of a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn with_config(
    command: Command,
    path: Option<&Path>,
    out: Option<&Path>,
    adjust: impl FnOnce(&mut RunConfig),
) -> Result<i32, CliError> {
    let mut cfg = match path {
        Some(p) => cli::load_config(p)?,
        None => RunConfig::default(),
    };
    adjust(&mut cfg);
    cli::validate(&cfg)?;
    let out = cli::resolve_out(out, path.map(|_| &cfg));
    cli::dispatch(command, &cfg, &out, &mut std::io::stdout().lock())
}

fn execute(args: Args) -> Result<i32, CliError> {
    match args.command {
        Sub::Verify { seed, resolution, config, out } => {
            with_config(Command::Verify, config.as_deref(), out.as_deref(), |cfg| {
                if let Some(s) = seed {
                    cfg.verify.seed = s;
                }
                if resolution.is_some() {
                    cfg.verify.resolution = resolution;
                }
            })
        }
        Sub::FlowTorus { config, out } => with_config(Command::FlowTorus, Some(&config), out.as_deref(), |_| {}),
        Sub::FlowP1 { config, out } => with_config(Command::FlowP1, Some(&config), out.as_deref(), |_| {}),
        Sub::Cone { model, class, out } => with_config(Command::Cone, None, out.as_deref(), |cfg| {
            cfg.cone = Some(ConeSection { model, class });
        }),
        Sub::Run { config, out } => {
            let cfg = cli::load_config(&config)?;
            let command = cfg.command.ok_or_else(|| CliError::Validation {
                key: "command".into(),
                message: "required by `krflow run`".into(),
            })?;
            let out = cli::resolve_out(out.as_deref(), Some(&cfg));
            cli::dispatch(command, &cfg, &out, &mut std::io::stdout().lock())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "krflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
