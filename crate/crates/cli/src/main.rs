//! `ivem`: convergence studies, mesh dumps and the structural property suite.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ivem::cut::InterfaceGeometry;
use ivem::mesh::{dump_mesh, BackgroundMesh};
use ivem::study::{run_study, seed_offset, StudyConfig};
use ivem::verify::run_structural_suite;
use ivem::IvemError;

#[derive(Parser)]
#[command(
    name = "ivem",
    version,
    about = "Immersed virtual element method for interface problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write its CSV table.
    Run {
        /// Study configuration (TOML).
        config_path: Option<PathBuf>,
        /// Study configuration (alternative to the positional argument).
        #[arg(long = "config")]
        config: Option<PathBuf>,
        /// CSV output path; defaults to the config's `output` key, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also emit (log h, log error) pairs for plotting.
        #[arg(long)]
        plot_data: bool,
        /// Shift the interface by a random offset of at most 0.3h.
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall-clock seconds instead of zeros.
        #[arg(long)]
        timing: bool,
    },
    /// Write the mesh and interface segments of one level.
    DumpMesh {
        config_path: Option<PathBuf>,
        /// Zero-based index into the config's `meshes` list.
        level: Option<usize>,
        #[arg(long = "config")]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the structural property suite and print a pass/fail table.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<IvemError> for Failure {
    fn from(e: IvemError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

fn load_config(positional: Option<PathBuf>, flag: Option<PathBuf>) -> Result<StudyConfig, Failure> {
    let path = flag
        .or(positional)
        .ok_or_else(|| Failure::Validation("a configuration file is required".into()))?;
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(StudyConfig::from_toml(&text)?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)
                    .map_err(|e| Failure::Validation(format!("{}: {e}", dir.display())))?;
            }
            fs::write(p, text).map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config_path,
            config,
            out,
            plot_data,
            seed,
            timing,
        } => {
            let config = load_config(config_path, config)?;
            let report = run_study(&config, seed)?;
            let out = out.or_else(|| config.output.as_ref().map(PathBuf::from));
            write_output(out.as_deref(), &report.to_csv(timing))?;
            if plot_data {
                match &out {
                    Some(p) => {
                        write_output(Some(&p.with_extension("plot.dat")), &report.plot_data())?
                    }
                    None => print!("\n{}", report.plot_data()),
                }
            }
            Ok(())
        }
        Command::DumpMesh {
            config_path,
            level,
            config,
            out,
            seed,
        } => {
            let config = load_config(config_path, config)?;
            let level = level.unwrap_or(0);
            let n = *config.meshes.get(level).ok_or_else(|| {
                Failure::Validation(format!(
                    "level {level} out of range (config has {})",
                    config.meshes.len()
                ))
            })?;
            let mesh = BackgroundMesh::uniform(&config.domain, n)?;
            let offset = seed.map(seed_offset).unwrap_or_default() * mesh.h;
            let interface = config.interface.to_interface().shifted(offset);
            let geometry = InterfaceGeometry::new(&mesh, &interface)?;
            write_output(out.as_deref(), &dump_mesh(&mesh, &geometry.cut_records()))
        }
        Command::Verify { seed } => {
            let report = run_structural_suite(seed)?;
            print!("{}", report.table());
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Validation("structural checks failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
    }
}
