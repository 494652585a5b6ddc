//! `patchnav`: build multi-level maps from point clouds, plan and optimize
//! trajectories on them, and benchmark the planner.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Config, SceneKind};

/// Exit statuses besides 0 (success) and 1 (I/O or other failure).
pub mod exit {
    pub const CONFIG: u8 = 2;
    pub const EMPTY_MAP: u8 = 3;
    pub const SNAP: u8 = 4;
    pub const INFEASIBLE: u8 = 5;
}

/// An error carrying the process exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

impl From<std::io::Error> for Failure {
    fn from(error: std::io::Error) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "patchnav",
    version,
    about = "Global trajectory planning on multi-level terrain"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. `--set opt.w_s=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic scene point cloud.
    GenScene {
        /// Output cloud; the format follows the extension (.xyz, .ply, .pcd).
        #[arg(long, short)]
        out: PathBuf,
        /// Scene to generate; overrides `scene.kind`.
        #[arg(long)]
        scene: Option<SceneKind>,
        /// Overrides `scene.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the noiseless cloud here, for map accuracy.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Build a multi-level map from a point cloud.
    BuildMap {
        /// Input cloud (.xyz, .ply, .pcd).
        #[arg(long)]
        cloud: PathBuf,
        /// Map JSON output.
        #[arg(long, short)]
        out: PathBuf,
        /// Wavefront OBJ output; defaults to the JSON path with `.obj`.
        #[arg(long)]
        obj: Option<PathBuf>,
        /// Ground-truth cloud; enables the accuracy report.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Accuracy report JSON; defaults to the JSON path with `.accuracy.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Search and optimize a trajectory between two poses.
    Plan {
        /// Map JSON written by `build-map`.
        #[arg(long)]
        map: PathBuf,
        /// Start as `x,y,z[,yaw]`; `z` picks the level.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        /// Goal as `x,y,z`.
        #[arg(long, allow_hyphen_values = true)]
        goal: String,
        /// Output directory, created if missing.
        #[arg(long, short)]
        out_dir: PathBuf,
    },
    /// Run both optimization stages on an existing trajectory CSV.
    Optimize {
        /// Map JSON written by `build-map`.
        #[arg(long)]
        map: PathBuf,
        /// Trajectory CSV with `x,y,z` columns.
        #[arg(long)]
        traj: PathBuf,
        /// Output directory, created if missing.
        #[arg(long, short)]
        out_dir: PathBuf,
    },
    /// Report map accuracy and/or trajectory metrics as JSON.
    Eval {
        /// Map JSON written by `build-map`.
        #[arg(long)]
        map: PathBuf,
        /// Trajectory CSV to measure.
        #[arg(long)]
        traj: Option<PathBuf>,
        /// Ground-truth cloud for map accuracy.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Plan between seeded random start/goal pairs and summarize.
    Bench {
        /// Map JSON written by `build-map`.
        #[arg(long)]
        map: PathBuf,
        /// Overrides `bench.pairs`.
        #[arg(long)]
        pairs: Option<usize>,
        /// Overrides `bench.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, created if missing.
        #[arg(long, short)]
        out_dir: PathBuf,
    },
    /// Convert a map to OBJ, or a trajectory CSV to JSON.
    Export {
        /// Map JSON written by `build-map`.
        #[arg(long)]
        map: PathBuf,
        /// Wavefront OBJ output for the map.
        #[arg(long)]
        obj: Option<PathBuf>,
        /// Trajectory CSV to convert.
        #[arg(long)]
        traj: Option<PathBuf>,
        /// JSON output for `--traj`.
        #[arg(long)]
        traj_json: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    DumpConfig,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut overrides = cli.common.set.clone();
    match &cli.command {
        Command::GenScene { scene, seed, .. } => {
            if let Some(k) = scene {
                overrides.push(format!(
                    "scene.kind=\"{}\"",
                    clap::ValueEnum::to_possible_value(k).unwrap().get_name()
                ));
            }
            if let Some(s) = seed {
                overrides.push(format!("scene.seed={s}"));
            }
        }
        Command::Bench { pairs, seed, .. } => {
            if let Some(n) = pairs {
                overrides.push(format!("bench.pairs={n}"));
            }
            if let Some(s) = seed {
                overrides.push(format!("bench.seed={s}"));
            }
        }
        _ => {}
    }
    let config = Config::load(cli.common.config.as_deref(), &overrides)
        .map_err(|e| Failure::new(exit::CONFIG, e))?;
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(Failure::new(
                exit::CONFIG,
                anyhow::anyhow!("--threads must be at least 1"),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(anyhow::Error::from)?;
    }

    match cli.command {
        Command::GenScene { out, truth, .. } => {
            commands::gen_scene(&config, &out, truth.as_deref())
        }
        Command::BuildMap {
            cloud,
            out,
            obj,
            truth,
            report,
        } => commands::build_map(
            &config,
            &cloud,
            &out,
            obj.as_deref(),
            truth.as_deref(),
            report.as_deref(),
        ),
        Command::Plan {
            map,
            start,
            goal,
            out_dir,
        } => commands::plan(&config, &map, &start, &goal, &out_dir),
        Command::Optimize { map, traj, out_dir } => {
            commands::optimize(&config, &map, &traj, &out_dir)
        }
        Command::Eval {
            map,
            traj,
            truth,
            out,
        } => commands::eval(
            &config,
            &map,
            traj.as_deref(),
            truth.as_deref(),
            out.as_deref(),
        ),
        Command::Bench { map, out_dir, .. } => commands::bench(&config, &map, &out_dir),
        Command::Export {
            map,
            obj,
            traj,
            traj_json,
        } => commands::export(&map, obj.as_deref(), traj.as_deref(), traj_json.as_deref()),
        Command::DumpConfig => {
            print!("{}", config.to_toml()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
