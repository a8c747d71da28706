use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toonforge::pipeline::{self, EvalInputs, PipelineConfig, RefineInputs, ScheduleParams};
use toonforge::schedmath::{DEFAULT_BETA_END, DEFAULT_BETA_START, DEFAULT_STEPS};
use toonforge::{Error, Result};

#[derive(Parser)]
#[command(name = "toonforge", version, about = "Deterministic 3D stage: extract, refine, render, evaluate")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides `seed` from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Ground truth grid, mesh, texture and views for an analytic fixture.
    Synth {
        #[arg(long, default_value = "blob_character")]
        fixture: String,
    },
    /// Mesh, UV atlas, texel cache and coarse texture from an SDF grid.
    Extract {
        #[arg(long)]
        grid: PathBuf,
    },
    /// Back-project views and blend them into the coarse texture.
    Refine {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        coarse: PathBuf,
        /// Directory holding `view_{azimuth}.png` for each configured azimuth.
        #[arg(long)]
        views: PathBuf,
        /// Texel cache from `extract`.
        #[arg(long)]
        texels: Option<PathBuf>,
    },
    /// Render a textured mesh from the orbit cameras.
    Render {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        texture: PathBuf,
        /// Azimuths in degrees; defaults to the configured ones.
        #[arg(long, value_delimiter = ',')]
        azimuths: Vec<f64>,
    },
    /// Chamfer distance between meshes and PSNR/SSIM between view sets.
    Eval {
        #[arg(long, requires = "mesh_b")]
        mesh_a: Option<PathBuf>,
        #[arg(long, requires = "mesh_a")]
        mesh_b: Option<PathBuf>,
        /// Directory of reference views.
        #[arg(long, requires = "views_b")]
        views_a: Option<PathBuf>,
        #[arg(long, requires = "views_a")]
        views_b: Option<PathBuf>,
    },
    /// Write a diffusion noise schedule as CSV.
    Schedule {
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_BETA_START)]
        beta_start: f64,
        #[arg(long, default_value_t = DEFAULT_BETA_END)]
        beta_end: f64,
        /// Keep the original schedule instead of rescaling to zero terminal SNR.
        #[arg(long)]
        no_zero_snr: bool,
    },
}

fn load_config(global: &Global) -> Result<PipelineConfig> {
    let mut config = match &global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn views_in(dir: &Path, config: &PipelineConfig) -> Vec<PathBuf> {
    pipeline::view_paths(dir, config)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Error::InvalidParameter("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    let config = load_config(&cli.global)?;
    let out = &cli.global.out;
    let manifest = match cli.command {
        Command::Synth { fixture } => pipeline::synth(&fixture, &config, out)?,
        Command::Extract { grid } => pipeline::extract(&grid, &config, out)?,
        Command::Refine {
            mesh,
            coarse,
            views,
            texels,
        } => {
            let inputs = RefineInputs {
                mesh,
                coarse_texture: coarse,
                views: views_in(&views, &config),
                texel_cache: texels,
            };
            pipeline::refine(&inputs, &config, out)?
        }
        Command::Render { mesh, texture, azimuths } => pipeline::render(&mesh, &texture, &azimuths, &config, out)?,
        Command::Eval {
            mesh_a,
            mesh_b,
            views_a,
            views_b,
        } => {
            let inputs = EvalInputs {
                mesh_a,
                mesh_b,
                views_a: views_a.map(|d| views_in(&d, &config)).unwrap_or_default(),
                views_b: views_b.map(|d| views_in(&d, &config)).unwrap_or_default(),
            };
            let (report, manifest) = pipeline::eval(&inputs, &config, out)?;
            print!("{}", report.to_csv());
            manifest
        }
        Command::Schedule {
            steps,
            beta_start,
            beta_end,
            no_zero_snr,
        } => {
            let params = ScheduleParams {
                steps,
                beta_start,
                beta_end,
                zero_terminal_snr: !no_zero_snr,
            };
            pipeline::schedule(&params, &config, out)?
        }
    };
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
