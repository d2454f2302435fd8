use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aviary::config::ConfigError;
use aviary::error::{exit, AppError};
use aviary::manifest::load_config;
use aviary::pipeline::{self, AnalyzeOptions, PlotOptions};
use aviary_core::PanMode;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aviary", version, about = "Deterministic 3D bird soundscape renderer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputDir {
    /// Output directory.
    #[arg(short, long, env = "AVIARY_OUTPUT_DIR")]
    output: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene to WAV, event logs and a manifest.
    Render {
        /// Scene config, or a manifest from a previous run.
        #[arg(short, long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutputDir,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the pan law: paper-literal or remapped.
        #[arg(long)]
        pan_mode: Option<PanMode>,
        /// Also write one normalized WAV per bird.
        #[arg(long)]
        solo_tracks: bool,
        /// Render threads; 0 uses every core. Output does not depend on it.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Spectrograms, peak tracks and channel difference of a WAV or run directory.
    Analyze {
        input: PathBuf,
        /// Where to write results (default: next to the WAV).
        #[arg(short, long, env = "AVIARY_OUTPUT_DIR")]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 2048)]
        window: usize,
        #[arg(long, default_value_t = 512)]
        hop: usize,
        /// Also write long-format spectrogram CSVs.
        #[arg(long)]
        csv: bool,
    },
    /// Emit SVG and PPM figures for a run directory.
    Plot {
        run_dir: PathBuf,
        /// Display range for channel spectrograms, e.g. `-320,-100`.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        db_range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Check a config without rendering.
    Validate {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Render, analyze and plot the bundled five-species reference scene.
    Demo {
        #[command(flatten)]
        out: OutputDir,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("empty range {lo},{hi}"))
    }
}

fn load(path: &Path) -> aviary::Result<aviary::config::ResolvedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    load_config(&text).map_err(|e| match e {
        ConfigError::Syntax { .. } | ConfigError::Schema { .. } => {
            AppError::Config(ConfigError::Invalid(format!("{}: {e}", path.display())))
        }
        other => AppError::Config(other),
    })
}

fn run(cli: Cli) -> aviary::Result<()> {
    match cli.command {
        Command::Render {
            config,
            out,
            seed,
            pan_mode,
            solo_tracks,
            jobs,
        } => {
            let mut cfg = load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
                cfg.seed_generated = false;
            }
            if let Some(mode) = pan_mode {
                cfg.scene.pan_mode = mode;
            }
            cfg.outputs.solo_tracks |= solo_tracks;
            let report = pipeline::run_render(&cfg, &out.output, jobs)?;
            println!(
                "seed {}: {} events, {} frames -> {}",
                cfg.seed,
                report.manifest.events,
                report.manifest.frames,
                out.output.join(pipeline::WAV_FILE).display()
            );
        }
        Command::Analyze {
            input,
            output,
            window,
            hop,
            csv,
        } => {
            let index = pipeline::run_analyze(&input, output.as_deref(), &AnalyzeOptions { window, hop, csv })?;
            println!(
                "{} frames x {} bins; active frames L {} R {}",
                index.frames, index.bins, index.active_frames_left, index.active_frames_right
            );
        }
        Command::Plot {
            run_dir,
            db_range,
            jobs,
        } => {
            let mut opts = PlotOptions {
                jobs,
                ..PlotOptions::default()
            };
            if let Some(r) = db_range {
                opts.spectrogram_range = r;
            }
            let plots = pipeline::run_plot(&run_dir, &opts)?;
            println!("wrote {} plots to {}", plots.len(), run_dir.display());
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!(
                "ok: {} species, {} birds, {} s at {} Hz",
                cfg.scene.species.len(),
                cfg.scene.total_birds(),
                cfg.scene.duration_s,
                cfg.scene.sample_rate
            );
        }
        Command::Demo { out, jobs } => {
            let report = pipeline::run_demo(&out.output, jobs)?;
            println!(
                "demo: {} events from {} birds, {} plots in {}",
                report.render.manifest.events,
                report.render.manifest.birds,
                report.plots.len(),
                out.output.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
