//! `hrvband` — band-localized HRV analysis from the command line.
//!
//! Precedence for every setting: built-in default, then `--config`
//! file, then the explicit flag.

use clap::{Args, Parser, Subcommand};
use hrvband::config::InputFormat;
use hrvband::pipeline;
use hrvband::rr::ArtifactPolicy;
use hrvband::wavelet::WaveletFamily;
use hrvband::{Error, Result, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hrvband",
    about = "Wavelet band analysis and variance segmentation of RR-interval recordings",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ConfigFlags {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input file (peak times, intervals, or uniform CSV).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format: peak-times, intervals, or uniform.
    #[arg(long)]
    format: Option<String>,
    /// Wavelet family: gabor or daubechies.
    #[arg(long)]
    family: Option<String>,
    /// Daubechies vanishing moments (2..=10).
    #[arg(long)]
    daubechies_order: Option<usize>,
    /// Resampling step in seconds.
    #[arg(long)]
    delta: Option<f64>,
    /// Coefficient grid step in seconds.
    #[arg(long)]
    b_step: Option<f64>,
    /// Gabor pseudo-support half width.
    #[arg(long)]
    gabor_half_width: Option<f64>,
    /// Maximum number of segments considered.
    #[arg(long)]
    k_max: Option<usize>,
    /// Minimum samples per segment.
    #[arg(long)]
    min_segment_length: Option<usize>,
    /// Stability threshold as a fraction of the K = 1 penalty.
    #[arg(long)]
    stability_fraction: Option<f64>,
    /// Artifact policy: hold-previous, linear, or reject.
    #[arg(long)]
    artifact_policy: Option<String>,
    /// Clock time of the first sample, HH:MM:SS.
    #[arg(long)]
    recording_start: Option<String>,
    /// Also emit edge-affected coefficient positions.
    #[arg(long)]
    include_edges: bool,
    /// Output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Generator seed (synth).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: ingest, transform per band, segment, report.
    Analyze(ConfigFlags),
    /// Generate a synthetic locally stationary signal from a spec file.
    Synth {
        /// Signal spec (TOML).
        spec: PathBuf,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Project analyze outputs into gnuplot-ready .dat files.
    Plotdata(ConfigFlags),
    /// Run a quick internal consistency battery.
    Selftest,
}

fn parse_enum<T>(value: &str, what: &str, table: &[(&str, T)]) -> Result<T>
where
    T: Copy,
{
    table
        .iter()
        .find(|(k, _)| *k == value)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = table.iter().map(|(k, _)| *k).collect();
            Error::config(format!("bad {what} {value:?}; expected one of {names:?}"))
        })
}

fn build_config(flags: &ConfigFlags) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_toml_str(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = &flags.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = &flags.format {
        cfg.format = parse_enum(
            v,
            "format",
            &[
                ("peak-times", InputFormat::PeakTimes),
                ("intervals", InputFormat::Intervals),
                ("uniform", InputFormat::Uniform),
            ],
        )?;
    }
    if let Some(v) = &flags.family {
        cfg.family = parse_enum(
            v,
            "family",
            &[
                ("gabor", WaveletFamily::Gabor),
                ("daubechies", WaveletFamily::Daubechies),
            ],
        )?;
    }
    if let Some(v) = flags.daubechies_order {
        cfg.daubechies_order = v;
    }
    if let Some(v) = flags.delta {
        cfg.delta = v;
    }
    if let Some(v) = flags.b_step {
        cfg.b_step = v;
    }
    if let Some(v) = flags.gabor_half_width {
        cfg.gabor_half_width = v;
    }
    if let Some(v) = flags.k_max {
        cfg.k_max = v;
    }
    if let Some(v) = flags.min_segment_length {
        cfg.min_segment_length = v;
    }
    if let Some(v) = flags.stability_fraction {
        cfg.stability_fraction = v;
    }
    if let Some(v) = &flags.artifact_policy {
        cfg.artifact_policy = parse_enum(
            v,
            "artifact policy",
            &[
                ("hold-previous", ArtifactPolicy::HoldPrevious),
                ("linear", ArtifactPolicy::Linear),
                ("reject", ArtifactPolicy::Reject),
            ],
        )?;
    }
    if let Some(v) = &flags.recording_start {
        cfg.recording_start = Some(v.clone());
    }
    if flags.include_edges {
        cfg.include_edges = true;
    }
    if let Some(v) = &flags.output_dir {
        cfg.output_dir = Some(v.clone());
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(flags) => {
            let cfg = build_config(&flags)?;
            let report = pipeline::run_analyze(&cfg)?;
            for br in &report.bands {
                println!(
                    "{}: K = {}, change points {:?}",
                    br.band.name, br.segmentation.k, br.segmentation.change_points
                );
            }
            Ok(())
        }
        Command::Synth { spec, flags } => {
            let cfg = build_config(&flags)?;
            pipeline::run_synth(&cfg, &spec)
        }
        Command::Plotdata(flags) => {
            let cfg = build_config(&flags)?;
            pipeline::run_plotdata(&cfg)
        }
        Command::Selftest => {
            let report = pipeline::run_selftest()?;
            print!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
