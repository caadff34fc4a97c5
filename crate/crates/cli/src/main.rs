use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blochecho::{load_noise_model, ChannelKind, MeasureMode, DEFAULT_REPS, DEFAULT_SHOTS};
use blochecho_cli::{
    apply_coherent_override, channel_label, compare_channels, configure_workers, parse_steps,
    render_compare_csv, render_compare_json, render_run_csv, render_run_json, run_experiment,
    CliError, ExperimentConfig, OutputTarget, DEFAULT_STEPS,
};

#[derive(Parser)]
#[command(
    name = "blochecho",
    version,
    about = "Echo-channel tomography: fidelity-vs-steps curves and Bloch-ellipsoid evolution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one channel over a range of step counts.
    Run(RunArgs),
    /// Run two channels that differ only in kind and compare fidelities.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Cnot,
    Random,
    TwirlU,
    TwirlAxis,
}

impl From<ChannelArg> for ChannelKind {
    fn from(value: ChannelArg) -> Self {
        match value {
            ChannelArg::Cnot => ChannelKind::CnotEcho,
            ChannelArg::Random => ChannelKind::RandomEcho,
            ChannelArg::TwirlU => ChannelKind::TwirledU,
            ChannelArg::TwirlAxis => ChannelKind::TwirledAxis,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SharedArgs {
    /// Step counts: an inclusive range `A..B` or a comma list.
    #[arg(long, default_value = DEFAULT_STEPS)]
    steps: String,

    /// Measurement shots per experiment.
    #[arg(long, default_value_t = DEFAULT_SHOTS, conflicts_with = "exact")]
    shots: u64,

    /// Use exact expectation values instead of shot sampling.
    #[arg(long)]
    exact: bool,

    /// Experiment repetitions (fresh random sequences for random/twirled
    /// channels).
    #[arg(long, default_value_t = DEFAULT_REPS)]
    reps: usize,

    /// Random seed; identical seeds give byte-identical outputs.
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Noise config path (TOML), or `none`.
    #[arg(long, default_value = "none")]
    noise: String,

    /// Override the coherent-error rotation angle (radians).
    #[arg(long = "coherent-eps")]
    coherent_eps: Option<f64>,

    /// Override the coherent-error axis as `x,y,z` (normalized).
    #[arg(long = "coherent-axis")]
    coherent_axis: Option<String>,

    /// Output path; `-` or omitted writes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct RunArgs {
    /// Channel kind.
    #[arg(long, value_enum)]
    channel: ChannelArg,

    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// First channel (the baseline, e.g. cnot).
    #[arg(long, value_enum)]
    channel: ChannelArg,

    /// Second channel (e.g. twirl-u); differences are reported as B - A.
    #[arg(long = "channel-b", value_enum)]
    channel_b: ChannelArg,

    #[command(flatten)]
    shared: SharedArgs,
}

fn parse_axis(spec: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "coherent axis must be `x,y,z`, got `{spec}`"
        )));
    }
    let mut axis = [0.0; 3];
    for (slot, part) in axis.iter_mut().zip(parts.iter()) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad axis component `{part}`")))?;
    }
    Ok(axis)
}

fn resolve_config(channel: ChannelArg, shared: &SharedArgs) -> Result<ExperimentConfig, CliError> {
    let steps = parse_steps(&shared.steps)?;
    let mode = if shared.exact {
        MeasureMode::Exact
    } else {
        MeasureMode::Shots(shared.shots)
    };
    if shared.reps == 0 {
        return Err(CliError::Config("--reps must be at least 1".into()));
    }
    let noise = if shared.noise == "none" {
        None
    } else {
        Some(load_noise_model(&shared.noise).map_err(|e| match e {
            blochecho::NoiseError::Io(io) => CliError::Io(io),
            other => CliError::Noise(other),
        })?)
    };
    let axis = shared
        .coherent_axis
        .as_deref()
        .map(parse_axis)
        .transpose()?;
    let noise = apply_coherent_override(noise, shared.coherent_eps, axis)?;
    Ok(ExperimentConfig {
        channel: channel.into(),
        steps,
        mode,
        n_reps: shared.reps,
        seed: shared.seed,
        noise,
        noise_label: shared.noise.clone(),
    })
}

fn output_target(shared: &SharedArgs) -> OutputTarget {
    match &shared.out {
        None => OutputTarget::Stdout,
        Some(p) if p.as_os_str() == "-" => OutputTarget::Stdout,
        Some(p) => OutputTarget::File(p.clone()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_workers();
    match cli.command {
        Command::Run(args) => {
            let cfg = resolve_config(args.channel, &args.shared)?;
            let records = run_experiment(&cfg);
            let rendered = match args.shared.format {
                FormatArg::Csv => render_run_csv(&cfg, &records),
                FormatArg::Json => render_run_json(&cfg, &records),
            };
            output_target(&args.shared).write(&rendered)
        }
        Command::Compare(args) => {
            let cfg_a = resolve_config(args.channel, &args.shared)?;
            let cfg_b = resolve_config(args.channel_b, &args.shared)?;
            if channel_label(cfg_a.channel) == channel_label(cfg_b.channel) {
                eprintln!("note: comparing a channel against itself");
            }
            let records = compare_channels(&cfg_a, &cfg_b)?;
            let rendered = match args.shared.format {
                FormatArg::Csv => render_compare_csv(&cfg_a, &cfg_b, &records),
                FormatArg::Json => render_compare_json(&cfg_a, &cfg_b, &records),
            };
            output_target(&args.shared).write(&rendered)
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
