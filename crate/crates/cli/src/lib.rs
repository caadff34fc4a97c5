//! Experiment driver behind the `blochecho` binary: builds echo channels,
//! runs tomography per step count, and writes plot-ready CSV or JSON.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use blochecho::{
    build_cnot_echo, build_random_echo, build_twirled_cnot_echo, ellipsoid_report, run_tomography,
    run_tomography_with, ChannelKind, CoherentAttach, CoherentError, MeasureMode, NoiseError,
    NoiseModel, RngStream, TomographyResult, TwirlMode,
};

pub const DEFAULT_STEPS: &str = "0..20";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unparsable experiment configuration (exit 2).
    Config(String),
    /// Noise-model parse or validation failure (exit 3).
    Noise(NoiseError),
    /// Filesystem failure (exit 4).
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Noise(e) => write!(f, "noise model: {e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Noise(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Parse a steps specification: an inclusive range `A..B` or a comma list.
/// The result must be nonempty and strictly increasing.
pub fn parse_steps(spec: &str) -> Result<Vec<usize>, CliError> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("bad step value `{s}`")))
    };
    let steps: Vec<usize> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo = parse_one(lo)?;
        let hi = parse_one(hi)?;
        if hi < lo {
            return Err(CliError::Config(format!("empty step range `{spec}`")));
        }
        (lo..=hi).collect()
    } else {
        spec.split(',').map(parse_one).collect::<Result<_, _>>()?
    };
    if steps.is_empty() {
        return Err(CliError::Config("steps list is empty".into()));
    }
    if steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!(
            "steps must be strictly increasing, got {steps:?}"
        )));
    }
    Ok(steps)
}

/// Fully-resolved experiment configuration for one channel.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub channel: ChannelKind,
    pub steps: Vec<usize>,
    pub mode: MeasureMode,
    pub n_reps: usize,
    pub seed: u64,
    pub noise: Option<NoiseModel>,
    /// Label recorded in output headers ("none" or the config path).
    pub noise_label: String,
}

impl ExperimentConfig {
    pub fn channel_label(&self) -> &'static str {
        channel_label(self.channel)
    }

    fn summary(&self) -> ConfigSummary {
        ConfigSummary {
            channel: self.channel_label().to_string(),
            steps: self.steps.clone(),
            shots: match self.mode {
                MeasureMode::Exact => None,
                MeasureMode::Shots(n) => Some(n),
            },
            reps: self.n_reps,
            seed: self.seed,
            noise: self.noise_label.clone(),
            coherent_epsilon: self.noise.as_ref().and_then(|nm| nm.coherent_error.map(|ce| ce.epsilon)),
        }
    }
}

pub fn channel_label(kind: ChannelKind) -> &'static str {
    match kind {
        ChannelKind::CnotEcho => "cnot",
        ChannelKind::RandomEcho => "random",
        ChannelKind::TwirledU => "twirl-u",
        ChannelKind::TwirledAxis => "twirl-axis",
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConfigSummary {
    channel: String,
    steps: Vec<usize>,
    shots: Option<u64>,
    reps: usize,
    seed: u64,
    noise: String,
    coherent_epsilon: Option<f64>,
}

/// Short hash of the resolved configuration, stamped into output headers
/// for reproducibility audits.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_string(&cfg.summary()).expect("summary serializes");
    let digest = Sha256::digest(json.as_bytes());
    let mut out = String::new();
    for byte in digest.iter().take(8) {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Override or inject the coherent error on top of an optional base model.
pub fn apply_coherent_override(
    noise: Option<NoiseModel>,
    epsilon: Option<f64>,
    axis: Option<[f64; 3]>,
) -> Result<Option<NoiseModel>, CliError> {
    if epsilon.is_none() && axis.is_none() {
        return Ok(noise);
    }
    let mut model = noise.unwrap_or_else(NoiseModel::noiseless);
    let current = model.coherent_error.unwrap_or(CoherentError {
        epsilon: 0.0,
        axis: [1.0, 0.0, 0.0],
        attach: CoherentAttach::AfterCnotBoth,
    });
    let mut axis = axis.unwrap_or(current.axis);
    let norm = (axis[0].powi(2) + axis[1].powi(2) + axis[2].powi(2)).sqrt();
    if norm < 1e-12 {
        return Err(CliError::Config("coherent axis must be nonzero".into()));
    }
    for x in axis.iter_mut() {
        *x /= norm;
    }
    model.coherent_error = Some(CoherentError {
        epsilon: epsilon.unwrap_or(current.epsilon),
        axis,
        attach: current.attach,
    });
    model.validate().map_err(CliError::Noise)?;
    Ok(Some(model))
}

/// One output record per step count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub n_steps: usize,
    pub fidelity: [f64; 4],
    pub fidelity_mean: f64,
    pub m: [[f64; 3]; 3],
    pub c: [f64; 3],
    pub semi_axes: [f64; 3],
    pub tilt_deg: f64,
    pub degenerate_major: bool,
    pub fidelity_std_err: [f64; 4],
    pub m_std_err: [[f64; 3]; 3],
    pub c_std_err: [f64; 3],
}

fn record_from(steps: usize, result: &TomographyResult) -> StepRecord {
    let rep = ellipsoid_report(&result.map);
    StepRecord {
        n_steps: steps,
        fidelity: result.fidelities,
        fidelity_mean: result.mean_fidelity(),
        m: result.map.m,
        c: result.map.c,
        semi_axes: rep.semi_axes,
        tilt_deg: rep.tilt_deg,
        degenerate_major: rep.degenerate_major,
        fidelity_std_err: result.fidelity_std_err,
        m_std_err: result.map_std_err.m,
        c_std_err: result.map_std_err.c,
    }
}

/// Tomography of one channel at one step count; the random lane is keyed
/// by the step value so the records are independent of list order.
pub fn tomography_for_step(cfg: &ExperimentConfig, steps: usize) -> TomographyResult {
    let rng = RngStream::new(cfg.seed).child(steps as u64);
    let noise = cfg.noise.as_ref();
    let times = noise.map(|nm| nm.gate_times()).unwrap_or_default();
    match cfg.channel {
        ChannelKind::CnotEcho => {
            let circuit = build_cnot_echo(steps, times);
            run_tomography(&circuit, noise, cfg.mode, cfg.n_reps, &rng)
        }
        ChannelKind::RandomEcho => run_tomography_with(
            |_, r| build_random_echo(steps, r, times),
            noise,
            cfg.mode,
            cfg.n_reps,
            &rng,
        ),
        ChannelKind::TwirledU => run_tomography_with(
            |_, r| build_twirled_cnot_echo(steps, TwirlMode::GeneralUnitary, r, times),
            noise,
            cfg.mode,
            cfg.n_reps,
            &rng,
        ),
        ChannelKind::TwirledAxis => run_tomography_with(
            |_, r| build_twirled_cnot_echo(steps, TwirlMode::SingleAxis, r, times),
            noise,
            cfg.mode,
            cfg.n_reps,
            &rng,
        ),
    }
}

/// Run the experiment over all step counts (steps fan out to the worker
/// pool; records come back in order).
pub fn run_experiment(cfg: &ExperimentConfig) -> Vec<StepRecord> {
    cfg.steps
        .par_iter()
        .map(|&steps| record_from(steps, &tomography_for_step(cfg, steps)))
        .collect()
}

/// Per-step comparison of two configs differing in channel kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareRecord {
    pub n_steps: usize,
    pub fidelity_mean_a: f64,
    pub fidelity_mean_b: f64,
    /// `b - a`: positive when channel B outperforms channel A.
    pub fidelity_mean_diff: f64,
    pub spread_a: f64,
    pub spread_b: f64,
}

pub fn compare_channels(
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
) -> Result<Vec<CompareRecord>, CliError> {
    if cfg_a.steps != cfg_b.steps {
        return Err(CliError::Config(
            "compared configs must share the same steps list".into(),
        ));
    }
    let records: Vec<CompareRecord> = cfg_a
        .steps
        .par_iter()
        .map(|&steps| {
            let a = tomography_for_step(cfg_a, steps);
            let b = tomography_for_step(cfg_b, steps);
            CompareRecord {
                n_steps: steps,
                fidelity_mean_a: a.mean_fidelity(),
                fidelity_mean_b: b.mean_fidelity(),
                fidelity_mean_diff: b.mean_fidelity() - a.mean_fidelity(),
                spread_a: a.fidelity_spread(),
                spread_b: b.fidelity_spread(),
            }
        })
        .collect();
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Output sink: a file (written atomically via a sibling temp file) or
/// standard output.
pub enum OutputTarget {
    Stdout,
    File(PathBuf),
}

impl OutputTarget {
    pub fn write(&self, content: &str) -> Result<(), CliError> {
        match self {
            OutputTarget::Stdout => {
                std::io::stdout().write_all(content.as_bytes())?;
                Ok(())
            }
            OutputTarget::File(path) => write_atomic(path, content),
        }
    }
}

fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp-{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
            std::process::id()
        )),
        None => PathBuf::from(format!(".{}.tmp-{}", path.display(), std::process::id())),
    };
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::Io(e)
    })
}

const RUN_COLUMNS: &str = "n_steps,f_zero,f_one,f_x,f_y,f_mean,\
m_xx,m_xy,m_xz,m_yx,m_yy,m_yz,m_zx,m_zy,m_zz,\
c_x,c_y,c_z,axis_major,axis_mid,axis_minor,tilt_deg,degenerate_major,\
unc_f_zero,unc_f_one,unc_f_x,unc_f_y,\
unc_m_xx,unc_m_xy,unc_m_xz,unc_m_yx,unc_m_yy,unc_m_yz,unc_m_zx,unc_m_zy,unc_m_zz,\
unc_c_x,unc_c_y,unc_c_z";

fn csv_header(command: &str, cfg: &ExperimentConfig) -> String {
    let shots = match cfg.mode {
        MeasureMode::Exact => "exact".to_string(),
        MeasureMode::Shots(n) => n.to_string(),
    };
    format!(
        "# blochecho {command} v{}\n# channel={} steps={:?} shots={} reps={} seed={} noise={}\n# config_hash={}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.channel_label(),
        cfg.steps,
        shots,
        cfg.n_reps,
        cfg.seed,
        cfg.noise_label,
        config_hash(cfg),
    )
}

pub fn render_run_csv(cfg: &ExperimentConfig, records: &[StepRecord]) -> String {
    let mut out = csv_header("run", cfg);
    out.push_str(RUN_COLUMNS);
    out.push('\n');
    for r in records {
        let mut fields: Vec<String> = vec![r.n_steps.to_string()];
        for f in r.fidelity {
            fields.push(f.to_string());
        }
        fields.push(r.fidelity_mean.to_string());
        for row in r.m {
            for v in row {
                fields.push(v.to_string());
            }
        }
        for v in r.c {
            fields.push(v.to_string());
        }
        for v in r.semi_axes {
            fields.push(v.to_string());
        }
        fields.push(r.tilt_deg.to_string());
        fields.push(r.degenerate_major.to_string());
        for v in r.fidelity_std_err {
            fields.push(v.to_string());
        }
        for row in r.m_std_err {
            for v in row {
                fields.push(v.to_string());
            }
        }
        for v in r.c_std_err {
            fields.push(v.to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn render_run_json(cfg: &ExperimentConfig, records: &[StepRecord]) -> String {
    #[derive(Serialize)]
    struct Document<'a> {
        tool: &'a str,
        command: &'a str,
        version: &'a str,
        config: ConfigSummary,
        config_hash: String,
        records: &'a [StepRecord],
    }
    let doc = Document {
        tool: "blochecho",
        command: "run",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.summary(),
        config_hash: config_hash(cfg),
        records,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("records serialize");
    text.push('\n');
    text
}

pub fn render_compare_csv(
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
    records: &[CompareRecord],
) -> String {
    let mut out = csv_header("compare", cfg_a);
    out.push_str(&format!(
        "# channel_a={} channel_b={}\n",
        cfg_a.channel_label(),
        cfg_b.channel_label()
    ));
    out.push_str("n_steps,f_mean_a,f_mean_b,f_mean_diff,spread_a,spread_b\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n_steps,
            r.fidelity_mean_a,
            r.fidelity_mean_b,
            r.fidelity_mean_diff,
            r.spread_a,
            r.spread_b
        ));
    }
    out
}

pub fn render_compare_json(
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
    records: &[CompareRecord],
) -> String {
    #[derive(Serialize)]
    struct Document<'a> {
        tool: &'a str,
        command: &'a str,
        version: &'a str,
        config_a: ConfigSummary,
        config_b: ConfigSummary,
        records: &'a [CompareRecord],
    }
    let doc = Document {
        tool: "blochecho",
        command: "compare",
        version: env!("CARGO_PKG_VERSION"),
        config_a: cfg_a.summary(),
        config_b: cfg_b.summary(),
        records,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("records serialize");
    text.push('\n');
    text
}

/// Configure the global worker pool from the `BLOCHECHO_WORKERS`
/// environment variable, when set.
pub fn configure_workers() {
    if let Ok(value) = std::env::var("BLOCHECHO_WORKERS") {
        if let Ok(n) = value.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_range_and_list_parsing() {
        assert_eq!(parse_steps("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_steps("1,4,9").unwrap(), vec![1, 4, 9]);
        assert!(parse_steps("5..2").is_err());
        assert!(parse_steps("3,3").is_err());
        assert!(parse_steps("a..b").is_err());
        assert!(parse_steps("").is_err());
    }

    #[test]
    fn coherent_override_normalizes_axis() {
        let model = apply_coherent_override(None, Some(0.1), Some([1.0, 0.0, 1.0]))
            .unwrap()
            .unwrap();
        let ce = model.coherent_error.unwrap();
        let norm = (ce.axis[0].powi(2) + ce.axis[1].powi(2) + ce.axis[2].powi(2)).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((ce.epsilon - 0.1).abs() < 1e-15);
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let cfg = ExperimentConfig {
            channel: ChannelKind::CnotEcho,
            steps: vec![0, 1, 2],
            mode: MeasureMode::Exact,
            n_reps: 1,
            seed: 7,
            noise: None,
            noise_label: "none".into(),
        };
        let h1 = config_hash(&cfg);
        let h2 = config_hash(&cfg);
        assert_eq!(h1, h2);
        let mut cfg2 = cfg.clone();
        cfg2.seed = 8;
        assert_ne!(h1, config_hash(&cfg2));
    }

    #[test]
    fn run_records_noiseless_identity() {
        let cfg = ExperimentConfig {
            channel: ChannelKind::CnotEcho,
            steps: vec![0, 2, 4],
            mode: MeasureMode::Exact,
            n_reps: 1,
            seed: 1,
            noise: None,
            noise_label: "none".into(),
        };
        let records = run_experiment(&cfg);
        assert_eq!(records.len(), 3);
        for r in &records {
            for f in r.fidelity {
                assert!((f - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn compare_identical_configs_is_zero() {
        let cfg = ExperimentConfig {
            channel: ChannelKind::CnotEcho,
            steps: vec![0, 1, 2],
            mode: MeasureMode::Exact,
            n_reps: 1,
            seed: 1,
            noise: None,
            noise_label: "none".into(),
        };
        let records = compare_channels(&cfg, &cfg).unwrap();
        for r in records {
            assert_eq!(r.fidelity_mean_diff, 0.0);
            assert_eq!(r.spread_a, r.spread_b);
        }
    }

    #[test]
    fn compare_json_renders_and_parses() {
        let cfg_a = ExperimentConfig {
            channel: ChannelKind::CnotEcho,
            steps: vec![0, 1],
            mode: MeasureMode::Exact,
            n_reps: 1,
            seed: 4,
            noise: None,
            noise_label: "none".into(),
        };
        let mut cfg_b = cfg_a.clone();
        cfg_b.channel = ChannelKind::TwirledAxis;
        let records = compare_channels(&cfg_a, &cfg_b).unwrap();
        let json = render_compare_json(&cfg_a, &cfg_b, &records);
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["command"], "compare");
        assert_eq!(doc["config_b"]["channel"], "twirl-axis");
        assert_eq!(doc["records"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn csv_round_trips_numbers_exactly() {
        let cfg = ExperimentConfig {
            channel: ChannelKind::CnotEcho,
            steps: vec![1],
            mode: MeasureMode::Shots(128),
            n_reps: 3,
            seed: 17,
            noise: None,
            noise_label: "none".into(),
        };
        let records = run_experiment(&cfg);
        let csv = render_run_csv(&cfg, &records);
        let data_line = csv
            .lines()
            .find(|l| !l.starts_with('#') && !l.starts_with("n_steps"))
            .unwrap();
        let fields: Vec<&str> = data_line.split(',').collect();
        // f_zero is field 1; Display output parses back bit-exactly.
        let parsed: f64 = fields[1].parse().unwrap();
        assert_eq!(parsed, records[0].fidelity[0]);
        let parsed_m: f64 = fields[6].parse().unwrap();
        assert_eq!(parsed_m, records[0].m[0][0]);
    }
}
