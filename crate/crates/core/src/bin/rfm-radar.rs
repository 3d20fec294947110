use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use rfm_radar::config::{ConfigError, RunConfig};
use rfm_radar::dataset::{Dataset, DatasetError, Split};
use rfm_radar::drfm::{DrfmDetector, DrfmError, Threshold, ThresholdSource};
use rfm_radar::flow::{load_checkpoint_expecting, save_checkpoint, train_matrix, Checkpoint, CheckpointError, CheckpointHeader, FlowError};
use rfm_radar::harness::{
    bench, build_handles, calibrate_all, doppler_maps, export_results, h0_trials_from_dataset, parse_detector_list, pd_sweep_many, read_thresholds, BenchConfig, DetectorHandle, DetectorKind, EvalConfig, HarnessError, Results, ThresholdRow,
};
use rfm_radar::scenario::{ClutterKind, Scenario, ScenarioError};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_MISSING: u8 = 4;
const EXIT_DIMENSION: u8 = 5;
const EXIT_NOT_CONVERGED: u8 = 6;

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  internal error
  2  invalid configuration or arguments
  3  I/O failure or corrupt input file
  4  missing inputs (dataset, checkpoint or calibration)
  5  dimension or architecture mismatch
  6  Tyler fixed-point iteration did not converge";

/// Radar detection by rectified flow matching, with the classical CFAR
/// detector suite and a Monte Carlo evaluation harness.
#[derive(Parser)]
#[command(name = "rfm-radar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the train/validation/test splits and the secondary data (RFD1).
    Generate(Opts),
    /// Train the velocity field and write an RFN1 checkpoint.
    Train(Opts),
    /// Calibrate every detector on the validation split; embeds the D-RFM threshold in the checkpoint and writes thresholds.csv.
    Calibrate(Opts),
    /// Pd-vs-SNR curves for the calibrated detectors (pd_curve.csv).
    Evaluate(Opts),
    /// Pd over Doppler bins and SNR (doppler_map.csv).
    Doppler(Opts),
    /// Per-sample detection timing on one thread (bench.csv).
    Bench(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Gaussian,
    Compound,
}

#[derive(Args, Clone)]
struct Opts {
    /// JSON run configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for data generation and training.
    #[arg(long)]
    seed: Option<u64>,
    /// Clutter family.
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    #[arg(long, allow_hyphen_values = true)]
    snr_min: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    snr_max: Option<i32>,
    /// Monte Carlo trials per SNR point.
    #[arg(long)]
    trials: Option<usize>,
    /// Euler steps for the inverse flow map.
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated subset, e.g. MF,ANMF-FP,D-RFM.
    #[arg(long)]
    detectors: Option<String>,
    /// Output directory root.
    #[arg(long, env = "RFM_RADAR_OUT")]
    out: Option<PathBuf>,
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Worker threads (bench always uses one).
    #[arg(long)]
    threads: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

type CliResult<T> = Result<T, Failure>;

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_CONFIG, e.to_string())
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::new(EXIT_CONFIG, e.to_string())
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

impl From<CheckpointError> for Failure {
    fn from(e: CheckpointError) -> Self {
        let code = match e {
            CheckpointError::ArchitectureMismatch { .. } => EXIT_DIMENSION,
            _ => EXIT_IO,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        let code = match e {
            FlowError::Shape(_) => EXIT_DIMENSION,
            FlowError::Config(_) | FlowError::Architecture(_) => EXIT_CONFIG,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<DrfmError> for Failure {
    fn from(e: DrfmError) -> Self {
        match e {
            DrfmError::Flow(f) => f.into(),
            other => Failure::new(1, other.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let code = if e.is_not_converged() {
            EXIT_NOT_CONVERGED
        } else {
            match &e {
                HarnessError::Io { .. } | HarnessError::Csv(_) | HarnessError::Parse(_) => EXIT_IO,
                HarnessError::Uncalibrated(_) | HarnessError::MissingModel => EXIT_MISSING,
                HarnessError::Invalid(_) => EXIT_CONFIG,
                HarnessError::Drfm(DrfmError::Flow(FlowError::Shape(_))) => EXIT_DIMENSION,
                _ => 1,
            }
        };
        Failure::new(code, e.to_string())
    }
}

fn require(path: &Path, what: &str, hint: &str) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_MISSING, format!("missing {what} {}; {hint}", path.display())))
    }
}

fn split_path(cfg: &RunConfig, split: Split) -> PathBuf {
    cfg.data_dir().join(format!("{}.rfd", split.name()))
}

fn load_config(o: &Opts) -> CliResult<RunConfig> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = o.seed {
        cfg.scenario.seed = s;
        cfg.train.seed = s;
    }
    match o.scenario {
        Some(ScenarioArg::Gaussian) => cfg.scenario.clutter = ClutterKind::GaussianHomogeneous,
        Some(ScenarioArg::Compound) if !matches!(cfg.scenario.clutter, ClutterKind::CompoundGaussian { .. }) => {
            cfg.scenario.clutter = ClutterKind::CompoundGaussian { mu: 1.0 }
        }
        _ => {}
    }
    if let Some(v) = o.snr_min {
        cfg.evaluation.snr_min_db = v;
    }
    if let Some(v) = o.snr_max {
        cfg.evaluation.snr_max_db = v;
    }
    if let Some(v) = o.trials {
        cfg.evaluation.trials = v;
    }
    if let Some(v) = o.steps {
        cfg.integration.steps = v;
    }
    if let Some(v) = o.epochs {
        cfg.train.epochs = v;
    }
    if let Some(v) = &o.out {
        cfg.paths.out_dir = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn detectors(o: &Opts) -> CliResult<Vec<DetectorKind>> {
    match &o.detectors {
        Some(s) => parse_detector_list(s).map_err(Failure::from),
        None => Ok(DetectorKind::ALL.to_vec()),
    }
}

fn eval_config(cfg: &RunConfig, scenario: &Scenario) -> EvalConfig {
    EvalConfig { secondary_mode: cfg.evaluation.secondary_mode, secondary_size: cfg.secondary_size(), ..EvalConfig::for_scenario(scenario) }
}

fn load_dataset(cfg: &RunConfig, split: Split) -> CliResult<Dataset> {
    let path = split_path(cfg, split);
    require(&path, &format!("{} split", split.name()), "run `rfm-radar generate` first")?;
    let data = Dataset::load(&path)?;
    if data.dim() != cfg.scenario.embedded_dim() {
        return Err(Failure::new(
            EXIT_DIMENSION,
            format!("{} has {} columns but the configuration expects {}", path.display(), data.dim(), cfg.scenario.embedded_dim()),
        ));
    }
    if data.config_snapshot != cfg.scenario {
        return Err(Failure::new(EXIT_CONFIG, format!("{} was generated under a different scenario; rerun `rfm-radar generate`", path.display())));
    }
    Ok(data)
}

fn load_model(cfg: &RunConfig) -> CliResult<Checkpoint> {
    let path = cfg.checkpoint_path();
    require(&path, "checkpoint", "run `rfm-radar train` first")?;
    Ok(load_checkpoint_expecting(&path, &cfg.arch)?)
}

fn cmd_generate(cfg: &RunConfig) -> CliResult<()> {
    let scenario = Scenario::new(cfg.scenario.clone())?;
    let plan = [
        (Split::Train, cfg.splits.train),
        (Split::Validation, cfg.splits.validation),
        (Split::Test, cfg.splits.test),
        (Split::Secondary, cfg.secondary_size()),
    ];
    for (split, rows) in plan {
        let data = scenario.generate_split(split, rows)?;
        let path = split_path(cfg, split);
        data.save(&path)?;
        println!("{:<10} {:>6} rows  {}", split.name(), rows, path.display());
    }
    Ok(())
}

fn cmd_train(cfg: &RunConfig) -> CliResult<()> {
    let data = load_dataset(cfg, Split::Train)?;
    let epochs = cfg.train.epochs;
    let (params, report) = train_matrix(data.x.view(), &cfg.arch, &cfg.train, |e, loss| {
        if e == 0 || (e + 1) % 10 == 0 || e + 1 == epochs {
            eprintln!("epoch {:>4}/{epochs}  loss {loss:.6}", e + 1);
        }
    })?;
    let header = CheckpointHeader::new(&cfg.arch, &cfg.train, &report, Some(cfg.scenario.clone()));
    let path = cfg.checkpoint_path();
    save_checkpoint(&Checkpoint { header, params }, &path)?;
    println!("final epoch loss {}", report.epoch_losses.last().copied().unwrap_or(f64::NAN));
    println!("checkpoint {} ({:.1} s)", path.display(), report.wall_time_secs);
    Ok(())
}

fn drfm_detector(cfg: &RunConfig, ck: &Checkpoint) -> Arc<DrfmDetector> {
    Arc::new(DrfmDetector::new(ck.params.clone(), cfg.integration))
}

fn cmd_calibrate(cfg: &RunConfig, kinds: &[DetectorKind]) -> CliResult<()> {
    let scenario = Scenario::new(cfg.scenario.clone())?;
    let eval = eval_config(cfg, &scenario);
    let validation = load_dataset(cfg, Split::Validation)?;
    let mut ck = if kinds.contains(&DetectorKind::Drfm) { Some(load_model(cfg)?) } else { None };
    let model = ck.as_ref().map(|c| drfm_detector(cfg, c));
    let d = cfg.evaluation.doppler_bin;
    let mut handles = build_handles(kinds, &scenario, model, d, eval.tyler)?;
    let needs_secondary = kinds.iter().any(|k| k.needs_secondary());
    let h0 = h0_trials_from_dataset(&validation, &scenario, needs_secondary, &eval)?;
    let thresholds = calibrate_all(&mut handles, &h0, cfg.evaluation.pfa, eval.parallel)?;

    let name = scenario.config().clutter.short_name();
    let rows: Vec<ThresholdRow> = handles
        .iter()
        .zip(&thresholds)
        .map(|(h, t)| ThresholdRow {
            detector: h.kind(),
            scenario: name.to_string(),
            doppler_bin: d,
            lambda: t.lambda,
            pfa_target: t.pfa_target,
            calibration_size: t.calibration_size,
        })
        .collect();
    if let Some(ck) = ck.as_mut() {
        let t = thresholds[handles.iter().position(|h| h.kind() == DetectorKind::Drfm).expect("D-RFM requested")];
        ck.header.threshold = Some(t.to_record(cfg.scenario.digest(), cfg.integration.steps));
        save_checkpoint(ck, &cfg.checkpoint_path())?;
    }
    export_results(&Results { thresholds: rows.clone(), ..Default::default() }, &cfg.out_dir())?;
    for r in &rows {
        println!("{:<9} lambda {}", r.detector.name(), r.lambda);
    }
    println!("thresholds {}", cfg.out_dir().join("thresholds.csv").display());
    Ok(())
}

/// Handles at the configured bin with thresholds from a previous `calibrate`.
fn calibrated_handles(cfg: &RunConfig, scenario: &Scenario, kinds: &[DetectorKind], eval: &EvalConfig) -> CliResult<Vec<DetectorHandle>> {
    let d = cfg.evaluation.doppler_bin;
    let pfa = cfg.evaluation.pfa;
    let stale = |what: &str| Failure::new(EXIT_MISSING, format!("{what}; rerun `rfm-radar calibrate`"));
    let model = if kinds.contains(&DetectorKind::Drfm) {
        let ck = load_model(cfg)?;
        let record = ck.header.threshold.clone().ok_or_else(|| stale("checkpoint carries no D-RFM threshold"))?;
        if record.scenario_digest != cfg.scenario.digest() || record.integration_steps != cfg.integration.steps || record.pfa_target != pfa {
            return Err(stale("D-RFM threshold was calibrated under different settings"));
        }
        let mut det = DrfmDetector::new(ck.params, cfg.integration);
        det.threshold = Some(Threshold::from_record(&record));
        Some(Arc::new(det))
    } else {
        None
    };
    let mut handles = build_handles(kinds, scenario, model, d, eval.tyler)?;
    if kinds.iter().any(|k| *k != DetectorKind::Drfm) {
        let path = cfg.out_dir().join("thresholds.csv");
        require(&path, "calibration", "run `rfm-radar calibrate` first")?;
        let rows = read_thresholds(&path)?;
        let name = scenario.config().clutter.short_name();
        for h in handles.iter_mut().filter(|h| h.kind() != DetectorKind::Drfm) {
            let row = rows
                .iter()
                .find(|r| r.detector == h.kind() && r.scenario == name && r.doppler_bin == d && r.pfa_target == pfa)
                .ok_or_else(|| stale(&format!("no {} threshold for {name}, bin {d}, pfa {pfa}", h.kind())))?;
            h.set_threshold(Threshold {
                lambda: row.lambda,
                pfa_target: row.pfa_target,
                calibration_size: row.calibration_size,
                source: ThresholdSource::EmpiricalQuantile,
            });
        }
    }
    Ok(handles)
}

fn cmd_evaluate(cfg: &RunConfig, kinds: &[DetectorKind]) -> CliResult<()> {
    let scenario = Scenario::new(cfg.scenario.clone())?;
    let eval = eval_config(cfg, &scenario);
    let handles = calibrated_handles(cfg, &scenario, kinds, &eval)?;
    let curves = pd_sweep_many(&handles, &scenario, &cfg.snr_grid(), cfg.evaluation.trials, &eval)?;
    for c in &curves {
        let at = |snr: f64| c.pd_at(snr).map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into());
        println!("{:<9} Pd(0 dB) {}  Pd(10 dB) {}  Pd(15 dB) {}", c.detector.name(), at(0.0), at(10.0), at(15.0));
    }
    export_results(&Results { pd_curves: curves, ..Default::default() }, &cfg.out_dir())?;
    println!("curves {}", cfg.out_dir().join("pd_curve.csv").display());
    Ok(())
}

fn cmd_doppler(cfg: &RunConfig, kinds: &[DetectorKind]) -> CliResult<()> {
    let scenario = Scenario::new(cfg.scenario.clone())?;
    let eval = eval_config(cfg, &scenario);
    let base = calibrated_handles(cfg, &scenario, kinds, &eval)?;
    let validation = load_dataset(cfg, Split::Validation)?;
    let h0 = h0_trials_from_dataset(&validation, &scenario, kinds.iter().any(|k| k.needs_secondary()), &eval)?;
    let maps = doppler_maps(&base, &scenario, &cfg.doppler_bins(), &cfg.snr_grid(), cfg.evaluation.trials, cfg.evaluation.pfa, &h0, &eval)?;
    let top = *cfg.snr_grid().last().expect("non-empty grid");
    for m in &maps {
        println!("{:<9} min Pd over bins at {top} dB: {:.4}", m.detector.name(), m.min_pd_at(top).unwrap_or(f64::NAN));
    }
    export_results(&Results { doppler_maps: maps, ..Default::default() }, &cfg.out_dir())?;
    println!("maps {}", cfg.out_dir().join("doppler_map.csv").display());
    Ok(())
}

fn cmd_bench(cfg: &RunConfig, kinds: &[DetectorKind]) -> CliResult<()> {
    let scenario = Scenario::new(cfg.scenario.clone())?;
    let eval = EvalConfig { parallel: false, ..eval_config(cfg, &scenario) };
    let handles = calibrated_handles(cfg, &scenario, kinds, &eval)?;
    let bcfg = BenchConfig {
        samples_per_snr: cfg.evaluation.bench_samples,
        snr_grid_db: cfg.bench_snr_grid(),
        doppler_bin: cfg.evaluation.doppler_bin,
        ..BenchConfig::default()
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| Failure::new(1, e.to_string()))?;
    let result = pool.install(|| bench(&handles, &scenario, &bcfg, &eval))?;
    println!("{}", result.cpu_context);
    for e in &result.entries {
        let reference = e.reference_ms.map(|r| format!("{r}")).unwrap_or_else(|| "-".into());
        println!("{:<9} {:<10} {:>10.4} ms  (published {reference} ms)", e.detector.name(), e.mode.name(), e.mean_ms);
    }
    export_results(&Results { bench: Some(result), ..Default::default() }, &cfg.out_dir())?;
    println!("bench {}", cfg.out_dir().join("bench.csv").display());
    Ok(())
}

fn run(cmd: Command) -> CliResult<()> {
    let opts = match &cmd {
        Command::Generate(o) | Command::Train(o) | Command::Calibrate(o) | Command::Evaluate(o) | Command::Doppler(o) | Command::Bench(o) => o.clone(),
    };
    let cfg = load_config(&opts)?;
    if let Some(n) = opts.threads.filter(|_| !matches!(cmd, Command::Bench(_))) {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().map_err(|e| Failure::new(1, e.to_string()))?;
    }
    let kinds = detectors(&opts)?;
    match cmd {
        Command::Generate(_) => cmd_generate(&cfg),
        Command::Train(_) => cmd_train(&cfg),
        Command::Calibrate(_) => cmd_calibrate(&cfg, &kinds),
        Command::Evaluate(_) => cmd_evaluate(&cfg, &kinds),
        Command::Doppler(_) => cmd_doppler(&cfg, &kinds),
        Command::Bench(_) => cmd_bench(&cfg, &kinds),
    }
}

fn main() -> ExitCode {
    let help = format!("Configuration keys and their defaults (JSON, all optional):\n{}\n\n{EXIT_CODES}", RunConfig::defaults_json());
    let mut command = Cli::command().after_long_help(help.clone());
    for name in ["generate", "train", "calibrate", "evaluate", "doppler", "bench"] {
        command = command.mut_subcommand(name, |s| s.after_long_help(help.clone()));
    }
    let cli = match Cli::from_arg_matches(&command.get_matches()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
