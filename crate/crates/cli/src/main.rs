//! `irgm` command-line front end. Every physical flag carries its unit in
//! its name; outputs are CSV or JSON, each accompanied by a run manifest.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use irgm::analysis::{
    classify, frequency_shift, magnitude_estimate, smooth_curve, ClassifierParams,
    ConversionParams, SlopeMeasure,
};
use irgm::curve::{FieldCurve, GridSpec};
use irgm::ensemble::{run_ensemble_to_dir, EnsembleSpec};
use irgm::exact::{enumerate_thermal, exact_curve};
use irgm::fit::{default_reference_sample, fit_curves, synthetic_target, FitSpec, FitTarget};
use irgm::geometry::{generate_with, GeneratorOptions, PhysicalParams, Picture, SampleConfig};
use irgm::mc::{mc_curve, McSchedule};
use irgm::units::{debye_to_cm, nm_to_m, MT_PER_NM};
use irgm::{IrgmError, PrecomputedSample};

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "irgm", version = irgm::VERSION, about = "Thermal field drift from interacting two-level defects near a qubit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a disorder sample and write it as JSON.
    Generate(GenerateArgs),
    /// Field at the qubit versus temperature for one sample.
    Sweep(SweepArgs),
    /// Non-monotonic fractions over many samples.
    Ensemble(EnsembleArgs),
    /// Classify the components of a curve CSV.
    Classify(ClassifyArgs),
    /// Order-of-magnitude field, displacement and frequency shift.
    Estimate(EstimateArgs),
    /// Fit frequency-shift curves by jittering a reference sample.
    Fit(FitArgs),
    /// Write a synthetic frequency-shift target for testing fits.
    SynthTarget(SynthArgs),
}

#[derive(Args, Clone)]
struct ParamFlags {
    #[arg(long)]
    n_defects: Option<usize>,
    #[arg(long)]
    p0_debye: Option<f64>,
    #[arg(long)]
    epsilon_r: Option<f64>,
    #[arg(long = "delta-e0-v-per-m")]
    delta_e0_v_per_m: Option<f64>,
    /// Multiplier on the pair interaction.
    #[arg(long)]
    lambda: Option<f64>,
    /// JSON file with physical parameters; its values take precedence over flags.
    #[arg(long)]
    params: Option<PathBuf>,
}

impl ParamFlags {
    fn resolve(&self) -> anyhow::Result<PhysicalParams> {
        if let Some(path) = &self.params {
            return serde_json::from_str(&read_input(path)?).map_err(usage);
        }
        let mut p = PhysicalParams::default();
        if let Some(n) = self.n_defects {
            p.n_defects = n;
        }
        if let Some(d) = self.p0_debye {
            p.p0 = debye_to_cm(d);
        }
        if let Some(e) = self.epsilon_r {
            p.epsilon_r = e;
        }
        if let Some(f) = self.delta_e0_v_per_m {
            p.delta_e0 = f;
        }
        if let Some(l) = self.lambda {
            p.interaction_scale = l;
        }
        p.validate().map_err(usage)?;
        Ok(p)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    picture: Picture,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    params: ParamFlags,
    /// Depth of the trap layer.
    #[arg(long)]
    z_nm: Option<f64>,
    /// JSON file with generator options; takes precedence over `--z-nm`.
    #[arg(long)]
    generator: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct GridFlags {
    #[arg(long = "tmin-k", default_value_t = 0.01)]
    tmin_k: f64,
    #[arg(long = "tmax-k", default_value_t = 1.0)]
    tmax_k: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
}

impl GridFlags {
    fn spec(&self) -> GridSpec {
        GridSpec {
            t_min_K: self.tmin_k,
            t_max_K: self.tmax_k,
            points: self.points,
        }
    }
}

#[derive(Args)]
struct ScheduleFlags {
    #[arg(long)]
    equilibration_sweeps: Option<usize>,
    #[arg(long)]
    measurement_sweeps: Option<usize>,
    #[arg(long)]
    anneal_restarts: Option<usize>,
    #[arg(long)]
    mc_seed: Option<u64>,
    /// Visit grid temperatures one at a time, descending, carrying the state
    /// over, instead of replica exchange.
    #[arg(long)]
    sequential: bool,
    /// Like `--sequential`, but start every temperature from a fresh random state.
    #[arg(long)]
    independent_temperatures: bool,
    /// JSON file with the full schedule; takes precedence over the flags above.
    #[arg(long)]
    schedule: Option<PathBuf>,
}

impl ScheduleFlags {
    fn resolve(&self) -> anyhow::Result<McSchedule> {
        let s = if let Some(path) = &self.schedule {
            serde_json::from_str(&read_input(path)?).map_err(usage)?
        } else {
            let mut s = McSchedule::default();
            if let Some(v) = self.equilibration_sweeps {
                s.equilibration_sweeps = v;
            }
            if let Some(v) = self.measurement_sweeps {
                s.measurement_sweeps = v;
            }
            if let Some(v) = self.anneal_restarts {
                s.anneal_restarts = v;
            }
            if let Some(v) = self.mc_seed {
                s.rng_seed = v;
            }
            s.replica_exchange = !(self.sequential || self.independent_temperatures);
            s.carry_over = !self.independent_temperatures;
            s
        };
        s.validate().map_err(usage)?;
        Ok(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    /// Closed form without interactions, Monte Carlo with them.
    Auto,
    Exact,
    Enumerate,
    MonteCarlo,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    sample: PathBuf,
    #[command(flatten)]
    grid: GridFlags,
    /// Keep the pair interaction (otherwise it is switched off).
    #[arg(long)]
    interacting: bool,
    /// Override the sample's interaction multiplier (implies `--interacting` when > 0).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = Solver::Auto)]
    solver: Solver,
    /// Refuse anything but the closed-form solution.
    #[arg(long)]
    exact_only: bool,
    #[command(flatten)]
    schedule: ScheduleFlags,
    /// Moving-average window; defaults to 11 for Monte Carlo, none otherwise. 0 disables.
    #[arg(long)]
    smooth_window: Option<usize>,
    /// Also write the frequency shift.
    #[arg(long)]
    convert: bool,
    /// JSON file with conversion constants for `--convert`.
    #[arg(long)]
    conversion: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Keep samples already present in the output directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ComponentArg {
    X,
    Y,
    Z,
    All,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    curve: PathBuf,
    #[arg(long, value_enum, default_value_t = ComponentArg::All)]
    component: ComponentArg,
    #[arg(long)]
    ratio_threshold: Option<f64>,
    #[arg(long)]
    slope_threshold: Option<f64>,
    #[arg(long)]
    slope_filter_factor: Option<f64>,
    /// Count retained steps instead of summing their magnitudes.
    #[arg(long)]
    count_steps: bool,
    /// Field unit for the slope threshold.
    #[arg(long = "unit-scale-v-per-m", default_value_t = 1.0)]
    unit_scale_v_per_m: f64,
    /// Classify raw columns even when smoothed ones are present.
    #[arg(long)]
    raw: bool,
    /// Write the verdict here instead of standard output.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, default_value_t = 30)]
    n_defects: usize,
    #[arg(long)]
    p0_debye: Option<f64>,
    #[arg(long, default_value_t = 11.0)]
    epsilon_r: f64,
    #[arg(long, default_value_t = 50.0)]
    distance_nm: f64,
    #[arg(long = "gradient-mt-per-nm", default_value_t = 0.1)]
    gradient_mt_per_nm: f64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Fit settings JSON (reference sample, jitter, restarts, seed).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Target curve as LABEL=PATH; repeatable.
    #[arg(long = "target", required = true)]
    targets: Vec<String>,
    #[arg(long)]
    reference_seed: Option<u64>,
    #[arg(long)]
    jitter_radius_nm: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Reference sample JSON; defaults to the standard fit reference.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    reference_seed: u64,
    #[arg(long, default_value_t = 0.105)]
    c: f64,
    #[arg(long, default_value_t = 5.0)]
    jitter_radius_nm: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "q")]
    label: String,
    #[command(flatten)]
    grid: GridFlags,
    /// Also write the jittered sample behind the target.
    #[arg(long)]
    sample_out: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

/// Error carrying its exit status: 2 for bad input, 1 for runtime failure.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow::Error::new(UsageError(e.to_string()))
}

fn classify_error(error: anyhow::Error) -> Failure {
    let bad_input = error.chain().any(|c| {
        c.is::<UsageError>()
            || matches!(
                c.downcast_ref::<IrgmError>(),
                Some(
                    IrgmError::InvalidParams(_)
                        | IrgmError::Parse(_)
                        | IrgmError::Json(_)
                        | IrgmError::Csv(_)
                        | IrgmError::TooLarge { .. }
                        | IrgmError::Misuse(_)
                )
            )
    });
    Failure {
        code: if bad_input { 2 } else { 1 },
        error,
    }
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn json_bytes<T: serde::Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn load_sample(path: &Path) -> anyhow::Result<SampleConfig> {
    SampleConfig::from_json(&read_input(path)?).map_err(usage)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_generate(args: &GenerateArgs, m: &mut Manifest) -> anyhow::Result<()> {
    let params = args.params.resolve()?;
    let generator = match &args.generator {
        Some(path) => serde_json::from_str(&read_input(path)?).map_err(usage)?,
        None => GeneratorOptions {
            trap_z_nm: args.z_nm.unwrap_or(GeneratorOptions::default().trap_z_nm),
            ..Default::default()
        },
    };
    let sample = generate_with(args.picture, &params, &generator, args.seed)?;
    let mut text = sample.to_json()?;
    text.push('\n');
    write_output(&args.out, text.as_bytes())?;
    m.config = args.params.params.clone().or(args.generator.clone());
    m.seed = Some(args.seed);
    m.parameters = json!({ "picture": args.picture, "params": params, "generator": generator });
    m.outputs.push(args.out.clone());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, m: &mut Manifest) -> anyhow::Result<()> {
    let sample = load_sample(&args.sample)?;
    let lambda = match (args.lambda, args.interacting) {
        (Some(l), _) => l,
        (None, true) => sample.params.interaction_scale,
        (None, false) => 0.0,
    };
    let sample = sample.with_interaction_scale(lambda);
    sample.params.validate().map_err(usage)?;
    let pre = PrecomputedSample::new(&sample)?;
    let interacting = pre.is_interacting();
    if args.exact_only && (interacting || !matches!(args.solver, Solver::Auto | Solver::Exact)) {
        return Err(usage(
            "--exact-only needs a non-interacting sweep with the closed-form solver",
        ));
    }
    let grid = args.grid.spec().build().map_err(usage)?;
    let schedule = args.schedule.resolve()?;
    let solver = match args.solver {
        Solver::Auto if interacting => Solver::MonteCarlo,
        Solver::Auto => Solver::Exact,
        s => s,
    };
    let mut curve = match solver {
        Solver::Exact => exact_curve(&pre, &grid)?,
        Solver::Enumerate => enumerate_thermal(&pre, &grid)?,
        _ => mc_curve(&pre, &grid, &schedule)?,
    };
    let window = match args.smooth_window {
        Some(w) => w,
        None if solver == Solver::MonteCarlo => 11.min(grid.len() - (1 - grid.len() % 2)),
        None => 0,
    };
    if window > 0 {
        curve = smooth_curve(&curve, window).map_err(usage)?;
    }
    write_output(&args.out, curve.to_csv_string()?.as_bytes())?;
    m.outputs.push(args.out.clone());
    let mut conversion = None;
    if args.convert {
        let conv: ConversionParams = match &args.conversion {
            Some(path) => serde_json::from_str(&read_input(path)?).map_err(usage)?,
            None => ConversionParams::default(),
        };
        let shift = frequency_shift(&curve, &conv).map_err(usage)?;
        let target = FitTarget {
            label: String::new(),
            T_K: grid.temps().to_vec(),
            delta_f_Hz: shift,
        };
        let mut buf = Vec::new();
        target.write_csv(&mut buf)?;
        let path = sibling(&args.out, "_delta_f.csv");
        write_output(&path, &buf)?;
        m.outputs.push(path);
        conversion = Some(conv);
    }
    m.config = Some(args.sample.clone());
    m.seed = (solver == Solver::MonteCarlo).then_some(schedule.rng_seed);
    m.parameters = json!({
        "solver": match solver { Solver::Exact => "exact", Solver::Enumerate => "enumerate", _ => "monte_carlo" },
        "interaction_scale": lambda,
        "grid": args.grid.spec(),
        "schedule": (solver == Solver::MonteCarlo).then_some(&schedule),
        "smooth_window": window,
        "conversion": conversion,
    });
    Ok(())
}

fn cmd_ensemble(args: &EnsembleArgs, m: &mut Manifest) -> anyhow::Result<()> {
    let spec = EnsembleSpec::from_json(&read_input(&args.spec)?).map_err(usage)?;
    let (summary, outputs) = run_ensemble_to_dir(&spec, &args.out_dir, args.resume)?;
    m.config = Some(args.spec.clone());
    m.seed = Some(spec.master_seed);
    m.parameters = json!({ "spec": spec, "resume": args.resume, "k_completed": summary.k_completed,
                           "failures": summary.failures.len() });
    m.outputs.push(outputs.verdicts);
    m.outputs.push(outputs.summary);
    m.outputs.extend(outputs.curves);
    m.manifest_path = Some(args.out_dir.join("manifest.json"));
    if summary.k_completed < spec.k_samples {
        return Err(anyhow!(
            "{} of {} samples failed; see {}",
            spec.k_samples - summary.k_completed,
            spec.k_samples,
            args.out_dir.join(irgm::ensemble::SUMMARY_FILE).display()
        ));
    }
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs, m: &mut Manifest) -> anyhow::Result<()> {
    let curve = FieldCurve::read_csv(read_input(&args.curve)?.as_bytes()).map_err(usage)?;
    let defaults = ClassifierParams::default();
    let params = ClassifierParams {
        ratio_threshold: args.ratio_threshold.unwrap_or(defaults.ratio_threshold),
        slope_threshold: args.slope_threshold.unwrap_or(defaults.slope_threshold),
        slope_filter_factor: args
            .slope_filter_factor
            .unwrap_or(defaults.slope_filter_factor),
        measure: if args.count_steps {
            SlopeMeasure::Count
        } else {
            SlopeMeasure::SummedMagnitude
        },
    };
    params.validate().map_err(usage)?;
    if !(args.unit_scale_v_per_m > 0.0) {
        return Err(usage("--unit-scale-v-per-m must be positive"));
    }
    let smoothed = !args.raw && curve.field_smoothed.is_some();
    let components: Vec<(usize, &str)> = match args.component {
        ComponentArg::X => vec![(0, "x")],
        ComponentArg::Y => vec![(1, "y")],
        ComponentArg::Z => vec![(2, "z")],
        ComponentArg::All => vec![(0, "x"), (1, "y"), (2, "z")],
    };
    let mut verdicts = serde_json::Map::new();
    for (c, name) in components {
        let series: Vec<f64> = curve
            .component(c, smoothed)
            .iter()
            .map(|v| v / args.unit_scale_v_per_m)
            .collect();
        verdicts.insert(
            name.to_string(),
            serde_json::to_value(classify(&series, &params).map_err(usage)?)?,
        );
    }
    let out = json!({ "series": if smoothed { "smoothed" } else { "raw" },
                      "unit_scale_V_per_m": args.unit_scale_v_per_m, "verdicts": verdicts });
    emit(&out, args.out.as_deref(), m)?;
    m.config = Some(args.curve.clone());
    m.parameters = json!({ "classifier": params, "unit_scale_V_per_m": args.unit_scale_v_per_m, "smoothed": smoothed });
    Ok(())
}

fn emit(value: &Value, out: Option<&Path>, m: &mut Manifest) -> anyhow::Result<()> {
    let bytes = json_bytes(value)?;
    match out {
        Some(path) => {
            write_output(path, &bytes)?;
            m.outputs.push(path.to_path_buf());
        }
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            m.skip = true;
        }
    }
    Ok(())
}

fn cmd_estimate(args: &EstimateArgs, m: &mut Manifest) -> anyhow::Result<()> {
    let mut params = PhysicalParams {
        n_defects: args.n_defects,
        epsilon_r: args.epsilon_r,
        ..Default::default()
    };
    if let Some(d) = args.p0_debye {
        params.p0 = debye_to_cm(d);
    }
    params.validate().map_err(usage)?;
    if !(args.distance_nm > 0.0) {
        return Err(usage("--distance-nm must be positive"));
    }
    let conv = ConversionParams {
        average_gradient: args.gradient_mt_per_nm * MT_PER_NM,
        ..Default::default()
    };
    let est = magnitude_estimate(&params, &conv, nm_to_m(args.distance_nm))?;
    let out = json!({
        "field_V_per_m": est.field_v_per_m,
        "displacement_nm": irgm::units::m_to_nm(est.displacement_m),
        "frequency_MHz": est.frequency_hz / 1e6,
        "frequency_Hz": est.frequency_hz,
    });
    emit(&out, args.out.as_deref(), m)?;
    m.parameters = json!({ "params": params, "distance_nm": args.distance_nm,
                           "gradient_mT_per_nm": args.gradient_mt_per_nm });
    Ok(())
}

/// Fit settings file: everything in [`FitSpec`] except the targets, all optional.
#[derive(serde::Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct FitSettings {
    reference_sample: Option<SampleConfig>,
    reference_seed: Option<u64>,
    jitter_radius_nm: Option<f64>,
    restarts: Option<usize>,
    polish_rounds: Option<usize>,
    polish_trials: Option<usize>,
    seed: Option<u64>,
}

fn cmd_fit(args: &FitArgs, m: &mut Manifest) -> anyhow::Result<()> {
    let settings: FitSettings = match &args.spec {
        Some(path) => serde_json::from_str(&read_input(path)?).map_err(usage)?,
        None => FitSettings::default(),
    };
    let mut targets = Vec::new();
    for t in &args.targets {
        let (label, path) = t
            .split_once('=')
            .ok_or_else(|| usage(format!("--target expects LABEL=PATH, got '{t}'")))?;
        let path = Path::new(path);
        targets.push(FitTarget::read_csv(label, read_input(path)?.as_bytes()).map_err(usage)?);
    }
    let reference = match settings.reference_sample {
        Some(s) => s,
        None => {
            default_reference_sample(settings.reference_seed.or(args.reference_seed).unwrap_or(0))?
        }
    };
    let mut spec = FitSpec::new(reference, targets);
    // Settings file first, then explicit flags.
    if let Some(r) = settings.jitter_radius_nm.or(args.jitter_radius_nm) {
        spec.jitter_radius = nm_to_m(r);
    }
    if let Some(r) = settings.restarts.or(args.restarts) {
        spec.restarts = r;
    }
    if let Some(r) = settings.polish_rounds {
        spec.polish_rounds = r;
    }
    if let Some(r) = settings.polish_trials {
        spec.polish_trials = r;
    }
    if let Some(s) = settings.seed.or(args.seed) {
        spec.seed = s;
    }
    spec.validate().map_err(usage)?;
    let result = fit_curves(&spec)?;
    write_output(&args.out, &json_bytes(&result)?)?;
    m.config = args.spec.clone();
    m.seed = Some(spec.seed);
    m.parameters = json!({ "jitter_radius_nm": irgm::units::m_to_nm(spec.jitter_radius), "restarts": spec.restarts,
                           "polish_rounds": spec.polish_rounds, "polish_trials": spec.polish_trials,
                           "reference_seed": spec.reference_sample.seed, "targets": args.targets });
    m.outputs.push(args.out.clone());
    Ok(())
}

fn cmd_synth(args: &SynthArgs, m: &mut Manifest) -> anyhow::Result<()> {
    let reference = match &args.reference {
        Some(path) => load_sample(path)?,
        None => default_reference_sample(args.reference_seed)?,
    };
    if !(args.jitter_radius_nm >= 0.0) {
        return Err(usage("--jitter-radius-nm must be >= 0"));
    }
    let grid = args.grid.spec().build().map_err(usage)?;
    let (target, sample) = synthetic_target(
        &args.label,
        &reference,
        nm_to_m(args.jitter_radius_nm),
        args.c,
        args.seed,
        grid.temps(),
    )?;
    let mut buf = Vec::new();
    target.write_csv(&mut buf)?;
    write_output(&args.out, &buf)?;
    m.outputs.push(args.out.clone());
    if let Some(path) = &args.sample_out {
        let mut text = sample.to_json()?;
        text.push('\n');
        write_output(path, text.as_bytes())?;
        m.outputs.push(path.clone());
    }
    m.config = args.reference.clone();
    m.seed = Some(args.seed);
    m.parameters = json!({ "c": args.c, "jitter_radius_nm": args.jitter_radius_nm, "label": args.label,
                           "reference_seed": reference.seed, "grid": args.grid.spec() });
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let start = Instant::now();
    let name = match &cli.command {
        Command::Generate(_) => "generate",
        Command::Sweep(_) => "sweep",
        Command::Ensemble(_) => "ensemble",
        Command::Classify(_) => "classify",
        Command::Estimate(_) => "estimate",
        Command::Fit(_) => "fit",
        Command::SynthTarget(_) => "synth-target",
    };
    let mut m = Manifest::new(name);
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a, &mut m),
        Command::Sweep(a) => cmd_sweep(a, &mut m),
        Command::Ensemble(a) => cmd_ensemble(a, &mut m),
        Command::Classify(a) => cmd_classify(a, &mut m),
        Command::Estimate(a) => cmd_estimate(a, &mut m),
        Command::Fit(a) => cmd_fit(a, &mut m),
        Command::SynthTarget(a) => cmd_synth(a, &mut m),
    };
    result.map_err(classify_error)?;
    m.wall_time_s = start.elapsed().as_secs_f64();
    m.write().map_err(|error| Failure { code: 1, error })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
