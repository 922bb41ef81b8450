//! Disorder ensembles: many samples of one picture in one interaction regime,
//! each solved, classified per field component and aggregated into
//! non-monotonic fractions.
//!
//! Sample `i` is generated from `derive_seed(master_seed, i)`, so its verdict
//! does not depend on K, on worker count or on execution order.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{classify, smooth_curve, ClassifierParams};
use crate::curve::{FieldCurve, GridSpec, TemperatureGrid};
use crate::error::{IrgmError, Result};
use crate::exact::{exact_curve, non_interacting_f0};
use crate::geometry::{generate_with, GeneratorOptions, PhysicalParams, Picture};
use crate::mc::{anneal_ground_state, mc_curve_from_ground, McSchedule};
use crate::physics::{PrecomputedSample, SpinState};
use crate::rng::derive_seed;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "IRGM_WORKERS";

pub const VERDICTS_FILE: &str = "verdicts.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CURVES_DIR: &str = "curves";

/// Rows are checkpointed to disk after every chunk of this many samples.
const CHECKPOINT_CHUNK: usize = 32;

/// Interaction strength of an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// H_int switched off, solved in closed form.
    NonInteracting,
    /// Interactions rescaled per sample so that T_int is about 1 K.
    TrLessThanTint,
    /// Interactions rescaled per sample so that T_int is about 0.1 K.
    TrSimTint,
}

impl Regime {
    pub const ALL: [Regime; 3] = [
        Regime::NonInteracting,
        Regime::TrLessThanTint,
        Regime::TrSimTint,
    ];

    /// Target interaction temperature in kelvin, `None` without interactions.
    pub fn target_t_int(self) -> Option<f64> {
        match self {
            Regime::NonInteracting => None,
            Regime::TrLessThanTint => Some(1.0),
            Regime::TrSimTint => Some(0.1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::NonInteracting => "non_interacting",
            Regime::TrLessThanTint => "tr_less_than_tint",
            Regime::TrSimTint => "tr_sim_tint",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = IrgmError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == key)
            .ok_or_else(|| IrgmError::Parse(format!("unknown regime '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct EnsembleSpec {
    pub picture: Picture,
    pub regime: Regime,
    pub k_samples: usize,
    pub master_seed: u64,
    /// `interaction_scale` is ignored; the regime sets it per sample.
    pub params: PhysicalParams,
    pub generator: GeneratorOptions,
    pub grid: GridSpec,
    /// `rng_seed` is ignored; each sample uses its own derived seed.
    pub schedule: McSchedule,
    pub classifier: ClassifierParams,
    /// Fields are divided by this before classification.
    pub unit_scale_V_per_m: f64,
    /// Moving-average window applied to Monte Carlo curves.
    pub smoothing_window: usize,
    /// Write one curve CSV per sample.
    pub save_curves: bool,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            picture: Picture::Trap,
            regime: Regime::NonInteracting,
            k_samples: 1000,
            master_seed: 0,
            params: PhysicalParams::default(),
            generator: GeneratorOptions::default(),
            grid: GridSpec::default(),
            schedule: McSchedule::default(),
            classifier: ClassifierParams::default(),
            unit_scale_V_per_m: 1.0,
            smoothing_window: 11,
            save_curves: false,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k_samples < 1 {
            return Err(IrgmError::InvalidParams("k_samples must be >= 1".into()));
        }
        if !(self.unit_scale_V_per_m > 0.0 && self.unit_scale_V_per_m.is_finite()) {
            return Err(IrgmError::InvalidParams(
                "unit_scale_V_per_m must be positive".into(),
            ));
        }
        if self.smoothing_window.is_multiple_of(2) {
            return Err(IrgmError::InvalidParams(
                "smoothing_window must be odd".into(),
            ));
        }
        self.params.validate()?;
        self.grid.build()?;
        if self.regime != Regime::NonInteracting {
            self.schedule.validate()?;
        }
        self.classifier.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn sample_seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }
}

/// Outcome for one disorder sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SampleVerdict {
    pub index: usize,
    pub seed: u64,
    pub picture: Picture,
    pub regime: Regime,
    pub Tr_K: f64,
    pub Tint_K: f64,
    pub nonmono: [bool; 3],
    /// Mean absolute step per component, in classifier units.
    pub s: [f64; 3],
    pub ratio: [f64; 3],
    pub lambda: f64,
    /// Verdicts on the unsmoothed Monte Carlo series.
    pub raw_nonmono: Option<[bool; 3]>,
}

const VERDICT_HEADER: [&str; 19] = [
    "index",
    "seed",
    "picture",
    "regime",
    "Tr_K",
    "Tint_K",
    "nonmono_x",
    "nonmono_y",
    "nonmono_z",
    "s_x",
    "s_y",
    "s_z",
    "ratio_x",
    "ratio_y",
    "ratio_z",
    "lambda",
    "raw_nonmono_x",
    "raw_nonmono_y",
    "raw_nonmono_z",
];

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_verdicts<W: Write>(rows: &[SampleVerdict], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VERDICT_HEADER)?;
    for r in rows {
        let mut rec = vec![
            r.index.to_string(),
            r.seed.to_string(),
            r.picture.to_string(),
            r.regime.to_string(),
            r.Tr_K.to_string(),
            r.Tint_K.to_string(),
        ];
        rec.extend(r.nonmono.iter().map(|&b| bit(b).to_string()));
        rec.extend(r.s.iter().map(|v| v.to_string()));
        rec.extend(r.ratio.iter().map(|v| v.to_string()));
        rec.push(r.lambda.to_string());
        match r.raw_nonmono {
            Some(raw) => rec.extend(raw.iter().map(|&b| bit(b).to_string())),
            None => rec.extend(["", "", ""].map(String::from)),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_verdicts<R: std::io::Read>(input: R) -> Result<Vec<SampleVerdict>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != VERDICT_HEADER {
        return Err(IrgmError::Parse("unexpected verdict CSV header".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|e| IrgmError::Parse(format!("{e}")))
        };
        let flag = |i: usize| -> Result<bool> {
            match field(i) {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(IrgmError::Parse(format!("bad verdict flag '{other}'"))),
            }
        };
        let raw = if field(16).is_empty() {
            None
        } else {
            Some([flag(16)?, flag(17)?, flag(18)?])
        };
        rows.push(SampleVerdict {
            index: field(0)
                .parse()
                .map_err(|e| IrgmError::Parse(format!("{e}")))?,
            seed: field(1)
                .parse()
                .map_err(|e| IrgmError::Parse(format!("{e}")))?,
            picture: field(2).parse()?,
            regime: field(3).parse()?,
            Tr_K: num(4)?,
            Tint_K: num(5)?,
            nonmono: [flag(6)?, flag(7)?, flag(8)?],
            s: [num(9)?, num(10)?, num(11)?],
            ratio: [num(12)?, num(13)?, num(14)?],
            lambda: num(15)?,
            raw_nonmono: raw,
        });
    }
    Ok(rows)
}

/// Solved and classified sample, with its curve kept for optional export.
pub struct SampleOutcome {
    pub verdict: SampleVerdict,
    pub curve: FieldCurve,
}

/// Generate, solve and classify sample `index` of `spec`.
pub fn run_sample(
    spec: &EnsembleSpec,
    grid: &TemperatureGrid,
    index: usize,
) -> Result<SampleOutcome> {
    let seed = spec.sample_seed(index);
    let base = generate_with(
        spec.picture,
        &spec.params.with_interaction_scale(1.0),
        &spec.generator,
        seed,
    )?;
    let (pre, lambda, ground) = match spec.regime.target_t_int() {
        None => {
            let pre = PrecomputedSample::new(&base.with_interaction_scale(0.0))?;
            let ground = sign_state(&pre);
            (pre, 0.0, ground)
        }
        Some(target) => {
            let schedule = McSchedule {
                rng_seed: seed,
                ..spec.schedule.clone()
            };
            let unit = PrecomputedSample::new(&base)?;
            let (g1, _) = anneal_ground_state(&unit, &schedule)?;
            let t_int_unit = unit.energy_scales(&g1)?.t_int;
            if !(t_int_unit > 0.0) {
                return Err(IrgmError::Domain(
                    "sample has no interaction energy to rescale".into(),
                ));
            }
            let lambda = target / t_int_unit;
            let pre = PrecomputedSample::new(&base.with_interaction_scale(lambda))?;
            let (ground, _) = anneal_ground_state(&pre, &schedule)?;
            (pre, lambda, ground)
        }
    };
    let scales = pre.energy_scales(&ground)?;
    let (curve, smoothed) = match spec.regime {
        Regime::NonInteracting => {
            let mut curve = exact_curve(&pre, grid)?;
            curve.f0_ref = non_interacting_f0(&pre)?;
            (curve, false)
        }
        _ => {
            let schedule = McSchedule {
                rng_seed: seed,
                ..spec.schedule.clone()
            };
            let raw = mc_curve_from_ground(&pre, grid, &schedule, &ground)?;
            let window = effective_window(spec.smoothing_window, grid.len());
            (smooth_curve(&raw, window)?, true)
        }
    };
    let verdicts = |use_smoothed: bool| -> Result<([bool; 3], [f64; 3], [f64; 3])> {
        let mut out = ([false; 3], [0.0; 3], [0.0; 3]);
        for c in 0..3 {
            let series: Vec<f64> = curve
                .component(c, use_smoothed)
                .iter()
                .map(|v| v / spec.unit_scale_V_per_m)
                .collect();
            let v = classify(&series, &spec.classifier)?;
            out.0[c] = v.non_monotonic;
            out.1[c] = v.s;
            out.2[c] = v.ratio;
        }
        Ok(out)
    };
    let (nonmono, s, ratio) = verdicts(smoothed)?;
    let raw_nonmono = if smoothed {
        Some(verdicts(false)?.0)
    } else {
        None
    };
    Ok(SampleOutcome {
        verdict: SampleVerdict {
            index,
            seed,
            picture: spec.picture,
            regime: spec.regime,
            Tr_K: scales.t_r,
            Tint_K: scales.t_int,
            nonmono,
            s,
            ratio,
            lambda,
            raw_nonmono,
        },
        curve,
    })
}

/// Ground state of a non-interacting sample; defects with h_j = 0 point up.
fn sign_state(pre: &PrecomputedSample) -> SpinState {
    SpinState::new(
        pre.local_fields
            .iter()
            .map(|&h| if h < 0.0 { -1 } else { 1 })
            .collect(),
    )
    .expect("signs are +-1")
}

/// Largest odd window not exceeding the grid length.
fn effective_window(window: usize, len: usize) -> usize {
    let w = window.min(len);
    if w.is_multiple_of(2) {
        w - 1
    } else {
        w
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub index: usize,
    pub seed: u64,
    pub message: String,
}

/// Non-monotonic fractions at a rescaled classifier unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ScaleSensitivity {
    pub unit_scale_V_per_m: f64,
    pub fractions: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct EnsembleSummary {
    pub picture: Picture,
    pub regime: Regime,
    pub k_requested: usize,
    pub k_completed: usize,
    /// Non-monotonic fraction per component (x, y, z).
    pub fractions: [f64; 3],
    /// Binomial standard errors sqrt(f (1 - f) / K).
    pub std_errors: [f64; 3],
    /// Fractions from unsmoothed Monte Carlo series.
    pub raw_fractions: Option<[f64; 3]>,
    pub mean_Tr_K: f64,
    pub mean_Tint_K: f64,
    pub median_Tint_K: f64,
    pub unit_scale_sensitivity: Vec<ScaleSensitivity>,
    pub failures: Vec<SampleFailure>,
    /// Excluded from the persisted summary so that reruns are byte-identical.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Unit scales, relative to the spec's, at which sensitivity is reported:
/// 16 steps per factor of 9 between 1/3 and 3, plus coarse decades outside.
pub fn sensitivity_factors() -> Vec<f64> {
    let fine = (-8..=8).map(|k| 3f64.powf(f64::from(k) / 8.0));
    [0.1]
        .into_iter()
        .chain(fine)
        .chain([10.0, 30.0, 100.0])
        .collect()
}

/// Fractions obtained if the classifier unit were `unit_scale` instead of
/// `base_scale`. The step ratio is scale-free and s scales inversely.
pub fn fractions_at_scale(
    rows: &[SampleVerdict],
    classifier: &ClassifierParams,
    base_scale: f64,
    unit_scale: f64,
) -> [f64; 3] {
    let mut out = [0.0; 3];
    if rows.is_empty() {
        return out;
    }
    let factor = base_scale / unit_scale;
    for (c, f) in out.iter_mut().enumerate() {
        let hits = rows
            .iter()
            .filter(|r| {
                r.ratio[c] > classifier.ratio_threshold
                    && r.s[c] * factor > classifier.slope_threshold
            })
            .count();
        *f = hits as f64 / rows.len() as f64;
    }
    out
}

/// Aggregate persisted rows into a summary.
pub fn summarize(
    spec: &EnsembleSpec,
    rows: &[SampleVerdict],
    failures: Vec<SampleFailure>,
) -> EnsembleSummary {
    let k = rows.len();
    let frac = |pick: &dyn Fn(&SampleVerdict) -> bool| -> f64 {
        if k == 0 {
            0.0
        } else {
            rows.iter().filter(|r| pick(r)).count() as f64 / k as f64
        }
    };
    let fractions = [0, 1, 2].map(|c| frac(&|r: &SampleVerdict| r.nonmono[c]));
    let std_errors = fractions.map(|f| {
        if k == 0 {
            0.0
        } else {
            (f * (1.0 - f) / k as f64).sqrt()
        }
    });
    let raw_fractions = if k > 0 && rows.iter().all(|r| r.raw_nonmono.is_some()) {
        Some([0, 1, 2].map(|c| frac(&|r: &SampleVerdict| r.raw_nonmono.is_some_and(|v| v[c]))))
    } else {
        None
    };
    let mean = |v: &dyn Fn(&SampleVerdict) -> f64| {
        if k == 0 {
            0.0
        } else {
            rows.iter().map(v).sum::<f64>() / k as f64
        }
    };
    let mut tint: Vec<f64> = rows.iter().map(|r| r.Tint_K).collect();
    tint.sort_by(f64::total_cmp);
    let median_tint = match k {
        0 => 0.0,
        _ if k % 2 == 1 => tint[k / 2],
        _ => 0.5 * (tint[k / 2 - 1] + tint[k / 2]),
    };
    let unit_scale_sensitivity = sensitivity_factors()
        .into_iter()
        .map(|f| {
            let scale = spec.unit_scale_V_per_m * f;
            ScaleSensitivity {
                unit_scale_V_per_m: scale,
                fractions: fractions_at_scale(
                    rows,
                    &spec.classifier,
                    spec.unit_scale_V_per_m,
                    scale,
                ),
            }
        })
        .collect();
    EnsembleSummary {
        picture: spec.picture,
        regime: spec.regime,
        k_requested: spec.k_samples,
        k_completed: k,
        fractions,
        std_errors,
        raw_fractions,
        mean_Tr_K: mean(&|r| r.Tr_K),
        mean_Tint_K: mean(&|r| r.Tint_K),
        median_Tint_K: median_tint,
        unit_scale_sensitivity,
        failures,
        wall_time_s: 0.0,
    }
}

/// Worker count from [`WORKERS_ENV`], falling back to the available parallelism.
pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(IrgmError::InvalidParams(format!(
                "{WORKERS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| IrgmError::Misuse(format!("cannot start worker pool: {e}")))
}

fn run_indices(
    spec: &EnsembleSpec,
    grid: &TemperatureGrid,
    indices: &[usize],
    pool: &rayon::ThreadPool,
) -> Vec<(usize, Result<SampleOutcome>)> {
    pool.install(|| {
        indices
            .par_iter()
            .map(|&i| (i, run_sample(spec, grid, i)))
            .collect()
    })
}

/// Run the whole ensemble in memory.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<(EnsembleSummary, Vec<SampleVerdict>)> {
    spec.validate()?;
    let start = Instant::now();
    let grid = spec.grid.build()?;
    let indices: Vec<usize> = (0..spec.k_samples).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (i, outcome) in run_indices(spec, &grid, &indices, &pool()?) {
        match outcome {
            Ok(o) => rows.push(o.verdict),
            Err(e) => failures.push(SampleFailure {
                index: i,
                seed: spec.sample_seed(i),
                message: e.to_string(),
            }),
        }
    }
    let mut summary = summarize(spec, &rows, failures);
    summary.wall_time_s = start.elapsed().as_secs_f64();
    Ok((summary, rows))
}

/// Paths written by [`run_ensemble_to_dir`].
#[derive(Clone, Debug)]
pub struct EnsembleOutputs {
    pub verdicts: PathBuf,
    pub summary: PathBuf,
    pub curves: Vec<PathBuf>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Run the ensemble and persist verdicts, summary and optional curves under
/// `dir`. With `resume`, samples already present in the verdict file are
/// kept and not recomputed; the final files are identical to a fresh run.
pub fn run_ensemble_to_dir(
    spec: &EnsembleSpec,
    dir: &Path,
    resume: bool,
) -> Result<(EnsembleSummary, EnsembleOutputs)> {
    spec.validate()?;
    let start = Instant::now();
    let grid = spec.grid.build()?;
    fs::create_dir_all(dir)?;
    let verdicts_path = dir.join(VERDICTS_FILE);
    let summary_path = dir.join(SUMMARY_FILE);
    let curves_dir = dir.join(CURVES_DIR);
    if spec.save_curves {
        fs::create_dir_all(&curves_dir)?;
    }
    let mut done: BTreeMap<usize, SampleVerdict> = BTreeMap::new();
    if resume && verdicts_path.exists() {
        for row in read_verdicts(fs::File::open(&verdicts_path)?)? {
            let matches = row.index < spec.k_samples
                && row.seed == spec.sample_seed(row.index)
                && row.picture == spec.picture
                && row.regime == spec.regime;
            if matches {
                done.insert(row.index, row);
            }
        }
    }
    let todo: Vec<usize> = (0..spec.k_samples)
        .filter(|i| !done.contains_key(i))
        .collect();
    let pool = pool()?;
    let mut failures = Vec::new();
    for chunk in todo.chunks(CHECKPOINT_CHUNK) {
        for (i, outcome) in run_indices(spec, &grid, chunk, &pool) {
            match outcome {
                Ok(o) => {
                    if spec.save_curves {
                        o.curve
                            .write_csv(fs::File::create(curve_path(&curves_dir, i))?)?;
                    }
                    done.insert(i, o.verdict);
                }
                Err(e) => failures.push(SampleFailure {
                    index: i,
                    seed: spec.sample_seed(i),
                    message: e.to_string(),
                }),
            }
        }
        let rows: Vec<SampleVerdict> = done.values().cloned().collect();
        let mut buf = Vec::new();
        write_verdicts(&rows, &mut buf)?;
        write_atomic(&verdicts_path, &buf)?;
    }
    let rows: Vec<SampleVerdict> = done.values().cloned().collect();
    if todo.is_empty() {
        let mut buf = Vec::new();
        write_verdicts(&rows, &mut buf)?;
        write_atomic(&verdicts_path, &buf)?;
    }
    let mut summary = summarize(spec, &rows, failures);
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    write_atomic(&summary_path, json.as_bytes())?;
    summary.wall_time_s = start.elapsed().as_secs_f64();
    let curves = if spec.save_curves {
        rows.iter()
            .map(|r| curve_path(&curves_dir, r.index))
            .collect()
    } else {
        Vec::new()
    };
    Ok((
        summary,
        EnsembleOutputs {
            verdicts: verdicts_path,
            summary: summary_path,
            curves,
        },
    ))
}

fn curve_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("sample_{index:06}.csv"))
}

/// One cell of a fraction table: a picture, a regime row and whether the
/// interaction was on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub picture: Picture,
    /// `TrLessThanTint` or `TrSimTint`; the row the cell belongs to.
    pub row: Regime,
    pub interacting: bool,
    pub fractions: [f64; 3],
    pub std_errors: [f64; 3],
}

impl EnsembleSummary {
    /// Table cells this summary fills. A non-interacting ensemble is the
    /// "without interaction" entry of both regime rows.
    pub fn cells(&self) -> Vec<TableCell> {
        let cell = |row, interacting| TableCell {
            picture: self.picture,
            row,
            interacting,
            fractions: self.fractions,
            std_errors: self.std_errors,
        };
        match self.regime {
            Regime::NonInteracting => vec![
                cell(Regime::TrLessThanTint, false),
                cell(Regime::TrSimTint, false),
            ],
            r => vec![cell(r, true)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingKind {
    /// Interacting cell above the non-interacting cell of the same picture and row.
    InteractionEnhances,
    /// Among interacting cells: shell above random dipole above trap.
    PictureOrder,
    /// T_r < T_int row at or above the T_r ~ T_int row.
    RegimeOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Tie,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub kind: OrderingKind,
    pub component: usize,
    /// Cell expected to be larger, as "picture/row/int|noint".
    pub greater: String,
    pub lesser: String,
    pub difference: f64,
    pub combined_std_error: f64,
    pub outcome: Outcome,
    /// Difference in units of the combined standard error.
    pub margin_sigma: f64,
}

fn cell_label(c: &TableCell) -> String {
    format!(
        "{}/{}/{}",
        c.picture,
        c.row,
        if c.interacting { "int" } else { "noint" }
    )
}

fn check(kind: OrderingKind, component: usize, hi: &TableCell, lo: &TableCell) -> OrderingCheck {
    let d = hi.fractions[component] - lo.fractions[component];
    let se = hi.std_errors[component].hypot(lo.std_errors[component]);
    let outcome = if d > 0.0 {
        Outcome::Holds
    } else if d == 0.0 {
        Outcome::Tie
    } else {
        Outcome::Violated
    };
    OrderingCheck {
        kind,
        component,
        greater: cell_label(hi),
        lesser: cell_label(lo),
        difference: d,
        combined_std_error: se,
        outcome,
        margin_sigma: if se > 0.0 {
            d / se
        } else if d > 0.0 {
            f64::INFINITY
        } else if d < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        },
    }
}

/// Evaluate the qualitative orderings among whichever cells are present.
/// Pairs with a missing cell are skipped.
pub fn compare_regimes(cells: &[TableCell]) -> Vec<OrderingCheck> {
    let find = |p: Picture, row: Regime, int: bool| {
        cells
            .iter()
            .find(|c| c.picture == p && c.row == row && c.interacting == int)
    };
    let rows = [Regime::TrLessThanTint, Regime::TrSimTint];
    let mut out = Vec::new();
    for p in Picture::ALL {
        for row in rows {
            if let (Some(hi), Some(lo)) = (find(p, row, true), find(p, row, false)) {
                out.extend((0..3).map(|c| check(OrderingKind::InteractionEnhances, c, hi, lo)));
            }
        }
    }
    let ladder = [
        Picture::SphericalShell,
        Picture::RandomDipole,
        Picture::Trap,
    ];
    for row in rows {
        for pair in ladder.windows(2) {
            if let (Some(hi), Some(lo)) = (find(pair[0], row, true), find(pair[1], row, true)) {
                out.extend((0..3).map(|c| check(OrderingKind::PictureOrder, c, hi, lo)));
            }
        }
    }
    for p in Picture::ALL {
        for int in [true, false] {
            if let (Some(hi), Some(lo)) = (
                find(p, Regime::TrLessThanTint, int),
                find(p, Regime::TrSimTint, int),
            ) {
                out.extend((0..3).map(|c| check(OrderingKind::RegimeOrder, c, hi, lo)));
            }
        }
    }
    out
}
