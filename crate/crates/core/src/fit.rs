//! Fitting measured frequency-shift curves with the non-interacting model.
//!
//! For a candidate placement of the defects the model is
//! `delta_f(T) = c * (F_y(T) - F_y(0))`, linear in `c`, so every candidate is
//! scored with its exact least-squares `c`. Candidates jitter each defect of
//! a reference sample within a disk in the x-y plane. Random restarts pick a
//! starting placement; a per-defect polish then refines it.

use std::io::{Read, Write};

use nalgebra::Vector3;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{IrgmError, Result};
use crate::exact::exact_spin_average;
use crate::geometry::{generate_with, GeneratorOptions, PhysicalParams, Picture, SampleConfig};
use crate::physics::dipole_field;
use crate::rng::{derive_seed, rng_from_seed};
use crate::units::{m_to_nm, nm_to_m};

/// Stream separating polish draws from restart draws.
const POLISH_STREAM: u64 = 0xF17_0000_0000_0001;

/// Reference sample used when none is supplied: trap picture at 36 nm depth
/// with a 1e5 V/m random-field spread.
pub fn default_reference_sample(seed: u64) -> Result<SampleConfig> {
    let params = PhysicalParams {
        delta_e0: 1e5,
        interaction_scale: 0.0,
        ..Default::default()
    };
    let options = GeneratorOptions {
        trap_z_nm: 36.0,
        ..Default::default()
    };
    generate_with(Picture::Trap, &params, &options, seed)
}

/// One measured curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct FitTarget {
    pub label: String,
    pub T_K: Vec<f64>,
    pub delta_f_Hz: Vec<f64>,
}

impl FitTarget {
    pub fn validate(&self) -> Result<()> {
        if self.T_K.is_empty() {
            return Err(IrgmError::InvalidParams(format!(
                "target '{}' is empty",
                self.label
            )));
        }
        if self.T_K.len() != self.delta_f_Hz.len() {
            return Err(IrgmError::InvalidParams(format!(
                "target '{}' has mismatched columns",
                self.label
            )));
        }
        if self.T_K.iter().any(|t| !(t.is_finite() && *t >= 0.0))
            || self.delta_f_Hz.iter().any(|f| !f.is_finite())
        {
            return Err(IrgmError::InvalidParams(format!(
                "target '{}' has invalid values",
                self.label
            )));
        }
        Ok(())
    }

    /// Amplitude used to judge residuals: the largest |delta_f|.
    pub fn amplitude(&self) -> f64 {
        self.delta_f_Hz.iter().fold(0.0, |a, f| a.max(f.abs()))
    }

    /// Read a `T_K,delta_f_Hz` CSV.
    pub fn read_csv<R: Read>(label: &str, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| IrgmError::Parse(format!("missing column {name}")))
        };
        let (t_col, f_col) = (col("T_K")?, col("delta_f_Hz")?);
        let mut target = FitTarget {
            label: label.to_string(),
            T_K: Vec::new(),
            delta_f_Hz: Vec::new(),
        };
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .unwrap_or("")
                    .trim()
                    .parse()
                    .map_err(|e| IrgmError::Parse(format!("{e}")))
            };
            target.T_K.push(num(t_col)?);
            target.delta_f_Hz.push(num(f_col)?);
        }
        target.validate()?;
        Ok(target)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["T_K", "delta_f_Hz"])?;
        for (t, f) in self.T_K.iter().zip(&self.delta_f_Hz) {
            w.write_record([t.to_string(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub reference_sample: SampleConfig,
    pub targets: Vec<FitTarget>,
    #[serde(rename = "jitter_radius_nm", with = "nm_serde")]
    pub jitter_radius: f64,
    pub restarts: usize,
    /// Passes of the per-defect polish after the restarts; 0 disables it.
    pub polish_rounds: usize,
    /// Trial positions per defect and polish pass.
    pub polish_trials: usize,
    pub seed: u64,
}

mod nm_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(crate::units::m_to_nm(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d).map(crate::units::nm_to_m)
    }
}

impl FitSpec {
    pub fn new(reference_sample: SampleConfig, targets: Vec<FitTarget>) -> Self {
        Self {
            reference_sample,
            targets,
            jitter_radius: nm_to_m(5.0),
            restarts: 500,
            polish_rounds: 40,
            polish_trials: 4,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.reference_sample.validate()?;
        if self.targets.is_empty() {
            return Err(IrgmError::InvalidParams("no targets to fit".into()));
        }
        for t in &self.targets {
            t.validate()?;
        }
        if !(self.jitter_radius >= 0.0 && self.jitter_radius.is_finite()) {
            return Err(IrgmError::InvalidParams(
                "jitter radius must be >= 0".into(),
            ));
        }
        if self.restarts < 1 {
            return Err(IrgmError::InvalidParams("need at least one restart".into()));
        }
        Ok(())
    }
}

/// Best fit of one target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct TargetFit {
    pub label: String,
    /// Conversion factor, Hz per V/m.
    pub c: f64,
    pub residual_rms_Hz: f64,
    pub amplitude_Hz: f64,
    /// In-plane offsets applied to each reference defect, nm.
    pub jitter_nm: Vec<[f64; 2]>,
    pub positions_nm: Vec<[f64; 3]>,
    pub model_delta_f_Hz: Vec<f64>,
    /// Best residual after each restart, then after each polish pass.
    pub history_rms_Hz: Vec<f64>,
    #[serde(skip)]
    pub sample: Option<SampleConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub fits: Vec<TargetFit>,
}

/// Least-squares `c` minimizing |c g - t| and the resulting RMS residual.
/// A model that is identically zero gets `c = 0`.
pub fn best_scalar(g: &[f64], t: &[f64]) -> (f64, f64) {
    let gg: f64 = g.iter().map(|x| x * x).sum();
    let gt: f64 = g.iter().zip(t).map(|(a, b)| a * b).sum();
    let c = if gg > 0.0 { gt / gg } else { 0.0 };
    let ss: f64 = g.iter().zip(t).map(|(a, b)| (c * a - b).powi(2)).sum();
    (c, (ss / g.len() as f64).sqrt())
}

/// Precomputed thermal weights for one target: `w[m][j] = <s_j>(T_m) - <s_j>(0)`.
struct Forward {
    weights: Vec<Vec<f64>>,
    positions: Vec<Vector3<f64>>,
    moments: Vec<Vector3<f64>>,
    epsilon_r: f64,
}

impl Forward {
    fn new(sample: &SampleConfig, temps: &[f64]) -> Result<Self> {
        let p = &sample.params;
        let h: Vec<f64> = sample
            .defects
            .iter()
            .map(|d| p.p0 * d.orientation.dot(&d.random_field))
            .collect();
        let s0: Vec<f64> = h
            .iter()
            .map(|&hj| exact_spin_average(hj, 0.0))
            .collect::<Result<_>>()?;
        let weights = temps
            .iter()
            .map(|&t| {
                h.iter()
                    .zip(&s0)
                    .map(|(&hj, s)| Ok(exact_spin_average(hj, t)? - s))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            weights,
            positions: sample.defects.iter().map(|d| d.position).collect(),
            moments: sample
                .defects
                .iter()
                .map(|d| d.orientation * p.p0)
                .collect(),
            epsilon_r: p.epsilon_r,
        })
    }

    fn kernel_y(&self, j: usize, offset: &[f64; 2]) -> Result<f64> {
        let r = self.positions[j] + Vector3::new(offset[0], offset[1], 0.0);
        Ok(dipole_field(&self.moments[j], &r, self.epsilon_r)?[1])
    }

    fn model(&self, kernels: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(kernels).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn draw_offset<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> [f64; 2] {
    // Uniform in the disk.
    let r = radius * rng.random::<f64>().sqrt();
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    [r * phi.cos(), r * phi.sin()]
}

fn draw_jitter(n: usize, radius: f64, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| draw_offset(&mut rng, radius)).collect()
}

struct Candidate {
    jitter: Vec<[f64; 2]>,
    kernels: Vec<f64>,
    c: f64,
    rms: f64,
}

fn evaluate(fwd: &Forward, target: &FitTarget, jitter: Vec<[f64; 2]>) -> Result<Candidate> {
    let kernels = jitter
        .iter()
        .enumerate()
        .map(|(j, o)| fwd.kernel_y(j, o))
        .collect::<Result<Vec<f64>>>()?;
    let (c, rms) = best_scalar(&fwd.model(&kernels), &target.delta_f_Hz);
    Ok(Candidate {
        jitter,
        kernels,
        c,
        rms,
    })
}

/// Place the reference defects at `jitter` offsets.
pub fn jittered_sample(reference: &SampleConfig, jitter: &[[f64; 2]]) -> Result<SampleConfig> {
    if jitter.len() != reference.n() {
        return Err(IrgmError::InvalidParams(
            "one offset per defect required".into(),
        ));
    }
    let mut out = reference.with_interaction_scale(0.0);
    for (d, o) in out.defects.iter_mut().zip(jitter) {
        d.position += Vector3::new(o[0], o[1], 0.0);
    }
    Ok(out)
}

fn fit_target(spec: &FitSpec, index: usize, target: &FitTarget) -> Result<TargetFit> {
    let reference = &spec.reference_sample;
    let n = reference.n();
    let fwd = Forward::new(reference, &target.T_K)?;
    let seed = derive_seed(spec.seed, index as u64);
    let candidates: Vec<Result<Candidate>> = (0..spec.restarts)
        .into_par_iter()
        .map(|r| {
            evaluate(
                &fwd,
                target,
                draw_jitter(n, spec.jitter_radius, derive_seed(seed, r as u64)),
            )
        })
        .collect();
    let mut best: Option<Candidate> = None;
    let mut history = Vec::with_capacity(spec.restarts + spec.polish_rounds);
    for cand in candidates {
        // A draw that lands a defect on the qubit is simply skipped.
        if let Ok(cand) = cand {
            if best.as_ref().is_none_or(|b| cand.rms < b.rms) {
                best = Some(cand);
            }
        }
        history.push(best.as_ref().map_or(f64::INFINITY, |b| b.rms));
    }
    let mut best = best.ok_or_else(|| IrgmError::Domain("every restart was invalid".into()))?;

    let mut rng = rng_from_seed(derive_seed(seed, POLISH_STREAM));
    let mut model = fwd.model(&best.kernels);
    for _ in 0..spec.polish_rounds {
        for j in 0..n {
            for _ in 0..spec.polish_trials {
                let offset = draw_offset(&mut rng, spec.jitter_radius);
                let Ok(k_new) = fwd.kernel_y(j, &offset) else {
                    continue;
                };
                let dk = k_new - best.kernels[j];
                let trial: Vec<f64> = model
                    .iter()
                    .zip(&fwd.weights)
                    .map(|(g, w)| g + w[j] * dk)
                    .collect();
                let (c, rms) = best_scalar(&trial, &target.delta_f_Hz);
                if rms < best.rms {
                    best.jitter[j] = offset;
                    best.kernels[j] = k_new;
                    best.c = c;
                    best.rms = rms;
                    model = trial;
                }
            }
        }
        history.push(best.rms);
    }

    // Report from a fresh evaluation so accumulated updates leave no drift.
    let final_cand = evaluate(&fwd, target, best.jitter.clone())?;
    let model = fwd.model(&final_cand.kernels);
    let sample = jittered_sample(reference, &final_cand.jitter)?;
    Ok(TargetFit {
        label: target.label.clone(),
        c: final_cand.c,
        residual_rms_Hz: final_cand.rms,
        amplitude_Hz: target.amplitude(),
        jitter_nm: final_cand
            .jitter
            .iter()
            .map(|o| [m_to_nm(o[0]), m_to_nm(o[1])])
            .collect(),
        positions_nm: sample
            .defects
            .iter()
            .map(|d| d.position.map(m_to_nm).into())
            .collect(),
        model_delta_f_Hz: model.iter().map(|g| final_cand.c * g).collect(),
        history_rms_Hz: history,
        sample: Some(sample),
    })
}

/// Fit every target independently.
pub fn fit_curves(spec: &FitSpec) -> Result<FitResult> {
    spec.validate()?;
    let fits = spec
        .targets
        .par_iter()
        .enumerate()
        .map(|(i, t)| fit_target(spec, i, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(FitResult { fits })
}

/// Synthetic measurement: the curve of `reference` jittered with `seed`,
/// scaled by `c`. Returns the target and the jittered sample behind it.
pub fn synthetic_target(
    label: &str,
    reference: &SampleConfig,
    jitter_radius: f64,
    c: f64,
    seed: u64,
    temps: &[f64],
) -> Result<(FitTarget, SampleConfig)> {
    let jitter = draw_jitter(reference.n(), jitter_radius, seed);
    let sample = jittered_sample(reference, &jitter)?;
    let fwd = Forward::new(&sample, temps)?;
    let kernels = (0..sample.n())
        .map(|j| fwd.kernel_y(j, &[0.0, 0.0]))
        .collect::<Result<Vec<f64>>>()?;
    let target = FitTarget {
        label: label.to_string(),
        T_K: temps.to_vec(),
        delta_f_Hz: fwd.model(&kernels).iter().map(|g| c * g).collect(),
    };
    Ok((target, sample))
}
