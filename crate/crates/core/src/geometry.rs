//! Disorder realizations for the three defect pictures.
//!
//! A [`SampleConfig`] is a pure function of `(params, picture, options, seed)`:
//! all draws come from a single seeded stream in a fixed order, so the same
//! inputs reproduce the same defect list bit-for-bit.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{IrgmError, Result};
use crate::rng::{rng_from_seed, SimRng};
use crate::units::{cm_to_debye, debye_to_cm, m_to_nm, nm_to_m, ELEMENTARY_CHARGE, NM};

/// Global model constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ParamsWire", try_from = "ParamsWire")]
pub struct PhysicalParams {
    /// Dipole magnitude, C m.
    pub p0: f64,
    pub epsilon_r: f64,
    pub n_defects: usize,
    /// Per-component standard deviation of the random field, V/m.
    pub delta_e0: f64,
    /// Multiplier on the pair interaction; 0 switches it off.
    pub interaction_scale: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            p0: ELEMENTARY_CHARGE * NM,
            epsilon_r: 11.0,
            n_defects: 30,
            delta_e0: 1e4,
            interaction_scale: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(IrgmError::InvalidParams(msg.to_string()));
        if !(self.p0.is_finite() && self.p0 > 0.0) {
            return bad("p0 must be positive");
        }
        if !(self.epsilon_r.is_finite() && self.epsilon_r >= 1.0) {
            return bad("epsilon_r must be >= 1");
        }
        if self.n_defects < 1 {
            return bad("n_defects must be >= 1");
        }
        if !(self.delta_e0.is_finite() && self.delta_e0 >= 0.0) {
            return bad("delta_e0 must be >= 0");
        }
        if !(self.interaction_scale.is_finite() && self.interaction_scale >= 0.0) {
            return bad("interaction_scale must be >= 0");
        }
        Ok(())
    }

    pub fn with_interaction_scale(&self, lambda: f64) -> Self {
        Self {
            interaction_scale: lambda,
            ..self.clone()
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsWire {
    p0_debye: f64,
    epsilon_r: f64,
    n_defects: usize,
    #[serde(rename = "delta_e0_V_per_m")]
    delta_e0_v_per_m: f64,
    #[serde(default = "one")]
    interaction_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl From<PhysicalParams> for ParamsWire {
    fn from(p: PhysicalParams) -> Self {
        Self {
            p0_debye: cm_to_debye(p.p0),
            epsilon_r: p.epsilon_r,
            n_defects: p.n_defects,
            delta_e0_v_per_m: p.delta_e0,
            interaction_scale: p.interaction_scale,
        }
    }
}

impl TryFrom<ParamsWire> for PhysicalParams {
    type Error = IrgmError;

    fn try_from(w: ParamsWire) -> Result<Self> {
        let p = Self {
            p0: debye_to_cm(w.p0_debye),
            epsilon_r: w.epsilon_r,
            n_defects: w.n_defects,
            delta_e0: w.delta_e0_v_per_m,
            interaction_scale: w.interaction_scale,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    Trap,
    RandomDipole,
    SphericalShell,
}

impl Picture {
    pub const ALL: [Picture; 3] = [
        Picture::Trap,
        Picture::RandomDipole,
        Picture::SphericalShell,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Picture::Trap => "trap",
            Picture::RandomDipole => "random_dipole",
            Picture::SphericalShell => "spherical_shell",
        }
    }
}

impl std::fmt::Display for Picture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Picture {
    type Err = IrgmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "trap" => Ok(Picture::Trap),
            "random_dipole" => Ok(Picture::RandomDipole),
            "spherical_shell" | "shell" => Ok(Picture::SphericalShell),
            other => Err(IrgmError::Parse(format!("unknown picture '{other}'"))),
        }
    }
}

/// How positions inside the spherical shell are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellSampling {
    /// Density proportional to r^2 sin(theta).
    #[default]
    Volume,
    /// r, theta and phi each uniform in their ranges.
    Coordinate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldDistribution {
    /// Independent zero-mean normal components with standard deviation delta_e0.
    #[default]
    Gaussian,
    /// Uniform in a ball of radius sqrt(5) delta_e0 (same per-component variance).
    UniformBall,
}

/// Geometric ranges and sampling switches. Lengths in nanometers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorOptions {
    pub half_width_nm: f64,
    pub trap_z_nm: f64,
    pub layer_z_min_nm: f64,
    pub layer_z_max_nm: f64,
    pub shell_r_min_nm: f64,
    pub shell_r_max_nm: f64,
    pub min_separation_nm: f64,
    pub shell_sampling: ShellSampling,
    pub field_distribution: FieldDistribution,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self {
            half_width_nm: 150.0,
            trap_z_nm: 50.0,
            layer_z_min_nm: 30.0,
            layer_z_max_nm: 50.0,
            shell_r_min_nm: 60.0,
            shell_r_max_nm: 80.0,
            min_separation_nm: 1.0,
            shell_sampling: ShellSampling::Volume,
            field_distribution: FieldDistribution::Gaussian,
        }
    }
}

impl GeneratorOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.half_width_nm > 0.0
            && self.trap_z_nm.is_finite()
            && self.layer_z_min_nm < self.layer_z_max_nm
            && 0.0 < self.shell_r_min_nm
            && self.shell_r_min_nm < self.shell_r_max_nm
            && self.min_separation_nm >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(IrgmError::InvalidParams(
                "inconsistent generator ranges".into(),
            ))
        }
    }
}

/// One two-level-system defect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "DefectWire", from = "DefectWire")]
pub struct DefectSite {
    /// Position relative to the qubit at the origin, m.
    pub position: Vector3<f64>,
    /// Unit dipole direction.
    pub orientation: Vector3<f64>,
    /// Random local field, V/m.
    pub random_field: Vector3<f64>,
}

#[derive(Serialize, Deserialize)]
struct DefectWire {
    position_nm: [f64; 3],
    orientation: [f64; 3],
    #[serde(rename = "random_field_V_per_m")]
    random_field_v_per_m: [f64; 3],
}

impl From<DefectSite> for DefectWire {
    fn from(d: DefectSite) -> Self {
        Self {
            position_nm: d.position.map(m_to_nm).into(),
            orientation: d.orientation.into(),
            random_field_v_per_m: d.random_field.into(),
        }
    }
}

impl From<DefectWire> for DefectSite {
    fn from(w: DefectWire) -> Self {
        Self {
            position: Vector3::from(w.position_nm).map(nm_to_m),
            orientation: Vector3::from(w.orientation),
            random_field: Vector3::from(w.random_field_v_per_m),
        }
    }
}

/// A full disorder realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub picture: Picture,
    pub params: PhysicalParams,
    #[serde(default)]
    pub generator: GeneratorOptions,
    pub defects: Vec<DefectSite>,
}

impl SampleConfig {
    pub fn n(&self) -> usize {
        self.defects.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.defects.len() != self.params.n_defects {
            return Err(IrgmError::InvalidParams(format!(
                "sample lists {} defects but n_defects = {}",
                self.defects.len(),
                self.params.n_defects
            )));
        }
        for (j, d) in self.defects.iter().enumerate() {
            if (d.orientation.norm() - 1.0).abs() > 1e-9 {
                return Err(IrgmError::InvalidParams(format!(
                    "defect {j} orientation is not a unit vector"
                )));
            }
            if d.position.norm() == 0.0 {
                return Err(IrgmError::InvalidParams(format!(
                    "defect {j} sits on the qubit"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sample: SampleConfig = serde_json::from_str(s)?;
        sample.validate()?;
        Ok(sample)
    }

    /// Same defects, different interaction multiplier.
    pub fn with_interaction_scale(&self, lambda: f64) -> Self {
        Self {
            params: self.params.with_interaction_scale(lambda),
            ..self.clone()
        }
    }
}

const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Uniform direction on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let rho = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
}

/// One random-field vector, V/m.
pub fn draw_random_field<R: Rng + ?Sized>(
    params: &PhysicalParams,
    distribution: FieldDistribution,
    rng: &mut R,
) -> Vector3<f64> {
    let sigma = params.delta_e0;
    match distribution {
        FieldDistribution::Gaussian => {
            let mut v = Vector3::zeros();
            for c in v.iter_mut() {
                let g: f64 = StandardNormal.sample(rng);
                *c = sigma * g;
            }
            v
        }
        FieldDistribution::UniformBall => {
            let radius = 5f64.sqrt() * sigma;
            let u: f64 = rng.random();
            random_unit_vector(rng) * (radius * u.cbrt())
        }
    }
}

fn draw_position<R: Rng + ?Sized>(
    picture: Picture,
    o: &GeneratorOptions,
    rng: &mut R,
) -> Vector3<f64> {
    let w = o.half_width_nm;
    let nm = match picture {
        Picture::Trap => Vector3::new(
            rng.random_range(-w..w),
            rng.random_range(-w..w),
            o.trap_z_nm,
        ),
        Picture::RandomDipole => Vector3::new(
            rng.random_range(-w..w),
            rng.random_range(-w..w),
            rng.random_range(o.layer_z_min_nm..o.layer_z_max_nm),
        ),
        Picture::SphericalShell => {
            let (r1, r2) = (o.shell_r_min_nm, o.shell_r_max_nm);
            match o.shell_sampling {
                ShellSampling::Volume => {
                    let u: f64 = rng.random();
                    let r = (r1.powi(3) + u * (r2.powi(3) - r1.powi(3))).cbrt();
                    random_unit_vector(rng) * r
                }
                ShellSampling::Coordinate => {
                    let r = rng.random_range(r1..r2);
                    let theta: f64 = rng.random_range(0.0..PI);
                    let phi: f64 = rng.random_range(0.0..2.0 * PI);
                    Vector3::new(
                        r * theta.sin() * phi.cos(),
                        r * theta.sin() * phi.sin(),
                        r * theta.cos(),
                    )
                }
            }
        }
    };
    nm.map(nm_to_m)
}

fn draw_orientation<R: Rng + ?Sized>(picture: Picture, rng: &mut R) -> Vector3<f64> {
    match picture {
        Picture::Trap => Vector3::z(),
        Picture::RandomDipole | Picture::SphericalShell => random_unit_vector(rng),
    }
}

fn too_close(candidate: &Vector3<f64>, placed: &[DefectSite], min_sep: f64) -> bool {
    candidate.norm() <= min_sep.max(f64::MIN_POSITIVE)
        || placed
            .iter()
            .any(|d| (d.position - candidate).norm() < min_sep)
}

/// Generate a realization of any picture with explicit generator options.
pub fn generate_with(
    picture: Picture,
    params: &PhysicalParams,
    options: &GeneratorOptions,
    seed: u64,
) -> Result<SampleConfig> {
    params.validate()?;
    options.validate()?;
    let mut rng: SimRng = rng_from_seed(seed);
    let min_sep = nm_to_m(options.min_separation_nm);
    let mut defects: Vec<DefectSite> = Vec::with_capacity(params.n_defects);
    for j in 0..params.n_defects {
        let mut attempts = 0;
        let position = loop {
            let p = draw_position(picture, options, &mut rng);
            if !too_close(&p, &defects, min_sep) {
                break p;
            }
            attempts += 1;
            if attempts >= MAX_PLACEMENT_ATTEMPTS {
                return Err(IrgmError::InvalidParams(format!(
                    "could not place defect {j} at least {} nm from the others",
                    options.min_separation_nm
                )));
            }
        };
        let orientation = draw_orientation(picture, &mut rng);
        let random_field = draw_random_field(params, options.field_distribution, &mut rng);
        defects.push(DefectSite {
            position,
            orientation,
            random_field,
        });
    }
    Ok(SampleConfig {
        seed,
        picture,
        params: params.clone(),
        generator: options.clone(),
        defects,
    })
}

pub fn generate(picture: Picture, params: &PhysicalParams, seed: u64) -> Result<SampleConfig> {
    generate_with(picture, params, &GeneratorOptions::default(), seed)
}

/// Charge traps in a thin layer, all dipoles along +z.
pub fn generate_trap(params: &PhysicalParams, seed: u64) -> Result<SampleConfig> {
    generate(Picture::Trap, params, seed)
}

/// Point-defect dipoles in an oxide slab with isotropic orientations.
pub fn generate_random_dipole(params: &PhysicalParams, seed: u64) -> Result<SampleConfig> {
    generate(Picture::RandomDipole, params, seed)
}

/// Defects surrounding the qubit in a spherical shell.
pub fn generate_spherical_shell(params: &PhysicalParams, seed: u64) -> Result<SampleConfig> {
    generate(Picture::SphericalShell, params, seed)
}
