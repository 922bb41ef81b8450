//! Electrostatic kernels and the random-field dipole Hamiltonian
//!
//! ```text
//! H = -p0 sum_j s_j E_j . p_j  -  p0^2 / (8 pi eps) sum_{j != k} s_j s_k V_jk
//! ```
//!
//! with `eps = eps0 * eps_r`. We store the per-pair coupling
//! `J_jk = lambda p0^2 V_jk / (8 pi eps)` so that the full double sum over
//! ordered pairs collapses to `H_int = -2 sum_{j<k} J_jk s_j s_k`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{IrgmError, Result};
use crate::geometry::SampleConfig;
use crate::units::{EPSILON_0, K_B};

/// Ising configuration, every entry exactly +1 or -1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinState(Vec<i8>);

impl SpinState {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(IrgmError::Domain("spins must be +1 or -1".into()));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Spin j is +1 iff bit j of `bits` is set.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self(
            (0..n)
                .map(|j| if bits >> j & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> i8 {
        self.0[j]
    }

    pub fn flip(&mut self, j: usize) {
        self.0[j] = -self.0[j];
    }

    pub fn flipped(&self, j: usize) -> Self {
        let mut s = self.clone();
        s.flip(j);
        s
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }
}

/// Field at the origin of a point dipole `p` (C m) located at `r` (m), V/m.
pub fn dipole_field(p: &Vector3<f64>, r: &Vector3<f64>, epsilon_r: f64) -> Result<Vector3<f64>> {
    let r2 = r.norm_squared();
    if r2 == 0.0 || !r2.is_finite() {
        return Err(IrgmError::Domain(
            "dipole field evaluated at zero separation".into(),
        ));
    }
    let r5 = r2 * r2 * r2.sqrt();
    let numerator = r * (3.0 * p.dot(r)) - p * r2;
    Ok(numerator / (4.0 * PI * EPSILON_0 * epsilon_r * r5))
}

/// Geometric dipole-dipole factor V_jk for unit moments separated by `d = r_j - r_k`, 1/m^3.
pub fn dipole_coupling(pj: &Vector3<f64>, pk: &Vector3<f64>, d: &Vector3<f64>) -> Result<f64> {
    let d2 = d.norm_squared();
    if d2 == 0.0 {
        return Err(IrgmError::Domain("coincident defects".into()));
    }
    let d5 = d2 * d2 * d2.sqrt();
    Ok((3.0 * pj.dot(d) * pk.dot(d) - pj.dot(pk) * d2) / d5)
}

/// Everything the solvers need, computed once per sample.
#[derive(Clone, Debug)]
pub struct PrecomputedSample {
    n: usize,
    /// F_j, V/m per unit s_j.
    pub field_kernels: Vec<Vector3<f64>>,
    /// h_j = p0 (p_j . E_j), J.
    pub local_fields: Vec<f64>,
    /// Row-major N x N couplings J_jk, J.
    interaction: Vec<f64>,
    pub interaction_scale: f64,
    pub p0: f64,
    pub orientations: Vec<Vector3<f64>>,
}

impl PrecomputedSample {
    pub fn new(sample: &SampleConfig) -> Result<Self> {
        sample.params.validate()?;
        let n = sample.defects.len();
        let p = &sample.params;
        let eps = EPSILON_0 * p.epsilon_r;
        let mut field_kernels = Vec::with_capacity(n);
        let mut local_fields = Vec::with_capacity(n);
        for d in &sample.defects {
            field_kernels.push(dipole_field(
                &(d.orientation * p.p0),
                &d.position,
                p.epsilon_r,
            )?);
            local_fields.push(p.p0 * d.orientation.dot(&d.random_field));
        }
        let mut interaction = vec![0.0; n * n];
        let prefactor = p.interaction_scale * p.p0 * p.p0 / (8.0 * PI * eps);
        for j in 0..n {
            for k in (j + 1)..n {
                let a = &sample.defects[j];
                let b = &sample.defects[k];
                let v = dipole_coupling(&a.orientation, &b.orientation, &(a.position - b.position))
                    .map_err(|_| IrgmError::Domain(format!("defects {j} and {k} coincide")))?;
                let c = prefactor * v;
                interaction[j * n + k] = c;
                interaction[k * n + j] = c;
            }
        }
        Ok(Self {
            n,
            field_kernels,
            local_fields,
            interaction,
            interaction_scale: p.interaction_scale,
            p0: p.p0,
            orientations: sample.defects.iter().map(|d| d.orientation).collect(),
        })
    }

    /// Build directly from kernels, fields and a symmetric coupling matrix.
    /// Intended for hand-constructed test systems.
    pub fn from_parts(
        field_kernels: Vec<Vector3<f64>>,
        local_fields: Vec<f64>,
        couplings: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = field_kernels.len();
        if local_fields.len() != n || couplings.len() != n || couplings.iter().any(|r| r.len() != n)
        {
            return Err(IrgmError::InvalidParams("dimension mismatch".into()));
        }
        let mut interaction = vec![0.0; n * n];
        let mut any = false;
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    continue;
                }
                if couplings[j][k] != couplings[k][j] {
                    return Err(IrgmError::InvalidParams(
                        "couplings must be symmetric".into(),
                    ));
                }
                interaction[j * n + k] = couplings[j][k];
                any |= couplings[j][k] != 0.0;
            }
        }
        Ok(Self {
            n,
            field_kernels,
            local_fields,
            interaction,
            interaction_scale: if any { 1.0 } else { 0.0 },
            p0: 1.0,
            orientations: vec![Vector3::z(); n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        self.interaction[j * self.n + k]
    }

    pub fn coupling_row(&self, j: usize) -> &[f64] {
        &self.interaction[j * self.n..(j + 1) * self.n]
    }

    pub fn is_interacting(&self) -> bool {
        self.interaction.iter().any(|&c| c != 0.0)
    }

    /// T_j = |h_j| / kB, K.
    pub fn turn_off_temperatures(&self) -> Vec<f64> {
        self.local_fields.iter().map(|h| h.abs() / K_B).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(IrgmError::InvalidParams(format!(
                "state has {len} entries, sample has {}",
                self.n
            )));
        }
        Ok(())
    }

    /// (H_r, H_int) in joules.
    pub fn energy_parts(&self, state: &SpinState) -> Result<(f64, f64)> {
        self.check_len(state.len())?;
        let s = state.spins();
        let h_r = -s
            .iter()
            .zip(&self.local_fields)
            .map(|(&sj, h)| f64::from(sj) * h)
            .sum::<f64>();
        let mut pair = 0.0;
        for j in 0..self.n {
            let row = self.coupling_row(j);
            let mut acc = 0.0;
            for k in (j + 1)..self.n {
                acc += row[k] * f64::from(s[k]);
            }
            pair += f64::from(s[j]) * acc;
        }
        Ok((h_r, -2.0 * pair))
    }

    pub fn total_energy(&self, state: &SpinState) -> Result<f64> {
        let (a, b) = self.energy_parts(state)?;
        Ok(a + b)
    }

    /// h_j + 2 sum_k J_jk s_k: the flip cost of spin j is 2 s_j times this.
    pub fn effective_field(&self, state: &SpinState, j: usize) -> f64 {
        let row = self.coupling_row(j);
        let s = state.spins();
        let mut acc = 0.0;
        for k in 0..self.n {
            acc += row[k] * f64::from(s[k]);
        }
        self.local_fields[j] + 2.0 * acc
    }

    /// E(state with s_j flipped) - E(state), J.
    pub fn flip_delta(&self, state: &SpinState, j: usize) -> Result<f64> {
        self.check_len(state.len())?;
        if j >= self.n {
            return Err(IrgmError::IndexOutOfRange {
                index: j,
                len: self.n,
            });
        }
        Ok(2.0 * f64::from(state.get(j)) * self.effective_field(state, j))
    }

    /// Field at the qubit for given spin averages, V/m.
    pub fn qubit_field(&self, s_avg: &[f64]) -> Result<Vector3<f64>> {
        self.check_len(s_avg.len())?;
        if let Some(bad) = s_avg.iter().find(|s| !(s.abs() <= 1.0 + 1e-9)) {
            return Err(IrgmError::Domain(format!(
                "spin average {bad} outside [-1, 1]"
            )));
        }
        Ok(self
            .field_kernels
            .iter()
            .zip(s_avg)
            .fold(Vector3::zeros(), |acc, (f, s)| acc + f * *s))
    }

    pub fn state_field(&self, state: &SpinState) -> Vector3<f64> {
        self.field_kernels
            .iter()
            .zip(state.spins())
            .fold(Vector3::zeros(), |acc, (f, &s)| acc + f * f64::from(s))
    }

    /// Per-defect random-field and interaction temperature scales at `ground`.
    pub fn energy_scales(&self, ground: &SpinState) -> Result<EnergyScales> {
        let (h_r, h_int) = self.energy_parts(ground)?;
        let nk = self.n as f64 * K_B;
        Ok(EnergyScales {
            t_r: h_r.abs() / nk,
            t_int: h_int.abs() / nk,
        })
    }
}

/// Random-field and interaction scales, K.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyScales {
    pub t_r: f64,
    pub t_int: f64,
}

impl EnergyScales {
    /// Scales from mean energies, e.g. thermal averages sampled at finite T.
    pub fn from_mean_energies(mean_h_r: f64, mean_h_int: f64, n: usize) -> Self {
        let nk = n as f64 * K_B;
        Self {
            t_r: mean_h_r.abs() / nk,
            t_int: mean_h_int.abs() / nk,
        }
    }
}
