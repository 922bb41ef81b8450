//! Closed-form thermal averages for independent defects and brute-force
//! enumeration for small interacting systems.

use nalgebra::Vector3;

use crate::curve::{CurveMethod, FieldCurve, TemperatureGrid};
use crate::error::{IrgmError, Result};
use crate::physics::{PrecomputedSample, SpinState};
use crate::units::K_B;

/// Largest system enumerated state by state.
pub const MAX_ENUMERATION_N: usize = 20;

/// Boltzmann average of one independent spin in local field `h` (J) at `t` (K).
///
/// At `t = 0` this is the sign of `h`, and exactly 0 for `h = 0`.
pub fn exact_spin_average(h: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(IrgmError::Domain(format!("negative temperature {t}")));
    }
    if t == 0.0 {
        return Ok(if h > 0.0 {
            1.0
        } else if h < 0.0 {
            -1.0
        } else {
            0.0
        });
    }
    Ok((h / (K_B * t)).tanh())
}

/// Field curve of the non-interacting model.
pub fn exact_curve(pre: &PrecomputedSample, grid: &TemperatureGrid) -> Result<FieldCurve> {
    if pre.is_interacting() {
        return Err(IrgmError::Misuse(
            "the closed-form solution only applies with the interaction switched off".into(),
        ));
    }
    let spins_at = |t: f64| -> Result<Vec<f64>> {
        pre.local_fields
            .iter()
            .map(|&h| exact_spin_average(h, t))
            .collect()
    };
    let mut field = Vec::with_capacity(grid.len());
    let mut spin_averages = Vec::with_capacity(grid.len());
    for &t in grid.temps() {
        let s = spins_at(t)?;
        field.push(pre.qubit_field(&s)?);
        spin_averages.push(s);
    }
    let f0_ref = pre.qubit_field(&spins_at(0.0)?)?;
    Ok(FieldCurve {
        grid: grid.clone(),
        field,
        field_smoothed: None,
        field_err: None,
        method: CurveMethod::Exact,
        f0_ref,
        spin_averages,
        spin_errors: None,
    })
}

/// Energies of all 2^N states in Gray-code order, plus the state bits
/// (bit j set means s_j = +1).
struct Enumeration {
    energies: Vec<f64>,
    bits: Vec<u32>,
    e_min: f64,
    /// Energies within this of `e_min` count as degenerate ground states.
    tie_tolerance: f64,
}

fn enumerate_states(pre: &PrecomputedSample) -> Result<Enumeration> {
    let n = pre.n();
    if n > MAX_ENUMERATION_N {
        return Err(IrgmError::TooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    let count = 1usize << n;
    let mut state = SpinState::from_bits(0, n);
    let mut eff: Vec<f64> = (0..n).map(|j| pre.effective_field(&state, j)).collect();
    let mut energy = pre.total_energy(&state)?;
    let mut energies = Vec::with_capacity(count);
    let mut bits = Vec::with_capacity(count);
    energies.push(energy);
    bits.push(0u32);
    let mut gray = 0u32;
    for i in 1..count {
        let j = i.trailing_zeros() as usize;
        let s_old = f64::from(state.get(j));
        energy += 2.0 * s_old * eff[j];
        for (e, c) in eff.iter_mut().zip(pre.coupling_row(j)) {
            *e -= 4.0 * c * s_old;
        }
        state.flip(j);
        gray ^= 1 << j;
        energies.push(energy);
        bits.push(gray);
    }
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = pre.local_fields.iter().map(|h| h.abs()).sum::<f64>()
        + (0..n)
            .map(|j| pre.coupling_row(j).iter().map(|c| c.abs()).sum::<f64>())
            .sum::<f64>();
    Ok(Enumeration {
        energies,
        bits,
        e_min,
        tie_tolerance: 1e-11 * scale.max(f64::MIN_POSITIVE),
    })
}

impl Enumeration {
    fn spin_averages(&self, n: usize, t: f64) -> Vec<f64> {
        let mut z = 0.0;
        let mut up = vec![0.0; n];
        for (&e, &b) in self.energies.iter().zip(&self.bits) {
            let w = if t == 0.0 {
                if e - self.e_min <= self.tie_tolerance {
                    1.0
                } else {
                    continue;
                }
            } else {
                (-(e - self.e_min) / (K_B * t)).exp()
            };
            if w == 0.0 {
                continue;
            }
            z += w;
            let mut rest = b;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                up[j] += w;
                rest &= rest - 1;
            }
        }
        up.iter().map(|u| (2.0 * u - z) / z).collect()
    }
}

/// Exact Boltzmann averages of the interacting model by summing all 2^N states.
pub fn enumerate_thermal(pre: &PrecomputedSample, grid: &TemperatureGrid) -> Result<FieldCurve> {
    let en = enumerate_states(pre)?;
    let n = pre.n();
    let mut field = Vec::with_capacity(grid.len());
    let mut spin_averages = Vec::with_capacity(grid.len());
    for &t in grid.temps() {
        let s = en.spin_averages(n, t);
        field.push(pre.qubit_field(&s)?);
        spin_averages.push(s);
    }
    let f0_ref = pre.qubit_field(&en.spin_averages(n, 0.0))?;
    Ok(FieldCurve {
        grid: grid.clone(),
        field,
        field_smoothed: None,
        field_err: None,
        method: CurveMethod::Enumeration,
        f0_ref,
        spin_averages,
        spin_errors: None,
    })
}

/// Exact minimizer of the energy over all 2^N states.
///
/// Degenerate minima resolve to the lexicographically smallest spin vector,
/// comparing s_0 first with -1 < +1.
pub fn ground_state_exhaustive(pre: &PrecomputedSample) -> Result<(SpinState, f64)> {
    let en = enumerate_states(pre)?;
    let n = pre.n();
    // Reversing the bit order turns lexicographic order into integer order.
    let lex_key = |b: u32| -> u32 { (0..n).fold(0u32, |acc, j| (acc << 1) | (b >> j & 1)) };
    let best = en
        .energies
        .iter()
        .zip(&en.bits)
        .filter(|(e, _)| **e - en.e_min <= en.tie_tolerance)
        .map(|(_, &b)| b)
        .min_by_key(|&b| lex_key(b))
        .expect("at least one state");
    let state = SpinState::from_bits(u64::from(best), n);
    let energy = pre.total_energy(&state)?;
    Ok((state, energy))
}

/// Field of the T = 0 limit of the non-interacting model.
pub fn non_interacting_f0(pre: &PrecomputedSample) -> Result<Vector3<f64>> {
    let s: Vec<f64> = pre
        .local_fields
        .iter()
        .map(|&h| exact_spin_average(h, 0.0))
        .collect::<Result<_>>()?;
    pre.qubit_field(&s)
}
