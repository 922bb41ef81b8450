//! Single-spin-flip Metropolis sampling of the interacting model.
//!
//! A [`Chain`] keeps the effective field `h_j + 2 sum_k J_jk s_k` of every
//! defect up to date, so a proposal costs O(1) and an accepted flip O(N).

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveMethod, FieldCurve, TemperatureGrid};
use crate::error::{IrgmError, Result};
use crate::physics::{EnergyScales, PrecomputedSample, SpinState};
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::units::K_B;

/// Stream index of the thermal sweep; annealing restarts use 0..restarts.
const CURVE_STREAM: u64 = 0x5EED_C0DE_0000_0001;
const THERMAL_STREAM: u64 = 0x5EED_C0DE_0000_0002;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McSchedule {
    pub equilibration_sweeps: usize,
    pub measurement_sweeps: usize,
    /// Strictly descending annealing temperatures, K.
    pub anneal_temps: Vec<f64>,
    pub anneal_sweeps_per_stage: usize,
    pub anneal_restarts: usize,
    pub rng_seed: u64,
    /// Batches used for batch-means error bars.
    pub batches: usize,
    /// Simulate all grid temperatures at once and swap configurations
    /// between neighbours. When false, temperatures are visited one at a time.
    pub replica_exchange: bool,
    /// Density of the geometric ladder of extra replicas above the grid. The
    /// ladder reaches the first annealing temperature or the largest
    /// single-flip energy of the sample, whichever is hotter, so that the top
    /// replica flips every spin freely.
    pub hot_replicas_per_decade: usize,
    /// Even/odd neighbour swap rounds after every sweep. With one round a
    /// configuration needs ~10^3 sweeps to cross a 100-point grid, longer
    /// than a batch, and the batch-means errors come out too small.
    pub swap_rounds: usize,
    /// Without replica exchange: carry the spin state from one grid
    /// temperature to the next (descending). When false every temperature
    /// starts from a fresh random state.
    pub carry_over: bool,
}

impl Default for McSchedule {
    fn default() -> Self {
        Self {
            equilibration_sweeps: 2_000,
            measurement_sweeps: 10_000,
            anneal_temps: geometric_descending(10.0, 0.01, 60),
            anneal_sweeps_per_stage: 50,
            anneal_restarts: 8,
            rng_seed: 0,
            batches: 20,
            replica_exchange: true,
            hot_replicas_per_decade: 8,
            swap_rounds: 16,
            carry_over: true,
        }
    }
}

/// `stages` temperatures from `t_hot` down to `t_cold`, evenly spaced in log T.
pub fn geometric_descending(t_hot: f64, t_cold: f64, stages: usize) -> Vec<f64> {
    if stages == 1 {
        return vec![t_cold];
    }
    let ratio = (t_cold / t_hot).powf(1.0 / (stages - 1) as f64);
    (0..stages).map(|i| t_hot * ratio.powi(i as i32)).collect()
}

impl McSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(IrgmError::InvalidParams(m.to_string()));
        if self.equilibration_sweeps < 1 || self.measurement_sweeps < 1 {
            return bad("sweep counts must be >= 1");
        }
        if self.anneal_restarts < 1 || self.anneal_sweeps_per_stage < 1 {
            return bad("annealing counts must be >= 1");
        }
        if self.batches < 2 {
            return bad("need at least two batches for error bars");
        }
        if self.replica_exchange && self.swap_rounds < 1 {
            return bad("replica exchange needs at least one swap round per sweep");
        }
        if self.anneal_temps.is_empty()
            || self
                .anneal_temps
                .iter()
                .any(|t| !(t.is_finite() && *t > 0.0))
        {
            return bad("annealing temperatures must be positive");
        }
        if self.anneal_temps.windows(2).any(|w| w[1] >= w[0]) {
            return bad("annealing temperatures must be strictly descending");
        }
        Ok(())
    }
}

/// `u < exp(x)` for x < 0. The bounds 1 + x <= exp(x) <= 1 / (1 - x) decide
/// most draws without the exponential; the margins keep rounding from ever
/// changing a decision.
#[inline]
fn accept_log_ratio(x: f64, u: f64) -> bool {
    if u < 1.0 + x - 1e-12 {
        true
    } else if u * (1.0 - x) > 1.0 + 1e-12 {
        false
    } else {
        u < x.exp()
    }
}

/// Metropolis acceptance probability of an energy change `delta` (J) at `t` (K).
pub fn acceptance_probability(delta: f64, t: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        (-delta / (K_B * t)).exp()
    }
}

/// A spin configuration with cached effective fields and energy parts.
pub struct Chain<'a> {
    pre: &'a PrecomputedSample,
    state: SpinState,
    eff: Vec<f64>,
    h_r: f64,
    h_int: f64,
}

impl<'a> Chain<'a> {
    pub fn new(pre: &'a PrecomputedSample, state: SpinState) -> Result<Self> {
        let (h_r, h_int) = pre.energy_parts(&state)?;
        let eff = (0..pre.n())
            .map(|j| pre.effective_field(&state, j))
            .collect();
        Ok(Self {
            pre,
            state,
            eff,
            h_r,
            h_int,
        })
    }

    pub fn random<R: Rng + ?Sized>(pre: &'a PrecomputedSample, rng: &mut R) -> Self {
        let spins = (0..pre.n())
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        Self::new(pre, SpinState::new(spins).expect("valid spins")).expect("matching length")
    }

    pub fn state(&self) -> &SpinState {
        &self.state
    }

    pub fn into_state(self) -> SpinState {
        self.state
    }

    pub fn energy(&self) -> f64 {
        self.h_r + self.h_int
    }

    /// (H_r, H_int), J.
    pub fn energy_parts(&self) -> (f64, f64) {
        (self.h_r, self.h_int)
    }

    #[inline]
    pub fn delta(&self, j: usize) -> f64 {
        2.0 * f64::from(self.state.get(j)) * self.eff[j]
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        let s_old = f64::from(self.state.get(j));
        let d_r = 2.0 * s_old * self.pre.local_fields[j];
        let delta = 2.0 * s_old * self.eff[j];
        self.h_r += d_r;
        self.h_int += delta - d_r;
        for (e, c) in self.eff.iter_mut().zip(self.pre.coupling_row(j)) {
            *e -= 4.0 * c * s_old;
        }
        self.state.flip(j);
    }

    /// N single-flip proposals at random sites. Returns the number accepted.
    pub fn sweep<R: Rng + ?Sized>(&mut self, beta: f64, rng: &mut R) -> usize {
        let n = self.eff.len();
        let mut accepted = 0;
        for _ in 0..n {
            let j = rng.random_range(0..n);
            let delta = self.delta(j);
            if delta <= 0.0 || accept_log_ratio(-delta * beta, rng.random::<f64>()) {
                self.flip(j);
                accepted += 1;
            }
        }
        accepted
    }

    /// Flip any spin that lowers the energy until none does.
    pub fn quench(&mut self) {
        loop {
            let mut improved = false;
            for j in 0..self.eff.len() {
                if self.delta(j) < 0.0 {
                    self.flip(j);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
}

/// One Metropolis sweep at temperature `t`. Returns the number of accepted flips.
pub fn metropolis_sweep<R: Rng + ?Sized>(
    pre: &PrecomputedSample,
    state: &mut SpinState,
    t: f64,
    rng: &mut R,
) -> Result<usize> {
    if !(t > 0.0) {
        return Err(IrgmError::Domain(format!(
            "Metropolis sweep needs T > 0, got {t}"
        )));
    }
    let mut chain = Chain::new(pre, state.clone())?;
    let accepted = chain.sweep(1.0 / (K_B * t), rng);
    *state = chain.into_state();
    Ok(accepted)
}

/// Best configuration over independent annealing runs, each finished by a
/// zero-temperature quench to a single-flip-stable minimum.
pub fn anneal_ground_state(
    pre: &PrecomputedSample,
    schedule: &McSchedule,
) -> Result<(SpinState, f64)> {
    schedule.validate()?;
    let mut best: Option<(SpinState, f64)> = None;
    for restart in 0..schedule.anneal_restarts {
        let mut rng = rng_from_seed(derive_seed(schedule.rng_seed, restart as u64));
        let mut chain = Chain::random(pre, &mut rng);
        for &t in &schedule.anneal_temps {
            let beta = 1.0 / (K_B * t);
            for _ in 0..schedule.anneal_sweeps_per_stage {
                chain.sweep(beta, &mut rng);
            }
        }
        chain.quench();
        let state = chain.into_state();
        let energy = pre.total_energy(&state)?;
        if best.as_ref().is_none_or(|(_, e)| energy < *e) {
            best = Some((state, energy));
        }
    }
    Ok(best.expect("at least one restart"))
}

struct TemperatureStats {
    spins: Vec<f64>,
    spin_err: Vec<f64>,
    field: Vector3<f64>,
    field_err: Vector3<f64>,
}

/// Batch means of spin averages, one entry per batch, and the total sweep count.
fn batch_statistics(
    pre: &PrecomputedSample,
    batch_spins: &[Vec<f64>],
    total: usize,
) -> Result<TemperatureStats> {
    let n = pre.n();
    let b = batch_spins.len() as f64;
    let spins: Vec<f64> = (0..n)
        .map(|j| batch_spins.iter().map(|s| s[j]).sum::<f64>() / b)
        .collect();
    // A chain of `total` sweeps cannot resolve flip probabilities much below
    // 1/total; that resolution bounds the error when a spin never moved.
    let resolution = 1.0 / total as f64;
    let spin_err: Vec<f64> = (0..n)
        .map(|j| {
            let var = batch_spins
                .iter()
                .map(|s| (s[j] - spins[j]).powi(2))
                .sum::<f64>()
                / (b - 1.0);
            (var / b + resolution * resolution).sqrt()
        })
        .collect();
    let field = pre.qubit_field(&spins)?;
    let batch_fields: Vec<Vector3<f64>> = batch_spins
        .iter()
        .map(|s| pre.qubit_field(s))
        .collect::<Result<_>>()?;
    let mut field_err = Vector3::zeros();
    for c in 0..3 {
        let var = batch_fields
            .iter()
            .map(|f| (f[c] - field[c]).powi(2))
            .sum::<f64>()
            / (b - 1.0);
        let floor = resolution * pre.field_kernels.iter().map(|f| f[c].abs()).sum::<f64>();
        field_err[c] = (var / b + floor * floor).sqrt();
    }
    Ok(TemperatureStats {
        spins,
        spin_err,
        field,
        field_err,
    })
}

fn batch_layout(schedule: &McSchedule) -> (usize, usize) {
    let batches = schedule.batches.min(schedule.measurement_sweeps).max(2);
    (batches, (schedule.measurement_sweeps / batches).max(1))
}

fn sample_temperature(
    pre: &PrecomputedSample,
    chain: &mut Chain<'_>,
    t: f64,
    schedule: &McSchedule,
    rng: &mut SimRng,
) -> Result<TemperatureStats> {
    let n = pre.n();
    let beta = 1.0 / (K_B * t);
    for _ in 0..schedule.equilibration_sweeps {
        chain.sweep(beta, rng);
    }
    let (batches, per_batch) = batch_layout(schedule);
    let mut batch_spins: Vec<Vec<f64>> = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut acc = vec![0i64; n];
        for _ in 0..per_batch {
            chain.sweep(beta, rng);
            for (a, &s) in acc.iter_mut().zip(chain.state().spins()) {
                *a += i64::from(s);
            }
        }
        batch_spins.push(acc.iter().map(|&a| a as f64 / per_batch as f64).collect());
    }
    batch_statistics(pre, &batch_spins, per_batch * batches)
}

/// Largest energy a single flip can cost, in K: `|h_j| + 2 sum_k |J_jk|`.
fn max_flip_temperature(pre: &PrecomputedSample) -> f64 {
    let n = pre.n();
    (0..n)
        .map(|j| {
            pre.local_fields[j].abs() + 2.0 * (0..n).map(|k| pre.coupling(j, k).abs()).sum::<f64>()
        })
        .fold(0.0, f64::max)
        / K_B
}

/// Ascending replica temperatures: the positive grid points followed by the
/// hot auxiliary ladder.
fn replica_ladder(pre: &PrecomputedSample, grid_temps: &[f64], schedule: &McSchedule) -> Vec<f64> {
    let mut temps = grid_temps.to_vec();
    let t_max = *temps.last().expect("nonempty grid");
    let t_hot = schedule.anneal_temps[0].max(max_flip_temperature(pre));
    if schedule.hot_replicas_per_decade > 0 && t_hot > t_max {
        let count =
            ((t_hot / t_max).log10() * schedule.hot_replicas_per_decade as f64).ceil() as usize;
        let ratio = (t_hot / t_max).powf(1.0 / count as f64);
        temps.extend((1..=count).map(|i| t_max * ratio.powi(i as i32)));
    }
    temps
}

/// Replica-exchange sampling of every positive grid temperature.
fn sample_replicas(
    pre: &PrecomputedSample,
    grid_temps: &[f64],
    schedule: &McSchedule,
    rng: &mut SimRng,
) -> Result<Vec<TemperatureStats>> {
    let n = pre.n();
    let ladder = replica_ladder(pre, grid_temps, schedule);
    let betas: Vec<f64> = ladder.iter().map(|t| 1.0 / (K_B * t)).collect();
    let mut chains: Vec<Chain<'_>> = (0..ladder.len()).map(|_| Chain::random(pre, rng)).collect();
    let mut parity = 0;
    let mut step = |chains: &mut Vec<Chain<'_>>, rng: &mut SimRng| {
        for (chain, &beta) in chains.iter_mut().zip(&betas) {
            chain.sweep(beta, rng);
        }
        // Alternate even and odd neighbour pairs.
        for _ in 0..schedule.swap_rounds {
            for k in (parity..ladder.len().saturating_sub(1)).step_by(2) {
                let x = (betas[k] - betas[k + 1]) * (chains[k].energy() - chains[k + 1].energy());
                if x >= 0.0 || accept_log_ratio(x, rng.random::<f64>()) {
                    chains.swap(k, k + 1);
                }
            }
            parity ^= 1;
        }
    };
    for _ in 0..schedule.equilibration_sweeps {
        step(&mut chains, rng);
    }
    let m = grid_temps.len();
    let (batches, per_batch) = batch_layout(schedule);
    let mut batch_spins: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(batches); m];
    for _ in 0..batches {
        let mut acc = vec![vec![0i64; n]; m];
        for _ in 0..per_batch {
            step(&mut chains, rng);
            for (a, chain) in acc.iter_mut().zip(&chains) {
                for (x, &s) in a.iter_mut().zip(chain.state().spins()) {
                    *x += i64::from(s);
                }
            }
        }
        for (slot, a) in batch_spins.iter_mut().zip(acc) {
            slot.push(a.iter().map(|&x| x as f64 / per_batch as f64).collect());
        }
    }
    batch_spins
        .iter()
        .map(|b| batch_statistics(pre, b, per_batch * batches))
        .collect()
}

/// Thermal field curve of the interacting model.
///
/// By default all grid temperatures are sampled together with replica
/// exchange; otherwise they are visited from hottest to coldest. `f0_ref` is
/// the field of the annealed ground state.
pub fn mc_curve(
    pre: &PrecomputedSample,
    grid: &TemperatureGrid,
    schedule: &McSchedule,
) -> Result<FieldCurve> {
    let (ground, _) = anneal_ground_state(pre, schedule)?;
    mc_curve_from_ground(pre, grid, schedule, &ground)
}

/// [`mc_curve`] with the T = 0 reference configuration supplied by the caller.
pub fn mc_curve_from_ground(
    pre: &PrecomputedSample,
    grid: &TemperatureGrid,
    schedule: &McSchedule,
    ground: &SpinState,
) -> Result<FieldCurve> {
    schedule.validate()?;
    if ground.len() != pre.n() {
        return Err(IrgmError::InvalidParams(
            "ground state length does not match the sample".into(),
        ));
    }
    let f0_ref = pre.state_field(ground);
    let m = grid.len();
    let n = pre.n();
    let mut field = vec![Vector3::zeros(); m];
    let mut field_err = vec![Vector3::zeros(); m];
    let mut spin_averages = vec![vec![0.0; n]; m];
    let mut spin_errors = vec![vec![0.0; n]; m];
    let mut rng = rng_from_seed(derive_seed(schedule.rng_seed, CURVE_STREAM));
    let positive: Vec<usize> = (0..m).filter(|&i| grid.temps()[i] > 0.0).collect();
    for idx in (0..m).filter(|&i| grid.temps()[i] == 0.0) {
        field[idx] = f0_ref;
        spin_averages[idx] = ground.as_f64();
    }
    let mut store = |idx: usize, stats: TemperatureStats| {
        field[idx] = stats.field;
        field_err[idx] = stats.field_err;
        spin_averages[idx] = stats.spins;
        spin_errors[idx] = stats.spin_err;
    };
    if positive.is_empty() {
    } else if schedule.replica_exchange {
        let temps: Vec<f64> = positive.iter().map(|&i| grid.temps()[i]).collect();
        for (&idx, stats) in positive
            .iter()
            .zip(sample_replicas(pre, &temps, schedule, &mut rng)?)
        {
            store(idx, stats);
        }
    } else {
        let mut chain = Chain::random(pre, &mut rng);
        for &idx in positive.iter().rev() {
            if !schedule.carry_over {
                chain = Chain::random(pre, &mut rng);
            }
            store(
                idx,
                sample_temperature(pre, &mut chain, grid.temps()[idx], schedule, &mut rng)?,
            );
        }
    }
    Ok(FieldCurve {
        grid: grid.clone(),
        field,
        field_smoothed: None,
        field_err: Some(field_err),
        method: CurveMethod::MonteCarlo,
        f0_ref,
        spin_averages,
        spin_errors: Some(spin_errors),
    })
}

/// Energy scales from thermal averages of H_r and H_int at temperature `t`,
/// an alternative to evaluating them in the ground state.
pub fn thermal_energy_scales(
    pre: &PrecomputedSample,
    t: f64,
    schedule: &McSchedule,
) -> Result<EnergyScales> {
    schedule.validate()?;
    if !(t > 0.0) {
        return Err(IrgmError::Domain(format!(
            "thermal scales need T > 0, got {t}"
        )));
    }
    let mut rng = rng_from_seed(derive_seed(schedule.rng_seed, THERMAL_STREAM));
    let mut chain = Chain::random(pre, &mut rng);
    let beta = 1.0 / (K_B * t);
    for _ in 0..schedule.equilibration_sweeps {
        chain.sweep(beta, &mut rng);
    }
    let (mut sum_r, mut sum_int) = (0.0, 0.0);
    for _ in 0..schedule.measurement_sweeps {
        chain.sweep(beta, &mut rng);
        let (r, i) = chain.energy_parts();
        sum_r += r;
        sum_int += i;
    }
    let k = schedule.measurement_sweeps as f64;
    Ok(EnergyScales::from_mean_energies(
        sum_r / k,
        sum_int / k,
        pre.n(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_curve, ground_state_exhaustive};
    use crate::geometry::{generate, PhysicalParams, Picture};
    use approx::assert_relative_eq;

    fn sample(picture: Picture, n: usize, lambda: f64, seed: u64) -> PrecomputedSample {
        let p = PhysicalParams {
            n_defects: n,
            interaction_scale: lambda,
            ..Default::default()
        };
        PrecomputedSample::new(&generate(picture, &p, seed).unwrap()).unwrap()
    }

    fn quick() -> McSchedule {
        McSchedule {
            equilibration_sweeps: 200,
            measurement_sweeps: 2_000,
            anneal_restarts: 4,
            anneal_sweeps_per_stage: 20,
            ..Default::default()
        }
    }

    #[test]
    fn detailed_balance_ratio() {
        for &(d, t) in &[(1e-24, 0.1), (3e-23, 0.7), (5e-25, 0.01)] {
            let fwd = acceptance_probability(d, t);
            let bwd = acceptance_probability(-d, t);
            assert_relative_eq!(fwd / bwd, (-d / (K_B * t)).exp(), max_relative = 1e-14);
        }
        assert_eq!(acceptance_probability(-1.0, 0.1), 1.0);
        assert_eq!(acceptance_probability(0.0, 0.1), 1.0);
    }

    #[test]
    fn acceptance_shortcut_agrees_with_exponential() {
        let mut rng = rng_from_seed(11);
        for _ in 0..1_000_000 {
            let x = -rng.random::<f64>() * 10f64.powf(rng.random_range(-8.0..3.0));
            let u = rng.random::<f64>();
            assert_eq!(accept_log_ratio(x, u), u < x.exp(), "x {x}, u {u}");
        }
    }

    #[test]
    fn chain_tracks_energy() {
        let pre = sample(Picture::SphericalShell, 20, 2.0, 3);
        let mut rng = rng_from_seed(1);
        let mut chain = Chain::random(&pre, &mut rng);
        for _ in 0..200 {
            chain.sweep(1.0 / (K_B * 0.2), &mut rng);
        }
        let (r, i) = pre.energy_parts(chain.state()).unwrap();
        let (cr, ci) = chain.energy_parts();
        assert_relative_eq!(cr, r, max_relative = 1e-9, epsilon = 1e-30);
        assert_relative_eq!(ci, i, max_relative = 1e-9, epsilon = 1e-30);
        for j in 0..pre.n() {
            assert_relative_eq!(
                chain.delta(j),
                pre.flip_delta(chain.state(), j).unwrap(),
                max_relative = 1e-9,
                epsilon = 1e-30
            );
        }
    }

    #[test]
    fn sweep_rejects_non_positive_temperature() {
        let pre = sample(Picture::Trap, 4, 1.0, 0);
        let mut s = SpinState::all_up(4);
        assert!(metropolis_sweep(&pre, &mut s, 0.0, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn downhill_moves_always_accepted() {
        // Two decoupled spins, both anti-aligned with a strong field.
        let pre = PrecomputedSample::from_parts(
            vec![Vector3::x(); 2],
            vec![1e-20, 1e-20],
            vec![vec![0.0; 2]; 2],
        )
        .unwrap();
        let mut rng = rng_from_seed(3);
        let mut s = SpinState::new(vec![-1, -1]).unwrap();
        for _ in 0..50 {
            metropolis_sweep(&pre, &mut s, 1e-3, &mut rng).unwrap();
        }
        assert_eq!(s.spins(), &[1, 1]);
    }

    #[test]
    fn infinite_temperature_accepts_everything() {
        let pre = sample(Picture::SphericalShell, 30, 1.0, 5);
        let mut rng = rng_from_seed(4);
        let mut chain = Chain::random(&pre, &mut rng);
        let beta = 1.0 / (K_B * 1e4);
        let accepted: usize = (0..2000).map(|_| chain.sweep(beta, &mut rng)).sum();
        let rate = accepted as f64 / (2000.0 * 30.0);
        assert!(rate > 0.99, "acceptance {rate}");
    }

    #[test]
    fn quench_never_raises_energy() {
        let pre = sample(Picture::RandomDipole, 25, 5.0, 8);
        let mut rng = rng_from_seed(2);
        let mut chain = Chain::random(&pre, &mut rng);
        let mut last = chain.energy();
        loop {
            let mut improved = false;
            for j in 0..pre.n() {
                if chain.delta(j) < 0.0 {
                    chain.flip(j);
                    assert!(chain.energy() <= last);
                    last = chain.energy();
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        for j in 0..pre.n() {
            assert!(chain.delta(j) >= 0.0);
        }
    }

    #[test]
    fn anneal_finds_decoupled_ground_state() {
        let pre = sample(Picture::RandomDipole, 30, 0.0, 6);
        let (g, _) = anneal_ground_state(&pre, &quick()).unwrap();
        for (j, h) in pre.local_fields.iter().enumerate() {
            assert_eq!(f64::from(g.get(j)), h.signum());
        }
    }

    #[test]
    fn anneal_is_deterministic_and_optimal_on_small_system() {
        let pre = sample(Picture::SphericalShell, 12, 2.0, 17);
        let a = anneal_ground_state(&pre, &quick()).unwrap();
        let b = anneal_ground_state(&pre, &quick()).unwrap();
        assert_eq!(a, b);
        let (_, exact) = ground_state_exhaustive(&pre).unwrap();
        assert!(a.1 >= exact - 1e-12 * exact.abs());
    }

    #[test]
    fn two_spin_stationary_distribution() {
        let j = -0.05 * K_B;
        let pre = PrecomputedSample::from_parts(
            vec![Vector3::x(), Vector3::y()],
            vec![0.08 * K_B, -0.03 * K_B],
            vec![vec![0.0, j], vec![j, 0.0]],
        )
        .unwrap();
        let t = 0.1;
        let beta = 1.0 / (K_B * t);
        let mut weights = [0.0; 4];
        for (bits, w) in weights.iter_mut().enumerate() {
            *w = (-beta
                * pre
                    .total_energy(&SpinState::from_bits(bits as u64, 2))
                    .unwrap())
            .exp();
        }
        let z: f64 = weights.iter().sum();
        let mut rng = rng_from_seed(11);
        let mut chain = Chain::random(&pre, &mut rng);
        let batches = 100usize;
        let per_batch = 10_000usize;
        let mut batch_freq = vec![[0.0; 4]; batches];
        for freq in batch_freq.iter_mut() {
            for _ in 0..per_batch {
                chain.sweep(beta, &mut rng);
                let s = chain.state();
                let bits = usize::from(s.get(0) == 1) | (usize::from(s.get(1) == 1) << 1);
                freq[bits] += 1.0 / per_batch as f64;
            }
        }
        for k in 0..4 {
            let p = weights[k] / z;
            let mean = batch_freq.iter().map(|f| f[k]).sum::<f64>() / batches as f64;
            let var = batch_freq
                .iter()
                .map(|f| (f[k] - mean).powi(2))
                .sum::<f64>()
                / (batches - 1) as f64;
            // Batch means absorb the sweep-to-sweep correlation.
            let sigma = (var / batches as f64).sqrt();
            assert!(
                (mean - p).abs() < 3.0 * sigma,
                "state {k}: {mean} vs {p} (sigma {sigma})"
            );
        }
    }

    #[test]
    fn non_interacting_curve_tracks_exact() {
        let pre = sample(Picture::Trap, 30, 0.0, 2);
        let grid = TemperatureGrid::linear(0.05, 1.0, 10).unwrap();
        let mc = mc_curve(&pre, &grid, &quick()).unwrap();
        let ex = exact_curve(&pre, &grid).unwrap();
        let err = mc.field_err.as_ref().unwrap();
        for m in 0..grid.len() {
            for c in 0..3 {
                assert!((mc.field[m][c] - ex.field[m][c]).abs() < 5.0 * err[m][c]);
            }
        }
        assert!((mc.f0_ref - ex.f0_ref).norm() < 1e-9 * ex.f0_ref.norm());
    }

    #[test]
    fn mc_curve_deterministic() {
        let pre = sample(Picture::RandomDipole, 10, 1.0, 2);
        let grid = TemperatureGrid::linear(0.05, 1.0, 5).unwrap();
        assert_eq!(
            mc_curve(&pre, &grid, &quick()).unwrap(),
            mc_curve(&pre, &grid, &quick()).unwrap()
        );
    }

    #[test]
    fn schedule_validation() {
        let mut s = McSchedule::default();
        assert!(s.validate().is_ok());
        s.anneal_temps = vec![0.1, 0.2];
        assert!(s.validate().is_err());
        let s = McSchedule {
            measurement_sweeps: 0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn thermal_scales_non_interacting() {
        let pre = sample(Picture::Trap, 10, 0.0, 2);
        let sc = thermal_energy_scales(&pre, 0.2, &quick()).unwrap();
        assert_eq!(sc.t_int, 0.0);
        assert!(sc.t_r > 0.0);
    }
}
