//! Post-processing of field curves: moving-average smoothing, the
//! slope-partition non-monotonicity test, conversion to qubit frequency
//! shifts, and aligned/anti-aligned group diagnostics.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::curve::FieldCurve;
use crate::error::{IrgmError, Result};
use crate::geometry::{PhysicalParams, SampleConfig};
use crate::physics::{PrecomputedSample, SpinState};
use crate::units::{BOHR_MAGNETON, ELEMENTARY_CHARGE, EPSILON_0, HBAR, MEV, MT_PER_NM, PLANCK_H};

/// Centered moving average. Near the ends the window shrinks symmetrically to
/// the widest centered window that fits, `2 min(m, M-1-m) + 1`.
pub fn smooth_series(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) {
        return Err(IrgmError::InvalidParams(format!(
            "smoothing window {window} must be odd"
        )));
    }
    if window > series.len() {
        return Err(IrgmError::InvalidParams(format!(
            "smoothing window {window} exceeds series length {}",
            series.len()
        )));
    }
    let m_len = series.len();
    let half = window / 2;
    Ok((0..m_len)
        .map(|m| {
            let h = half.min(m).min(m_len - 1 - m);
            let slice = &series[m - h..=m + h];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect())
}

/// Attach a smoothed copy of the field to the curve.
pub fn smooth_curve(curve: &FieldCurve, window: usize) -> Result<FieldCurve> {
    let mut comps = Vec::with_capacity(3);
    for c in 0..3 {
        comps.push(smooth_series(&curve.component(c, false), window)?);
    }
    let smoothed = (0..curve.len())
        .map(|m| Vector3::new(comps[0][m], comps[1][m], comps[2][m]))
        .collect();
    Ok(FieldCurve {
        field_smoothed: Some(smoothed),
        ..curve.clone()
    })
}

/// How the positive and negative slope groups are weighed against each other.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeMeasure {
    /// Sum of the magnitudes of the retained differences in each group.
    #[default]
    SummedMagnitude,
    /// Number of retained differences in each group.
    Count,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub ratio_threshold: f64,
    /// Minimum mean absolute step, in the units of the series.
    pub slope_threshold: f64,
    /// Steps smaller than this fraction of the mean absolute step are ignored.
    pub slope_filter_factor: f64,
    pub measure: SlopeMeasure,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            ratio_threshold: 0.1,
            slope_threshold: 5.0,
            slope_filter_factor: 0.5,
            measure: SlopeMeasure::SummedMagnitude,
        }
    }
}

impl ClassifierParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio_threshold > 0.0 && self.ratio_threshold <= 0.5) {
            return Err(IrgmError::InvalidParams(
                "ratio_threshold must lie in (0, 0.5]".into(),
            ));
        }
        if !(self.slope_threshold >= 0.0) || !(self.slope_filter_factor >= 0.0) {
            return Err(IrgmError::InvalidParams(
                "slope thresholds must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierVerdict {
    pub non_monotonic: bool,
    /// Mean absolute step of the series.
    pub s: f64,
    pub sum_pos: f64,
    pub sum_neg: f64,
    /// min(sum_pos, sum_neg) / (sum_pos + sum_neg), 0 when nothing is retained.
    pub ratio: f64,
    pub params: ClassifierParams,
}

/// Decide whether a series is non-monotonic.
///
/// Successive differences are computed, those smaller in magnitude than
/// `slope_filter_factor * s` are dropped, and the remainder is split by sign.
/// The series is non-monotonic when the minority sign carries more than
/// `ratio_threshold` of the total and the mean step `s` exceeds
/// `slope_threshold`.
pub fn classify(series: &[f64], params: &ClassifierParams) -> Result<ClassifierVerdict> {
    params.validate()?;
    if series.len() < 2 {
        return Err(IrgmError::InvalidParams(
            "classification needs at least two points".into(),
        ));
    }
    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let s = diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64;
    let cut = params.slope_filter_factor * s;
    let (mut sum_pos, mut sum_neg) = (0.0, 0.0);
    for d in diffs.iter().filter(|d| d.abs() > cut) {
        let weight = match params.measure {
            SlopeMeasure::SummedMagnitude => d.abs(),
            SlopeMeasure::Count => 1.0,
        };
        if *d > 0.0 {
            sum_pos += weight;
        } else if *d < 0.0 {
            sum_neg += weight;
        }
    }
    let total = sum_pos + sum_neg;
    let ratio = if total > 0.0 {
        sum_pos.min(sum_neg) / total
    } else {
        0.0
    };
    Ok(ClassifierVerdict {
        non_monotonic: ratio > params.ratio_threshold && s > params.slope_threshold,
        s,
        sum_pos,
        sum_neg,
        ratio,
        params: params.clone(),
    })
}

/// Constants of the field-to-frequency map of a micromagnet spin qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConversionParams {
    pub g_factor: f64,
    /// J/T
    pub bohr_magneton: f64,
    /// J s
    pub planck_h: f64,
    /// C
    pub charge_q: f64,
    /// Transverse effective mass, kg.
    pub m_t: f64,
    /// Orbital excitation frequency, rad/s.
    pub omega_orb: f64,
    /// dB_y/dx, T/m.
    pub grad_by_dx: f64,
    /// dB_y/dy, T/m.
    pub grad_by_dy: f64,
    /// Representative |grad B| for order-of-magnitude estimates, T/m.
    pub average_gradient: f64,
}

impl Default for ConversionParams {
    fn default() -> Self {
        Self {
            g_factor: 2.0,
            bohr_magneton: BOHR_MAGNETON,
            planck_h: PLANCK_H,
            charge_q: ELEMENTARY_CHARGE,
            m_t: 1.73e-31,
            omega_orb: 2.0 * MEV / HBAR,
            grad_by_dx: -0.05 * MT_PER_NM,
            grad_by_dy: 0.18 * MT_PER_NM,
            average_gradient: 0.1 * MT_PER_NM,
        }
    }
}

impl ConversionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m_t > 0.0 && self.omega_orb > 0.0) {
            return Err(IrgmError::InvalidParams(
                "m_t and omega_orb must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Spring constant of the dot confinement, N/m.
    pub fn spring_constant(&self) -> f64 {
        self.m_t * self.omega_orb * self.omega_orb
    }

    /// Zeeman frequency per tesla, g muB / h, Hz/T.
    pub fn hz_per_tesla(&self) -> f64 {
        self.g_factor * self.bohr_magneton / self.planck_h
    }

    /// The conversion vector c_q, Hz per (V/m). Its z component is zero.
    pub fn c_q(&self) -> Vector3<f64> {
        let scale = self.hz_per_tesla() * self.charge_q / self.spring_constant();
        Vector3::new(self.grad_by_dx, self.grad_by_dy, 0.0) * scale
    }
}

/// Frequency shift relative to the T = 0 reference for each field row, Hz.
pub fn frequency_shift_rows(
    rows: &[Vector3<f64>],
    f0_ref: &Vector3<f64>,
    conv: &ConversionParams,
) -> Vec<f64> {
    let c = conv.c_q();
    rows.iter().map(|f| c.dot(&(f - f0_ref))).collect()
}

/// Delta f(T) = c_q . (F(T) - F(0)) along the curve's raw field, Hz.
pub fn frequency_shift(curve: &FieldCurve, conv: &ConversionParams) -> Result<Vec<f64>> {
    conv.validate()?;
    Ok(frequency_shift_rows(&curve.field, &curve.f0_ref, conv))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeEstimate {
    #[serde(rename = "frequency_Hz")]
    pub frequency_hz: f64,
    #[serde(rename = "field_V_per_m")]
    pub field_v_per_m: f64,
    #[serde(rename = "displacement_m")]
    pub displacement_m: f64,
}

/// Random-walk estimate of the T = 0 field, the resulting dot displacement and
/// frequency shift, for defects at typical distance `d` (m).
pub fn magnitude_estimate(
    params: &PhysicalParams,
    conv: &ConversionParams,
    d: f64,
) -> Result<MagnitudeEstimate> {
    params.validate()?;
    conv.validate()?;
    if !(d > 0.0) {
        return Err(IrgmError::Domain("distance must be positive".into()));
    }
    let n = params.n_defects as f64;
    let field = (2.0 * n / 3.0).sqrt() * params.p0
        / (4.0 * std::f64::consts::PI * EPSILON_0 * params.epsilon_r * d.powi(3));
    let displacement = conv.charge_q * field / conv.spring_constant();
    let frequency = conv.hz_per_tesla() * conv.average_gradient * displacement;
    Ok(MagnitudeEstimate {
        frequency_hz: frequency,
        field_v_per_m: field,
        displacement_m: displacement,
    })
}

/// Defects aligned (S+) and anti-aligned (S-) with the ground-state field,
/// and the mean turn-off temperature of each group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentDecomposition {
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    /// K, absent for an empty group.
    pub t_plus: Option<f64>,
    pub t_minus: Option<f64>,
}

pub fn alignment_decomposition(
    pre: &PrecomputedSample,
    ground: &SpinState,
) -> Result<AlignmentDecomposition> {
    if ground.len() != pre.n() {
        return Err(IrgmError::InvalidParams(
            "ground state length mismatch".into(),
        ));
    }
    let f0 = pre.state_field(ground);
    let (mut s_plus, mut s_minus) = (Vec::new(), Vec::new());
    for (j, fj) in pre.field_kernels.iter().enumerate() {
        // A zero projection lands in S-.
        if f0.dot(fj) * f64::from(ground.get(j)) > 0.0 {
            s_plus.push(j);
        } else {
            s_minus.push(j);
        }
    }
    let t_off = pre.turn_off_temperatures();
    let mean = |idx: &[usize]| -> Option<f64> {
        (!idx.is_empty()).then(|| idx.iter().map(|&j| t_off[j]).sum::<f64>() / idx.len() as f64)
    };
    Ok(AlignmentDecomposition {
        t_plus: mean(&s_plus),
        t_minus: mean(&s_minus),
        s_plus,
        s_minus,
    })
}

/// Net dipole moment sum_j <s_j> p0 p_j, C m.
pub fn net_moment(sample: &SampleConfig, s_avg: &[f64]) -> Result<Vector3<f64>> {
    if s_avg.len() != sample.defects.len() {
        return Err(IrgmError::InvalidParams(
            "spin average length mismatch".into(),
        ));
    }
    Ok(sample
        .defects
        .iter()
        .zip(s_avg)
        .fold(Vector3::zeros(), |acc, (d, s)| {
            acc + d.orientation * (s * sample.params.p0)
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{CurveMethod, TemperatureGrid};
    use crate::geometry::{generate_trap, PhysicalParams};
    use crate::units::NM;
    use approx::assert_relative_eq;

    #[test]
    fn smoothing_edge_cases() {
        let c = vec![3.5; 20];
        assert_eq!(smooth_series(&c, 11).unwrap(), c);
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        assert_eq!(smooth_series(&x, 1).unwrap(), x);
        assert!(smooth_series(&x, 4).is_err());
        assert!(smooth_series(&x, 21).is_err());
    }

    #[test]
    fn smoothing_preserves_affine_series() {
        let x: Vec<f64> = (0..100).map(|i| 0.37 * i as f64 - 12.0).collect();
        let s = smooth_series(&x, 11).unwrap();
        for (a, b) in x.iter().zip(&s) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn smoothing_windows_shrink_at_ends() {
        let x: Vec<f64> = (0..7).map(|i| (i * i) as f64).collect();
        let s = smooth_series(&x, 5).unwrap();
        assert_eq!(s[0], 0.0);
        assert_eq!(s[1], (0.0 + 1.0 + 4.0) / 3.0);
        assert_eq!(s[3], (1.0 + 4.0 + 9.0 + 16.0 + 25.0) / 5.0);
        assert_eq!(s[6], 36.0);
    }

    #[test]
    fn classify_line_tent_noise() {
        let p = ClassifierParams::default();
        let line: Vec<f64> = (0..100).map(|i| 10.0 * i as f64).collect();
        let v = classify(&line, &p).unwrap();
        assert_eq!(v.sum_neg, 0.0);
        assert_eq!(v.ratio, 0.0);
        assert!(!v.non_monotonic);

        let mut tent: Vec<f64> = (0..=50).map(|i| 10.0 * i as f64).collect();
        for i in 1..=49 {
            tent.push(500.0 - 10.0 * i as f64);
        }
        assert_eq!(tent.len(), 100);
        let v = classify(&tent, &p).unwrap();
        assert_relative_eq!(v.s, 10.0, max_relative = 1e-12);
        assert_relative_eq!(v.ratio, 490.0 / 990.0, max_relative = 1e-12);
        assert!(v.non_monotonic);

        let noise: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 { 0.0 } else { 0.01 })
            .collect();
        let v = classify(&noise, &p).unwrap();
        assert!(v.ratio > 0.1);
        assert!(!v.non_monotonic);
    }

    #[test]
    fn classify_needs_two_points() {
        assert!(classify(&[1.0], &ClassifierParams::default()).is_err());
    }

    #[test]
    fn count_measure() {
        let p = ClassifierParams {
            measure: SlopeMeasure::Count,
            ..Default::default()
        };
        let series = [0.0, 10.0, 20.0, 30.0, 0.0];
        let v = classify(&series, &p).unwrap();
        assert_eq!(v.sum_pos, 3.0);
        assert_eq!(v.sum_neg, 1.0);
        assert_eq!(v.ratio, 0.25);
    }

    #[test]
    fn conversion_vector_in_plane() {
        let c = ConversionParams::default().c_q();
        assert_eq!(c.z, 0.0);
        assert!(c.x < 0.0 && c.y > 0.0);
    }

    fn curve(rows: Vec<Vector3<f64>>, f0: Vector3<f64>) -> FieldCurve {
        FieldCurve {
            grid: TemperatureGrid::linear(0.1, 1.0, rows.len()).unwrap(),
            field: rows,
            field_smoothed: None,
            field_err: None,
            method: CurveMethod::Exact,
            f0_ref: f0,
            spin_averages: Vec::new(),
            spin_errors: None,
        }
    }

    #[test]
    fn frequency_shift_properties() {
        let conv = ConversionParams::default();
        let f0 = Vector3::new(10.0, -20.0, 5.0);
        let flat = curve(vec![f0; 4], f0);
        assert!(frequency_shift(&flat, &conv)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));

        let dir = conv.c_q().normalize();
        let step = curve(vec![f0 + dir * 4500.0, f0 - dir * 4500.0], f0);
        let df = frequency_shift(&step, &conv).unwrap();
        assert!(df[0] > 1e5 && df[0] < 1e7, "{}", df[0]);
        assert!(df[1] < 0.0);
    }

    #[test]
    fn magnitude_anchors() {
        let est = magnitude_estimate(
            &PhysicalParams::default(),
            &ConversionParams::default(),
            50.0 * NM,
        )
        .unwrap();
        assert!((est.field_v_per_m / 4500.0 - 1.0).abs() < 0.15, "{est:?}");
        assert!((est.displacement_m / 0.5e-9 - 1.0).abs() < 0.15, "{est:?}");
        assert!((est.frequency_hz / 1.4e6 - 1.0).abs() < 0.15, "{est:?}");
        assert!(magnitude_estimate(
            &PhysicalParams::default(),
            &ConversionParams::default(),
            0.0
        )
        .is_err());
    }

    #[test]
    fn decomposition_single_and_pair() {
        let one = PrecomputedSample::from_parts(
            vec![Vector3::new(1.0, 2.0, 3.0)],
            vec![1e-24],
            vec![vec![0.0]],
        )
        .unwrap();
        let d = alignment_decomposition(&one, &SpinState::all_up(1)).unwrap();
        assert_eq!(d.s_plus, vec![0]);
        assert!(d.s_minus.is_empty() && d.t_minus.is_none());

        let pair = PrecomputedSample::from_parts(
            vec![Vector3::new(0.0, 0.0, 2.0), Vector3::new(0.0, 0.0, -1.0)],
            vec![1e-24, 2e-24],
            vec![vec![0.0; 2]; 2],
        )
        .unwrap();
        let d = alignment_decomposition(&pair, &SpinState::all_up(2)).unwrap();
        assert_eq!(d.s_plus, vec![0]);
        assert_eq!(d.s_minus, vec![1]);
        assert!(d.t_minus.unwrap() > d.t_plus.unwrap());
    }

    #[test]
    fn net_moment_trap() {
        let sample = generate_trap(&PhysicalParams::default(), 1).unwrap();
        let p = net_moment(&sample, &[1.0; 30]).unwrap();
        assert_relative_eq!(p.z, 30.0 * sample.params.p0, max_relative = 1e-14);
        assert_eq!(p.x, 0.0);
        assert_eq!(net_moment(&sample, &[0.0; 30]).unwrap(), Vector3::zeros());
        assert!(net_moment(&sample, &[0.0; 3]).is_err());
    }
}
