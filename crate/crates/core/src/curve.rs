//! Temperature grids and field-vs-temperature curves, with their CSV form.

use std::io::{Read, Write};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{IrgmError, Result};

/// Strictly ascending temperatures in kelvin.
///
/// Only the first point may be zero, and only when built with
/// [`TemperatureGrid::with_zero_limit`]; solvers evaluate that point as the
/// analytic T = 0 limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureGrid {
    temps: Vec<f64>,
}

impl TemperatureGrid {
    pub fn new(temps: Vec<f64>) -> Result<Self> {
        Self::build(temps, false)
    }

    pub fn with_zero_limit(temps: Vec<f64>) -> Result<Self> {
        Self::build(temps, true)
    }

    fn build(temps: Vec<f64>, allow_zero: bool) -> Result<Self> {
        if temps.is_empty() {
            return Err(IrgmError::InvalidParams("temperature grid is empty".into()));
        }
        for (i, t) in temps.iter().enumerate() {
            let zero_ok = allow_zero && i == 0 && *t == 0.0;
            if !(t.is_finite() && (*t > 0.0 || zero_ok)) {
                return Err(IrgmError::InvalidParams(format!(
                    "bad grid temperature {t}"
                )));
            }
        }
        if temps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(IrgmError::InvalidParams(
                "temperature grid must be strictly ascending".into(),
            ));
        }
        Ok(Self { temps })
    }

    /// `points` values evenly spaced from `t_min` to `t_max` inclusive.
    pub fn linear(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(IrgmError::InvalidParams(
                "grid needs at least one point".into(),
            ));
        }
        if points == 1 {
            return Self::new(vec![t_min]);
        }
        let step = (t_max - t_min) / (points - 1) as f64;
        let mut temps: Vec<f64> = (0..points).map(|i| t_min + step * i as f64).collect();
        temps[points - 1] = t_max;
        Self::new(temps)
    }

    pub fn geometric(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        if points < 2 || t_min <= 0.0 {
            return Err(IrgmError::InvalidParams(
                "geometric grid needs t_min > 0 and >= 2 points".into(),
            ));
        }
        let ratio = (t_max / t_min).powf(1.0 / (points - 1) as f64);
        let mut temps: Vec<f64> = (0..points).map(|i| t_min * ratio.powi(i as i32)).collect();
        temps[points - 1] = t_max;
        Self::new(temps)
    }

    pub fn temps(&self) -> &[f64] {
        &self.temps
    }

    pub fn len(&self) -> usize {
        self.temps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temps.is_empty()
    }
}

impl Default for TemperatureGrid {
    /// 100 points from 10 mK to 1 K.
    fn default() -> Self {
        Self::linear(0.01, 1.0, 100).expect("default grid is valid")
    }
}

/// Serializable description of a linear grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct GridSpec {
    pub t_min_K: f64,
    pub t_max_K: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t_min_K: 0.01,
            t_max_K: 1.0,
            points: 100,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<TemperatureGrid> {
        if self.points >= 2 && !(self.t_max_K > self.t_min_K) {
            return Err(IrgmError::InvalidParams(
                "t_max_K must exceed t_min_K".into(),
            ));
        }
        TemperatureGrid::linear(self.t_min_K, self.t_max_K, self.points)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    Exact,
    MonteCarlo,
    Enumeration,
}

/// Thermal-average field at the qubit across a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldCurve {
    pub grid: TemperatureGrid,
    /// V/m, one row per grid temperature.
    pub field: Vec<Vector3<f64>>,
    pub field_smoothed: Option<Vec<Vector3<f64>>>,
    /// One-sigma statistical error of each component (Monte Carlo only).
    pub field_err: Option<Vec<Vector3<f64>>>,
    pub method: CurveMethod,
    /// Field in the T = 0 reference configuration.
    pub f0_ref: Vector3<f64>,
    /// Per-temperature spin averages <s_j>; empty when read back from CSV.
    pub spin_averages: Vec<Vec<f64>>,
    pub spin_errors: Option<Vec<Vec<f64>>>,
}

impl FieldCurve {
    pub fn len(&self) -> usize {
        self.field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }

    /// Component `c` (0 = x, 1 = y, 2 = z) of the raw or smoothed series.
    pub fn component(&self, c: usize, smoothed: bool) -> Vec<f64> {
        let rows = match (&self.field_smoothed, smoothed) {
            (Some(s), true) => s,
            _ => &self.field,
        };
        rows.iter().map(|v| v[c]).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["T_K", "Fx", "Fy", "Fz"];
        if self.field_smoothed.is_some() {
            header.extend(["Fx_s", "Fy_s", "Fz_s"]);
        }
        if self.field_err.is_some() {
            header.extend(["Fx_err", "Fy_err", "Fz_err"]);
        }
        w.write_record(&header)?;
        for (m, t) in self.grid.temps().iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.field[m].iter().map(|v| v.to_string()));
            if let Some(s) = &self.field_smoothed {
                row.extend(s[m].iter().map(|v| v.to_string()));
            }
            if let Some(e) = &self.field_err {
                row.extend(e[m].iter().map(|v| v.to_string()));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| IrgmError::Parse(e.to_string()))
    }

    /// Read a curve CSV. The T = 0 reference is not part of the file and
    /// comes back as zero; spin averages come back empty.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let need = |name: &str| {
            col(name).ok_or_else(|| IrgmError::Parse(format!("missing column {name}")))
        };
        let t_col = need("T_K")?;
        let raw = [need("Fx")?, need("Fy")?, need("Fz")?];
        let smooth = match (col("Fx_s"), col("Fy_s"), col("Fz_s")) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        let err = match (col("Fx_err"), col("Fy_err"), col("Fz_err")) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        let mut temps = Vec::new();
        let mut field = Vec::new();
        let mut field_smoothed = smooth.map(|_| Vec::new());
        let mut field_err = err.map(|_| Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| IrgmError::Parse("short row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| IrgmError::Parse(e.to_string()))
            };
            let vec3 = |c: [usize; 3]| -> Result<Vector3<f64>> {
                Ok(Vector3::new(num(c[0])?, num(c[1])?, num(c[2])?))
            };
            temps.push(num(t_col)?);
            field.push(vec3(raw)?);
            if let (Some(cols), Some(v)) = (smooth, field_smoothed.as_mut()) {
                v.push(vec3(cols)?);
            }
            if let (Some(cols), Some(v)) = (err, field_err.as_mut()) {
                v.push(vec3(cols)?);
            }
        }
        let grid = if temps.first() == Some(&0.0) {
            TemperatureGrid::with_zero_limit(temps)?
        } else {
            TemperatureGrid::new(temps)?
        };
        Ok(Self {
            grid,
            field,
            field_smoothed,
            method: if field_err.is_some() {
                CurveMethod::MonteCarlo
            } else {
                CurveMethod::Exact
            },
            field_err,
            f0_ref: Vector3::zeros(),
            spin_averages: Vec::new(),
            spin_errors: None,
        })
    }
}
