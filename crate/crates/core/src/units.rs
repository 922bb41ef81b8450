//! Physical constants and unit conversions used at the I/O boundary.
//!
//! Everything inside the crate is SI: meters, coulomb-meters, volts per meter,
//! joules and kelvin.

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Planck constant, J s.
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK_H / (2.0 * std::f64::consts::PI);
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// One debye in C m.
pub const DEBYE: f64 = 3.335_640_951_98e-30;
/// One nanometer in m.
pub const NM: f64 = 1e-9;
/// One millielectronvolt in J.
pub const MEV: f64 = 1e-3 * ELEMENTARY_CHARGE;
/// mT/nm expressed in T/m.
pub const MT_PER_NM: f64 = 1e6;

pub fn debye_to_cm(d: f64) -> f64 {
    d * DEBYE
}

pub fn cm_to_debye(p: f64) -> f64 {
    p / DEBYE
}

pub fn nm_to_m(x: f64) -> f64 {
    x * NM
}

pub fn m_to_nm(x: f64) -> f64 {
    x / NM
}

/// Energy in joules to temperature in kelvin.
pub fn joule_to_kelvin(e: f64) -> f64 {
    e / K_B
}

pub fn kelvin_to_joule(t: f64) -> f64 {
    t * K_B
}
