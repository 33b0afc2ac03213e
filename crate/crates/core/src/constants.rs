//! Physical constants in SI units, CODATA 2018 recommended values
//! (NIST SP 961, May 2019). The first four are exact by definition of the SI.

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Electron spin g-factor magnitude, rounded to 2 as in the readout model.
pub const G_SPIN: f64 = 2.0;

/// Mass of a ⁴⁰Ca⁺ ion (atomic mass 39.962 590 86 u less one electron).
pub const CALCIUM_40_ION_MASS: f64 = 39.962_590_86 * ATOMIC_MASS_UNIT - ELECTRON_MASS;

pub const MILLI_ELECTRON_VOLT: f64 = 1e-3 * ELEMENTARY_CHARGE;

/// `2π · f` for a cyclic frequency in Hz.
pub fn angular(hz: f64) -> f64 {
    std::f64::consts::TAU * hz
}
