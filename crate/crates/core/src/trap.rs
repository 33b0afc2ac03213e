//! Closed-form trap-physics calculators. All inputs and outputs are SI, with
//! angular frequencies in rad/s.
//!
//! These work in `f64` only: products such as `e²` sit below the normal range
//! of `f32`.

use std::fmt;

use crate::constants::{BOHR_MAGNETON, BOLTZMANN, ELEMENTARY_CHARGE, G_SPIN, HBAR};
use crate::error::{Error, Result};
use crate::scalar::C;

/// Lowest-order Mathieu stability bound for `a = 0`.
pub const MATHIEU_Q_LIMIT: f64 = 0.908;
/// Above this `|q|` the pseudopotential secular frequency is only indicative.
pub const SECULAR_APPROXIMATION_Q: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapConfig {
    /// AC electrode amplitude, V.
    pub u0: f64,
    pub omega_ac: f64,
    /// Transverse secular frequency.
    pub omega_t: f64,
    /// Axial secular frequency.
    pub omega_a: f64,
    pub q_param: f64,
    pub d_eff_y: f64,
    pub d_eff_z: f64,
    /// Potential expansion `V(z) = V(0)(1 + c2 z² + c4 z⁴ + c6 z⁶)`, m⁻², m⁻⁴, m⁻⁶.
    pub c2: f64,
    pub c4: f64,
    pub c6: f64,
    /// Quantisation field, T.
    pub b0: f64,
    /// Field gradient, T/m.
    pub b1: f64,
    /// Third-order field coefficient, T/m³.
    pub b3: f64,
    /// Temperature of the transverse tank circuit, K.
    pub tank_temperature: f64,
}

impl Default for TrapConfig {
    fn default() -> Self {
        use crate::constants::angular;
        Self {
            u0: 14.0,
            omega_ac: angular(10.6e9),
            omega_t: angular(2e9),
            omega_a: angular(300e6),
            q_param: 0.53,
            d_eff_y: 138e-6,
            d_eff_z: 254e-6,
            c2: 1e12,
            c4: 1e-7 * 1e24,
            c6: -2e-9 * 1e36,
            b0: 3.6e-3,
            b1: 120.0,
            b3: 1.5e-7 * 1e18,
            tank_temperature: 0.4,
        }
    }
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_ac", self.omega_ac),
            ("omega_t", self.omega_t),
            ("omega_a", self.omega_a),
            ("d_eff_y", self.d_eff_y),
            ("d_eff_z", self.d_eff_z),
            ("c2", self.c2),
            ("tank_temperature", self.tank_temperature),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, "must be positive and finite"));
            }
        }
        if !(self.q_param.abs() < MATHIEU_Q_LIMIT) {
            return Err(Error::param("q_param", "outside the lowest Mathieu stability region"));
        }
        Ok(())
    }

    /// Axial temperature reached by parametric coupling to the transverse mode.
    pub fn axial_temperature(&self) -> f64 {
        parametric_cooling_temperature(self.tank_temperature, self.omega_a, self.omega_t)
    }

    pub fn axial_nbar(&self) -> f64 {
        equilibrium_nbar(self.omega_a, self.axial_temperature())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TankCircuit {
    pub q_factor: f64,
    /// F
    pub capacitance: f64,
    /// H
    pub inductance: f64,
    /// K
    pub temperature: f64,
}

impl TankCircuit {
    /// Circuit on the transverse pick-up electrodes: Q = 1000, 1 pF, 6 nH, 0.4 K.
    pub fn transverse() -> Self {
        Self {
            q_factor: 1000.0,
            capacitance: 1e-12,
            inductance: 6e-9,
            temperature: 0.4,
        }
    }

    /// Circuit for the axial mode: Q = 1000, 1 pF, 250 nH, 0.4 K.
    pub fn axial() -> Self {
        Self {
            inductance: 250e-9,
            ..Self::transverse()
        }
    }

    /// On-resonance impedance `Q √(L/C)`, Ω.
    pub fn impedance(&self) -> f64 {
        self.q_factor * (self.inductance / self.capacitance).sqrt()
    }

    pub fn resonance(&self) -> f64 {
        1.0 / (self.inductance * self.capacitance).sqrt()
    }
}

/// Validity-band warnings. Calculators still return a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    SecularApproximation { q: f64 },
    HeatingExponent { gamma: f64 },
    AnharmonicExpansion { ratio: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::SecularApproximation { q } => {
                write!(f, "|q| = {q} exceeds {SECULAR_APPROXIMATION_Q}; lowest-order secular frequency is approximate")
            }
            Warning::HeatingExponent { gamma } => {
                write!(f, "noise exponent {gamma} is outside the measured band [1, 1.5]")
            }
            Warning::AnharmonicExpansion { ratio } => {
                write!(f, "quartic term is {ratio:.3} of the quadratic term; expansion is unreliable")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checked {
    pub value: f64,
    pub warning: Option<Warning>,
}

impl Checked {
    fn new(value: f64, warning: Option<Warning>) -> Self {
        Self { value, warning }
    }
}

/// Resistive cooling time constant `τ = (m/e²) d_eff² / Re(Z)`.
pub fn cooling_time_constant(d_eff: f64, circuit: &TankCircuit, mass: f64) -> f64 {
    cooling_time_constant_for_impedance(d_eff, circuit.impedance(), mass)
}

pub fn cooling_time_constant_for_impedance(d_eff: f64, re_z: f64, mass: f64) -> f64 {
    mass / (ELEMENTARY_CHARGE * ELEMENTARY_CHARGE) * d_eff * d_eff / re_z
}

/// Mean occupation from `ħω(n̄ + ½) = k_B T`, clamped at zero.
pub fn equilibrium_nbar(omega: f64, temperature: f64) -> f64 {
    (BOLTZMANN * temperature / (HBAR * omega) - 0.5).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Micromotion {
    /// Thermal secular amplitude `x_t`, m.
    pub secular: f64,
    /// Micromotion amplitude `x_mm = (q/2) x_t`, m.
    pub micromotion: f64,
}

pub fn micromotion_amplitude(q: f64, omega_t: f64, temperature: f64, mass: f64) -> Micromotion {
    let secular = (2.0 * BOLTZMANN * temperature / (mass * omega_t * omega_t)).sqrt();
    Micromotion {
        secular,
        micromotion: 0.5 * q * secular,
    }
}

/// `T_a = T_t ω_a / ω_t`.
pub fn parametric_cooling_temperature(t_t: f64, omega_a: f64, omega_t: f64) -> f64 {
    t_t * omega_a / omega_t
}

/// Lowest-order pseudopotential secular frequency `q ω_ac / (2√2)`.
pub fn secular_frequency(q: f64, omega_ac: f64) -> Checked {
    let warning = (q.abs() > SECULAR_APPROXIMATION_Q).then_some(Warning::SecularApproximation { q });
    Checked::new(q * omega_ac / (2.0 * std::f64::consts::SQRT_2), warning)
}

/// Heating rate (quanta/s) from an electric-field noise density in V² m⁻² Hz⁻¹.
pub fn heating_rate_from_noise(s_e: f64, omega: f64, mass: f64) -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * s_e / (4.0 * mass * HBAR * omega)
}

/// Rescales a measured heating rate to another mass and frequency assuming
/// `S(ω) ∝ ω^(−γ)`.
pub fn extrapolate_heating(
    ndot_ref: f64,
    omega_ref: f64,
    omega: f64,
    mass_ref: f64,
    mass: f64,
    gamma: f64,
) -> Checked {
    let warning = !(1.0..=1.5).contains(&gamma);
    let value = mass_ref / mass * (omega_ref / omega).powf(1.0 + gamma) * ndot_ref;
    Checked::new(value, warning.then_some(Warning::HeatingExponent { gamma }))
}

/// Relative frequency shift `(3A²c4/4 + 15A⁴c6/16)/c2` of an oscillation of
/// amplitude `A` in the expanded potential.
pub fn anharmonic_frequency_shift(amplitude: f64, c2: f64, c4: f64, c6: f64) -> Checked {
    let a2 = amplitude * amplitude;
    let ratio = (c4 * a2 * a2 / (c2 * a2)).abs();
    let warning = (ratio > 0.1).then_some(Warning::AnharmonicExpansion { ratio });
    Checked::new((0.75 * a2 * c4 + 15.0 / 16.0 * a2 * a2 * c6) / c2, warning)
}

/// Zeeman splitting `g μ_B B0 / ħ`.
pub fn qubit_frequency(b0: f64) -> f64 {
    G_SPIN * BOHR_MAGNETON * b0 / HBAR
}

/// Ground-state extent `√(ħ / (2 M ω))`.
pub fn ground_state_extent(mass: f64, omega: f64) -> f64 {
    (HBAR / (2.0 * mass * omega)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    /// Spin-dependent displacement after the drive.
    pub alpha: C<f64>,
    pub discrimination_fidelity: f64,
}

/// Resonant spin-dependent displacement and its two-hypothesis discrimination
/// fidelity against a thermal state of occupation `nbar0`.
pub fn readout_displacement(b1: f64, duration: f64, omega_a: f64, mass: f64, nbar0: f64) -> Readout {
    let force = 0.5 * G_SPIN * BOHR_MAGNETON * b1;
    let rate = force * ground_state_extent(mass, omega_a) / HBAR;
    let alpha = C::new(rate * duration, 0.0);
    let width = (2.0 * (2.0 * nbar0 + 1.0)).sqrt();
    Readout {
        alpha,
        discrimination_fidelity: 0.5 * (1.0 + libm::erf(alpha.norm() / width)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{angular, CALCIUM_40_ION_MASS, ELECTRON_MASS};
    use approx::assert_relative_eq;

    #[test]
    fn impedance_from_circuit() {
        let c = TankCircuit::axial();
        assert_relative_eq!(c.impedance(), 5e5, max_relative = 1e-12);
        assert_relative_eq!(TankCircuit::transverse().impedance(), 1000.0 * 6000f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn cooling_scales_with_distance_squared() {
        let c = TankCircuit::transverse();
        let t1 = cooling_time_constant(100e-6, &c, ELECTRON_MASS);
        let t2 = cooling_time_constant(200e-6, &c, ELECTRON_MASS);
        assert_relative_eq!(t2 / t1, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn nbar_vanishes_at_half_quantum() {
        let omega = angular(1e9);
        let t = HBAR * omega / (2.0 * BOLTZMANN);
        assert!(equilibrium_nbar(omega, t).abs() < 1e-12);
        assert_eq!(equilibrium_nbar(omega, 0.0), 0.0);
    }

    #[test]
    fn nbar_approaches_bose_occupation() {
        // 1/(e^x − 1) = 1/x − ½ + x/12 + …, so the gap is O(ħω/kT)
        let omega = angular(300e6);
        for t in [0.06, 0.6, 6.0] {
            let x = HBAR * omega / (BOLTZMANN * t);
            let bose = 1.0 / x.exp_m1();
            assert!((equilibrium_nbar(omega, t) - bose).abs() <= x / 12.0 * 1.01);
        }
    }

    #[test]
    fn micromotion_ratio_is_half_q() {
        let m = micromotion_amplitude(0.53, angular(2e9), 0.4, ELECTRON_MASS);
        assert_relative_eq!(m.micromotion / m.secular, 0.265, max_relative = 1e-14);
        let cold = micromotion_amplitude(0.53, angular(2e9), 0.0, ELECTRON_MASS);
        assert_eq!((cold.secular, cold.micromotion), (0.0, 0.0));
    }

    #[test]
    fn parametric_cooling_preserves_occupation_at_high_temperature() {
        let (wa, wt) = (angular(300e6), angular(2e9));
        let tt = 400.0;
        let ta = parametric_cooling_temperature(tt, wa, wt);
        // k T / ħω is preserved exactly, the ½ offset is the only difference
        assert!((equilibrium_nbar(wa, ta) - equilibrium_nbar(wt, tt)).abs() < 1e-9);
        assert_eq!(parametric_cooling_temperature(tt, wt, wt), tt);
    }

    #[test]
    fn secular_frequency_warns_at_large_q() {
        let w = angular(10.6e9);
        assert!(secular_frequency(0.3, w).warning.is_none());
        assert!(secular_frequency(0.53, w).warning.is_some());
        assert_eq!(secular_frequency(0.0, w).value, 0.0);
    }

    #[test]
    fn heating_is_linear_in_noise() {
        let w = angular(1e6);
        let a = heating_rate_from_noise(1e-12, w, CALCIUM_40_ION_MASS);
        assert_relative_eq!(heating_rate_from_noise(2e-12, w, CALCIUM_40_ION_MASS), 2.0 * a);
        assert_eq!(heating_rate_from_noise(0.0, w, CALCIUM_40_ION_MASS), 0.0);
    }

    #[test]
    fn extrapolation_power_law() {
        let w = angular(1e6);
        let same = extrapolate_heating(100.0, w, w, 1.0, 1.0, 1.3);
        assert_relative_eq!(same.value, 100.0);
        let tenfold = extrapolate_heating(100.0, w, 10.0 * w, 1.0, 1.0, 1.3);
        assert_relative_eq!(tenfold.value, 100.0 / 10f64.powf(2.3), max_relative = 1e-12);
        assert!(extrapolate_heating(1.0, w, w, 1.0, 1.0, 2.0).warning.is_some());
        assert!(same.warning.is_none());
    }

    #[test]
    fn anharmonic_shift_is_quadratic_without_sextic_term() {
        let (c2, c4) = (1e12, 1e17);
        let a = anharmonic_frequency_shift(1e-6, c2, c4, 0.0).value;
        let b = anharmonic_frequency_shift(2e-6, c2, c4, 0.0).value;
        assert_relative_eq!(b / a, 4.0, max_relative = 1e-12);
        assert_eq!(anharmonic_frequency_shift(0.0, c2, c4, -2e27).value, 0.0);
    }

    #[test]
    fn readout_is_linear_and_uninformative_at_zero_time() {
        let w = angular(300e6);
        let r0 = readout_displacement(120.0, 0.0, w, ELECTRON_MASS, 3.0);
        assert_eq!(r0.alpha.norm(), 0.0);
        assert_eq!(r0.discrimination_fidelity, 0.5);
        let r1 = readout_displacement(120.0, 1e-6, w, ELECTRON_MASS, 3.0);
        let r2 = readout_displacement(240.0, 2e-6, w, ELECTRON_MASS, 3.0);
        assert_relative_eq!(r2.alpha.re, 4.0 * r1.alpha.re, max_relative = 1e-12);
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = TrapConfig::default();
        cfg.validate().unwrap();
        assert!(TrapConfig { q_param: 0.95, ..cfg }.validate().is_err());
        assert!(TrapConfig { omega_a: -1.0, ..cfg }.validate().is_err());
    }
}
