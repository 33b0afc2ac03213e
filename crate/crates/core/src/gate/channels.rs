use std::fmt;

use crate::constants::{angular, ELECTRON_MASS};
use crate::error::{Error, Result};
use crate::trap::{ground_state_extent, TrapConfig};

/// Mass entering `z0 = √(ħ / (2 M ω_a))` for the table defaults.
///
/// The single-electron mass is used; the two-electron centre-of-mass value
/// `2 mₑ` halves `z0²`. Both conventions are reachable by passing `z0`
/// explicitly.
pub const DEFAULT_MODE_MASS: f64 = ELECTRON_MASS;

/// One error source with its magnitude, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ErrorChannel {
    /// Heating rate, quanta/s.
    Heating { rate: f64 },
    /// Static motional detuning Δ, rad/s.
    TrapFrequencyOffset { delta: f64 },
    /// Motional dephasing rate Γ, 1/s.
    MotionalDephasing { gamma: f64 },
    /// Field expansion coefficients B₁ (T/m), B₃ (T/m³) and mode extent z0 (m).
    GradientInhomogeneity { b1: f64, b3: f64, z0: f64 },
    /// `c4/c2` (m⁻²), mode extent z0 (m) and axial frequency (rad/s).
    Anharmonicity { c4_over_c2: f64, z0: f64, omega_a: f64 },
    /// Spin coherence time, s. `f64::INFINITY` switches the channel off.
    QubitDecoherence { tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Heating,
    TrapFrequencyOffset,
    MotionalDephasing,
    GradientInhomogeneity,
    Anharmonicity,
    QubitDecoherence,
}

impl ChannelKind {
    /// Error-budget column order.
    pub const ALL: [ChannelKind; 6] = [
        ChannelKind::Heating,
        ChannelKind::TrapFrequencyOffset,
        ChannelKind::MotionalDephasing,
        ChannelKind::GradientInhomogeneity,
        ChannelKind::Anharmonicity,
        ChannelKind::QubitDecoherence,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::Heating => "motional heating",
            ChannelKind::TrapFrequencyOffset => "trap frequency fluctuation",
            ChannelKind::MotionalDephasing => "motional dephasing",
            ChannelKind::GradientInhomogeneity => "gradient inhomogeneity",
            ChannelKind::Anharmonicity => "potential anharmonicity",
            ChannelKind::QubitDecoherence => "qubit decoherence",
        }
    }

    /// Unit of [`ErrorChannel::magnitude`].
    pub fn unit(self) -> &'static str {
        match self {
            ChannelKind::Heating => "quanta/s",
            ChannelKind::TrapFrequencyOffset => "rad/s",
            ChannelKind::MotionalDephasing => "1/s",
            ChannelKind::GradientInhomogeneity => "T/m^3",
            ChannelKind::Anharmonicity => "1/m^2",
            ChannelKind::QubitDecoherence => "s",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Heating => "heating",
            ChannelKind::TrapFrequencyOffset => "trap_frequency_offset",
            ChannelKind::MotionalDephasing => "motional_dephasing",
            ChannelKind::GradientInhomogeneity => "gradient_inhomogeneity",
            ChannelKind::Anharmonicity => "anharmonicity",
            ChannelKind::QubitDecoherence => "qubit_decoherence",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param("channel", format!("unknown channel `{s}`")))
    }
}

impl ErrorChannel {
    pub fn kind(&self) -> ChannelKind {
        match self {
            ErrorChannel::Heating { .. } => ChannelKind::Heating,
            ErrorChannel::TrapFrequencyOffset { .. } => ChannelKind::TrapFrequencyOffset,
            ErrorChannel::MotionalDephasing { .. } => ChannelKind::MotionalDephasing,
            ErrorChannel::GradientInhomogeneity { .. } => ChannelKind::GradientInhomogeneity,
            ErrorChannel::Anharmonicity { .. } => ChannelKind::Anharmonicity,
            ErrorChannel::QubitDecoherence { .. } => ChannelKind::QubitDecoherence,
        }
    }

    /// The swept quantity: rate, Δ, Γ, B₃, c4/c2 or τ.
    pub fn magnitude(&self) -> f64 {
        match *self {
            ErrorChannel::Heating { rate } => rate,
            ErrorChannel::TrapFrequencyOffset { delta } => delta,
            ErrorChannel::MotionalDephasing { gamma } => gamma,
            ErrorChannel::GradientInhomogeneity { b3, .. } => b3,
            ErrorChannel::Anharmonicity { c4_over_c2, .. } => c4_over_c2,
            ErrorChannel::QubitDecoherence { tau } => tau,
        }
    }

    pub fn with_magnitude(&self, m: f64) -> Self {
        let mut out = *self;
        match &mut out {
            ErrorChannel::Heating { rate } => *rate = m,
            ErrorChannel::TrapFrequencyOffset { delta } => *delta = m,
            ErrorChannel::MotionalDephasing { gamma } => *gamma = m,
            ErrorChannel::GradientInhomogeneity { b3, .. } => *b3 = m,
            ErrorChannel::Anharmonicity { c4_over_c2, .. } => *c4_over_c2 = m,
            ErrorChannel::QubitDecoherence { tau } => *tau = m,
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let finite_non_negative = |name, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and non-negative, got {v}")))
            }
        };
        match *self {
            ErrorChannel::Heating { rate } => finite_non_negative("rate", rate),
            ErrorChannel::TrapFrequencyOffset { delta } => {
                if delta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("delta", "must be finite"))
                }
            }
            ErrorChannel::MotionalDephasing { gamma } => finite_non_negative("gamma", gamma),
            ErrorChannel::GradientInhomogeneity { b1, b3, z0 } => {
                finite_non_negative("b3", b3)?;
                finite_non_negative("z0", z0)?;
                if b1 > 0.0 && b1.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("b1", "must be positive"))
                }
            }
            ErrorChannel::Anharmonicity {
                c4_over_c2,
                z0,
                omega_a,
            } => {
                finite_non_negative("c4_over_c2", c4_over_c2)?;
                finite_non_negative("z0", z0)?;
                finite_non_negative("omega_a", omega_a)
            }
            ErrorChannel::QubitDecoherence { tau } => {
                if tau > 0.0 {
                    Ok(())
                } else {
                    Err(Error::param("tau", format!("must be positive, got {tau}")))
                }
            }
        }
    }

    /// True when the channel contributes no operators.
    pub fn is_off(&self) -> bool {
        match *self {
            ErrorChannel::QubitDecoherence { tau } => tau.is_infinite(),
            ErrorChannel::GradientInhomogeneity { b3, z0, .. } => b3 == 0.0 || z0 == 0.0,
            ErrorChannel::Anharmonicity {
                c4_over_c2,
                z0,
                omega_a,
            } => c4_over_c2 == 0.0 || z0 == 0.0 || omega_a == 0.0,
            _ => self.magnitude() == 0.0,
        }
    }

    /// `Ω_in / Ω_R = 3 z0² B₃ / B₁` for the gradient channel.
    pub fn gradient_ratio(&self) -> Option<f64> {
        match *self {
            ErrorChannel::GradientInhomogeneity { b1, b3, z0 } => Some(3.0 * z0 * z0 * b3 / b1),
            _ => None,
        }
    }

    /// Quartic coefficient `K₄` (rad/s) of `K₄ (a + a†)⁴`.
    ///
    /// With `V(0) c2 z² = ½ M ω_a² z²` and `z0² = ħ/(2Mω_a)`,
    /// `V(0) c4 z0⁴ / ħ = (ω_a / 4)(c4/c2) z0²`.
    pub fn quartic_coefficient(&self) -> Option<f64> {
        match *self {
            ErrorChannel::Anharmonicity {
                c4_over_c2,
                z0,
                omega_a,
            } => Some(0.25 * omega_a * c4_over_c2 * z0 * z0),
            _ => None,
        }
    }

    /// Channel at its error-budget magnitude for the given trap.
    pub fn table_default(kind: ChannelKind, trap: &TrapConfig, mode_mass: f64) -> Self {
        let z0 = ground_state_extent(mode_mass, trap.omega_a);
        match kind {
            ChannelKind::Heating => ErrorChannel::Heating { rate: 140.0 },
            ChannelKind::TrapFrequencyOffset => ErrorChannel::TrapFrequencyOffset { delta: angular(3e3) },
            ChannelKind::MotionalDephasing => ErrorChannel::MotionalDephasing {
                gamma: angular(1.8e-3),
            },
            ChannelKind::GradientInhomogeneity => ErrorChannel::GradientInhomogeneity {
                b1: trap.b1,
                b3: trap.b3,
                z0,
            },
            ChannelKind::Anharmonicity => ErrorChannel::Anharmonicity {
                c4_over_c2: trap.c4 / trap.c2,
                z0,
                omega_a: trap.omega_a,
            },
            ChannelKind::QubitDecoherence => ErrorChannel::QubitDecoherence { tau: 1.0 },
        }
    }

    pub fn table_defaults(trap: &TrapConfig) -> Vec<Self> {
        ChannelKind::ALL
            .iter()
            .map(|&k| Self::table_default(k, trap, DEFAULT_MODE_MASS))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::HBAR;

    #[test]
    fn magnitude_round_trip() {
        for ch in ErrorChannel::table_defaults(&TrapConfig::default()) {
            let m = ch.magnitude();
            assert_eq!(ch.with_magnitude(2.0 * m).magnitude(), 2.0 * m);
            assert_eq!(ch.with_magnitude(m), ch);
            ch.validate().unwrap();
        }
    }

    #[test]
    fn gradient_ratio_from_unit_conversion() {
        // B₃ = 1.5e-7 T/µm³, B₁ = 120 T/m, z0 at 300 MHz with M = 2 mₑ
        let z0_sq = HBAR / (2.0 * 2.0 * ELECTRON_MASS * 2.0 * std::f64::consts::PI * 300e6);
        let b3_si = 1.5e-7 / (1e-6f64).powi(3);
        let want = 3.0 * z0_sq * b3_si / 120.0;
        let trap = TrapConfig::default();
        let ch = ErrorChannel::table_default(ChannelKind::GradientInhomogeneity, &trap, 2.0 * ELECTRON_MASS);
        assert!((ch.gradient_ratio().unwrap() / want - 1.0).abs() < 1e-12);
        assert!((want - 5.758e-5).abs() < 1e-8);
    }

    #[test]
    fn quartic_coefficient_matches_potential_form() {
        // V(0) = M ω² / (2 c2); K₄ = V(0) c4 z0⁴ / ħ
        let trap = TrapConfig::default();
        let m = ELECTRON_MASS;
        let z0 = ground_state_extent(m, trap.omega_a);
        let v0 = m * trap.omega_a.powi(2) / (2.0 * trap.c2);
        let want = v0 * trap.c4 * z0.powi(4) / HBAR;
        let ch = ErrorChannel::table_default(ChannelKind::Anharmonicity, &trap, m);
        assert!((ch.quartic_coefficient().unwrap() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(ErrorChannel::QubitDecoherence { tau: -1.0 }.validate().is_err());
        assert!(ErrorChannel::QubitDecoherence { tau: 0.0 }.validate().is_err());
        assert!(ErrorChannel::Heating { rate: -1.0 }.validate().is_err());
        assert!(ErrorChannel::QubitDecoherence { tau: f64::INFINITY }.is_off());
        assert!(ErrorChannel::Heating { rate: 0.0 }.is_off());
    }

    #[test]
    fn serde_tagging() {
        let ch: ErrorChannel = serde_json::from_str(r#"{"kind":"heating","rate":140.0}"#).unwrap();
        assert_eq!(ch, ErrorChannel::Heating { rate: 140.0 });
        assert!(serde_json::from_str::<ErrorChannel>(r#"{"kind":"heating","rate":1,"x":2}"#).is_err());
        assert_eq!("anharmonicity".parse::<ChannelKind>().unwrap(), ChannelKind::Anharmonicity);
    }
}
