//! Run configuration: sectioned TOML, every physical quantity written with
//! its unit. Omitted fields fall back to the prototype trap and the
//! error-budget magnitudes.

use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use electron_qc::gate::{ChannelKind, ErrorChannel, GateOptions, GateSetup, WalshOrder, DEFAULT_MODE_MASS};
use electron_qc::lindblad::SolverSettings;
use electron_qc::trajectory::{TrajectorySettings, COARSE_HORIZON};
use electron_qc::trap::TrapConfig;
use serde::{Deserialize, Serialize};

use crate::units::{self, Dim, Quantity};

/// Loop time of the prototype gate, s.
pub const DEFAULT_LOOP_TIME: f64 = 2e-6;
/// Default sweep span: log-spaced factors around the budget magnitude.
pub const SWEEP_DECADES: (f64, f64) = (-1.0, 1.0);
pub const SWEEP_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GateSim,
    Sweep,
    Budget,
    TrapCalc,
    Trajectory,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::GateSim => "gate-sim",
            Command::Sweep => "sweep",
            Command::Budget => "budget",
            Command::TrapCalc => "trap-calc",
            Command::Trajectory => "trajectory",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Reserved; nothing is random yet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub trap: TrapSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub schedule: ScheduleSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub channels: ChannelsSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub sweep: SweepSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub trajectory: TrajectorySection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Quantity<units::Voltage>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_ac: Option<Quantity<units::Angular>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_t: Option<Quantity<units::Angular>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_a: Option<Quantity<units::Angular>>,
    /// Mathieu q, dimensionless.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_eff_y: Option<Quantity<units::Length>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_eff_z: Option<Quantity<units::Length>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<Quantity<units::InverseArea>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c4: Option<Quantity<units::InverseQuartic>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c6: Option<Quantity<units::InverseSextic>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<Quantity<units::Field>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<Quantity<units::Gradient>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b3: Option<Quantity<units::ThirdOrder>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tank_temperature: Option<Quantity<units::Temperature>>,
}

impl TrapSection {
    pub fn resolve(&self) -> TrapConfig {
        let d = TrapConfig::default();
        let si = |q: Option<f64>, default| q.unwrap_or(default);
        TrapConfig {
            u0: si(self.u0.map(|q| q.si), d.u0),
            omega_ac: si(self.omega_ac.map(|q| q.si), d.omega_ac),
            omega_t: si(self.omega_t.map(|q| q.si), d.omega_t),
            omega_a: si(self.omega_a.map(|q| q.si), d.omega_a),
            q_param: si(self.q, d.q_param),
            d_eff_y: si(self.d_eff_y.map(|q| q.si), d.d_eff_y),
            d_eff_z: si(self.d_eff_z.map(|q| q.si), d.d_eff_z),
            c2: si(self.c2.map(|q| q.si), d.c2),
            c4: si(self.c4.map(|q| q.si), d.c4),
            c6: si(self.c6.map(|q| q.si), d.c6),
            b0: si(self.b0.map(|q| q.si), d.b0),
            b1: si(self.b1.map(|q| q.si), d.b1),
            b3: si(self.b3.map(|q| q.si), d.b3),
            tank_temperature: si(self.tank_temperature.map(|q| q.si), d.tank_temperature),
        }
    }

    pub fn explicit(t: &TrapConfig) -> Self {
        Self {
            u0: Some(Quantity::new(t.u0)),
            omega_ac: Some(Quantity::new(t.omega_ac)),
            omega_t: Some(Quantity::new(t.omega_t)),
            omega_a: Some(Quantity::new(t.omega_a)),
            q: Some(t.q_param),
            d_eff_y: Some(Quantity::new(t.d_eff_y)),
            d_eff_z: Some(Quantity::new(t.d_eff_z)),
            c2: Some(Quantity::new(t.c2)),
            c4: Some(Quantity::new(t.c4)),
            c6: Some(Quantity::new(t.c6)),
            b0: Some(Quantity::new(t.b0)),
            b1: Some(Quantity::new(t.b1)),
            b3: Some(Quantity::new(t.b3)),
            tank_temperature: Some(Quantity::new(t.tank_temperature)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walsh: Option<WalshOrder>,
    /// Duration of one phase-space loop.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loop_time: Option<Quantity<units::Time>>,
    /// Calibrate the drive numerically instead of using the analytic value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<bool>,
    /// Initial thermal occupation; defaults to the parametric-cooling limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction_spin: Option<usize>,
}

/// One optional magnitude per error channel. Channel-specific parameters
/// (z0, B₁, ω_a) follow from the trap section.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heating: Option<Quantity<units::Rate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap_frequency_offset: Option<Quantity<units::Angular>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motional_dephasing: Option<Quantity<units::Angular>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_inhomogeneity: Option<Quantity<units::ThirdOrder>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anharmonicity: Option<Quantity<units::InverseArea>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_decoherence: Option<Quantity<units::Time>>,
}

/// Dimension in which a channel magnitude is written.
pub fn channel_dim(kind: ChannelKind) -> Dim {
    match kind {
        ChannelKind::Heating => Dim::Rate,
        ChannelKind::TrapFrequencyOffset | ChannelKind::MotionalDephasing => Dim::Angular,
        ChannelKind::GradientInhomogeneity => Dim::ThirdOrder,
        ChannelKind::Anharmonicity => Dim::InverseArea,
        ChannelKind::QubitDecoherence => Dim::Time,
    }
}

impl ChannelsSection {
    fn get(&self, kind: ChannelKind) -> Option<f64> {
        match kind {
            ChannelKind::Heating => self.heating.map(|q| q.si),
            ChannelKind::TrapFrequencyOffset => self.trap_frequency_offset.map(|q| q.si),
            ChannelKind::MotionalDephasing => self.motional_dephasing.map(|q| q.si),
            ChannelKind::GradientInhomogeneity => self.gradient_inhomogeneity.map(|q| q.si),
            ChannelKind::Anharmonicity => self.anharmonicity.map(|q| q.si),
            ChannelKind::QubitDecoherence => self.qubit_decoherence.map(|q| q.si),
        }
    }

    fn set(&mut self, kind: ChannelKind, v: f64) {
        match kind {
            ChannelKind::Heating => self.heating = Some(Quantity::new(v)),
            ChannelKind::TrapFrequencyOffset => self.trap_frequency_offset = Some(Quantity::new(v)),
            ChannelKind::MotionalDephasing => self.motional_dephasing = Some(Quantity::new(v)),
            ChannelKind::GradientInhomogeneity => self.gradient_inhomogeneity = Some(Quantity::new(v)),
            ChannelKind::Anharmonicity => self.anharmonicity = Some(Quantity::new(v)),
            ChannelKind::QubitDecoherence => self.qubit_decoherence = Some(Quantity::new(v)),
        }
    }

    /// Channels that are listed, in budget order.
    pub fn active(&self, trap: &TrapConfig) -> Vec<ErrorChannel> {
        ChannelKind::ALL
            .iter()
            .filter_map(|&k| self.get(k).map(|m| channel(k, m, trap)))
            .collect()
    }

    /// Every channel, unlisted ones at their budget magnitude.
    pub fn all(&self, trap: &TrapConfig) -> Vec<ErrorChannel> {
        ChannelKind::ALL
            .iter()
            .map(|&k| {
                let base = ErrorChannel::table_default(k, trap, DEFAULT_MODE_MASS);
                self.get(k).map_or(base, |m| base.with_magnitude(m))
            })
            .collect()
    }

    fn filled(&self, trap: &TrapConfig) -> Self {
        let mut out = self.clone();
        for ch in self.all(trap) {
            out.set(ch.kind(), ch.magnitude());
        }
        out
    }
}

fn channel(kind: ChannelKind, magnitude: f64, trap: &TrapConfig) -> ErrorChannel {
    ErrorChannel::table_default(kind, trap, DEFAULT_MODE_MASS).with_magnitude(magnitude)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_drive_period: Option<usize>,
    /// Fixed Fock cutoff; omitted picks one from the thermal tail.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tolerance: Option<f64>,
    /// Extra levels for the truncation re-run; 0 disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_margin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_positivity: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSweep", into = "RawSweep")]
pub struct SweepSection {
    pub channel: Option<ChannelKind>,
    /// SI, in the channel's unit.
    pub magnitudes: Option<Vec<f64>>,
    pub walsh: Option<Vec<WalshOrder>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    channel: Option<ChannelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    magnitudes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    walsh: Option<Vec<WalshOrder>>,
}

impl TryFrom<RawSweep> for SweepSection {
    type Error = String;

    fn try_from(raw: RawSweep) -> Result<Self, String> {
        let dim = channel_dim(raw.channel.unwrap_or(ChannelKind::Heating));
        let magnitudes = raw
            .magnitudes
            .map(|ms| {
                ms.iter()
                    .map(|m| units::parse(m, dim).map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        Ok(Self {
            channel: raw.channel,
            magnitudes,
            walsh: raw.walsh,
        })
    }
}

impl From<SweepSection> for RawSweep {
    fn from(s: SweepSection) -> Self {
        let dim = channel_dim(s.channel.unwrap_or(ChannelKind::Heating));
        Self {
            channel: s.channel,
            magnitudes: s.magnitudes.map(|ms| ms.iter().map(|&m| units::render(m, dim)).collect()),
            walsh: s.walsh,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Quantity<units::Time>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<Quantity<units::Time>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_radius: Option<Quantity<units::Length>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_min: Option<Quantity<units::Energy>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_max: Option<Quantity<units::Energy>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Trajectory grid after defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    pub settings: TrajectorySettings,
    /// eV
    pub energies: Vec<f64>,
    /// rad
    pub phis: Vec<f64>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).context("invalid run configuration")?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn render(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("run configuration always serialises")
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let trap = self.trap.resolve();
        trap.validate().context("[trap]")?;
        for ch in self.channels.active(&trap) {
            ch.validate().with_context(|| format!("[channels] {}", ch.kind()))?;
        }
        if let Some(t) = self.schedule.loop_time {
            if !(t.si > 0.0) {
                bail!("[schedule] loop_time must be positive");
            }
        }
        if let Some(n) = self.schedule.nbar0 {
            if !(n >= 0.0 && n.is_finite()) {
                bail!("[schedule] nbar0 must be finite and non-negative");
            }
        }
        if self.schedule.correction_spin.is_some_and(|s| s > 1) {
            bail!("[schedule] correction_spin must be 0 or 1");
        }
        if self.solver.steps_per_drive_period == Some(0) {
            bail!("[solver] steps_per_drive_period must be at least one");
        }
        if let Some(ms) = &self.sweep.magnitudes {
            if ms.is_empty() {
                bail!("[sweep] magnitudes must not be empty");
            }
            if ms.windows(2).any(|w| !(w[0] <= w[1])) {
                bail!("[sweep] magnitudes must be sorted ascending");
            }
            let kind = self.sweep.channel.unwrap_or(ChannelKind::Heating);
            for &m in ms {
                channel(kind, m, &trap)
                    .validate()
                    .with_context(|| format!("[sweep] magnitude {m:e}"))?;
            }
        }
        if self.sweep.walsh.as_ref().is_some_and(|w| w.is_empty()) {
            bail!("[sweep] walsh must list at least one order");
        }
        self.trajectory_plan()?.settings.validate().context("[trajectory]")?;
        Ok(())
    }

    pub fn trap(&self) -> TrapConfig {
        self.trap.resolve()
    }

    pub fn walsh(&self) -> WalshOrder {
        self.schedule.walsh.unwrap_or(WalshOrder::Three)
    }

    pub fn gate_setup(&self) -> GateSetup<f64> {
        let trap = self.trap();
        let mut setup = GateSetup::new(
            self.schedule.loop_time.map_or(DEFAULT_LOOP_TIME, |q| q.si),
            self.schedule.nbar0.unwrap_or_else(|| trap.axial_nbar()),
        );
        setup.calibrate = self.schedule.calibrate.unwrap_or(true);
        let d = GateOptions::default();
        setup.options = GateOptions {
            fock_cutoff: self.solver.fock_cutoff,
            tail_tolerance: self.solver.tail_tolerance.unwrap_or(d.tail_tolerance),
            truncation_margin: self.solver.truncation_margin.map_or(d.truncation_margin, |m| Some(m).filter(|&m| m > 0)),
            correction_spin: self.schedule.correction_spin.unwrap_or(d.correction_spin),
            check_positivity: self.solver.check_positivity.unwrap_or(d.check_positivity),
        };
        setup.settings = SolverSettings {
            steps_per_drive_period: self
                .solver
                .steps_per_drive_period
                .unwrap_or(SolverSettings::<f64>::default().steps_per_drive_period),
            ..SolverSettings::default()
        };
        setup
    }

    pub fn sweep_channel(&self) -> ErrorChannel {
        let trap = self.trap();
        let kind = self.sweep.channel.unwrap_or(ChannelKind::Heating);
        let base = ErrorChannel::table_default(kind, &trap, DEFAULT_MODE_MASS);
        self.channels.get(kind).map_or(base, |m| base.with_magnitude(m))
    }

    pub fn sweep_magnitudes(&self) -> Vec<f64> {
        if let Some(ms) = &self.sweep.magnitudes {
            return ms.clone();
        }
        let centre = self.sweep_channel().magnitude();
        linspace(SWEEP_DECADES.0, SWEEP_DECADES.1, SWEEP_POINTS)
            .into_iter()
            .map(|e| centre * 10f64.powf(e))
            .collect()
    }

    pub fn sweep_walsh(&self) -> Vec<WalshOrder> {
        self.sweep.walsh.clone().unwrap_or_else(|| WalshOrder::ALL.to_vec())
    }

    pub fn trajectory_plan(&self) -> Result<TrajectoryPlan> {
        let trap = self.trap();
        let t = &self.trajectory;
        let mut settings = TrajectorySettings::new(&trap, t.horizon.map_or(COARSE_HORIZON, |q| q.si));
        if let Some(dt) = t.dt {
            settings.dt = dt.si;
        }
        if let Some(r) = t.loss_radius {
            settings.loss_radius = r.si;
        }
        let kelvin = units::parse("1 K", Dim::Energy).expect("kelvin is an energy unit");
        let (lo, hi) = (
            t.energy_min.map_or(0.0, |q| q.si),
            t.energy_max.map_or(1000.0 * kelvin, |q| q.si),
        );
        if !(lo >= 0.0 && hi >= lo) {
            bail!("[trajectory] need 0 ≤ energy_min ≤ energy_max");
        }
        let (ne, np) = (t.energy_points.unwrap_or(21), t.phase_points.unwrap_or(16));
        if ne == 0 || np == 0 {
            bail!("[trajectory] energy_points and phase_points must be positive");
        }
        let phis = (0..np).map(|j| std::f64::consts::TAU * j as f64 / np as f64).collect();
        Ok(TrajectoryPlan {
            settings,
            energies: linspace(lo, hi, ne),
            phis,
        })
    }

    /// Same run with every default written out. Hashing this makes configs
    /// that differ only in spelled-out defaults hash alike.
    pub fn resolved(&self, command: Command) -> Result<RunConfig> {
        let trap = self.trap();
        let setup = self.gate_setup();
        let mut out = RunConfig {
            command: Some(command),
            seed: self.seed,
            trap: TrapSection::explicit(&trap),
            output: OutputSection::default(),
            ..RunConfig::default()
        };
        let gate = matches!(command, Command::GateSim | Command::Sweep | Command::Budget);
        if gate {
            out.schedule = ScheduleSection {
                walsh: Some(self.walsh()),
                loop_time: Some(Quantity::new(setup.t_loop)),
                calibrate: Some(setup.calibrate),
                nbar0: Some(setup.nbar0),
                correction_spin: Some(setup.options.correction_spin),
            };
            out.solver = SolverSection {
                steps_per_drive_period: Some(setup.settings.steps_per_drive_period),
                fock_cutoff: setup.options.fock_cutoff,
                tail_tolerance: Some(setup.options.tail_tolerance),
                truncation_margin: Some(setup.options.truncation_margin.unwrap_or(0)),
                check_positivity: Some(setup.options.check_positivity),
            };
        }
        match command {
            Command::GateSim => out.channels = self.channels.clone(),
            Command::Budget => out.channels = self.channels.filled(&trap),
            Command::Sweep => {
                out.schedule.walsh = None;
                let ch = self.sweep_channel();
                out.channels.set(ch.kind(), ch.magnitude());
                out.sweep = SweepSection {
                    channel: Some(ch.kind()),
                    magnitudes: Some(self.sweep_magnitudes()),
                    walsh: Some(self.sweep_walsh()),
                };
            }
            Command::Trajectory => {
                let plan = self.trajectory_plan()?;
                let t = &self.trajectory;
                out.trajectory = TrajectorySection {
                    horizon: Some(Quantity::new(plan.settings.horizon)),
                    dt: Some(Quantity::new(plan.settings.dt)),
                    loss_radius: Some(Quantity::new(plan.settings.loss_radius)),
                    energy_min: Some(Quantity::new(plan.energies[0])),
                    energy_max: Some(Quantity::new(*plan.energies.last().expect("non-empty grid"))),
                    energy_points: Some(t.energy_points.unwrap_or(plan.energies.len())),
                    phase_points: Some(plan.phis.len()),
                };
            }
            Command::TrapCalc => {}
        }
        Ok(out)
    }
}
