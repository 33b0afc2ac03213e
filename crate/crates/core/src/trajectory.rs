//! Classical radial motion of a single electron in the ideal quadrupole drive
//! and the storage-time map over release energy and drive phase.
//!
//! `f64` only, like [`crate::trap`].

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::constants::{ELECTRON_MASS, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use crate::trap::TrapConfig;

/// Half of the 60 µm gap between the electrode layers.
pub const DEFAULT_LOSS_RADIUS: f64 = 30e-6;
pub const STEPS_PER_DRIVE_PERIOD: usize = 64;
pub const DEFAULT_HORIZON: f64 = 100e-6;
pub const COARSE_HORIZON: f64 = 10e-6;
/// Relative energy drift allowed by the static-field self-test.
pub const ENERGY_DRIFT_LIMIT: f64 = 1e-6;
/// Coarsest step accepted by [`integrate_trajectory`], in steps per drive period.
const MIN_STEPS_PER_PERIOD: f64 = 8.0;

/// Field `E = G cos(ω_ac t + φ) (x, −y)`. At `φ = 0` the force on the electron
/// along `x` is maximally restoring at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DriveField {
    /// V/m²
    pub gradient: f64,
    pub omega_ac: f64,
    pub phi: f64,
}

impl DriveField {
    /// Gradient chosen so that the electron Mathieu parameter equals `q`.
    pub fn from_q(q: f64, omega_ac: f64, phi: f64) -> Self {
        Self {
            gradient: q * ELECTRON_MASS * omega_ac * omega_ac / (2.0 * ELEMENTARY_CHARGE),
            omega_ac,
            phi,
        }
    }

    pub fn from_trap(trap: &TrapConfig, phi: f64) -> Self {
        Self::from_q(trap.q_param, trap.omega_ac, phi)
    }

    pub fn with_phase(self, phi: f64) -> Self {
        Self { phi, ..self }
    }

    pub fn q_param(&self) -> f64 {
        2.0 * ELEMENTARY_CHARGE * self.gradient / (ELECTRON_MASS * self.omega_ac * self.omega_ac)
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega_ac
    }

    pub fn field(&self, pos: [f64; 2], t: f64) -> [f64; 2] {
        let g = self.gradient * (self.omega_ac * t + self.phi).cos();
        [g * pos[0], -g * pos[1]]
    }

    fn acceleration(&self, pos: [f64; 2], t: f64) -> [f64; 2] {
        let k = ELEMENTARY_CHARGE * self.gradient / ELECTRON_MASS * (self.omega_ac * t + self.phi).cos();
        [-k * pos[0], k * pos[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySettings {
    /// s
    pub horizon: f64,
    /// s
    pub dt: f64,
    /// m
    pub loss_radius: f64,
    /// Pseudopotential frequency used to convert release energy to radius.
    pub omega_t: f64,
    /// Release direction measured from the x axis, rad.
    pub release_angle: f64,
}

impl TrajectorySettings {
    pub fn new(trap: &TrapConfig, horizon: f64) -> Self {
        Self {
            horizon,
            dt: std::f64::consts::TAU / trap.omega_ac / STEPS_PER_DRIVE_PERIOD as f64,
            loss_radius: DEFAULT_LOSS_RADIUS,
            omega_t: trap.omega_t,
            release_angle: 0.0,
        }
    }

    pub fn coarse(trap: &TrapConfig) -> Self {
        Self::new(trap, COARSE_HORIZON)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("horizon", self.horizon),
            ("dt", self.dt),
            ("loss_radius", self.loss_radius),
            ("omega_t", self.omega_t),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, "must be positive and finite"));
            }
        }
        if !self.release_angle.is_finite() {
            return Err(Error::param("release_angle", "must be finite"));
        }
        Ok(())
    }

    /// Release point for a potential energy in joules.
    pub fn release_point(&self, energy: f64) -> [f64; 2] {
        let r = release_radius(energy, self.omega_t);
        [r * self.release_angle.cos(), r * self.release_angle.sin()]
    }
}

impl Default for TrajectorySettings {
    fn default() -> Self {
        Self::new(&TrapConfig::default(), DEFAULT_HORIZON)
    }
}

/// Pseudopotential energy `½ m ω² r²`, J.
pub fn pseudopotential_energy(r: f64, omega: f64) -> f64 {
    0.5 * ELECTRON_MASS * omega * omega * r * r
}

pub fn release_radius(energy: f64, omega: f64) -> f64 {
    (2.0 * energy.max(0.0) / ELECTRON_MASS).sqrt() / omega
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectoryOutcome {
    /// eV
    pub initial_energy: f64,
    pub phi: f64,
    /// Time of the first excursion beyond the loss radius, or the horizon.
    pub storage_time: f64,
    pub lost: bool,
}

/// Velocity-Verlet integration from rest at `release`.
pub fn integrate_trajectory(
    release: [f64; 2],
    drive: &DriveField,
    settings: &TrajectorySettings,
) -> Result<TrajectoryOutcome> {
    settings.validate()?;
    if settings.dt * MIN_STEPS_PER_PERIOD > drive.period() {
        return Err(Error::IntegratorCheck(format!(
            "dt = {:e} s resolves the drive with fewer than {MIN_STEPS_PER_PERIOD} steps",
            settings.dt
        )));
    }
    let r0 = release[0].hypot(release[1]);
    let outcome = |storage_time: f64, lost: bool| TrajectoryOutcome {
        initial_energy: pseudopotential_energy(r0, settings.omega_t) / ELEMENTARY_CHARGE,
        phi: drive.phi,
        storage_time,
        lost,
    };
    let r2max = settings.loss_radius * settings.loss_radius;
    if r0 * r0 > r2max {
        return Ok(outcome(0.0, true));
    }
    let dt = settings.dt;
    let steps = (settings.horizon / dt).ceil() as u64;
    let (mut x, mut v) = (release, [0.0; 2]);
    let mut a = drive.acceleration(x, 0.0);
    for n in 1..=steps {
        for k in 0..2 {
            x[k] += dt * (v[k] + 0.5 * dt * a[k]);
        }
        let t = n as f64 * dt;
        let a_new = drive.acceleration(x, t);
        for k in 0..2 {
            v[k] += 0.5 * dt * (a[k] + a_new[k]);
        }
        a = a_new;
        if x[0] * x[0] + x[1] * x[1] > r2max {
            return Ok(outcome(t.min(settings.horizon), true));
        }
    }
    Ok(outcome(settings.horizon, false))
}

/// Relative drift of the period-averaged energy when the drive is replaced by
/// the static pseudopotential of frequency `omega`.
pub fn static_energy_drift(omega: f64, dt: f64, horizon: f64) -> Result<f64> {
    if !(omega > 0.0 && dt > 0.0 && horizon > 0.0) {
        return Err(Error::param("dt", "omega, dt and horizon must be positive"));
    }
    let w2 = omega * omega;
    let window = ((std::f64::consts::TAU / omega) / dt).round().max(1.0) as u64;
    let steps = ((horizon / dt).ceil() as u64).max(2 * window);
    let energy = |x: f64, v: f64| 0.5 * (v * v + w2 * x * x);
    let (mut x, mut v) = (1.0, 0.0);
    let e0 = energy(x, v);
    let (mut first, mut last) = (0.0, 0.0);
    for n in 0..steps {
        let a = -w2 * x;
        x += dt * (v + 0.5 * dt * a);
        v += 0.5 * dt * (a - w2 * x);
        let e = energy(x, v);
        if !e.is_finite() {
            return Ok(f64::INFINITY);
        }
        if n < window {
            first += e;
        }
        if n >= steps - window {
            last += e;
        }
    }
    Ok(((last - first) / window as f64 / e0).abs())
}

/// Secular frequency (rad/s) from the spectrum of a small-amplitude orbit
/// started at rest on the x axis.
pub fn fft_secular_frequency(drive: &DriveField, amplitude: f64, duration: f64, dt: f64) -> Result<f64> {
    let steps = (duration / dt).ceil() as usize;
    if steps < 16 {
        return Err(Error::param("duration", "too short for a spectrum"));
    }
    let mut samples = Vec::with_capacity(steps);
    let (mut x, mut v) = ([amplitude, 0.0], [0.0; 2]);
    let mut a = drive.acceleration(x, 0.0);
    for n in 1..=steps {
        for k in 0..2 {
            x[k] += dt * (v[k] + 0.5 * dt * a[k]);
        }
        let a_new = drive.acceleration(x, n as f64 * dt);
        for k in 0..2 {
            v[k] += 0.5 * dt * (a[k] + a_new[k]);
        }
        a = a_new;
        samples.push(Complex::new(x[0], 0.0));
    }
    let mean = samples.iter().map(|c| c.re).sum::<f64>() / steps as f64;
    for c in &mut samples {
        c.re -= mean;
    }
    FftPlanner::new().plan_fft_forward(steps).process(&mut samples);
    let df = 1.0 / (steps as f64 * dt);
    let nyquist_bin = ((drive.omega_ac / std::f64::consts::TAU / 2.0) / df) as usize;
    let power: Vec<f64> = samples[..nyquist_bin.min(steps / 2)].iter().map(|c| c.norm_sqr()).collect();
    let k = (1..power.len())
        .max_by(|&i, &j| power[i].total_cmp(&power[j]))
        .ok_or_else(|| Error::param("duration", "no spectral peak"))?;
    // parabolic interpolation on the log power
    let shift = if k + 1 < power.len() {
        let (l, c, r) = (power[k - 1].ln(), power[k].ln(), power[k + 1].ln());
        let denom = l - 2.0 * c + r;
        if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 }
    } else {
        0.0
    };
    Ok(std::f64::consts::TAU * (k as f64 + shift) * df)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StabilityMap {
    /// eV
    pub energies: Vec<f64>,
    pub phis: Vec<f64>,
    /// Energy-major: `cells[i * phis.len() + j]`.
    pub cells: Vec<TrajectoryOutcome>,
    pub horizon: f64,
}

impl StabilityMap {
    pub fn cell(&self, energy: usize, phi: usize) -> &TrajectoryOutcome {
        &self.cells[energy * self.phis.len() + phi]
    }

    fn row(&self, energy: usize) -> &[TrajectoryOutcome] {
        let n = self.phis.len();
        &self.cells[energy * n..(energy + 1) * n]
    }

    /// Largest grid energy (eV) at and below which no phase loses the electron.
    pub fn all_phase_threshold(&self) -> Option<f64> {
        let mut order: Vec<usize> = (0..self.energies.len()).collect();
        order.sort_by(|&a, &b| self.energies[a].total_cmp(&self.energies[b]));
        let mut best = None;
        for i in order {
            if self.row(i).iter().any(|c| c.lost) {
                break;
            }
            best = Some(self.energies[i]);
        }
        best
    }

    /// Mean storage time per phase over the energies strictly above `threshold`.
    pub fn band_storage(&self, threshold: f64) -> Vec<f64> {
        let rows: Vec<usize> = (0..self.energies.len()).filter(|&i| self.energies[i] > threshold).collect();
        (0..self.phis.len())
            .map(|j| {
                if rows.is_empty() {
                    return self.horizon;
                }
                rows.iter().map(|&i| self.cell(i, j).storage_time).sum::<f64>() / rows.len() as f64
            })
            .collect()
    }
}

/// Storage time on the cartesian product of release energies (eV) and drive
/// phases. Runs the static-field self-test first.
pub fn stability_map(
    energies: &[f64],
    phis: &[f64],
    drive: &DriveField,
    settings: &TrajectorySettings,
) -> Result<StabilityMap> {
    if energies.is_empty() || phis.is_empty() {
        return Err(Error::param("grid", "energy and phase grids must be non-empty"));
    }
    settings.validate()?;
    let drift = static_energy_drift(settings.omega_t, settings.dt, settings.horizon)?;
    if !(drift < ENERGY_DRIFT_LIMIT) {
        return Err(Error::IntegratorCheck(format!(
            "static-field energy drift {drift:e} exceeds {ENERGY_DRIFT_LIMIT:e}"
        )));
    }
    let cells = (0..energies.len() * phis.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / phis.len(), idx % phis.len());
            let release = settings.release_point(energies[i] * ELEMENTARY_CHARGE);
            integrate_trajectory(release, &drive.with_phase(phis[j]), settings)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityMap {
        energies: energies.to_vec(),
        phis: phis.to_vec(),
        cells,
        horizon: settings.horizon,
    })
}
