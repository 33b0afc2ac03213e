use rayon::prelude::*;

use super::channels::{ChannelKind, ErrorChannel};
use super::model::GateModel;
use super::schedule::{analytic_rabi, GateSchedule, WalshOrder};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::lindblad::blocks::{evolve_blocks, BlockDensity};
use crate::lindblad::SolverSettings;
use crate::quantum::{
    bell_fidelity, minimal_thermal_cutoff, rx, thermal_state_with_tolerance, DensityMatrix, HilbertSpec,
    PureState, DEFAULT_TAIL_TOLERANCE,
};
use crate::scalar::Real;

pub const TRACE_DRIFT_GATE: f64 = 1e-8;
pub const POSITIVITY_GATE: f64 = -1e-7;
pub const TRUNCATION_GATE: f64 = 1e-7;

/// Fock cutoff used while calibrating from the motional ground state.
const CALIBRATION_CUTOFF: usize = 16;
/// Extra truncation steps allowed for an automatic cutoff.
const MAX_WIDENINGS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct GateOptions {
    /// `None` picks the smallest cutoff meeting `tail_tolerance` for the
    /// initial thermal state (at least 16 levels).
    pub fock_cutoff: Option<usize>,
    pub tail_tolerance: f64,
    /// Re-run with this many extra levels and report the fidelity change.
    pub truncation_margin: Option<usize>,
    /// Spin receiving the local correction.
    pub correction_spin: usize,
    pub check_positivity: bool,
}

impl Default for GateOptions {
    fn default() -> Self {
        Self {
            fock_cutoff: None,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            truncation_margin: Some(10),
            correction_spin: 0,
            check_positivity: true,
        }
    }
}

impl GateOptions {
    /// No truncation re-run and no eigenvalue check.
    pub fn fast() -> Self {
        Self {
            truncation_margin: None,
            check_positivity: false,
            ..Self::default()
        }
    }

    pub fn cutoff_for(&self, nbar0: f64) -> usize {
        self.fock_cutoff
            .unwrap_or_else(|| minimal_thermal_cutoff(nbar0, self.tail_tolerance).max(CALIBRATION_CUTOFF))
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GateDiagnostics {
    pub fock_cutoff: usize,
    pub trace_drift: f64,
    pub min_eigenvalue: Option<f64>,
    /// `|F(N) − F(N + margin)|`.
    pub truncation_delta: Option<f64>,
    /// Final population of the highest retained Fock level.
    pub top_level_population: f64,
    pub rhs_evaluations: usize,
}

impl GateDiagnostics {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.trace_drift < TRACE_DRIFT_GATE) {
            out.push(format!("trace drift {:e} ≥ {TRACE_DRIFT_GATE:e}", self.trace_drift));
        }
        if let Some(e) = self.min_eigenvalue {
            if !(e >= POSITIVITY_GATE) {
                out.push(format!("minimum eigenvalue {e:e} < {POSITIVITY_GATE:e}"));
            }
        }
        if let Some(d) = self.truncation_delta {
            if !(d < TRUNCATION_GATE) {
                out.push(format!("truncation delta {d:e} ≥ {TRUNCATION_GATE:e}"));
            }
        }
        out
    }

    pub fn passes(&self) -> bool {
        self.failures().is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct GateResult<T: Real> {
    pub bell_fidelity: T,
    pub infidelity: T,
    pub final_spin_state: DensityMatrix<T>,
    pub schedule: GateSchedule<T>,
    pub diagnostics: GateDiagnostics,
}

/// `exp(iπ/4 σx)` on `spin`, mapping the ideal gate output onto `|Φ+⟩`.
pub fn local_correction<T: Real>(spin: usize) -> ComplexMatrix<T> {
    let r = rx(-T::FRAC_PI_2());
    let id = ComplexMatrix::identity(2);
    if spin == 0 {
        r.kron(&id)
    } else {
        id.kron(&r)
    }
}

fn initial_state<T: Real>(cutoff: usize, nbar0: T, tail_tolerance: f64) -> Result<BlockDensity<T>> {
    let spec = HilbertSpec::new(cutoff)?;
    let plus = PureState::<T>::plus().projector();
    let motion = thermal_state_with_tolerance(&spec, nbar0, tail_tolerance)?;
    Ok(BlockDensity::product(&plus.tensor(&plus), &motion))
}

struct Simulation<T: Real> {
    state: BlockDensity<T>,
    trace_drift: f64,
    rhs_evaluations: usize,
}

fn simulate<T: Real>(
    schedule: &GateSchedule<T>,
    channels: &[ErrorChannel],
    nbar0: T,
    settings: &SolverSettings<T>,
    cutoff: usize,
    tail_tolerance: f64,
) -> Result<Simulation<T>> {
    let model = GateModel::new(schedule, channels, cutoff)?;
    let rho0 = initial_state(cutoff, nbar0, tail_tolerance)?;
    let ev = evolve_blocks(
        &rho0,
        &model.hamiltonian,
        &model.jumps,
        (T::zero(), schedule.duration()),
        settings,
    )?;
    Ok(Simulation {
        state: ev.state,
        trace_drift: ev.trace_drift,
        rhs_evaluations: ev.stats.rhs_evaluations,
    })
}

fn corrected_fidelity<T: Real>(state: &BlockDensity<T>, correction_spin: usize) -> Result<(T, DensityMatrix<T>)> {
    let spin = state.reduced_spin().conjugate_by(&local_correction(correction_spin));
    let f = bell_fidelity(&spin, &PureState::bell_phi_plus())?;
    Ok((f, spin))
}

pub fn run_gate<T: Real>(
    schedule: &GateSchedule<T>,
    errors: &[ErrorChannel],
    nbar0: T,
    settings: &SolverSettings<T>,
) -> Result<GateResult<T>> {
    run_gate_with(schedule, errors, nbar0, settings, &GateOptions::default())
}

pub fn run_gate_with<T: Real>(
    schedule: &GateSchedule<T>,
    errors: &[ErrorChannel],
    nbar0: T,
    settings: &SolverSettings<T>,
    options: &GateOptions,
) -> Result<GateResult<T>> {
    if options.correction_spin > 1 {
        return Err(Error::SpinIndex {
            index: options.correction_spin,
            count: 2,
        });
    }
    if !(nbar0 >= T::zero()) {
        return Err(Error::param("nbar0", "must be non-negative"));
    }
    let mut cutoff = options.cutoff_for(nbar0.as_f64());
    let mut sim = simulate(schedule, errors, nbar0, settings, cutoff, options.tail_tolerance)?;
    let (mut fidelity, mut spin) = corrected_fidelity(&sim.state, options.correction_spin)?;

    let mut truncation_delta = None;
    if let Some(m) = options.truncation_margin.filter(|&m| m > 0) {
        // An automatic cutoff keeps growing while the wider run still moves F.
        let widenings = if options.fock_cutoff.is_none() { MAX_WIDENINGS } else { 0 };
        for step in 0..=widenings {
            let wide = simulate(schedule, errors, nbar0, settings, cutoff + m, options.tail_tolerance)?;
            let (f2, spin2) = corrected_fidelity(&wide.state, options.correction_spin)?;
            let delta = (f2 - fidelity).abs().as_f64();
            truncation_delta = Some(delta);
            if delta < TRUNCATION_GATE || step == widenings {
                break;
            }
            cutoff += m;
            (sim, fidelity, spin) = (wide, f2, spin2);
        }
    }

    let min_eigenvalue = if options.check_positivity {
        sim.state.to_dense().matrix().hermitian_eigenvalues().first().copied()
    } else {
        None
    };
    let top_level_population = sim.state.fock_populations().last().map_or(0.0, |p| p.as_f64());
    Ok(GateResult {
        bell_fidelity: fidelity,
        infidelity: T::one() - fidelity,
        final_spin_state: spin,
        schedule: schedule.clone(),
        diagnostics: GateDiagnostics {
            fock_cutoff: cutoff,
            trace_drift: sim.trace_drift,
            min_eigenvalue,
            truncation_delta,
            top_level_population,
            rhs_evaluations: sim.rhs_evaluations,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration<T: Real> {
    pub rabi: T,
    pub analytic_rabi: T,
    /// Residual `|arg ρ(↑↑,↑↓)| − π/2` at the returned Rabi frequency.
    pub phase_error: T,
    pub iterations: usize,
}

/// Conditional phase `|arg ⟨↑↑|ρ|↑↓⟩|` after the noiseless gate from the
/// motional ground state. The target is π/2.
pub fn conditional_phase<T: Real>(schedule: &GateSchedule<T>, settings: &SolverSettings<T>) -> Result<T> {
    let sim = simulate(schedule, &[], T::zero(), settings, CALIBRATION_CUTOFF, DEFAULT_TAIL_TOLERANCE)?;
    let spin = sim.state.reduced_spin();
    Ok(spin.matrix()[(0, 1)].arg().abs())
}

/// Solves for the Rabi frequency giving a conditional phase of π/2,
/// bracketing the analytic value `δ/(4√K)` and refining with the Illinois
/// variant of false position.
pub fn calibrate_rabi<T: Real>(schedule: &GateSchedule<T>, settings: &SolverSettings<T>) -> Result<Calibration<T>> {
    let seed = analytic_rabi(schedule.delta, schedule.walsh_order.loops());
    let f = |rabi: T| -> Result<T> { Ok(conditional_phase(&schedule.with_rabi(rabi), settings)? - T::FRAC_PI_2()) };
    let (mut lo, mut hi) = (seed * T::lit(0.9), seed * T::lit(1.1));
    let (mut flo, mut fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let tol = T::tolerance(1e-13);
    let mut best = (seed, f(seed)?);
    let mut side = 0i8;
    let mut iterations = 0;
    while iterations < 60 && best.1.abs() > tol && (hi - lo) > tol * seed {
        iterations += 1;
        let x = (lo * fhi - hi * flo) / (fhi - flo);
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi = fhi * T::lit(0.5);
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo = flo * T::lit(0.5);
            }
            side = 1;
        }
    }
    Ok(Calibration {
        rabi: best.0,
        analytic_rabi: seed,
        phase_error: best.1,
        iterations,
    })
}

/// Gate settings shared by sweeps and budgets.
#[derive(Debug, Clone)]
pub struct GateSetup<T: Real> {
    /// Duration of one phase-space loop, s.
    pub t_loop: T,
    pub nbar0: T,
    pub settings: SolverSettings<T>,
    pub options: GateOptions,
    /// Calibrate Ω_R numerically; otherwise use the analytic value.
    pub calibrate: bool,
}

impl<T: Real> GateSetup<T> {
    pub fn new(t_loop: T, nbar0: T) -> Self {
        Self {
            t_loop,
            nbar0,
            settings: SolverSettings::default(),
            options: GateOptions::default(),
            calibrate: true,
        }
    }

    pub fn schedule(&self, walsh: WalshOrder) -> Result<GateSchedule<T>> {
        let s = GateSchedule::from_loop_time(walsh, self.t_loop)?;
        if !self.calibrate {
            return Ok(s);
        }
        let cal = calibrate_rabi(&s, &self.settings)?;
        Ok(s.with_rabi(cal.rabi))
    }

    pub fn run(&self, schedule: &GateSchedule<T>, channels: &[ErrorChannel]) -> Result<GateResult<T>> {
        run_gate_with(schedule, channels, self.nbar0, &self.settings, &self.options)
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow<T: Real> {
    pub magnitude: f64,
    pub walsh: WalshOrder,
    pub infidelity: T,
    pub diagnostics: GateDiagnostics,
}

/// Runs `channel` at every magnitude for every Walsh order. Rows are ordered
/// by Walsh order, then magnitude.
pub fn sweep<T: Real>(
    channel: &ErrorChannel,
    magnitudes: &[f64],
    walsh_orders: &[WalshOrder],
    setup: &GateSetup<T>,
) -> Result<Vec<SweepRow<T>>> {
    if magnitudes.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::param("magnitudes", "must be sorted ascending"));
    }
    let schedules = walsh_orders
        .par_iter()
        .map(|&w| setup.schedule(w))
        .collect::<Result<Vec<_>>>()?;
    let grid: Vec<(usize, f64)> = (0..walsh_orders.len())
        .flat_map(|i| magnitudes.iter().map(move |&m| (i, m)))
        .collect();
    grid.par_iter()
        .map(|&(i, m)| {
            let r = setup.run(&schedules[i], &[channel.with_magnitude(m)])?;
            Ok(SweepRow {
                magnitude: m,
                walsh: walsh_orders[i],
                infidelity: r.infidelity,
                diagnostics: r.diagnostics,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BudgetRow<T: Real> {
    /// `None` for the combined run.
    pub kind: Option<ChannelKind>,
    pub label: String,
    pub magnitude: Option<f64>,
    pub unit: &'static str,
    pub infidelity: T,
    pub diagnostics: GateDiagnostics,
}

#[derive(Debug, Clone)]
pub struct Budget<T: Real> {
    pub walsh: WalshOrder,
    /// One row per channel, each simulated alone.
    pub rows: Vec<BudgetRow<T>>,
    /// Every channel switched on at once. Not part of the per-channel budget.
    pub combined: BudgetRow<T>,
    /// Infidelity with every channel off.
    pub baseline: T,
}

pub fn error_budget<T: Real>(channels: &[ErrorChannel], walsh: WalshOrder, setup: &GateSetup<T>) -> Result<Budget<T>> {
    let schedule = setup.schedule(walsh)?;
    let mut jobs: Vec<Option<usize>> = (0..channels.len()).map(Some).collect();
    jobs.push(None);
    jobs.push(Some(usize::MAX));
    let results = jobs
        .par_iter()
        .map(|job| match *job {
            Some(usize::MAX) => setup.run(&schedule, &[]),
            Some(i) => setup.run(&schedule, &channels[i..=i]),
            None => setup.run(&schedule, channels),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut results = results.into_iter();
    let rows = channels
        .iter()
        .zip(results.by_ref())
        .map(|(ch, r)| BudgetRow {
            kind: Some(ch.kind()),
            label: ch.kind().label().to_string(),
            magnitude: Some(ch.magnitude()),
            unit: ch.kind().unit(),
            infidelity: r.infidelity,
            diagnostics: r.diagnostics,
        })
        .collect();
    let combined = results.next().expect("combined run");
    let baseline = results.next().expect("baseline run");
    Ok(Budget {
        walsh,
        rows,
        combined: BudgetRow {
            kind: None,
            label: "all channels combined (extension)".to_string(),
            magnitude: None,
            unit: "",
            infidelity: combined.infidelity,
            diagnostics: combined.diagnostics,
        },
        baseline: baseline.infidelity,
    })
}
