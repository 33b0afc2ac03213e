//! Subcommand bodies. Each returns a result table plus any diagnostic-gate
//! failures; nothing here touches the filesystem.

use anyhow::{Context, Result};
use electron_qc::constants::{angular, BOLTZMANN, CALCIUM_40_ION_MASS, ELECTRON_MASS, ELEMENTARY_CHARGE};
use electron_qc::gate::{error_budget, sweep, BudgetRow, GateDiagnostics, WalshOrder};
use electron_qc::trajectory::{stability_map, DriveField};
use electron_qc::trap::{self, TankCircuit};

use crate::config::RunConfig;
use crate::output::{Cell, Column, Table};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub table: Table,
    /// Diagnostic-gate failures; any entry makes the run exit nonzero.
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

/// Inputs of the trap calculators that are not part of the trap itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalcInputs {
    /// Oscillation amplitude for the anharmonic shift, m.
    pub amplitude: f64,
    /// Field-noise density, V² m⁻² Hz⁻¹.
    pub noise: f64,
    /// Frequency at which `noise` was measured, rad/s.
    pub noise_omega: f64,
    /// Noise spectral exponent for extrapolation.
    pub gamma: f64,
    /// Readout drive duration, s.
    pub readout_time: f64,
}

impl Default for CalcInputs {
    fn default() -> Self {
        Self {
            amplitude: 1.3e-6,
            noise: 1e-12,
            noise_omega: angular(1e6),
            gamma: 1.3,
            readout_time: 10e-6,
        }
    }
}

const DIAGNOSTIC_COLUMNS: [Column; 5] = [
    Column::new("fock_cutoff", ""),
    Column::new("trace_drift", ""),
    Column::new("min_eigenvalue", ""),
    Column::new("truncation_delta", ""),
    Column::new("gates_passed", ""),
];

fn diagnostic_cells(d: &GateDiagnostics) -> Vec<Cell> {
    vec![
        Cell::Int(d.fock_cutoff as u64),
        Cell::Num(d.trace_drift),
        Cell::opt(d.min_eigenvalue),
        Cell::opt(d.truncation_delta),
        Cell::Bool(d.passes()),
    ]
}

fn gate_failures(what: &str, d: &GateDiagnostics, out: &mut Vec<String>) {
    out.extend(d.failures().into_iter().map(|f| format!("{what}: {f}")));
}

fn with_diagnostics(mut cols: Vec<Column>) -> Vec<Column> {
    cols.extend(DIAGNOSTIC_COLUMNS.iter().cloned());
    cols
}

pub fn gate_sim(cfg: &RunConfig) -> Result<Report> {
    let trap = cfg.trap();
    let setup = cfg.gate_setup();
    let channels = cfg.channels.active(&trap);
    let schedule = setup.schedule(cfg.walsh()).context("preparing the gate schedule")?;
    let r = setup.run(&schedule, &channels).context("running the gate")?;

    let names = if channels.is_empty() {
        "none".to_string()
    } else {
        channels.iter().map(|c| c.kind().name()).collect::<Vec<_>>().join("+")
    };
    let mut table = Table::new(with_diagnostics(vec![
        Column::new("walsh", ""),
        Column::new("channels", ""),
        Column::new("nbar0", ""),
        Column::new("rabi", "rad/s"),
        Column::new("duration", "s"),
        Column::new("bell_fidelity", ""),
        Column::new("infidelity", ""),
    ]));
    let mut row = vec![
        Cell::Int(cfg.walsh().index().into()),
        Cell::Text(names),
        Cell::Num(setup.nbar0),
        Cell::Num(schedule.rabi),
        Cell::Num(schedule.duration()),
        Cell::Num(r.bell_fidelity),
        Cell::Num(r.infidelity),
    ];
    row.extend(diagnostic_cells(&r.diagnostics));
    table.push(row);
    let mut failures = Vec::new();
    gate_failures("gate", &r.diagnostics, &mut failures);
    Ok(Report {
        table,
        failures,
        notes: vec![],
    })
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<Report> {
    let setup = cfg.gate_setup();
    let channel = cfg.sweep_channel();
    let kind = channel.kind();
    let rows = sweep(&channel, &cfg.sweep_magnitudes(), &cfg.sweep_walsh(), &setup)
        .with_context(|| format!("sweeping {kind}"))?;
    let mut table = Table::new(with_diagnostics(vec![
        Column::new("magnitude", kind.unit()),
        Column::new("walsh", ""),
        Column::new("infidelity", ""),
    ]));
    let mut failures = Vec::new();
    for r in &rows {
        let mut row = vec![Cell::Num(r.magnitude), Cell::Int(r.walsh.index().into()), Cell::Num(r.infidelity)];
        row.extend(diagnostic_cells(&r.diagnostics));
        table.push(row);
        gate_failures(&format!("{kind} {:e}, Walsh {}", r.magnitude, r.walsh), &r.diagnostics, &mut failures);
    }
    Ok(Report {
        table,
        failures,
        notes: vec![format!("channel: {}", kind.label())],
    })
}

pub fn budget(cfg: &RunConfig) -> Result<Report> {
    let trap = cfg.trap();
    let walsh: WalshOrder = cfg.walsh();
    let b = error_budget(&cfg.channels.all(&trap), walsh, &cfg.gate_setup()).context("running the error budget")?;
    let mut table = Table::new(with_diagnostics(vec![
        Column::new("channel", ""),
        Column::new("magnitude", ""),
        Column::new("unit", ""),
        Column::new("walsh", ""),
        Column::new("infidelity", ""),
    ]));
    let mut failures = Vec::new();
    let mut push = |r: &BudgetRow<f64>| {
        let mut row = vec![
            Cell::Text(r.label.clone()),
            Cell::opt(r.magnitude),
            Cell::Text(r.unit.to_string()),
            Cell::Int(walsh.index().into()),
            Cell::Num(r.infidelity),
        ];
        row.extend(diagnostic_cells(&r.diagnostics));
        table.push(row);
        gate_failures(&r.label, &r.diagnostics, &mut failures);
    };
    for r in &b.rows {
        push(r);
    }
    push(&b.combined);
    let sum: f64 = b.rows.iter().map(|r| r.infidelity).sum();
    Ok(Report {
        table,
        failures,
        notes: vec![
            format!("noiseless baseline infidelity {:.3e}", b.baseline),
            format!("sum of single-channel rows {sum:.3e}"),
        ],
    })
}

pub fn trap_calc(cfg: &RunConfig, inputs: &CalcInputs) -> Result<Report> {
    let t = cfg.trap();
    let m = ELECTRON_MASS;
    let mut table = Table::new(vec![
        Column::new("quantity", ""),
        Column::new("value", ""),
        Column::new("unit", ""),
        Column::new("warning", ""),
    ]);
    let mut add = |name: &str, value: f64, unit: &str, warning: Option<trap::Warning>| {
        table.push(vec![
            Cell::Text(name.into()),
            Cell::Num(value),
            Cell::Text(unit.into()),
            warning.map_or(Cell::Empty, |w| Cell::Text(w.to_string())),
        ]);
    };
    let (ty, tz) = (TankCircuit::transverse(), TankCircuit::axial());
    add("transverse tank impedance", ty.impedance(), "Ohm", None);
    add("axial tank impedance", tz.impedance(), "Ohm", None);
    add("cooling time tau_y", trap::cooling_time_constant(t.d_eff_y, &ty, m), "s", None);
    add("cooling time tau_z", trap::cooling_time_constant(t.d_eff_z, &tz, m), "s", None);
    let secular = trap::secular_frequency(t.q_param, t.omega_ac);
    add("pseudopotential secular frequency", secular.value, "rad/s", secular.warning);
    add("transverse nbar", trap::equilibrium_nbar(t.omega_t, t.tank_temperature), "", None);
    add("axial temperature", t.axial_temperature(), "K", None);
    add("axial nbar", t.axial_nbar(), "", None);
    let mm = trap::micromotion_amplitude(t.q_param, t.omega_t, t.tank_temperature, m);
    add("thermal secular amplitude", mm.secular, "m", None);
    add("micromotion amplitude", mm.micromotion, "m", None);
    let ion = trap::heating_rate_from_noise(inputs.noise, inputs.noise_omega, CALCIUM_40_ION_MASS);
    add("heating rate, Ca+ at noise frequency", ion, "quanta/s", None);
    let e = trap::extrapolate_heating(ion, inputs.noise_omega, t.omega_a, CALCIUM_40_ION_MASS, m, inputs.gamma);
    add("heating rate, electron at omega_a", e.value, "quanta/s", e.warning);
    let shift = trap::anharmonic_frequency_shift(inputs.amplitude, t.c2, t.c4, t.c6);
    add("relative anharmonic shift", shift.value, "", shift.warning);
    add("qubit frequency", trap::qubit_frequency(t.b0), "rad/s", None);
    add("ground-state extent", trap::ground_state_extent(m, t.omega_a), "m", None);
    let ro = trap::readout_displacement(t.b1, inputs.readout_time, t.omega_a, m, t.axial_nbar());
    add("readout displacement |alpha|", ro.alpha.norm(), "", None);
    add("readout discrimination fidelity", ro.discrimination_fidelity, "", None);
    Ok(Report {
        table,
        ..Report::default()
    })
}

pub fn trajectory(cfg: &RunConfig) -> Result<Report> {
    let trap = cfg.trap();
    let plan = cfg.trajectory_plan()?;
    let map = stability_map(&plan.energies, &plan.phis, &DriveField::from_trap(&trap, 0.0), &plan.settings)
        .context("computing the stability map")?;
    let mut table = Table::new(vec![
        Column::new("energy", "eV"),
        Column::new("temperature", "K"),
        Column::new("phi", "rad"),
        Column::new("storage_time", "s"),
        Column::new("lost", ""),
    ]);
    let kelvin = ELEMENTARY_CHARGE / BOLTZMANN;
    for c in &map.cells {
        table.push(vec![
            Cell::Num(c.initial_energy),
            Cell::Num(c.initial_energy * kelvin),
            Cell::Num(c.phi),
            Cell::Num(c.storage_time),
            Cell::Bool(c.lost),
        ]);
    }
    let note = match map.all_phase_threshold() {
        Some(e) => format!("stable for every phase up to {e:.4} eV ({:.0} K)", e * kelvin),
        None => "lost at some phase for every grid energy".to_string(),
    };
    Ok(Report {
        table,
        failures: vec![],
        notes: vec![note],
    })
}
