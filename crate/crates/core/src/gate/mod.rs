//! Two-qubit σz⊗σz geometric-phase gate on the axial mode.
//!
//! The drive `Ω_R s(t) (I⊗σz + σz⊗I)(a e^{−iδt} + a† e^{iδt})` closes one
//! phase-space loop every `2π/δ`. Walsh modulation flips `s(t)` between
//! loops. Starting from `|+⟩|+⟩ ⊗ ρ_thermal`, a fixed local rotation maps
//! the ideal output onto `|Φ+⟩`, and the Bell fidelity of the spin state
//! is the figure of merit.

mod channels;
mod model;
mod run;
mod schedule;

pub use channels::{ChannelKind, ErrorChannel, DEFAULT_MODE_MASS};
pub use model::{
    build_error_terms, build_gate_hamiltonian, collective_sz, error_terms_blocks, gate_hamiltonian_blocks,
    single_sz, GateModel,
};
pub use run::{
    calibrate_rabi, conditional_phase, error_budget, local_correction, run_gate, run_gate_with, sweep, Budget,
    BudgetRow, Calibration, GateDiagnostics, GateOptions, GateResult, GateSetup, SweepRow, POSITIVITY_GATE,
    TRACE_DRIFT_GATE, TRUNCATION_GATE,
};
pub use schedule::{analytic_rabi, GateSchedule, Segment, WalshOrder};
