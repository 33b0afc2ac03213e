mod common;

use std::f64::consts::{PI, TAU};

use electron_qc::gate::*;
use electron_qc::lindblad::blocks::{evolve_blocks, BlockDensity};
use electron_qc::lindblad::{evolve, SolverSettings};
use electron_qc::linalg::BandedMatrix;
use electron_qc::quantum::{fock_number, thermal_populations, thermal_state, HilbertSpec, PureState};
use electron_qc::trajectory::{integrate_trajectory, DriveField, TrajectorySettings};
use electron_qc::trap::{self, TrapConfig};
use proptest::prelude::*;

fn small(cutoff: usize) -> GateOptions {
    GateOptions {
        fock_cutoff: Some(cutoff),
        ..GateOptions::fast()
    }
}

fn walsh() -> impl Strategy<Value = WalshOrder> {
    prop::sample::select(WalshOrder::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_keeps_a_valid_state(seed in any::<u64>(), d in 2usize..7, jumps in 0usize..3, switching: bool) {
        let inst = common::random_instance(seed, d, jumps, switching);
        let out = evolve(&inst.rho, &inst.h, &inst.jumps, (0.0, 1.0), &SolverSettings::default()).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-8);
        prop_assert!(out.matrix().hermitian_eigenvalues()[0] > -1e-7);
    }

    #[test]
    fn thermal_populations_are_normalised(nbar in 0.0f64..6.0) {
        let n = electron_qc::quantum::minimal_thermal_cutoff(nbar, 1e-10);
        let p = thermal_populations::<f64>(n, nbar, 1e-10).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0]));
        let mean: f64 = p.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
        prop_assert!((mean - nbar).abs() < 1e-8 * (1.0 + nbar) + 1e-9 * n as f64);
    }

    #[test]
    fn schedule_duration_counts_loops(w in walsh(), t_loop in 0.5e-6f64..5e-6) {
        let s = GateSchedule::from_loop_time(w, t_loop).unwrap();
        prop_assert!((s.duration() / (w.loops() as f64 * t_loop) - 1.0).abs() < 1e-12);
        prop_assert!((s.rabi * 4.0 * (w.loops() as f64).sqrt() - s.delta).abs() < 1e-6 * s.delta);
    }

    #[test]
    fn heating_extrapolation_round_trips(ndot in 1.0f64..1e3, f1 in 1e6f64..1e9, f2 in 1e6f64..1e9, g in 1.0f64..1.5) {
        let m = electron_qc::constants::ELECTRON_MASS;
        let there = trap::extrapolate_heating(ndot, f1, f2, 40.0 * m, m, g).value;
        let back = trap::extrapolate_heating(there, f2, f1, m, 40.0 * m, g).value;
        prop_assert!((back / ndot - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cooling_time_scales_with_distance_squared(d in 10e-6f64..500e-6, k in 1.1f64..4.0) {
        let c = trap::TankCircuit::transverse();
        let m = electron_qc::constants::ELECTRON_MASS;
        let ratio = trap::cooling_time_constant(k * d, &c, m) / trap::cooling_time_constant(d, &c, m);
        prop_assert!((ratio / (k * k) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_is_inversion_symmetric(r in 1e-6f64..25e-6, phi in 0.0f64..TAU, angle in 0.0f64..TAU) {
        let trap = TrapConfig::default();
        let drive = DriveField::from_trap(&trap, phi);
        let s = TrajectorySettings::new(&trap, 2e-8);
        let p = [r * angle.cos(), r * angle.sin()];
        let a = integrate_trajectory(p, &drive, &s).unwrap();
        let b = integrate_trajectory([-p[0], -p[1]], &drive, &s).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn infidelity_symmetric_under_spin_exchange(
        w in walsh(),
        heating in 0.0f64..3e4,
        offset_khz in 0.0f64..5.0,
        tau in 1e-4f64..1e-2,
        nbar in 0.0f64..0.5,
    ) {
        let s = GateSchedule::from_loop_time(w, 2e-6).unwrap();
        let channels = [
            ErrorChannel::Heating { rate: heating },
            ErrorChannel::TrapFrequencyOffset { delta: TAU * offset_khz * 1e3 },
            ErrorChannel::QubitDecoherence { tau },
        ];
        let settings = SolverSettings::default();
        let mut opts = GateOptions::fast();
        let a = run_gate_with(&s, &channels, nbar, &settings, &opts).unwrap();
        opts.correction_spin = 1;
        let b = run_gate_with(&s, &channels, nbar, &settings, &opts).unwrap();
        prop_assert!((a.infidelity - b.infidelity).abs() < 1e-10);
    }

    #[test]
    fn heating_infidelity_nondecreasing(w in walsh(), lo in 10.0f64..1e4, factor in 1.05f64..10.0) {
        let mut setup = GateSetup::new(2e-6, 0.0);
        setup.options = small(12);
        setup.calibrate = false;
        let rows = sweep(&ErrorChannel::Heating { rate: 1.0 }, &[lo, lo * factor], &[w], &setup).unwrap();
        prop_assert!(rows[1].infidelity >= rows[0].infidelity);
    }

    #[test]
    fn opposite_spins_leave_motion_unchanged(w in walsh(), nbar in 0.0f64..1.0, which in 1usize..3) {
        let s = GateSchedule::from_loop_time(w, 2e-6).unwrap();
        let n = 30;
        let model = GateModel::new(&s, &[], n).unwrap();
        let spec = HilbertSpec::new(n).unwrap();
        let spins = PureState::<f64>::basis(4, which).projector();
        let rho = BlockDensity::product(&spins, &thermal_state(&spec, nbar).unwrap());
        let out = evolve_blocks(&rho, &model.hamiltonian, &model.jumps, (0.0, s.duration()), &SolverSettings::default()).unwrap();
        let num = BandedMatrix::from_dense(&fock_number::<f64>(n));
        prop_assert!((rho.motion_expectation(&num).re - out.state.motion_expectation(&num).re).abs() < 1e-10);
    }
}

#[test]
fn walsh_ordering_for_frequency_offset() {
    let mut setup = GateSetup::new(2e-6, 0.0);
    setup.options = small(16);
    let mags: Vec<f64> = [0.3, 1.0, 3.0, 10.0].iter().map(|k| TAU * k * 1e3).collect();
    let rows = sweep(&ErrorChannel::TrapFrequencyOffset { delta: 1.0 }, &mags, &WalshOrder::ALL, &setup).unwrap();
    let n = mags.len();
    for i in 0..n {
        let (w0, w1, w3) = (rows[i].infidelity, rows[n + i].infidelity, rows[2 * n + i].infidelity);
        assert!(w3 <= w1 && w1 <= w0, "{}: {w0:e} {w1:e} {w3:e}", mags[i]);
    }
}

#[test]
fn loss_band_is_symmetric_in_phase() {
    // releasing from rest is time-reversal symmetric, so φ and −φ agree
    let trap = TrapConfig::default();
    let s = TrajectorySettings::new(&trap, 5e-8);
    for phi in [0.4, 1.1, 2.0] {
        for r in [12e-6, 16e-6, 22e-6] {
            let a = integrate_trajectory([r, 0.0], &DriveField::from_trap(&trap, phi), &s).unwrap();
            let b = integrate_trajectory([r, 0.0], &DriveField::from_trap(&trap, -phi), &s).unwrap();
            assert_eq!(a.lost, b.lost, "phi = {phi}, r = {r}");
        }
    }
    let _ = PI;
}
