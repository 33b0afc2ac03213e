mod common;

use std::f64::consts::TAU;
use std::sync::Arc;

use electron_qc::linalg::ComplexMatrix;
use electron_qc::lindblad::{
    apply_superoperator, evolve, propagator_oracle, LindbladTerm, SolverSettings, TimeDependentHamiltonian,
};
use electron_qc::quantum::{
    fock_lowering, fock_number, partial_trace_motion, pauli_z, DensityMatrix, HilbertSpec, PureState,
};
use electron_qc::C;

fn fine(max_step: f64) -> SolverSettings<f64> {
    SolverSettings {
        max_step,
        ..SolverSettings::default()
    }
}

#[test]
fn random_generator_matches_superoperator_exponential() {
    let inst = common::random_instance(11, 6, 2, false);
    let got = evolve(&inst.rho, &inst.h, &inst.jumps, (0.0, 1.0), &fine(1e-3)).unwrap();
    let prop = propagator_oracle(&inst.h, &inst.jumps, (0.0, 1.0), 1).unwrap();
    let want = apply_superoperator(&prop, &inst.rho);
    assert!(got.trace_distance(&want) < 1e-7, "{}", got.trace_distance(&want));
}

#[test]
fn switched_hamiltonian_matches_oracle() {
    let inst = common::random_instance(5, 4, 1, true);
    let got = evolve(&inst.rho, &inst.h, &inst.jumps, (0.0, 1.0), &fine(1e-3)).unwrap();
    let prop = propagator_oracle(&inst.h, &inst.jumps, (0.0, 1.0), 1).unwrap();
    assert!(got.trace_distance(&apply_superoperator(&prop, &inst.rho)) < 1e-7);
}

#[test]
fn kilohertz_drive_matches_sliced_oracle() {
    let w = TAU * 1e3;
    let sx = ComplexMatrix::from_fn(2, 2, |i, j| C::new(if i != j { 1.0 } else { 0.0 }, 0.0));
    let sz = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
    let mut h = TimeDependentHamiltonian::constant(sz.scale_real(0.5 * TAU * 500.0));
    h.add_term(Arc::new(move |t: f64| C::new((w * t).cos(), 0.0)), sx.scale_real(TAU * 700.0));
    h.set_drive_period(1e-3);
    let jumps = [LindbladTerm::with_rate(200.0, &fock_lowering(2))];
    let rho = PureState::basis(2, 0).projector();
    let span = (0.0, 2e-3);
    let got = evolve(&rho, &h, &jumps, span, &SolverSettings::default()).unwrap();
    let want = apply_superoperator(&propagator_oracle(&h, &jumps, span, 10_000).unwrap(), &rho);
    assert!(got.trace_distance(&want) < 1e-6, "{}", got.trace_distance(&want));
}

#[test]
fn damped_oscillator_thermalises() {
    // d⟨n⟩/dt = −γ(⟨n⟩ − n_th)
    let (gamma, n_th, n) = (1e4, 0.5, 25);
    let a = fock_lowering::<f64>(n);
    let jumps = [
        LindbladTerm::with_rate(gamma * (n_th + 1.0), &a),
        LindbladTerm::with_rate(gamma * n_th, &a.adjoint()),
    ];
    let h = TimeDependentHamiltonian::new(n);
    let rho = PureState::basis(n, 0).projector();
    let num = fock_number::<f64>(n);
    for t in [2e-5, 1e-4, 3e-4] {
        let out = evolve(&rho, &h, &jumps, (0.0, t), &fine(t / 2000.0)).unwrap();
        let want = n_th * (1.0 - (-gamma * t).exp());
        let got = out.expect(&num).re;
        assert!((got / want - 1.0).abs() < 1e-4, "t = {t}: {got} vs {want}");
    }
}

#[test]
fn local_hamiltonian_acts_locally() {
    let mut r = common::rng(3);
    let spec = HilbertSpec::with_spins(3, 1).unwrap();
    let h_a = common::random_hermitian(&mut r, 2, 1.0);
    let rho_a = common::random_density(&mut r, 2);
    let rho_b = common::random_density(&mut r, 3);
    let sz = ComplexMatrix::from_real_diag(&[1.0, -1.0]);

    let h = TimeDependentHamiltonian::constant(spec.embed_spin(0, &h_a).unwrap());
    let jumps = [LindbladTerm::with_rate(0.2, &pauli_z(&spec, 0).unwrap())];
    let joint = evolve(&rho_a.tensor(&rho_b), &h, &jumps, (0.0, 2.0), &fine(1e-3)).unwrap();

    let local = evolve(
        &rho_a,
        &TimeDependentHamiltonian::constant(h_a),
        &[LindbladTerm::with_rate(0.2, &sz)],
        (0.0, 2.0),
        &fine(1e-3),
    )
    .unwrap();
    let reduced = partial_trace_motion(&joint, &spec).unwrap();
    assert!(reduced.trace_distance(&local) < 1e-10);
}

#[test]
fn trace_and_hermiticity_preserved() {
    let inst = common::random_instance(21, 5, 3, true);
    let out = evolve(&inst.rho, &inst.h, &inst.jumps, (0.0, 1.0), &SolverSettings::default()).unwrap();
    assert!((out.trace() - 1.0).abs() < 1e-8);
    assert!(out.matrix().hermiticity_error() < 1e-12);
    let _: DensityMatrix<f64> = out;
}
