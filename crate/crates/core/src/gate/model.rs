//! Gate and error-channel operators. Every operator is diagonal in the spin
//! basis, so they are built as spin-block operators; the dense forms are
//! derived from the same objects.

use std::sync::Arc;

use super::channels::ErrorChannel;
use super::schedule::{sign_lookup, GateSchedule};
use crate::error::{Error, Result};
use crate::lindblad::blocks::{BlockHamiltonian, SpinDiagonalOperator};
use crate::lindblad::{Coefficient, LindbladTerm, TimeDependentHamiltonian};
use crate::linalg::BandedMatrix;
use crate::quantum::{fock_lowering, HilbertSpec};
use crate::scalar::{cplx, re, Real, C};

/// Eigenvalues of `I⊗σz + σz⊗I` in the order ↑↑, ↑↓, ↓↑, ↓↓.
pub fn collective_sz<T: Real>() -> [C<T>; 4] {
    [re(T::lit(2.0)), re(T::zero()), re(T::zero()), re(T::lit(-2.0))]
}

/// Eigenvalues of σz on spin `which` (0 or 1).
pub fn single_sz<T: Real>(which: usize) -> [C<T>; 4] {
    let one = re(T::one());
    match which {
        0 => [one, one, -one, -one],
        _ => [one, -one, one, -one],
    }
}

fn check_spec(spec: &HilbertSpec) -> Result<()> {
    if spec.spin_count() != 2 {
        return Err(Error::SpinIndex {
            index: spec.spin_count(),
            count: 2,
        });
    }
    Ok(())
}

pub(crate) struct FockOps<T: Real> {
    pub a: BandedMatrix<T>,
    pub ad: BandedMatrix<T>,
    pub n: BandedMatrix<T>,
}

impl<T: Real> FockOps<T> {
    pub fn new(cutoff: usize) -> Self {
        let a = BandedMatrix::from_dense(&fock_lowering::<T>(cutoff));
        let ad = a.adjoint();
        let n = ad.matmul(&a);
        Self { a, ad, n }
    }
}

/// `amplitude · s(t) · e^{−iδt}` (or `e^{+iδt}` when `conjugate`).
fn walsh_drive<T: Real>(schedule: &GateSchedule<T>, amplitude: T, conjugate: bool) -> Coefficient<T> {
    let breakpoints = schedule.breakpoints();
    let signs = schedule.signs();
    let delta = if conjugate { schedule.delta } else { -schedule.delta };
    Arc::new(move |t: T| {
        let s = sign_lookup(&breakpoints, &signs, t);
        let phase = delta * t;
        cplx(phase.cos(), phase.sin()) * (amplitude * s)
    })
}

fn empty<T: Real>(schedule: &GateSchedule<T>, cutoff: usize) -> BlockHamiltonian<T> {
    let mut h = BlockHamiltonian::new(4, cutoff);
    h.set_breakpoints(schedule.breakpoints());
    h
}

/// `Ω_R s(t) (I⊗σz + σz⊗I)(a e^{−iδt} + a† e^{iδt})`.
pub fn gate_hamiltonian_blocks<T: Real>(schedule: &GateSchedule<T>, cutoff: usize) -> BlockHamiltonian<T> {
    let ops = FockOps::<T>::new(cutoff);
    let sz = collective_sz::<T>();
    let mut h = empty(schedule, cutoff);
    h.add_term(
        walsh_drive(schedule, schedule.rabi, false),
        SpinDiagonalOperator::spin_weighted(&sz, &ops.a),
    );
    h.add_term(
        walsh_drive(schedule, schedule.rabi, true),
        SpinDiagonalOperator::spin_weighted(&sz, &ops.ad),
    );
    h.set_drive_period(T::TAU() / schedule.delta);
    h
}

pub fn build_gate_hamiltonian<T: Real>(
    schedule: &GateSchedule<T>,
    spec: &HilbertSpec,
) -> Result<TimeDependentHamiltonian<T>> {
    check_spec(spec)?;
    Ok(gate_hamiltonian_blocks(schedule, spec.fock_cutoff()).to_dense())
}

/// Hamiltonian additions and jump operators of one channel.
pub fn error_terms_blocks<T: Real>(
    channel: &ErrorChannel,
    schedule: &GateSchedule<T>,
    cutoff: usize,
) -> Result<(BlockHamiltonian<T>, Vec<SpinDiagonalOperator<T>>)> {
    channel.validate()?;
    let mut h = empty(schedule, cutoff);
    let mut jumps = Vec::new();
    if channel.is_off() {
        return Ok((h, jumps));
    }
    let ops = FockOps::<T>::new(cutoff);
    let motion = |op: &BandedMatrix<T>, s: f64| SpinDiagonalOperator::motion(4, &op.scale(re(T::lit(s))));
    match *channel {
        ErrorChannel::Heating { rate } => {
            let s = rate.sqrt();
            jumps.push(motion(&ops.a, s));
            jumps.push(motion(&ops.ad, s));
        }
        ErrorChannel::TrapFrequencyOffset { delta } => {
            h.add_constant(motion(&ops.n, delta));
        }
        ErrorChannel::MotionalDephasing { gamma } => {
            jumps.push(motion(&ops.n, gamma.sqrt()));
        }
        ErrorChannel::GradientInhomogeneity { .. } => {
            let ratio = channel.gradient_ratio().expect("gradient channel");
            let omega_in = schedule.rabi * T::lit(ratio);
            let sz = collective_sz::<T>();
            let lower = ops.a.matmul(&ops.ad).matmul(&ops.a);
            let amp = T::lit(3.0) * omega_in;
            h.add_term(
                walsh_drive(schedule, amp, false),
                SpinDiagonalOperator::spin_weighted(&sz, &lower),
            );
            h.add_term(
                walsh_drive(schedule, amp, true),
                SpinDiagonalOperator::spin_weighted(&sz, &lower.adjoint()),
            );
            h.set_drive_period(T::TAU() / schedule.delta);
        }
        ErrorChannel::Anharmonicity { .. } => {
            let k4 = channel.quartic_coefficient().expect("anharmonic channel");
            let x = ops.a.add_scaled(re(T::one()), &ops.ad);
            let x2 = x.matmul(&x);
            h.add_constant(motion(&x2.matmul(&x2), k4));
        }
        ErrorChannel::QubitDecoherence { tau } => {
            let s = re(T::lit((0.5 / tau).sqrt()));
            let id = BandedMatrix::identity(cutoff);
            for which in 0..2 {
                let w = single_sz::<T>(which).map(|z| z * s);
                jumps.push(SpinDiagonalOperator::spin_weighted(&w, &id));
            }
        }
    }
    Ok((h, jumps))
}

pub fn build_error_terms<T: Real>(
    channel: &ErrorChannel,
    schedule: &GateSchedule<T>,
    spec: &HilbertSpec,
) -> Result<(TimeDependentHamiltonian<T>, Vec<LindbladTerm<T>>)> {
    check_spec(spec)?;
    let (h, jumps) = error_terms_blocks(channel, schedule, spec.fock_cutoff())?;
    Ok((h.to_dense(), jumps.iter().map(|j| LindbladTerm::new(j.to_dense())).collect()))
}

/// Gate plus every channel, ready for the block solver.
pub struct GateModel<T: Real> {
    pub hamiltonian: BlockHamiltonian<T>,
    pub jumps: Vec<SpinDiagonalOperator<T>>,
}

impl<T: Real> GateModel<T> {
    pub fn new(schedule: &GateSchedule<T>, channels: &[ErrorChannel], cutoff: usize) -> Result<Self> {
        let mut hamiltonian = gate_hamiltonian_blocks(schedule, cutoff);
        let mut jumps = Vec::new();
        for ch in channels {
            let (h, j) = error_terms_blocks(ch, schedule, cutoff)?;
            hamiltonian.extend(&h);
            jumps.extend(j);
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dense(&self) -> (TimeDependentHamiltonian<T>, Vec<LindbladTerm<T>>) {
        (
            self.hamiltonian.to_dense(),
            self.jumps.iter().map(|j| LindbladTerm::new(j.to_dense())).collect(),
        )
    }
}
