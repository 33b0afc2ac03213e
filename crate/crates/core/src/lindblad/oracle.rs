//! Vectorised propagator used to validate the time-stepping solvers.
//!
//! With row-major vectorisation `vec(A ρ B) = (A ⊗ Bᵀ) vec(ρ)`, the generator is
//! `−i(H ⊗ I − I ⊗ Hᵀ) + Σ (L ⊗ L̄ − ½ L†L ⊗ I − ½ I ⊗ (L†L)ᵀ)`.

use super::{segments, LindbladTerm, TimeDependentHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{expm, ComplexMatrix};
use crate::quantum::DensityMatrix;
use crate::scalar::{imag_unit, re, Real};

/// The oracle is `O(d⁶)`; larger systems are refused.
pub const ORACLE_MAX_DIM: usize = 40;

pub fn liouvillian<T: Real>(h: &ComplexMatrix<T>, lindblads: &[LindbladTerm<T>]) -> ComplexMatrix<T> {
    let d = h.rows();
    let id = ComplexMatrix::identity(d);
    let mut gen = (&h.kron(&id) - &id.kron(&h.transpose())).scale(-imag_unit::<T>());
    let half = re(T::lit(-0.5));
    for l in lindblads {
        let op = l.operator();
        let ldl = op.adjoint().matmul(op);
        gen += &op.kron(&op.conj());
        gen.axpy(half, &ldl.kron(&id));
        gen.axpy(half, &id.kron(&ldl.transpose()));
    }
    gen
}

/// Superoperator mapping `vec(ρ(t0))` to `vec(ρ(t1))`, built from
/// `n_slices` piecewise-constant (midpoint) slices.
pub fn propagator_oracle<T: Real>(
    h: &TimeDependentHamiltonian<T>,
    lindblads: &[LindbladTerm<T>],
    t_span: (T, T),
    n_slices: usize,
) -> Result<ComplexMatrix<T>> {
    let d = h.dim();
    if d > ORACLE_MAX_DIM {
        return Err(Error::OracleTooLarge {
            dim: d,
            limit: ORACLE_MAX_DIM,
        });
    }
    if !(t_span.1 > t_span.0) {
        return Err(Error::param("t_span", "t1 must exceed t0"));
    }
    let total = t_span.1 - t_span.0;
    let mut prop = ComplexMatrix::identity(d * d);
    for (a, b) in segments(t_span.0, t_span.1, h.breakpoints()) {
        let share = ((b - a) / total * T::from_usize_lossy(n_slices.max(1)))
            .round()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let dt = (b - a) / T::from_usize_lossy(share);
        if is_time_independent(h, a, b) {
            let step = expm(&liouvillian(&h.at(a + (b - a) * T::lit(0.5)), lindblads).scale_real(b - a))?;
            prop = step.matmul(&prop);
            continue;
        }
        for k in 0..share {
            let mid = a + dt * (T::from_usize_lossy(k) + T::lit(0.5));
            let step = expm(&liouvillian(&h.at(mid), lindblads).scale_real(dt))?;
            prop = step.matmul(&prop);
        }
    }
    Ok(prop)
}

fn is_time_independent<T: Real>(h: &TimeDependentHamiltonian<T>, a: T, b: T) -> bool {
    h.terms().iter().all(|(c, _)| {
        let c0 = c(super::inside((a, b), a));
        [0.137, 0.291, 0.5, 0.618, 0.853, 0.97]
            .iter()
            .all(|&f| c(a + (b - a) * T::lit(f)) == c0)
    })
}

/// Applies a row-major-vectorised superoperator to `ρ`.
pub fn apply_superoperator<T: Real>(s: &ComplexMatrix<T>, rho: &DensityMatrix<T>) -> DensityMatrix<T> {
    let d = rho.dim();
    let v = s.mul_vec(rho.matrix().as_slice());
    DensityMatrix::new_unchecked(ComplexMatrix::from_vec(d, d, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn unitary_limit_matches_conjugation() {
        let h = ComplexMatrix::from_vec(
            2,
            2,
            vec![cplx(0.3, 0.0), cplx(1.0, -0.5), cplx(1.0, 0.5), cplx(-0.7, 0.0)],
        );
        let t = 2.5;
        let ham = TimeDependentHamiltonian::constant(h.clone());
        let s = propagator_oracle(&ham, &[], (0.0, t), 1).unwrap();
        let u = expm(&h.scale(cplx(0.0, -t))).unwrap();
        let rho = DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.8, 0.2])).unwrap();
        let want = rho.conjugate_by(&u);
        let got = apply_superoperator(&s, &rho);
        assert!((got.matrix() - want.matrix()).max_abs() < 1e-9);
    }

    #[test]
    fn refuses_large_dimensions() {
        let ham = TimeDependentHamiltonian::<f64>::new(ORACLE_MAX_DIM + 1);
        assert!(matches!(
            propagator_oracle(&ham, &[], (0.0, 1.0), 1),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn amplitude_damping_generator_preserves_trace() {
        let a = ComplexMatrix::from_vec(2, 2, vec![cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)]);
        let gen = liouvillian(&ComplexMatrix::zeros(2, 2), &[LindbladTerm::with_rate(2.0, &a)]);
        // rows of vec(ρ) for the diagonal entries: Tr is the sum of indices 0 and 3
        for c in 0..4 {
            let s = gen[(0, c)] + gen[(3, c)];
            assert!(s.norm() < 1e-15);
        }
    }
}
