#![allow(dead_code)]

use electron_qc::linalg::ComplexMatrix;
use electron_qc::lindblad::{LindbladTerm, TimeDependentHamiltonian};
use electron_qc::quantum::DensityMatrix;
use electron_qc::C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, d: usize, scale: f64) -> ComplexMatrix<f64> {
    ComplexMatrix::from_fn(d, d, |_, _| {
        C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
    })
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize, scale: f64) -> ComplexMatrix<f64> {
    random_matrix(rng, d, scale).hermitian_part()
}

pub fn random_density(rng: &mut impl Rng, d: usize) -> DensityMatrix<f64> {
    let a = random_matrix(rng, d, 1.0);
    let m = a.matmul(&a.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr)).unwrap()
}

pub struct Instance {
    pub rho: DensityMatrix<f64>,
    pub h: TimeDependentHamiltonian<f64>,
    pub jumps: Vec<LindbladTerm<f64>>,
}

/// Random constant Hamiltonian, optionally with a sign-flipped second term
/// switching at `t = 0.4`, and `n_jumps` random jump operators.
pub fn random_instance(seed: u64, d: usize, n_jumps: usize, switching: bool) -> Instance {
    let mut r = rng(seed);
    let rho = random_density(&mut r, d);
    let mut h = TimeDependentHamiltonian::constant(random_hermitian(&mut r, d, 1.0));
    if switching {
        let sign = std::sync::Arc::new(|t: f64| C::new(if t < 0.4 { 1.0 } else { -1.0 }, 0.0));
        h.add_term(sign, random_hermitian(&mut r, d, 0.7));
        h.set_breakpoints(vec![0.4]);
    }
    let jumps = (0..n_jumps)
        .map(|_| LindbladTerm::new(random_matrix(&mut r, d, 0.3)))
        .collect();
    Instance { rho, h, jumps }
}
