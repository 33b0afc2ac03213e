//! Operators, states and state functionals on the spin ⊗ spin ⊗ Fock space.
//!
//! Basis ordering is `spin0 ⊗ spin1 ⊗ Fock` with each spin ordered `(↑, ↓)`,
//! so composite index `i = s · N + n` where `s = 2·s0 + s1` and `↑ = 0`.
//! Operators are in angular-frequency units with ħ = 1.

use crate::error::{Error, Result};
use crate::linalg::{expm, ComplexMatrix};
use crate::scalar::{cplx, re, Real, C};

/// Tail weight beyond the cutoff that thermal and coherent states may drop.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct HilbertSpec {
    fock_cutoff: usize,
    spin_count: usize,
}

impl HilbertSpec {
    /// Two spins and `fock_cutoff` retained Fock levels.
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        Self::with_spins(fock_cutoff, 2)
    }

    pub fn with_spins(fock_cutoff: usize, spin_count: usize) -> Result<Self> {
        if fock_cutoff < 2 {
            return Err(Error::param("fock_cutoff", "at least two Fock levels are required"));
        }
        if spin_count > 8 {
            return Err(Error::param("spin_count", "at most eight spins are supported"));
        }
        Ok(Self {
            fock_cutoff,
            spin_count,
        })
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn spin_count(&self) -> usize {
        self.spin_count
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.spin_count
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.fock_cutoff
    }

    /// Composite index of spin configuration `spin` (bit `k` from the left = spin `k`,
    /// 0 = ↑) and Fock level `n`.
    pub fn index(&self, spin: usize, n: usize) -> usize {
        spin * self.fock_cutoff + n
    }

    /// `σz` eigenvalue (+1 for ↑, −1 for ↓) of spin `which` in configuration `spin`.
    pub fn sigma_z_eigenvalue(&self, spin: usize, which: usize) -> i32 {
        let bit = (spin >> (self.spin_count - 1 - which)) & 1;
        if bit == 0 {
            1
        } else {
            -1
        }
    }

    /// Identity on the spins tensored with a Fock-factor operator.
    pub fn embed_motion<T: Real>(&self, fock_op: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(fock_op.rows(), self.fock_cutoff);
        ComplexMatrix::identity(self.spin_dim()).kron(fock_op)
    }

    /// A single-spin 2×2 operator on spin `which`, identity elsewhere.
    pub fn embed_spin<T: Real>(&self, which: usize, op: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if which >= self.spin_count {
            return Err(Error::SpinIndex {
                index: which,
                count: self.spin_count,
            });
        }
        let mut out = ComplexMatrix::identity(1);
        for k in 0..self.spin_count {
            let factor = if k == which {
                op.clone()
            } else {
                ComplexMatrix::identity(2)
            };
            out = out.kron(&factor);
        }
        Ok(out.kron(&ComplexMatrix::identity(self.fock_cutoff)))
    }
}

/// Truncated `a` on the Fock factor: entry `(n−1, n) = √n`.
pub fn fock_lowering<T: Real>(cutoff: usize) -> ComplexMatrix<T> {
    let mut a = ComplexMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = re(T::from_usize_lossy(n).sqrt());
    }
    a
}

pub fn fock_number<T: Real>(cutoff: usize) -> ComplexMatrix<T> {
    let diag: Vec<T> = (0..cutoff).map(T::from_usize_lossy).collect();
    ComplexMatrix::from_real_diag(&diag)
}

pub fn lowering_operator<T: Real>(spec: &HilbertSpec) -> ComplexMatrix<T> {
    spec.embed_motion(&fock_lowering(spec.fock_cutoff))
}

pub fn raising_operator<T: Real>(spec: &HilbertSpec) -> ComplexMatrix<T> {
    lowering_operator(spec).adjoint()
}

pub fn number_operator<T: Real>(spec: &HilbertSpec) -> ComplexMatrix<T> {
    spec.embed_motion(&fock_number(spec.fock_cutoff))
}

pub fn sigma_x_2x2<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_vec(2, 2, vec![re(T::zero()), re(T::one()), re(T::one()), re(T::zero())])
}

pub fn sigma_z_2x2<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_real_diag(&[T::one(), -T::one()])
}

pub fn pauli_z<T: Real>(spec: &HilbertSpec, which_spin: usize) -> Result<ComplexMatrix<T>> {
    spec.embed_spin(which_spin, &sigma_z_2x2())
}

pub fn pauli_x<T: Real>(spec: &HilbertSpec, which_spin: usize) -> Result<ComplexMatrix<T>> {
    spec.embed_spin(which_spin, &sigma_x_2x2())
}

/// Normalised state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: Vec<C<T>>,
}

impl<T: Real> PureState<T> {
    /// Accepts an already normalised vector (norm within 1e-12 of one).
    pub fn new(amplitudes: Vec<C<T>>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if (norm - T::one()).abs() > T::tolerance(1e-12) {
            return Err(Error::InvalidState(format!("state norm {norm} differs from one")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: Vec<C<T>>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalise a zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z.unscale(norm)).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![re(T::zero()); dim];
        v[index] = re(T::one());
        Self { amplitudes: v }
    }

    /// `(|↑↑⟩ + |↓↓⟩)/√2`.
    pub fn bell_phi_plus() -> Self {
        let h = re(T::FRAC_1_SQRT_2());
        let z = re(T::zero());
        Self {
            amplitudes: vec![h, z, z, h],
        }
    }

    /// `(|↑⟩ + |↓⟩)/√2`.
    pub fn plus() -> Self {
        let h = re(T::FRAC_1_SQRT_2());
        Self {
            amplitudes: vec![h, h],
        }
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn projector(&self) -> DensityMatrix<T> {
        DensityMatrix::new_unchecked(ComplexMatrix::outer(&self.amplitudes, &self.amplitudes))
    }
}

/// Hermitian, positive, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: ComplexMatrix<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity (1e-10), trace (1e-9) and positivity (−1e-9).
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        let rho = Self::new_unchecked(matrix);
        rho.validate(1e-10, 1e-9, 1e-9)?;
        Ok(rho)
    }

    pub fn new_unchecked(matrix: ComplexMatrix<T>) -> Self {
        assert!(matrix.is_square(), "density matrix must be square");
        Self { matrix }
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let ev = self.matrix.hermitian_eigenvalues();
        StateDiagnostics {
            hermiticity_error: self.matrix.hermiticity_error().as_f64(),
            trace_error: (self.trace() - T::one()).abs().as_f64(),
            min_eigenvalue: ev.first().copied().unwrap_or(0.0),
        }
    }

    pub fn validate(&self, herm_tol: f64, trace_tol: f64, neg_tol: f64) -> Result<()> {
        let d = self.diagnostics();
        let slack = T::tolerance(0.0).as_f64();
        if d.hermiticity_error > herm_tol.max(slack) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |ρ − ρ†| = {:e})",
                d.hermiticity_error
            )));
        }
        if d.trace_error > trace_tol.max(slack) {
            return Err(Error::InvalidState(format!("trace off by {:e}", d.trace_error)));
        }
        if d.min_eigenvalue < -neg_tol.max(slack) {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                d.min_eigenvalue
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    /// `Tr(op ρ)`.
    pub fn expect(&self, op: &ComplexMatrix<T>) -> C<T> {
        let n = self.dim();
        let mut acc = re(T::zero());
        for i in 0..n {
            for k in 0..n {
                acc += op[(i, k)] * self.matrix[(k, i)];
            }
        }
        acc
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::new_unchecked(self.matrix.kron(&other.matrix))
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix<T>) -> Self {
        Self::new_unchecked(u.matmul(&self.matrix).matmul(&u.adjoint()))
    }

    /// `½ Σ|λ_i(ρ − σ)|`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let diff = &self.matrix - &other.matrix;
        0.5 * diff.hermitian_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
    }
}

/// Populations `∝ (n̄/(n̄+1))^n` renormalised over the cutoff.
pub fn thermal_populations<T: Real>(cutoff: usize, nbar: T, tail_tolerance: f64) -> Result<Vec<T>> {
    if !(nbar >= T::zero()) || !nbar.is_finite() {
        return Err(Error::param("nbar", format!("must be finite and non-negative, got {nbar}")));
    }
    let mut pops = vec![T::zero(); cutoff];
    if nbar == T::zero() {
        pops[0] = T::one();
        return Ok(pops);
    }
    let ratio = nbar / (nbar + T::one());
    // weight of levels ≥ cutoff in the untruncated distribution
    let tail = ratio.powi(cutoff as i32).as_f64();
    if tail > tail_tolerance {
        return Err(Error::Truncation {
            cutoff,
            tail,
            threshold: tail_tolerance,
        });
    }
    let mut p = T::one();
    for slot in pops.iter_mut() {
        *slot = p;
        p *= ratio;
    }
    let total: T = pops.iter().copied().sum();
    pops.iter_mut().for_each(|x| *x /= total);
    Ok(pops)
}

/// Smallest cutoff whose thermal tail weight is below `tail_tolerance`.
pub fn minimal_thermal_cutoff(nbar: f64, tail_tolerance: f64) -> usize {
    if nbar <= 0.0 {
        return 2;
    }
    let ratio = nbar / (nbar + 1.0);
    let n = (tail_tolerance.ln() / ratio.ln()).ceil() as usize;
    n.max(2)
}

/// Thermal state of the Fock factor (an `N × N` matrix).
pub fn thermal_state<T: Real>(spec: &HilbertSpec, nbar: T) -> Result<DensityMatrix<T>> {
    thermal_state_with_tolerance(spec, nbar, DEFAULT_TAIL_TOLERANCE)
}

pub fn thermal_state_with_tolerance<T: Real>(
    spec: &HilbertSpec,
    nbar: T,
    tail_tolerance: f64,
) -> Result<DensityMatrix<T>> {
    let pops = thermal_populations(spec.fock_cutoff(), nbar, tail_tolerance)?;
    Ok(DensityMatrix::new_unchecked(ComplexMatrix::from_real_diag(&pops)))
}

/// Traces out the Fock factor, leaving the `2^spins × 2^spins` spin state.
pub fn partial_trace_motion<T: Real>(rho: &DensityMatrix<T>, spec: &HilbertSpec) -> Result<DensityMatrix<T>> {
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho.dim(),
        });
    }
    let (ns, nf) = (spec.spin_dim(), spec.fock_cutoff());
    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(ns, ns, |a, b| {
        (0..nf).fold(re(T::zero()), |acc, n| acc + m[(a * nf + n, b * nf + n)])
    });
    Ok(DensityMatrix::new_unchecked(out))
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn bell_fidelity<T: Real>(rho_spin: &DensityMatrix<T>, target: &PureState<T>) -> Result<T> {
    if rho_spin.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: rho_spin.dim(),
        });
    }
    let psi = target.amplitudes();
    let rho_psi = rho_spin.matrix().mul_vec(psi);
    let f = psi
        .iter()
        .zip(&rho_psi)
        .fold(re(T::zero()), |acc, (a, b)| acc + a.conj() * b);
    Ok(f.re.max(T::zero()).min(T::one()))
}

/// Weight a coherent state `|α⟩` puts on levels at or above `cutoff`.
pub fn coherent_tail_weight(cutoff: usize, alpha_abs_sq: f64) -> f64 {
    let mut p = (-alpha_abs_sq).exp();
    let mut inside = 0.0;
    for n in 0..cutoff {
        inside += p;
        p *= alpha_abs_sq / (n + 1) as f64;
    }
    (1.0 - inside).max(0.0)
}

/// `D(α) = exp(α a† − α* a)` on the Fock factor.
pub fn displacement_operator<T: Real>(spec: &HilbertSpec, alpha: C<T>) -> Result<ComplexMatrix<T>> {
    let n = spec.fock_cutoff();
    let tail = coherent_tail_weight(n, alpha.norm_sqr().as_f64());
    if tail > DEFAULT_TAIL_TOLERANCE {
        return Err(Error::Truncation {
            cutoff: n,
            tail,
            threshold: DEFAULT_TAIL_TOLERANCE,
        });
    }
    let a = fock_lowering::<T>(n);
    let mut gen = a.adjoint().scale(alpha);
    gen.axpy(-alpha.conj(), &a);
    expm(&gen)
}

/// Single-qubit rotation `exp(−i θ/2 σx)`.
pub fn rx<T: Real>(theta: T) -> ComplexMatrix<T> {
    let half = theta * T::lit(0.5);
    let (s, c) = half.sin_cos();
    ComplexMatrix::from_vec(
        2,
        2,
        vec![re(c), cplx(T::zero(), -s), cplx(T::zero(), -s), re(c)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> HilbertSpec {
        HilbertSpec::new(n).unwrap()
    }

    #[test]
    fn lowering_on_two_levels() {
        let a = fock_lowering::<f64>(2);
        assert_eq!(a[(0, 1)], re(1.0));
        assert_eq!(a[(1, 0)], re(0.0));
        assert_eq!(a[(0, 0)], re(0.0));
    }

    #[test]
    fn number_operator_diagonal() {
        let a = fock_lowering::<f64>(4);
        let n = a.adjoint().matmul(&a);
        for k in 0..4 {
            assert!((n[(k, k)].re - k as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn canonical_commutator_below_top_level() {
        let n = 16;
        let a = fock_lowering::<f64>(n);
        let c = a.commutator(&a.adjoint());
        for r in 0..n - 1 {
            for col in 0..n - 1 {
                let want = if r == col { 1.0 } else { 0.0 };
                assert!((c[(r, col)] - re(want)).norm() <= 1e-12);
            }
        }
        // the truncation shows up only in the last level
        assert!((c[(n - 1, n - 1)].re + (n as f64 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn embedded_operators_have_composite_dimension() {
        let s = spec(5);
        assert_eq!(lowering_operator::<f64>(&s).rows(), 20);
        assert_eq!(pauli_z::<f64>(&s, 1).unwrap().cols(), 20);
        assert!(matches!(
            pauli_z::<f64>(&s, 2),
            Err(Error::SpinIndex { index: 2, count: 2 })
        ));
    }

    #[test]
    fn sigma_z_eigenvalues_follow_basis_order() {
        let s = spec(3);
        // |↑↓⟩|0⟩ has spin index 0b01
        let idx = s.index(0b01, 0);
        let z0 = pauli_z::<f64>(&s, 0).unwrap();
        let z1 = pauli_z::<f64>(&s, 1).unwrap();
        assert_eq!(z0[(idx, idx)].re, 1.0);
        assert_eq!(z1[(idx, idx)].re, -1.0);
        let total = &z0 + &z1;
        let v = PureState::<f64>::basis(s.dim(), idx);
        assert!(total.mul_vec(v.amplitudes()).iter().all(|z| z.norm() == 0.0));
        assert_eq!(s.sigma_z_eigenvalue(0b01, 0), 1);
        assert_eq!(s.sigma_z_eigenvalue(0b01, 1), -1);
    }

    #[test]
    fn thermal_ground_state() {
        let rho = thermal_state::<f64>(&spec(10), 0.0).unwrap();
        assert_eq!(rho.matrix()[(0, 0)], re(1.0));
        assert_eq!(rho.trace(), 1.0);
    }

    #[test]
    fn thermal_mean_occupation_matches_geometric_series() {
        // independent oracle: Σ n r^n / Σ r^n summed directly over the cutoff
        let (n, nbar) = (60usize, 4.0f64);
        let r = nbar / (nbar + 1.0);
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..n {
            num += k as f64 * r.powi(k as i32);
            den += r.powi(k as i32);
        }
        let oracle = num / den;
        let pops = thermal_populations::<f64>(n, nbar, 1e-5).unwrap();
        let mean: f64 = pops.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((mean - oracle).abs() < 1e-12);
        assert!((mean - nbar).abs() < 1e-3 * (nbar + 1.0));
    }

    #[test]
    fn thermal_rejects_small_cutoff() {
        let err = thermal_state::<f64>(&spec(20), 4.0).unwrap_err();
        assert!(matches!(err, Error::Truncation { cutoff: 20, .. }));
        assert_eq!(minimal_thermal_cutoff(4.0, 1e-8), 83);
    }

    #[test]
    fn thermal_populations_non_increasing() {
        let p = thermal_populations::<f64>(90, 3.7, 1e-8).unwrap();
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let s = spec(3);
        let spin = PureState::<f64>::bell_phi_plus().projector();
        let motion = thermal_state_with_tolerance::<f64>(&s, 0.5, 1.0).unwrap();
        let reduced = partial_trace_motion(&spin.tensor(&motion), &s).unwrap();
        assert!((reduced.matrix() - spin.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_entangled_spin_motion_state() {
        // (|↑↑⟩|0⟩ + |↓↓⟩|1⟩)/√2 → spin factor ½(|↑↑⟩⟨↑↑| + |↓↓⟩⟨↓↓|)
        let s = spec(2);
        let mut v = vec![re(0.0f64); s.dim()];
        v[s.index(0b00, 0)] = re(1.0);
        v[s.index(0b11, 1)] = re(1.0);
        let psi = PureState::normalized(v).unwrap();
        let reduced = partial_trace_motion(&psi.projector(), &s).unwrap();
        let m = reduced.matrix();
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-15 && (m[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!(m[(0, 3)].norm() < 1e-15);
    }

    #[test]
    fn bell_fidelity_limits() {
        let bell = PureState::<f64>::bell_phi_plus();
        assert!((bell_fidelity(&bell.projector(), &bell).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::new(ComplexMatrix::identity(4).scale_real(0.25)).unwrap();
        assert!((bell_fidelity(&mixed, &bell).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn displacement_identity_and_inverse() {
        let s = spec(40);
        let d0 = displacement_operator::<f64>(&s, cplx(0.0, 0.0)).unwrap();
        assert!((&d0 - &ComplexMatrix::identity(40)).max_abs() < 1e-15);
        let alpha = cplx(1.0, 0.5);
        let d = displacement_operator(&s, alpha).unwrap();
        let dm = displacement_operator(&s, -alpha).unwrap();
        assert!((&d.matmul(&dm) - &ComplexMatrix::identity(40)).max_abs() < 1e-9);
        assert!((&d.matmul(&d.adjoint()) - &ComplexMatrix::identity(40)).max_abs() < 1e-9);
    }

    #[test]
    fn displaced_vacuum_occupation() {
        let s = spec(40);
        let d = displacement_operator(&s, cplx(2.0, 0.0)).unwrap();
        let col: Vec<_> = (0..40).map(|n| d[(n, 0)]).collect();
        let mean: f64 = col.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum();
        // Poisson oracle: p_n = e^{-4} 4^n / n!
        let mut p = (-4.0f64).exp();
        for (n, z) in col.iter().enumerate().take(20) {
            assert!((z.norm_sqr() - p).abs() < 1e-9, "level {n}");
            p *= 4.0 / (n + 1) as f64;
        }
        assert!((mean - 4.0).abs() < 1e-6);
    }

    #[test]
    fn displacement_rejects_large_alpha() {
        assert!(displacement_operator(&spec(10), cplx(3.0f64, 0.0)).is_err());
    }

    #[test]
    fn density_validation_rejects_bad_trace() {
        let m = ComplexMatrix::<f64>::identity(2);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn f32_operators_build() {
        let s = spec(4);
        let a = lowering_operator::<f32>(&s);
        assert!((a.adjoint().matmul(&a).trace().re - 24.0).abs() < 1e-5);
    }
}
