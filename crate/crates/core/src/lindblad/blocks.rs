//! Master-equation integration for operators that are diagonal in the spin
//! basis, `Σ_s |s⟩⟨s| ⊗ B_s`.
//!
//! Every gate and error operator in the two-spin simulation has this form, so
//! the density matrix splits into `S × S` Fock blocks `ρ_ij` that evolve
//! independently:
//!
//! `dρ_ij/dt = −i(G_i ρ_ij − ρ_ij G_j†) + Σ_L L_i ρ_ij L_j†`, `G_s = H_s − (i/2) Σ_L L_s† L_s`.
//!
//! Only blocks with `i ≤ j` are computed; the rest follow from Hermiticity.

use super::{
    check_span, inside, integrate, segments, Coefficient, Evolution, SolverSettings, StepStats,
    TimeDependentHamiltonian,
};
use crate::error::{Error, Result};
use crate::linalg::{BandedCombination, BandedMatrix, ComplexMatrix};
use crate::quantum::DensityMatrix;
use crate::scalar::{imag_unit, re, Real, C};

#[derive(Debug, Clone, PartialEq)]
pub struct SpinDiagonalOperator<T: Real> {
    blocks: Vec<BandedMatrix<T>>,
}

impl<T: Real> SpinDiagonalOperator<T> {
    pub fn new(blocks: Vec<BandedMatrix<T>>) -> Self {
        assert!(!blocks.is_empty());
        let n = blocks[0].dim();
        assert!(blocks.iter().all(|b| b.dim() == n), "blocks must share a dimension");
        Self { blocks }
    }

    /// Identity on the spins: every block equals `fock`.
    pub fn motion(spin_dim: usize, fock: &BandedMatrix<T>) -> Self {
        Self::new(vec![fock.clone(); spin_dim])
    }

    /// Block `s` is `weights[s] · fock`.
    pub fn spin_weighted(weights: &[C<T>], fock: &BandedMatrix<T>) -> Self {
        Self::new(weights.iter().map(|&w| fock.scale(w)).collect())
    }

    pub fn spin_dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn fock_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    pub fn block(&self, s: usize) -> &BandedMatrix<T> {
        &self.blocks[s]
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.blocks.iter().map(BandedMatrix::adjoint).collect())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self::new(self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a.matmul(b)).collect())
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let (s, n) = (self.spin_dim(), self.fock_dim());
        let mut m = ComplexMatrix::zeros(s * n, s * n);
        for (k, b) in self.blocks.iter().enumerate() {
            let d = b.to_dense();
            for r in 0..n {
                for c in 0..n {
                    m[(k * n + r, k * n + c)] = d[(r, c)];
                }
            }
        }
        m
    }
}

/// `H(t) = Σ_k c_k(t) · H_k` with spin-diagonal `H_k`.
#[derive(Clone)]
pub struct BlockHamiltonian<T: Real> {
    spin_dim: usize,
    fock_dim: usize,
    terms: Vec<(Coefficient<T>, SpinDiagonalOperator<T>)>,
    breakpoints: Vec<T>,
    drive_period: Option<T>,
}

impl<T: Real> BlockHamiltonian<T> {
    pub fn new(spin_dim: usize, fock_dim: usize) -> Self {
        Self {
            spin_dim,
            fock_dim,
            terms: Vec::new(),
            breakpoints: Vec::new(),
            drive_period: None,
        }
    }

    pub fn add_term(&mut self, coefficient: Coefficient<T>, op: SpinDiagonalOperator<T>) -> &mut Self {
        assert_eq!(op.spin_dim(), self.spin_dim);
        assert_eq!(op.fock_dim(), self.fock_dim);
        self.terms.push((coefficient, op));
        self
    }

    pub fn add_constant(&mut self, op: SpinDiagonalOperator<T>) -> &mut Self {
        self.add_term(super::constant_coefficient(re(T::one())), op)
    }

    pub fn set_breakpoints(&mut self, mut points: Vec<T>) -> &mut Self {
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        points.dedup();
        self.breakpoints = points;
        self
    }

    pub fn set_drive_period(&mut self, period: T) -> &mut Self {
        self.drive_period = Some(period);
        self
    }

    pub fn extend(&mut self, other: &Self) {
        assert_eq!((self.spin_dim, self.fock_dim), (other.spin_dim, other.fock_dim));
        self.terms.extend(other.terms.iter().cloned());
        let mut bp = self.breakpoints.clone();
        bp.extend(other.breakpoints.iter().copied());
        self.set_breakpoints(bp);
        self.drive_period = match (self.drive_period, other.drive_period) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn terms(&self) -> &[(Coefficient<T>, SpinDiagonalOperator<T>)] {
        &self.terms
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn drive_period(&self) -> Option<T> {
        self.drive_period
    }

    /// Block `s` of `H(t)`.
    pub fn block_at(&self, s: usize, t: T) -> BandedMatrix<T> {
        self.terms
            .iter()
            .fold(BandedMatrix::zeros(self.fock_dim), |acc, (c, op)| acc.add_scaled(c(t), op.block(s)))
    }

    /// The same Hamiltonian on the dense composite space.
    pub fn to_dense(&self) -> TimeDependentHamiltonian<T> {
        let mut h = TimeDependentHamiltonian::new(self.spin_dim * self.fock_dim);
        for (c, op) in &self.terms {
            h.add_term(c.clone(), op.to_dense());
        }
        h.set_breakpoints(self.breakpoints.clone());
        if let Some(p) = self.drive_period {
            h.set_drive_period(p);
        }
        h
    }
}

/// Density matrix stored as `S × S` row-major Fock blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDensity<T: Real> {
    spin_dim: usize,
    fock_dim: usize,
    data: Vec<C<T>>,
}

impl<T: Real> BlockDensity<T> {
    /// `ρ_spin ⊗ ρ_motion`.
    pub fn product(spin: &DensityMatrix<T>, motion: &DensityMatrix<T>) -> Self {
        let (s, n) = (spin.dim(), motion.dim());
        let mut data = Vec::with_capacity(s * s * n * n);
        for i in 0..s {
            for j in 0..s {
                let w = spin.matrix()[(i, j)];
                data.extend(motion.matrix().as_slice().iter().map(|&z| z * w));
            }
        }
        Self {
            spin_dim: s,
            fock_dim: n,
            data,
        }
    }

    pub fn from_dense(rho: &DensityMatrix<T>, spin_dim: usize) -> Result<Self> {
        let d = rho.dim();
        if spin_dim == 0 || d % spin_dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: spin_dim,
                found: d,
            });
        }
        let n = d / spin_dim;
        let m = rho.matrix();
        let mut data = Vec::with_capacity(d * d);
        for i in 0..spin_dim {
            for j in 0..spin_dim {
                for r in 0..n {
                    for c in 0..n {
                        data.push(m[(i * n + r, j * n + c)]);
                    }
                }
            }
        }
        Ok(Self {
            spin_dim,
            fock_dim: n,
            data,
        })
    }

    pub fn to_dense(&self) -> DensityMatrix<T> {
        let (s, n) = (self.spin_dim, self.fock_dim);
        let m = ComplexMatrix::from_fn(s * n, s * n, |r, c| self.block(r / n, c / n)[(r % n) * n + c % n]);
        DensityMatrix::new_unchecked(m)
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    fn block_len(&self) -> usize {
        self.fock_dim * self.fock_dim
    }

    pub fn block(&self, i: usize, j: usize) -> &[C<T>] {
        let len = self.block_len();
        let k = i * self.spin_dim + j;
        &self.data[k * len..(k + 1) * len]
    }

    pub fn trace(&self) -> T {
        let n = self.fock_dim;
        (0..self.spin_dim)
            .map(|s| (0..n).map(|k| self.block(s, s)[k * n + k].re).sum::<T>())
            .sum()
    }

    /// Spin state with the Fock factor traced out.
    pub fn reduced_spin(&self) -> DensityMatrix<T> {
        let n = self.fock_dim;
        let m = ComplexMatrix::from_fn(self.spin_dim, self.spin_dim, |i, j| {
            let b = self.block(i, j);
            (0..n).fold(re(T::zero()), |acc, k| acc + b[k * n + k])
        });
        DensityMatrix::new_unchecked(m)
    }

    /// `Tr((I ⊗ A) ρ)` for a Fock-factor operator `A`.
    pub fn motion_expectation(&self, op: &BandedMatrix<T>) -> C<T> {
        let n = self.fock_dim;
        let mut acc = re(T::zero());
        let mut tmp = vec![re(T::zero()); n * n];
        for s in 0..self.spin_dim {
            tmp.iter_mut().for_each(|z| *z = re(T::zero()));
            op.apply_left(re(T::one()), self.block(s, s), &mut tmp);
            acc += (0..n).fold(re(T::zero()), |a, k| a + tmp[k * n + k]);
        }
        acc
    }

    /// Populations of the Fock levels summed over spins.
    pub fn fock_populations(&self) -> Vec<T> {
        let n = self.fock_dim;
        (0..n)
            .map(|k| (0..self.spin_dim).map(|s| self.block(s, s)[k * n + k].re).sum())
            .collect()
    }

    /// Applies a spin-only unitary `U ⊗ I`.
    pub fn conjugate_spin(&self, u: &ComplexMatrix<T>) -> Self {
        let s = self.spin_dim;
        assert_eq!(u.rows(), s);
        let len = self.block_len();
        let mut data = vec![re(T::zero()); self.data.len()];
        for i in 0..s {
            for j in 0..s {
                let out = &mut data[(i * s + j) * len..(i * s + j + 1) * len];
                for k in 0..s {
                    for l in 0..s {
                        let w = u[(i, k)] * u[(j, l)].conj();
                        if w.norm() == T::zero() {
                            continue;
                        }
                        for (o, &v) in out.iter_mut().zip(self.block(k, l)) {
                            *o += v * w;
                        }
                    }
                }
            }
        }
        Self {
            spin_dim: s,
            fock_dim: self.fock_dim,
            data,
        }
    }
}

fn symmetrize_blocks<T: Real>(y: &mut [C<T>], s: usize, n: usize) {
    let len = n * n;
    let half = T::lit(0.5);
    for i in 0..s {
        let base = (i * s + i) * len;
        for r in 0..n {
            y[base + r * n + r].im = T::zero();
            for c in r + 1..n {
                let avg = (y[base + r * n + c] + y[base + c * n + r].conj()).scale(half);
                y[base + r * n + c] = avg;
                y[base + c * n + r] = avg.conj();
            }
        }
        for j in i + 1..s {
            let up = (i * s + j) * len;
            let lo = (j * s + i) * len;
            for r in 0..n {
                for c in 0..n {
                    y[lo + c * n + r] = y[up + r * n + c].conj();
                }
            }
        }
    }
}

/// Block-structured counterpart of [`super::evolve`].
pub fn evolve_blocks<T: Real>(
    rho0: &BlockDensity<T>,
    h: &BlockHamiltonian<T>,
    jumps: &[SpinDiagonalOperator<T>],
    t_span: (T, T),
    settings: &SolverSettings<T>,
) -> Result<Evolution<BlockDensity<T>>> {
    settings.validate()?;
    check_span(t_span)?;
    let (s, n) = (rho0.spin_dim, rho0.fock_dim);
    if h.spin_dim != s || h.fock_dim != n {
        return Err(Error::DimensionMismatch {
            expected: s * n,
            found: h.spin_dim * h.fock_dim,
        });
    }
    for j in jumps {
        if j.spin_dim() != s || j.fock_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: s * n,
                found: j.spin_dim() * j.fock_dim(),
            });
        }
    }
    check_blocks_hermitian(h, t_span, settings)?;

    let minus_half_i = C::new(T::zero(), T::lit(-0.5));
    let mut combos = Vec::with_capacity(s);
    let mut combos_adj = Vec::with_capacity(s);
    for k in 0..s {
        let damping = jumps.iter().fold(BandedMatrix::zeros(n), |acc, l| {
            acc.add_scaled(minus_half_i, &l.block(k).adjoint().matmul(l.block(k)))
        });
        let mut terms: Vec<BandedMatrix<T>> = h.terms.iter().map(|(_, op)| op.block(k).clone()).collect();
        let mut terms_adj: Vec<BandedMatrix<T>> = terms.iter().map(BandedMatrix::adjoint).collect();
        terms_adj.push(damping.adjoint());
        terms.push(damping);
        combos.push(BandedCombination::new(n, terms));
        combos_adj.push(BandedCombination::new(n, terms_adj));
    }
    let jump_adj: Vec<SpinDiagonalOperator<T>> = jumps.iter().map(SpinDiagonalOperator::adjoint).collect();

    let len = n * n;
    let mut tmp = vec![re(T::zero()); len];
    let mut coeffs = vec![re(T::one()); h.terms.len() + 1];
    let mut coeffs_adj = coeffs.clone();
    let (minus_i, plus_i, one) = (-imag_unit::<T>(), imag_unit::<T>(), re(T::one()));

    let mut rhs = |seg: (T, T), t: T, y: &[C<T>], out: &mut [C<T>]| {
        let t = inside(seg, t);
        for (k, (c, _)) in h.terms.iter().enumerate() {
            let v = c(t);
            coeffs[k] = v;
            coeffs_adj[k] = v.conj();
        }
        for k in 0..s {
            combos[k].evaluate(&coeffs);
            combos_adj[k].evaluate(&coeffs_adj);
        }
        for i in 0..s {
            for j in i..s {
                let idx = (i * s + j) * len;
                let rho = &y[idx..idx + len];
                let o = &mut out[idx..idx + len];
                o.iter_mut().for_each(|z| *z = re(T::zero()));
                combos[i].current().apply_left(minus_i, rho, o);
                combos_adj[j].current().apply_right(plus_i, rho, o);
                for (l, ld) in jumps.iter().zip(&jump_adj) {
                    tmp.iter_mut().for_each(|z| *z = re(T::zero()));
                    l.block(i).apply_left(one, rho, &mut tmp);
                    ld.block(j).apply_right(one, &tmp, o);
                }
            }
        }
        for i in 0..s {
            for j in i + 1..s {
                let up = (i * s + j) * len;
                let lo = (j * s + i) * len;
                for r in 0..n {
                    for c in 0..n {
                        out[lo + c * n + r] = out[up + r * n + c].conj();
                    }
                }
            }
        }
    };

    let trace0 = rho0.trace();
    let mut y = rho0.data.clone();
    let mut stats = StepStats::default();
    for (a, b) in segments(t_span.0, t_span.1, &h.breakpoints) {
        let stepper = settings.stepper(b - a, h.drive_period);
        stats.merge(integrate(
            &mut y,
            a,
            b,
            stepper,
            |t, y: &[C<T>], out: &mut [C<T>]| rhs((a, b), t, y, out),
            |y| symmetrize_blocks(y, s, n),
        )?);
    }
    let state = BlockDensity {
        spin_dim: s,
        fock_dim: n,
        data: y,
    };
    let drift = (state.trace() - trace0).abs().as_f64();
    if drift > settings.trace_drift_limit {
        return Err(Error::TraceDrift {
            drift,
            limit: settings.trace_drift_limit,
        });
    }
    Ok(Evolution {
        state,
        trace_drift: drift,
        stats,
    })
}

fn check_blocks_hermitian<T: Real>(
    h: &BlockHamiltonian<T>,
    t_span: (T, T),
    settings: &SolverSettings<T>,
) -> Result<()> {
    let tol = T::tolerance(1e-10);
    let samples = settings.hermiticity_samples.max(1);
    for (a, b) in segments(t_span.0, t_span.1, &h.breakpoints) {
        for i in 0..samples {
            let t = inside((a, b), a + (b - a) * T::from_usize_lossy(i) / T::from_usize_lossy(samples));
            for k in 0..h.spin_dim {
                let m = h.block_at(k, t).to_dense();
                let dev = m.hermiticity_error();
                if dev > tol * m.max_abs().max(T::one()) {
                    return Err(Error::NonHermitian {
                        t: t.as_f64(),
                        deviation: dev.as_f64(),
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{evolve, LindbladTerm};
    use crate::quantum::{fock_lowering, thermal_state_with_tolerance, HilbertSpec, PureState};
    use crate::scalar::cplx;
    use std::sync::Arc;

    fn setup(n: usize) -> (BlockHamiltonian<f64>, Vec<SpinDiagonalOperator<f64>>, BlockDensity<f64>) {
        let a = BandedMatrix::from_dense(&fock_lowering::<f64>(n));
        let ad = a.adjoint();
        let weights = [cplx(2.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(-2.0, 0.0)];
        let delta = 3.0;
        let mut h = BlockHamiltonian::new(4, n);
        h.add_term(
            Arc::new(move |t: f64| cplx(0.0, -delta * t).exp() * 0.7),
            SpinDiagonalOperator::spin_weighted(&weights, &a),
        );
        h.add_term(
            Arc::new(move |t: f64| cplx(0.0, delta * t).exp() * 0.7),
            SpinDiagonalOperator::spin_weighted(&weights, &ad),
        );
        h.add_constant(SpinDiagonalOperator::motion(4, &ad.matmul(&a).scale(cplx(0.4, 0.0))));
        h.set_drive_period(2.0 * std::f64::consts::PI / delta);
        let jumps = vec![
            SpinDiagonalOperator::motion(4, &a.scale(cplx(0.3, 0.0))),
            SpinDiagonalOperator::motion(4, &ad.scale(cplx(0.2, 0.0))),
            SpinDiagonalOperator::spin_weighted(
                &[cplx(0.1, 0.0), cplx(0.1, 0.0), cplx(-0.1, 0.0), cplx(-0.1, 0.0)],
                &BandedMatrix::identity(n),
            ),
        ];
        let plus = PureState::<f64>::plus().projector();
        let spin = plus.tensor(&plus);
        let spec = HilbertSpec::new(n).unwrap();
        let motion = thermal_state_with_tolerance(&spec, 0.3, 0.1).unwrap();
        (h, jumps, BlockDensity::product(&spin, &motion))
    }

    #[test]
    fn block_and_dense_routes_agree() {
        let n = 5;
        let (h, jumps, rho) = setup(n);
        let settings = SolverSettings::default();
        let blocks = evolve_blocks(&rho, &h, &jumps, (0.0, 2.0), &settings).unwrap();
        let dense_jumps: Vec<_> = jumps.iter().map(|j| LindbladTerm::new(j.to_dense())).collect();
        let dense = evolve(&rho.to_dense(), &h.to_dense(), &dense_jumps, (0.0, 2.0), &settings).unwrap();
        assert!((blocks.state.to_dense().matrix() - dense.matrix()).max_abs() < 1e-12);
        assert!(blocks.trace_drift < 1e-12);
    }

    #[test]
    fn dense_round_trip() {
        let (_, _, rho) = setup(3);
        assert_eq!(BlockDensity::from_dense(&rho.to_dense(), 4).unwrap(), rho);
    }

    #[test]
    fn spin_conjugation_matches_dense() {
        let (_, _, rho) = setup(3);
        let u = crate::quantum::rx(0.7).kron(&ComplexMatrix::identity(2));
        let got = rho.conjugate_spin(&u).to_dense();
        let want = rho.to_dense().conjugate_by(&u.kron(&ComplexMatrix::identity(3)));
        assert!((got.matrix() - want.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn motion_expectation_of_number_operator() {
        let n = 40;
        let spec = HilbertSpec::new(n).unwrap();
        let motion = thermal_state_with_tolerance(&spec, 2.0, 1e-6).unwrap();
        let plus = PureState::<f64>::plus().projector();
        let rho = BlockDensity::product(&plus.tensor(&plus), &motion);
        let a = BandedMatrix::from_dense(&fock_lowering::<f64>(n));
        let nop = a.adjoint().matmul(&a);
        assert!((rho.motion_expectation(&nop).re - 2.0).abs() < 1e-4);
    }
}
