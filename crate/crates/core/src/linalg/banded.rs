//! Banded square matrices. Truncated ladder operators and their low-order
//! polynomials have a handful of non-zero diagonals, so products with dense
//! density-matrix blocks cost O(bands · N²) instead of O(N³).

use crate::linalg::ComplexMatrix;
use crate::scalar::{re, Real, C};

#[derive(Debug, Clone, PartialEq)]
struct Band<T: Real> {
    /// Entry `(i, i + offset)`.
    offset: isize,
    values: Vec<C<T>>,
}

impl<T: Real> Band<T> {
    #[inline]
    fn first_row(&self) -> usize {
        (-self.offset).max(0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T: Real> {
    n: usize,
    bands: Vec<Band<T>>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, bands: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(0, vec![re(T::one()); n])
    }

    /// A single band. `values.len()` must equal `n − |offset|`.
    pub fn from_diagonal(offset: isize, values: Vec<C<T>>) -> Self {
        let n = values.len() + offset.unsigned_abs();
        Self {
            n,
            bands: vec![Band { offset, values }],
        }
    }

    /// Extracts every diagonal containing a non-zero entry.
    pub fn from_dense(m: &ComplexMatrix<T>) -> Self {
        assert!(m.is_square(), "banded matrices are square");
        let n = m.rows();
        let mut bands = Vec::new();
        for offset in -(n as isize - 1)..(n as isize) {
            let first = (-offset).max(0) as usize;
            let len = n - offset.unsigned_abs();
            let values: Vec<C<T>> = (0..len)
                .map(|i| {
                    let r = first + i;
                    m[(r, (r as isize + offset) as usize)]
                })
                .collect();
            if values.iter().any(|z| z.norm() != T::zero()) {
                bands.push(Band { offset, values });
            }
        }
        Self { n, bands }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn offsets(&self) -> Vec<isize> {
        self.bands.iter().map(|b| b.offset).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(self.n, self.n);
        for band in &self.bands {
            let first = band.first_row();
            for (i, &v) in band.values.iter().enumerate() {
                let r = first + i;
                m[(r, (r as isize + band.offset) as usize)] = v;
            }
        }
        m
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            n: self.n,
            bands: self
                .bands
                .iter()
                .map(|b| Band {
                    offset: b.offset,
                    values: b.values.iter().map(|&v| v * s).collect(),
                })
                .collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut bands: Vec<Band<T>> = self
            .bands
            .iter()
            .map(|b| Band {
                offset: -b.offset,
                values: b.values.iter().map(|v| v.conj()).collect(),
            })
            .collect();
        bands.sort_by_key(|b| b.offset);
        Self { n: self.n, bands }
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: C<T>, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for b in &other.bands {
            match out.bands.iter_mut().find(|x| x.offset == b.offset) {
                Some(x) => {
                    for (a, &v) in x.values.iter_mut().zip(&b.values) {
                        *a += v * s;
                    }
                }
                None => out.bands.push(Band {
                    offset: b.offset,
                    values: b.values.iter().map(|&v| v * s).collect(),
                }),
            }
        }
        out.bands.sort_by_key(|b| b.offset);
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self::from_dense(&self.to_dense().matmul(&rhs.to_dense()))
    }

    /// `out += alpha · (self · x)` for a row-major `n × n` block `x`.
    pub fn apply_left(&self, alpha: C<T>, x: &[C<T>], out: &mut [C<T>]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n * n);
        for band in &self.bands {
            let first = band.first_row();
            for (i, &v) in band.values.iter().enumerate() {
                let r = first + i;
                let src = (r as isize + band.offset) as usize;
                let coef = v * alpha;
                let dst = &mut out[r * n..(r + 1) * n];
                let src = &x[src * n..(src + 1) * n];
                for (o, &s) in dst.iter_mut().zip(src) {
                    *o += coef * s;
                }
            }
        }
    }

    /// `out += alpha · (x · self)` for a row-major `n × n` block `x`.
    pub fn apply_right(&self, alpha: C<T>, x: &[C<T>], out: &mut [C<T>]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n * n);
        for band in &self.bands {
            // (x A)[r][c] += x[r][j] A[j][c] with c = j + offset
            let first = band.first_row();
            let scaled: Vec<C<T>> = band.values.iter().map(|&v| v * alpha).collect();
            let col0 = (first as isize + band.offset) as usize;
            let len = scaled.len();
            for r in 0..n {
                let xr = &x[r * n + first..r * n + first + len];
                let or = &mut out[r * n + col0..r * n + col0 + len];
                for ((o, &xv), &a) in or.iter_mut().zip(xr).zip(&scaled) {
                    *o += xv * a;
                }
            }
        }
    }
}

/// Reusable linear combination `Σ c_k B_k` of banded matrices sharing a
/// dimension, evaluated without reallocating.
#[derive(Debug, Clone)]
pub struct BandedCombination<T: Real> {
    terms: Vec<BandedMatrix<T>>,
    out: BandedMatrix<T>,
    /// `slots[k][j]` = index in `out.bands` of band `j` of term `k`.
    slots: Vec<Vec<usize>>,
}

impl<T: Real> BandedCombination<T> {
    pub fn new(n: usize, terms: Vec<BandedMatrix<T>>) -> Self {
        let mut offsets: Vec<isize> = terms.iter().flat_map(|t| t.offsets()).collect();
        offsets.sort_unstable();
        offsets.dedup();
        let out = BandedMatrix {
            n,
            bands: offsets
                .iter()
                .map(|&offset| Band {
                    offset,
                    values: vec![re(T::zero()); n - offset.unsigned_abs()],
                })
                .collect(),
        };
        let slots = terms
            .iter()
            .map(|t| {
                assert_eq!(t.n, n, "banded term dimension mismatch");
                t.bands
                    .iter()
                    .map(|b| offsets.binary_search(&b.offset).unwrap())
                    .collect()
            })
            .collect();
        Self { terms, out, slots }
    }

    pub fn evaluate(&mut self, coeffs: &[C<T>]) -> &BandedMatrix<T> {
        debug_assert_eq!(coeffs.len(), self.terms.len());
        for band in &mut self.out.bands {
            band.values.iter_mut().for_each(|v| *v = re(T::zero()));
        }
        for ((term, slots), &c) in self.terms.iter().zip(&self.slots).zip(coeffs) {
            if c.norm() == T::zero() {
                continue;
            }
            for (band, &slot) in term.bands.iter().zip(slots) {
                for (o, &v) in self.out.bands[slot].values.iter_mut().zip(&band.values) {
                    *o += v * c;
                }
            }
        }
        &self.out
    }

    /// Result of the last [`evaluate`](Self::evaluate).
    pub fn current(&self) -> &BandedMatrix<T> {
        &self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn sample(n: usize, seed: u64) -> ComplexMatrix<f64> {
        let mut s = seed;
        ComplexMatrix::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 11) as f64) / (1u64 << 53) as f64 - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 11) as f64) / (1u64 << 53) as f64 - 0.5;
            cplx(a, b)
        })
    }

    fn banded_sample(n: usize) -> BandedMatrix<f64> {
        let dense = sample(n, 9);
        let masked = ComplexMatrix::from_fn(n, n, |r, c| {
            let k = c as isize - r as isize;
            if k == -2 || k == 1 || k == 0 || k == 3 {
                dense[(r, c)]
            } else {
                cplx(0.0, 0.0)
            }
        });
        BandedMatrix::from_dense(&masked)
    }

    #[test]
    fn dense_round_trip() {
        let b = banded_sample(6);
        assert_eq!(b.offsets(), vec![-2, 0, 1, 3]);
        assert_eq!(BandedMatrix::from_dense(&b.to_dense()), b);
    }

    #[test]
    fn left_and_right_products_match_dense() {
        let n = 7;
        let b = banded_sample(n);
        let x = sample(n, 3);
        let alpha = cplx(0.3, -1.1);
        let mut left = vec![cplx(0.0, 0.0); n * n];
        b.apply_left(alpha, x.as_slice(), &mut left);
        let want = b.to_dense().matmul(&x).scale(alpha);
        assert!((&ComplexMatrix::from_vec(n, n, left) - &want).max_abs() < 1e-14);

        let mut right = vec![cplx(0.0, 0.0); n * n];
        b.apply_right(alpha, x.as_slice(), &mut right);
        let want = x.matmul(&b.to_dense()).scale(alpha);
        assert!((&ComplexMatrix::from_vec(n, n, right) - &want).max_abs() < 1e-14);
    }

    #[test]
    fn adjoint_matches_dense() {
        let b = banded_sample(5);
        assert_eq!(b.adjoint().to_dense(), b.to_dense().adjoint());
    }

    #[test]
    fn combination_matches_sum() {
        let n = 6;
        let a = banded_sample(n);
        let b = BandedMatrix::<f64>::identity(n);
        let mut comb = BandedCombination::new(n, vec![a.clone(), b.clone()]);
        let c = [cplx(2.0, 1.0), cplx(-0.5, 0.0)];
        let got = comb.evaluate(&c).to_dense();
        let mut want = a.to_dense().scale(c[0]);
        want.axpy(c[1], &b.to_dense());
        assert!((&got - &want).max_abs() < 1e-15);
    }
}
