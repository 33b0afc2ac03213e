//! Matrix exponential by scaling and squaring with a [13/13] Padé approximant
//! (Higham 2005).

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::{re, Real, C};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// `exp(A)` for a square complex matrix.
pub fn expm<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.cols(),
        });
    }
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }

    let norm = a.norm_one().as_f64();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale_real(T::lit(0.5f64.powi(squarings)));

    let b = |k: usize| re(T::lit(PADE13[k]));
    let id = ComplexMatrix::<T>::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut inner = a6.scale(b(13));
    inner.axpy(b(11), &a4);
    inner.axpy(b(9), &a2);
    let mut u = a6.matmul(&inner);
    u.axpy(b(7), &a6);
    u.axpy(b(5), &a4);
    u.axpy(b(3), &a2);
    u.axpy(b(1), &id);
    let u = a.matmul(&u);

    let mut inner = a6.scale(b(12));
    inner.axpy(b(10), &a4);
    inner.axpy(b(8), &a2);
    let mut v = a6.matmul(&inner);
    v.axpy(b(6), &a6);
    v.axpy(b(4), &a4);
    v.axpy(b(2), &a2);
    v.axpy(b(0), &id);

    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    Ok(r)
}

/// Solves `A X = B` by LU factorisation with partial pivoting.
pub fn solve<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.rows(),
        });
    }
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let (pivot, mag) = (k..n)
            .map(|r| (r, lu[(r, k)].norm()))
            .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag == T::zero() || !mag.is_finite() {
            return Err(Error::Singular);
        }
        if pivot != k {
            for c in 0..n {
                let tmp = lu[(k, c)];
                lu[(k, c)] = lu[(pivot, c)];
                lu[(pivot, c)] = tmp;
            }
            for c in 0..m {
                let tmp = x[(k, c)];
                x[(k, c)] = x[(pivot, c)];
                x[(pivot, c)] = tmp;
            }
        }
        let inv = C::new(T::one(), T::zero()) / lu[(k, k)];
        for r in k + 1..n {
            let f = lu[(r, k)] * inv;
            if f.norm() == T::zero() {
                continue;
            }
            lu[(r, k)] = f;
            for c in k + 1..n {
                let d = lu[(k, c)];
                lu[(r, c)] -= f * d;
            }
            for c in 0..m {
                let d = x[(k, c)];
                x[(r, c)] -= f * d;
            }
        }
    }
    for k in (0..n).rev() {
        let inv = C::new(T::one(), T::zero()) / lu[(k, k)];
        for c in 0..m {
            let mut acc = x[(k, c)];
            for j in k + 1..n {
                acc -= lu[(k, j)] * x[(j, c)];
            }
            x[(k, c)] = acc * inv;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn exp_of_zero_is_identity() {
        let z = ComplexMatrix::<f64>::zeros(5, 5);
        let e = expm(&z).unwrap();
        assert!((&e - &ComplexMatrix::identity(5)).max_abs() < 1e-15);
    }

    #[test]
    fn exp_of_diagonal() {
        let d = ComplexMatrix::from_diag(&[cplx(1.0, 0.0), cplx(-2.0, 0.5), cplx(30.0, 0.0)]);
        let e = expm(&d).unwrap();
        let expect = [cplx(1.0f64, 0.0).exp(), cplx(-2.0, 0.5).exp(), cplx(30.0, 0.0).exp()];
        for (i, z) in expect.iter().enumerate() {
            assert!((e[(i, i)] - z).norm() / z.norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_generator() {
        // exp(-iθσx) = cosθ I − i sinθ σx
        let theta = 7.3f64;
        let sx = ComplexMatrix::from_vec(
            2,
            2,
            vec![cplx(0.0, 0.0), cplx(0.0, -theta), cplx(0.0, -theta), cplx(0.0, 0.0)],
        );
        let e = expm(&sx).unwrap();
        assert!((e[(0, 0)] - cplx(theta.cos(), 0.0)).norm() < 1e-13);
        assert!((e[(0, 1)] - cplx(0.0, -theta.sin())).norm() < 1e-13);
    }

    #[test]
    fn nilpotent_jordan_block() {
        // exp([[0,1],[0,0]]) = [[1,1],[0,1]]
        let j = ComplexMatrix::from_vec(
            2,
            2,
            vec![cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)],
        );
        let e = expm(&j).unwrap();
        assert!((e[(0, 1)] - cplx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = ComplexMatrix::from_vec(
            2,
            2,
            vec![cplx(0.0, 0.0), cplx(2.0, 1.0), cplx(1.0, 0.0), cplx(3.0, 0.0)],
        );
        let x = ComplexMatrix::from_vec(2, 1, vec![cplx(1.0, -1.0), cplx(0.5, 2.0)]);
        let b = a.matmul(&x);
        let got = solve(&a, &b).unwrap();
        assert!((&got - &x).max_abs() < 1e-14);
    }
}
