//! Explicit Runge–Kutta integrators over flat complex state vectors.

use crate::error::{Error, Result};
use crate::scalar::{re, Real, C};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepper<T: Real> {
    /// Classical RK4 with `steps` equal steps over the interval.
    Rk4 { steps: usize },
    /// Dormand–Prince 5(4) with PI-free standard step control.
    Rk45 {
        rel_tol: T,
        abs_tol: T,
        max_step: T,
        initial_step: T,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

impl StepStats {
    pub fn merge(&mut self, other: StepStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.rhs_evaluations += other.rhs_evaluations;
    }
}

#[inline]
fn combine<T: Real>(out: &mut [C<T>], y: &[C<T>], h: T, terms: &[(T, &[C<T>])]) {
    out.copy_from_slice(y);
    for &(w, k) in terms {
        if w == T::zero() {
            continue;
        }
        let s = re(w * h);
        for (o, &v) in out.iter_mut().zip(k) {
            *o += v * s;
        }
    }
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1`, calling `post_step` after
/// every accepted step.
pub fn integrate<T, F, P>(
    y: &mut [C<T>],
    t0: T,
    t1: T,
    stepper: Stepper<T>,
    mut rhs: F,
    mut post_step: P,
) -> Result<StepStats>
where
    T: Real,
    F: FnMut(T, &[C<T>], &mut [C<T>]),
    P: FnMut(&mut [C<T>]),
{
    match stepper {
        Stepper::Rk4 { steps } => rk4(y, t0, t1, steps.max(1), &mut rhs, &mut post_step),
        Stepper::Rk45 {
            rel_tol,
            abs_tol,
            max_step,
            initial_step,
        } => dopri5(
            y,
            t0,
            t1,
            rel_tol,
            abs_tol,
            max_step,
            initial_step,
            &mut rhs,
            &mut post_step,
        ),
    }
}

fn rk4<T, F, P>(
    y: &mut [C<T>],
    t0: T,
    t1: T,
    steps: usize,
    rhs: &mut F,
    post_step: &mut P,
) -> Result<StepStats>
where
    T: Real,
    F: FnMut(T, &[C<T>], &mut [C<T>]),
    P: FnMut(&mut [C<T>]),
{
    let n = y.len();
    let zero = re(T::zero());
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    let h = (t1 - t0) / T::from_usize_lossy(steps);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let third = T::one() / T::lit(3.0);
    for i in 0..steps {
        let t = t0 + h * T::from_usize_lossy(i);
        rhs(t, y, &mut k1);
        combine(&mut tmp, y, h, &[(half, &k1)]);
        rhs(t + h * half, &tmp, &mut k2);
        combine(&mut tmp, y, h, &[(half, &k2)]);
        rhs(t + h * half, &tmp, &mut k3);
        combine(&mut tmp, y, h, &[(T::one(), &k3)]);
        rhs(t + h, &tmp, &mut k4);
        combine(&mut tmp, y, h, &[(sixth, &k1), (third, &k2), (third, &k3), (sixth, &k4)]);
        y.copy_from_slice(&tmp);
        post_step(y);
    }
    Ok(StepStats {
        accepted: steps,
        rejected: 0,
        rhs_evaluations: 4 * steps,
    })
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

#[allow(clippy::too_many_arguments)]
fn dopri5<T, F, P>(
    y: &mut [C<T>],
    t0: T,
    t1: T,
    rel_tol: T,
    abs_tol: T,
    max_step: T,
    initial_step: T,
    rhs: &mut F,
    post_step: &mut P,
) -> Result<StepStats>
where
    T: Real,
    F: FnMut(T, &[C<T>], &mut [C<T>]),
    P: FnMut(&mut [C<T>]),
{
    let n = y.len();
    let zero = re(T::zero());
    let mut k: Vec<Vec<C<T>>> = (0..7).map(|_| vec![zero; n]).collect();
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    let l = T::lit;
    let mut stats = StepStats::default();

    let span = t1 - t0;
    let mut h = if initial_step > T::zero() {
        initial_step
    } else {
        span / T::lit(100.0)
    }
    .min(max_step)
    .min(span);
    let h_min = span.abs() * T::epsilon() * T::lit(16.0);
    let mut t = t0;

    rhs(t, y, &mut k[0]);
    stats.rhs_evaluations += 1;
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        if h <= h_min {
            return Err(Error::StepUnderflow {
                t: t.as_f64(),
                step: h.as_f64(),
            });
        }
        let (k1, rest) = k.split_at_mut(1);
        let (k2, rest) = rest.split_at_mut(1);
        let (k3, rest) = rest.split_at_mut(1);
        let (k4, rest) = rest.split_at_mut(1);
        let (k5, rest) = rest.split_at_mut(1);
        let (k6, k7) = rest.split_at_mut(1);
        let (k1, k2, k3, k4, k5, k6, k7) = (
            &mut k1[0], &mut k2[0], &mut k3[0], &mut k4[0], &mut k5[0], &mut k6[0], &mut k7[0],
        );

        combine(&mut tmp, y, h, &[(l(A21), k1)]);
        rhs(t + h * l(C2), &tmp, k2);
        combine(&mut tmp, y, h, &[(l(A31), k1), (l(A32), k2)]);
        rhs(t + h * l(C3), &tmp, k3);
        combine(&mut tmp, y, h, &[(l(A41), k1), (l(A42), k2), (l(A43), k3)]);
        rhs(t + h * l(C4), &tmp, k4);
        combine(&mut tmp, y, h, &[(l(A51), k1), (l(A52), k2), (l(A53), k3), (l(A54), k4)]);
        rhs(t + h * l(C5), &tmp, k5);
        combine(
            &mut tmp,
            y,
            h,
            &[(l(A61), k1), (l(A62), k2), (l(A63), k3), (l(A64), k4), (l(A65), k5)],
        );
        rhs(t + h, &tmp, k6);
        combine(
            &mut y_new,
            y,
            h,
            &[(l(B1), k1), (l(B3), k3), (l(B4), k4), (l(B5), k5), (l(B6), k6)],
        );
        rhs(t + h, &y_new, k7);
        stats.rhs_evaluations += 6;

        let mut acc = T::zero();
        for i in 0..n {
            let e = (k1[i] * re(l(E1))
                + k3[i] * re(l(E3))
                + k4[i] * re(l(E4))
                + k5[i] * re(l(E5))
                + k6[i] * re(l(E6))
                + k7[i] * re(l(E7)))
                * re(h);
            let scale = abs_tol + rel_tol * y[i].norm().max(y_new[i].norm());
            let r = e.norm() / scale;
            acc += r * r;
        }
        let err = (acc / T::from_usize_lossy(n.max(1))).sqrt();

        let factor = if err == T::zero() {
            l(5.0)
        } else {
            (l(0.9) * err.powf(l(-0.2))).max(l(0.2)).min(l(5.0))
        };
        if err <= T::one() {
            t += h;
            y.copy_from_slice(&y_new);
            post_step(y);
            // FSAL, unless post_step changed the state
            rhs(t, y, k1);
            stats.rhs_evaluations += 1;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        h = (h * factor).min(max_step);
    }
    Ok(stats)
}
