//! Lindblad master-equation integration.
//!
//! `dρ/dt = −i[H(t), ρ] + Σ_n (L_n ρ L_n† − ½{L_n† L_n, ρ})` with `H` in rad/s.
//! Rates are folded into the jump operators (`L = √rate · op`).
//!
//! Two routes share the same integrators: [`evolve`] works on dense
//! composite-space matrices, [`blocks::evolve_blocks`] on operators that are
//! diagonal in the spin basis, and [`propagator_oracle`] builds the vectorised
//! superoperator for validation.

pub mod blocks;
mod ode;
mod oracle;

use std::sync::Arc;

pub use ode::{integrate, StepStats, Stepper};
pub use oracle::{apply_superoperator, liouvillian, propagator_oracle, ORACLE_MAX_DIM};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quantum::DensityMatrix;
use crate::scalar::{imag_unit, re, Real, C};

/// Time-dependent scalar multiplying a constant operator.
pub type Coefficient<T> = Arc<dyn Fn(T) -> C<T> + Send + Sync>;

pub fn constant_coefficient<T: Real>(value: C<T>) -> Coefficient<T> {
    Arc::new(move |_| value)
}

/// Jump operator with its rate already folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTerm<T: Real> {
    operator: ComplexMatrix<T>,
}

impl<T: Real> LindbladTerm<T> {
    pub fn new(operator: ComplexMatrix<T>) -> Self {
        Self { operator }
    }

    /// `√rate · op`.
    pub fn with_rate(rate: T, op: &ComplexMatrix<T>) -> Self {
        Self::new(op.scale_real(rate.sqrt()))
    }

    pub fn operator(&self) -> &ComplexMatrix<T> {
        &self.operator
    }
}

/// `H(t) = Σ_k c_k(t) · H_k` on a space of fixed dimension.
///
/// Coefficients only need to be smooth between breakpoints; the solvers
/// never evaluate them exactly on one.
#[derive(Clone)]
pub struct TimeDependentHamiltonian<T: Real> {
    dim: usize,
    terms: Vec<(Coefficient<T>, ComplexMatrix<T>)>,
    breakpoints: Vec<T>,
    drive_period: Option<T>,
}

impl<T: Real> TimeDependentHamiltonian<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
            breakpoints: Vec::new(),
            drive_period: None,
        }
    }

    pub fn constant(op: ComplexMatrix<T>) -> Self {
        let mut h = Self::new(op.rows());
        h.add_constant(op);
        h
    }

    pub fn add_term(&mut self, coefficient: Coefficient<T>, op: ComplexMatrix<T>) -> &mut Self {
        assert_eq!(op.rows(), self.dim, "Hamiltonian term dimension mismatch");
        assert!(op.is_square());
        self.terms.push((coefficient, op));
        self
    }

    pub fn add_constant(&mut self, op: ComplexMatrix<T>) -> &mut Self {
        self.add_term(constant_coefficient(re(T::one())), op)
    }

    /// Times at which coefficients may jump; the integrator never steps across them.
    pub fn set_breakpoints(&mut self, mut points: Vec<T>) -> &mut Self {
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        points.dedup();
        self.breakpoints = points;
        self
    }

    /// Period of the fastest drive; fixed-step runs resolve it with
    /// `steps_per_drive_period` steps.
    pub fn set_drive_period(&mut self, period: T) -> &mut Self {
        self.drive_period = Some(period);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn drive_period(&self) -> Option<T> {
        self.drive_period
    }

    pub fn terms(&self) -> &[(Coefficient<T>, ComplexMatrix<T>)] {
        &self.terms
    }

    pub fn at(&self, t: T) -> ComplexMatrix<T> {
        let mut h = ComplexMatrix::zeros(self.dim, self.dim);
        for (c, op) in &self.terms {
            h.axpy(c(t), op);
        }
        h
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.dim, other.dim);
        self.terms.extend(other.terms.iter().cloned());
        let mut bp = self.breakpoints.clone();
        bp.extend(other.breakpoints.iter().copied());
        self.set_breakpoints(bp);
        self.drive_period = match (self.drive_period, other.drive_period) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T: Real> {
    pub method: Method,
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on any step, seconds.
    pub max_step: T,
    pub steps_per_drive_period: usize,
    /// Hermiticity of `H(t)` is checked at this many points per segment.
    pub hermiticity_samples: usize,
    /// Largest tolerated `|Tr ρ(t1) − Tr ρ(t0)|`.
    pub trace_drift_limit: f64,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            rel_tol: T::tolerance(1e-10),
            abs_tol: T::tolerance(1e-12),
            max_step: T::infinity(),
            steps_per_drive_period: 400,
            hermiticity_samples: 3,
            trace_drift_limit: T::tolerance(1e-8).as_f64(),
        }
    }
}

impl<T: Real> SolverSettings<T> {
    pub fn adaptive(rel_tol: T, abs_tol: T) -> Self {
        Self {
            method: Method::Rk45,
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) || !(self.abs_tol > T::zero()) {
            return Err(Error::param("tolerance", "tolerances must be positive"));
        }
        if !(self.max_step > T::zero()) {
            return Err(Error::param("max_step", "must be positive"));
        }
        if self.steps_per_drive_period == 0 {
            return Err(Error::param("steps_per_drive_period", "must be at least one"));
        }
        Ok(())
    }

    /// Stepper for one smooth segment of length `len`.
    pub(crate) fn stepper(&self, len: T, drive_period: Option<T>) -> Stepper<T> {
        match self.method {
            Method::Rk4 => {
                let mut steps = 1usize;
                if let Some(p) = drive_period {
                    let per = (len / p * T::from_usize_lossy(self.steps_per_drive_period)).ceil();
                    steps = steps.max(per.to_usize().unwrap_or(1));
                }
                if self.max_step.is_finite() {
                    steps = steps.max((len / self.max_step).ceil().to_usize().unwrap_or(1));
                }
                if drive_period.is_none() && !self.max_step.is_finite() {
                    steps = steps.max(self.steps_per_drive_period);
                }
                Stepper::Rk4 { steps }
            }
            Method::Rk45 => Stepper::Rk45 {
                rel_tol: self.rel_tol,
                abs_tol: self.abs_tol,
                max_step: self.max_step,
                initial_step: drive_period.map_or(len / T::lit(100.0), |p| p / T::lit(50.0)),
            },
        }
    }
}

/// Splits `[t0, t1]` at every breakpoint strictly inside it.
pub(crate) fn segments<T: Real>(t0: T, t1: T, breakpoints: &[T]) -> Vec<(T, T)> {
    let mut cuts = vec![t0];
    cuts.extend(breakpoints.iter().copied().filter(|&b| b > t0 && b < t1));
    cuts.push(t1);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Evaluation time for coefficients inside segment `(a, b)`: endpoints are
/// pulled in by a few ulps so that piecewise-constant coefficients take the
/// segment's own value rather than a neighbour's.
pub(crate) fn inside<T: Real>(seg: (T, T), t: T) -> T {
    let (a, b) = seg;
    let eps = (b - a).abs().max(a.abs()).max(b.abs()) * T::epsilon() * T::lit(8.0);
    t.max(a + eps).min(b - eps)
}

/// Final state and run diagnostics.
#[derive(Debug, Clone)]
pub struct Evolution<S> {
    pub state: S,
    pub trace_drift: f64,
    pub stats: StepStats,
}

fn check_span<T: Real>(t_span: (T, T)) -> Result<()> {
    if !(t_span.1 > t_span.0) {
        return Err(Error::param("t_span", "t1 must exceed t0"));
    }
    Ok(())
}

fn check_hamiltonian_hermitian<T: Real>(
    h: &TimeDependentHamiltonian<T>,
    t_span: (T, T),
    settings: &SolverSettings<T>,
) -> Result<()> {
    let tol = T::tolerance(1e-10);
    let samples = settings.hermiticity_samples.max(1);
    for (a, b) in segments(t_span.0, t_span.1, &h.breakpoints) {
        for i in 0..samples {
            let frac = T::from_usize_lossy(i) / T::from_usize_lossy(samples);
            let t = inside((a, b), a + (b - a) * frac);
            let hm = h.at(t);
            let dev = hm.hermiticity_error();
            // relative to the operator scale so large drives are judged fairly
            let scale = hm.max_abs().max(T::one());
            if dev > tol * scale {
                return Err(Error::NonHermitian {
                    t: t.as_f64(),
                    deviation: dev.as_f64(),
                });
            }
        }
    }
    Ok(())
}

/// `ρ(t1)` from `ρ(t0)` under the master equation.
pub fn evolve<T: Real>(
    rho0: &DensityMatrix<T>,
    h: &TimeDependentHamiltonian<T>,
    lindblads: &[LindbladTerm<T>],
    t_span: (T, T),
    settings: &SolverSettings<T>,
) -> Result<DensityMatrix<T>> {
    evolve_with_diagnostics(rho0, h, lindblads, t_span, settings).map(|e| e.state)
}

pub fn evolve_with_diagnostics<T: Real>(
    rho0: &DensityMatrix<T>,
    h: &TimeDependentHamiltonian<T>,
    lindblads: &[LindbladTerm<T>],
    t_span: (T, T),
    settings: &SolverSettings<T>,
) -> Result<Evolution<DensityMatrix<T>>> {
    settings.validate()?;
    check_span(t_span)?;
    let d = rho0.dim();
    rho0.validate(
        T::tolerance(1e-10).as_f64(),
        T::tolerance(1e-9).as_f64(),
        T::tolerance(1e-9).as_f64(),
    )?;
    if h.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.dim(),
        });
    }
    for l in lindblads {
        l.operator().check_square(d)?;
    }
    check_hamiltonian_hermitian(h, t_span, settings)?;

    // G = −i/2 Σ L†L, so the RHS is −i(Hρ − ρH) + (Gρ + ρG†) + Σ LρL†
    let mut damping = ComplexMatrix::zeros(d, d);
    let jumps: Vec<(ComplexMatrix<T>, ComplexMatrix<T>)> = lindblads
        .iter()
        .map(|l| (l.operator().clone(), l.operator().adjoint()))
        .collect();
    for (l, ld) in &jumps {
        damping.axpy(re(T::lit(-0.5)), &ld.matmul(l));
    }
    let damping_adj = damping.adjoint();
    let minus_i = -imag_unit::<T>();

    let rhs = |seg: (T, T), t: T, y: &[C<T>], out: &mut [C<T>]| {
        let rho = ComplexMatrix::from_vec(d, d, y.to_vec());
        let hm = h.at(inside(seg, t));
        let mut acc = hm.matmul(&rho);
        acc -= &rho.matmul(&hm);
        let mut acc = acc.scale(minus_i);
        if !jumps.is_empty() {
            acc += &damping.matmul(&rho);
            acc += &rho.matmul(&damping_adj);
            for (l, ld) in &jumps {
                acc += &l.matmul(&rho).matmul(ld);
            }
        }
        out.copy_from_slice(acc.as_slice());
    };
    let symmetrize = |y: &mut [C<T>]| {
        let half = T::lit(0.5);
        for r in 0..d {
            y[r * d + r].im = T::zero();
            for c in r + 1..d {
                let avg = (y[r * d + c] + y[c * d + r].conj()).scale(half);
                y[r * d + c] = avg;
                y[c * d + r] = avg.conj();
            }
        }
    };

    let trace0 = rho0.trace();
    let mut y = rho0.matrix().as_slice().to_vec();
    let mut stats = StepStats::default();
    for (a, b) in segments(t_span.0, t_span.1, &h.breakpoints) {
        let stepper = settings.stepper(b - a, h.drive_period);
        stats.merge(integrate(&mut y, a, b, stepper, |t, y, out| rhs((a, b), t, y, out), symmetrize)?);
    }
    let state = DensityMatrix::new_unchecked(ComplexMatrix::from_vec(d, d, y));
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
