//! Simulation and calculation toolkit for trapped-electron qubits.
//!
//! * [`quantum`]: operators and states on the spin ⊗ spin ⊗ Fock space
//! * [`lindblad`]: master-equation integration, dense and spin-block routes
//! * [`gate`]: σz⊗σz geometric-phase gate with error channels and Walsh modulation
//! * [`trap`]: closed-form trap-physics calculators
//! * [`trajectory`]: classical stability of a released electron in the AC quadrupole
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.

pub mod constants;
pub mod error;
pub mod gate;
pub mod lindblad;
pub mod linalg;
pub mod quantum;
pub mod scalar;
pub mod trajectory;
pub mod trap;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Complex64 = C<f64>;
pub type Matrix = linalg::ComplexMatrix<f64>;
pub type Matrix32 = linalg::ComplexMatrix<f32>;
pub type Density = quantum::DensityMatrix<f64>;
pub type Density32 = quantum::DensityMatrix<f32>;
pub type State = quantum::PureState<f64>;
pub type Hamiltonian = lindblad::TimeDependentHamiltonian<f64>;
pub type Jump = lindblad::LindbladTerm<f64>;
pub type Settings = lindblad::SolverSettings<f64>;
pub type Schedule = gate::GateSchedule<f64>;
pub type Outcome = gate::GateResult<f64>;
