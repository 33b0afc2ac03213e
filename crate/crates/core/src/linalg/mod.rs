//! Dense and banded complex linear algebra.

mod banded;
mod expm;
mod matrix;

pub use banded::{BandedCombination, BandedMatrix};
pub use expm::{expm, solve};
pub use matrix::ComplexMatrix;
