//! Jacobi-type rotation algorithms for homogeneous polynomial objectives on
//! unitary groups and Stiefel manifolds, specialized to joint approximate
//! tensor diagonalization, tensor compression, and symmetric trace
//! maximization.
//!
//! The crate is organized around the life of one rotation: [`tensor`] and
//! [`matrix`] hold the multilinear primitives, [`manifold`] the geometry,
//! [`objective`] the four objective families with their gradients and skew
//! fields, [`subproblem`] the 3×3 quadratic-form machinery every elementary
//! rotation reduces to, and [`solver`] the iteration loops. [`generate`]
//! builds seeded synthetic instances, [`io`] reads and writes the on-disk
//! formats, [`checks`] bundles the verification suites the CLI exposes.

pub mod checks;
pub mod error;
pub mod generate;
pub mod io;
pub mod manifold;
pub mod matrix;
pub mod objective;
pub mod solver;
pub mod subproblem;
pub mod tensor;

pub use error::{Error, Result};
pub use manifold::{StiefelPoint, UnitaryTuple};
pub use matrix::ComplexMatrix;
pub use objective::{Dagger, Family, ProblemSpec};
pub use solver::{Algorithm, SolveResult, SolverConfig};
pub use tensor::DenseTensor;
