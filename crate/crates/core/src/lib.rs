//! Exact-rational obstruction calculus for symplectic fibrations.
//!
//! The crate models rational cohomology rings as finite-dimensional
//! graded-commutative Poincare algebras and builds, on top of them, the
//! solver for generalized Wang homomorphisms, Gromov-Witten constraint
//! assembly, flux-rank bounds and blow-up cohomology rings.

pub mod algebra;
pub mod blowup;
pub mod corpus;
pub mod doc;
pub mod error;
pub mod flux;
pub mod gw;
pub mod linalg;
pub mod presentation;
pub mod scalar;
pub mod wang;

pub use algebra::{AlgebraMap, BasisElement, CohomologyClass, GradedAlgebra, PoincareStatus};
pub use error::{Error, Result, ValidationFailure};
pub use linalg::{Matrix, Subspace};
pub use scalar::Scalar;
