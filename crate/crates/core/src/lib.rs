//! Euclidean lattices as hermitian bundles over Spec ℤ: exact lattice
//! arithmetic, theta invariants, Arakelov divisors, Mellin-transform
//! identities and desk-scale classification of integral quadratic forms.

pub mod acceptance;
pub mod analysis;
pub mod arakelov;
pub mod bounded;
pub mod delta;
pub mod enumeration;
pub mod error;
pub mod genus;
pub mod lattice;
pub mod lll;
pub mod measures;
pub mod theta;

pub use bounded::BoundedReal;
pub use error::{Error, Result};
pub use lattice::{GramMatrix, Lattice, LatticeVector, Rational};
