//! Exact evaluation of combinatorial sequence-space norms.
//!
//! Everything is computed in exact rational arithmetic. Supremum-defined norms
//! return the configuration attaining them, and each witness type can be
//! re-evaluated independently of the search that produced it.

pub mod classical;
pub mod error;
pub mod implicit;
pub mod operators;
pub mod partition;
pub mod rational;
pub mod spaces;
pub mod roots;
pub mod spreading;
pub mod tree;
pub mod vector;

pub use error::{Error, Result};
pub use rational::Rational;
pub use roots::Enclosure;
pub use vector::{FiniteSet, SeqVector, SparseVector};
