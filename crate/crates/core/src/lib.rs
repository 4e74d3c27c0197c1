//! Membership in local correlation polytopes with binary outcomes.
//!
//! Frank–Wolfe solvers produce explicit local models (convex decompositions
//! over deterministic strategies) or separating Bell functionals; the
//! [`certify`] module turns either into an exactly checkable bound on the
//! nonlocality threshold of a quantum state.

pub mod certify;
pub mod error;
pub mod fw;
pub mod lmo;
pub mod polyhedra;
pub mod rational;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{CorrelationTensor, DeterministicStrategy, RationalTensor, Scenario, SignVector};
