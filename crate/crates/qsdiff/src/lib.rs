//! Exact computations with q-skew iterative σ-differential structures: twisted
//! power series, universal Hopf morphisms, the Hopf algebra `ℌ_q`, formal
//! quantum group laws and infinitesimal deformations.
//!
//! Modules, bottom up:
//! - [`qscalar`]: rationals, polynomials, the fraction field and q-combinatorics
//! - [`funcfield`]: the three example function fields and their operators
//! - [`seqring`]: sequences `F(ℕ, R)` with the shift `Σ`
//! - [`twisted`]: truncated twisted power series and universal morphisms
//! - [`nilalg`]: nilpotent test algebras and truncated `W`-series
//! - [`qgroups`]: `ℌ_q` and the formal (quantum) group laws
//! - [`deform`]: construction, verification and classification of deformations

pub mod algebra;
pub mod deform;
pub mod funcfield;
pub mod linsolve;
pub mod nilalg;
pub mod qgroups;
pub mod qscalar;
pub mod report;
pub mod seqring;
pub mod suites;
pub mod twisted;

pub use algebra::Ring;
pub use qscalar::{Frac, Rat, Scalar, Var};
pub use report::{Check, Status};
