//! Nonnegativity certificates for signomials over convex sets.
//!
//! A signomial `f(x) = Σ_j c_j exp(A_j · x)` is certified nonnegative on a
//! convex set `X` by writing `(Σ_j exp(A_j · x))^p · f` as a sum of AGE
//! signomials, each of which has at most one negative coefficient and is
//! shown nonnegative on `X` through a relative-entropy inequality involving
//! the support function of `X`. Increasing `p` enlarges the certifiable set
//! and yields a nondecreasing sequence of lower bounds on `inf_X f`.
//!
//! The guide in `book/` walks through the constructions; its code samples
//! are compiled as doctests of this crate.

pub mod conic;
pub mod convexset;
pub mod relax;
pub mod sage;
pub mod signomial;

pub use conic::{
    backend_by_name, AffineExpr, ClarabelBackend, ConicError, ConicProgram, SolveOptions,
    SolveResult, SolveStatus, SolverBackend, Var,
};
pub use convexset::{ConvexSet, SetError};
pub use relax::{
    grid_oracle, hierarchy_scan, sage_bound, BoundResult, BoundStatus, HierarchyScan,
    MonotonicityViolation, OracleError,
};
pub use sage::{
    age_membership, presolve_negative_indices, sage_membership, verify_certificate, AgeWitness,
    CertificateBlock, CheckResult, Membership, SageCertificate, SageError, SageOptions,
    VerificationReport, VerifyOptions,
};
pub use signomial::{ExponentLattice, ModulationMap, Signomial, SignomialError};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/signomials.md")]
    mod signomials {}
    #[doc = include_str!("../../../book/src/convex-sets.md")]
    mod convex_sets {}
    #[doc = include_str!("../../../book/src/conic.md")]
    mod conic {}
    #[doc = include_str!("../../../book/src/membership.md")]
    mod membership {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
