//! Decide whether the selfadjoint semigroup `S(T, T*)` generated by a
//! square complex matrix `T` is a selfadjoint-ideal (SI) semigroup and
//! whether it is simple.
//!
//! The [`classifier`] applies structural characterizations and emits
//! certificates that [`classifier::validate_certificate`] re-checks from
//! scratch. The [`oracle`] independently searches for solutions of
//! `W* = X W Y` over a bounded enumeration of the semigroup
//! ([`words::enumerate`]) and serves as ground truth at desk scale.
//!
//! Only finite matrices are handled. Statements about operators on
//! infinite-dimensional spaces, such as finite-rank operators on a Hilbert
//! space, are out of scope.

pub mod builders;
pub mod classifier;
pub mod cli;
pub mod matrix;
pub mod oracle;
pub mod predicates;
pub mod words;

pub use classifier::{classify_si, classify_simple, validate_certificate, Certificate, Decision, Verdict};
pub use matrix::{CMatrix, MatrixError, SValues, Tolerance};
pub use oracle::{OracleBounds, OracleReport};
pub use words::{enumerate, EnumerationCaps, SemigroupTable, Word};
