//! Exact and high-precision arithmetic for singular moduli.
//!
//! The crate verifies, numerically and at configurable precision, a family of
//! identities around CM values of modular functions:
//!
//! - the Gross-Zagier prime factorization of the norm of `Psi(alpha_Q, d)`,
//! - the expression of `log |Psi(alpha_Q, d)|` as a finite sum of coefficients
//!   `kappa(n)` of the derivative of an incoherent weight-one Eisenstein series,
//! - Petersson norms of dihedral weight-one cusp forms via CM values of the
//!   Dedekind eta function, cross-checked by direct quadrature,
//! - the explicit Weil representation on the discriminant groups that underlie
//!   the scalar reduction of the identity.
//!
//! Exact objects (class groups, theta expansions, kappa log-combinations) are
//! kept exact; numerics go through [`qseries::PrecisionContext`].

pub mod arith;
pub mod cmidentity;
pub mod cyclotomic;
pub mod eiskappa;
pub mod grosszagier;
pub mod petersson;
pub mod qforms;
pub mod qseries;
pub mod weilrep;

pub use arith::Discriminant;
pub use qseries::PrecisionContext;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a negative fundamental discriminant")]
    NotFundamental(i64),
    #[error("discriminant must be odd, got {0}")]
    EvenDiscriminant(i64),
    #[error("discriminants {0} and {1} are not coprime")]
    NotCoprime(i64, i64),
    #[error("mismatched discriminants: {0} vs {1}")]
    MismatchedDiscriminants(i64, i64),
    #[error("form [{0},{1},{2}] is not positive definite")]
    NotPositiveDefinite(i64, i64, i64),
    #[error("argument must lie in the upper half-plane")]
    NotInUpperHalfPlane,
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("evaluation point coincides with a CM point of the divisor (pole/zero)")]
    PoleAtCmPoint,
    #[error("integer recognition failed: residual {residual} above tolerance {tolerance}")]
    RecognitionFailure { residual: String, tolerance: String },
    #[error("coefficient table window violated at index {0}")]
    WindowViolation(i64),
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("prime {0} in Diff set is split; the coefficient formula does not apply")]
    SplitDiffPrime(u64),
    #[error("epsilon character ill-defined at prime {0}: the two Kronecker symbols disagree")]
    EpsilonAmbiguous(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
