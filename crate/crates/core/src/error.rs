use thiserror::Error;

/// Errors raised by the stability engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fractional order {0} is outside (0, 1]")]
    InvalidOrder(f64),

    #[error("orders {q1} and {q2} are commensurate; the incommensurate formula is undefined")]
    CommensurateOrders { q1: f64, q2: f64 },

    #[error("no sign change found for a11 = {a11} within |omega| <= {limit}")]
    BracketFailure { a11: f64, limit: f64 },

    #[error("determinant must be strictly positive, got {0}")]
    DeltaNotPositive(f64),

    #[error("det(A) = 0 and no order-independent rule applies")]
    DeltaZeroUnclassified,

    #[error("argument outside the admissible domain: {0}")]
    DomainError(String),

    #[error("|Delta| = {magnitude:e} on the contour at s = {re} + {im}i; input lies on or near the critical curve")]
    ContourThroughRoot { re: f64, im: f64, magnitude: f64 },

    #[error("contour refinement exceeded {0} doublings")]
    RefinementLimit(u32),

    #[error("order {0} is not a rational k/n with n <= 64")]
    NotRational(f64),

    #[error("companion dimension {0} exceeds 128")]
    DimensionCap(usize),

    #[error("eigenvalue iteration did not converge for a {0}x{0} matrix")]
    NoConvergence(usize),

    #[error("grid of {0} steps exceeds the 200000-step cap")]
    StepCap(usize),

    #[error(
        "trajectory does not decay (final norm {final_norm:e} >= initial norm {initial_norm:e})"
    )]
    NotDecaying { initial_norm: f64, final_norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
