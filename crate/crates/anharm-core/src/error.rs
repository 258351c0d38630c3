use thiserror::Error;

/// Errors across parsing, validation and the numerical pipeline.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("syntax error at offset {offset}: {message}")]
    PolynomialSyntax { offset: usize, message: String },

    #[error("invalid exponent at offset {offset}: exponents must be nonnegative integers")]
    BadExponent { offset: usize },

    #[error("cannot parse number: {0}")]
    NumberSyntax(String),

    #[error("leading power of the potential must be even (degree {degree})")]
    OddLeadingDegree { degree: i64 },

    #[error("leading potential coefficient must be positive")]
    NonpositiveLeadingCoefficient,

    #[error("potential must be a nonconstant polynomial")]
    EmptyPotential,

    #[error("mass must be positive")]
    NonpositiveMass,

    #[error("hbar must be positive")]
    NonpositiveHbar,

    #[error("K({x}) is numerically zero; phi has a pole near a wave-function node")]
    NearNode { x: String },

    #[error("bracket endpoints do not straddle a sign change")]
    NonStraddlingBracket,

    #[error("root tolerance {tol} is below the precision floor 1e-({digits}-10)")]
    TolBelowPrecisionFloor { tol: String, digits: u32 },

    #[error("energy scan exhausted at E = {ceiling} without locating level {level}; raise x_max or order")]
    ScanExhausted { ceiling: String, level: usize },

    #[error("series order cap {cap} exceeded while growing the expansion")]
    OrderCapExceeded { cap: usize },

    #[error(
        "insufficient order/precision at x_max: cancellation loses {lost:.1} of {digits} digits, \
         fewer than 3 significant digits remain in K(x_max)"
    )]
    InsufficientOrder { lost: f64, digits: u32 },

    #[error("node count mismatch for level {level}: expected {expected}, found {found}")]
    NodeCountMismatch {
        level: usize,
        expected: usize,
        found: usize,
    },

    #[error("boundary elimination is degenerate at working precision (both basis solutions vanish at x_min)")]
    SingularBoundarySystem,

    #[error("asymmetric solve did not converge: {0}")]
    AsymmetricNoConvergence(String),

    #[error("bifurcation fit rejected: {0}")]
    BadFit(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
