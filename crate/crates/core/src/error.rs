use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which axiom an algebra failed at load time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationFailure {
    /// Degree-0 component is not one-dimensional.
    Degree0NotOneDimensional(usize),
    /// A stored product has a component outside degree `deg(a) + deg(b)`.
    ProductDegree { left: String, right: String },
    Unit { element: String },
    GradedCommutativity { left: String, right: String },
    Associativity { a: String, b: String, c: String },
    /// The orientation element is missing or not of top degree.
    Orientation(String),
    /// Pairing `H^p x H^{2n-p}` is non-square or singular.
    Poincare { degree: usize },
    /// A map that should be multiplicative is not.
    NotMultiplicative { left: String, right: String },
}

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use ValidationFailure::*;
        match self {
            Degree0NotOneDimensional(d) => write!(f, "degree-0 component has dimension {d}"),
            ProductDegree { left, right } => {
                write!(f, "product {left}*{right} has a component in the wrong degree")
            }
            Unit { element } => write!(f, "unit law fails on {element}"),
            GradedCommutativity { left, right } => {
                write!(f, "graded commutativity fails on ({left}, {right})")
            }
            Associativity { a, b, c } => write!(f, "associativity fails on ({a}, {b}, {c})"),
            Orientation(msg) => write!(f, "orientation: {msg}"),
            Poincare { degree } => write!(f, "Poincare pairing degenerate at degree {degree}"),
            NotMultiplicative { left, right } => {
                write!(f, "map is not multiplicative on ({left}, {right})")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("classes belong to different algebras")]
    MismatchedAlgebra,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pairing is singular at degree {0}")]
    SingularPairing(usize),
    #[error("algebra validation failed: {0}")]
    Validation(ValidationFailure),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("arity mismatch: table has arity {expected}, got {got} arguments")]
    ArityMismatch { expected: usize, got: usize },
    #[error("Chern class c{index} has degree {got}, expected {expected}")]
    ChernDegree { index: usize, expected: usize, got: usize },
    #[error("degree overflow: result degree {degree} exceeds {top}")]
    DegreeOverflow { degree: usize, top: usize },
    #[error("sign convention self-test failed: {0}")]
    SignConvention(String),
    #[error("unknown basis element {0:?}")]
    UnknownBasis(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the algebraic axioms, as opposed to malformed input.
    pub fn is_algebraic(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::SingularPairing(_)
                | Error::ChernDegree { .. }
                | Error::DegreeOverflow { .. }
                | Error::Degree(_)
        )
    }
}
