use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// `e^(-z^2)` in the reflection branch of `w(z)` is not representable.
    #[error("overflow in w(z): e^(-z^2) has magnitude e^{exponent:.3}")]
    Overflow { exponent: f64 },

    #[error("pole {n}: Newton refinement did not converge after {iterations} iterations")]
    SeedFailure { n: i64, iterations: usize },

    #[error("argument principle counts {found} zeros of g but {expected} poles were found")]
    Completeness { expected: usize, found: i64 },

    #[error("degenerate pole at k = {k}: {reason}")]
    DegeneratePole { k: Complex64, reason: &'static str },

    #[error("resonant eigenfunction at k = {0} cannot be normalized")]
    Normalization(Complex64),

    #[error("ill-conditioned pole term n = {n}: |denominator| = {denominator:e}")]
    IllConditioned { n: i64, denominator: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error bound {error:e}")]
    Integration { estimate: Complex64, error: f64 },

    #[error("density maximum is on the grid boundary (index {index} of {len})")]
    NoInteriorPeak { index: usize, len: usize },

    #[error("|psi| = {0:e} is too small to define a local frequency")]
    UndefinedFrequency(f64),

    #[error("simulation box too small: boundary contamination {estimate:e} exceeds {limit:e}")]
    BoxTooSmall { estimate: f64, limit: f64 },

    #[error("M(x = {x}, q = {q}, t = {t}): {source}")]
    MFunction {
        x: f64,
        q: Complex64,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
