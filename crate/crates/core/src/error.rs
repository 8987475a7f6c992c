use thiserror::Error;

/// Errors raised by the approximation, eigen and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite sample point")]
    NonFinitePoint,

    #[error("non-finite sample value at index {0}")]
    NonFiniteValue(usize),

    #[error("basis singularity: argument {0} is a multiple of pi")]
    BasisSingularity(String),

    #[error("invalid sample set: {0}")]
    InvalidSamples(String),

    #[error("duplicate sample points after projection onto the period strip: {}", format_pairs(.0))]
    DuplicatePoints(Vec<(usize, usize)>),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("degenerate far field: vanishing denominator")]
    DegenerateFarField,

    #[error("coincident support points at indices {0} and {1}")]
    CoincidentSupport(usize, usize),

    #[error("non-finite matrix entry")]
    NonFiniteMatrix,

    #[error("not arrowhead: {0}")]
    NotArrowhead(String),

    #[error("singular pencil: determinant vanishes identically")]
    SingularPencil,

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("order exceeds half the sample count (m = {m}, M = {samples})")]
    OrderTooLarge { m: usize, samples: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("near-pi support point, tighten threshold (z = {0})")]
    NearPiSupport(String),

    #[error("non-simple pole at {0}")]
    NonSimplePole(String),

    #[error("insufficient cluster: {0} points within unit distance of the corner, need 4")]
    InsufficientCluster(usize),

    #[error("unsupported order: derivative order {0} (supported 1..=4)")]
    UnsupportedOrder(usize),

    #[error("point {0} is too close to a support point, use the differentiation matrix")]
    TooCloseToSupport(String),

    #[error("FFT baseline requires uniform grid: {0}")]
    NonUniformGrid(String),

    #[error("pole placed inside the flow domain at {0}")]
    PoleInsideDomain(String),

    #[error("rank-deficient least-squares system (condition estimate {0:.3e})")]
    RankDeficient(f64),

    #[error("unknown strategy '{0}'")]
    UnknownStrategy(String),
}

fn format_pairs(pairs: &[(usize, usize)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("rows {a} and {b}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
