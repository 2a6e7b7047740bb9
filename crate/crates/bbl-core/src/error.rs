use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} must be finite and nonnegative, got {value}")]
    BadScalar { what: &'static str, value: f64 },
    #[error("{what} must be strictly positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("lambda must lie strictly inside (0,1), got {0}")]
    LambdaOutOfRange(f64),
    #[error("mean order pair p={p}, q={q} needs p+q > 0 or p = q = 0")]
    BadOrderPair { p: f64, q: f64 },
    #[error("dimension must be an integer >= 2, got {0}")]
    BadDimension(u32),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("points are degenerate: hull collapses below 3 vertices")]
    DegenerateHull,
    #[error("direction vector has near-zero length")]
    ZeroDirection,
    #[error("angle_count must be at least 8, got {0}")]
    TooFewAngles(usize),
    #[error("piece list must be nonempty")]
    EmptyPieces,
    #[error("g must be positive at the domain centroid (got {0})")]
    NotPositiveAtCentroid(f64),
    #[error("exponent mismatch between operands: {0} vs {1}")]
    ExponentMismatch(f64, f64),
    #[error("linear program is infeasible")]
    LpInfeasible,
    #[error("linear program is unbounded")]
    LpUnbounded,
    #[error("simplex iteration limit reached")]
    LpStalled,
    #[error("quadrature budget exhausted before tolerance was met ({reached} of {wanted} allowed)")]
    QuadratureBudget { reached: usize, wanted: usize },
    #[error("mesh size h={h} too coarse for this body (need h < {max_h})")]
    MeshTooCoarse { h: f64, max_h: f64 },
    #[error("conjugate gradient failed to reach tolerance within {0} iterations")]
    CgDiverged(usize),
    #[error("{0}")]
    Invariant(String),
    #[error("could not parse field dump: {0}")]
    DumpFormat(String),
    #[error("random polygon generation kept collapsing after {0} retries")]
    DegenerateDraw(usize),
}
