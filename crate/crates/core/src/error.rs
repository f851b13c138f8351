use thiserror::Error;

/// Errors surfaced by geometry construction, assembly, solves and sweeps.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid warping samples: {0}")]
    InvalidWarping(String),

    #[error("warping function is non-positive at coordinate {coord}: h = {value}")]
    NonPositiveWarping { coord: f64, value: f64 },

    #[error("h^s underflows for s = {s}: min sample {min_h} too close to zero")]
    UnderflowRisk { min_h: f64, s: i32 },

    #[error("invalid exponent p = {p}: require p >= 1")]
    InvalidExponent { p: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error(
        "indefinite interior block at (lambda = {lambda}, mu = {mu}, mesh_n = {mesh_n}): \
         nonpositive pivot {pivot} at index {index}"
    )]
    IndefiniteInterior {
        lambda: f64,
        mu: f64,
        mesh_n: usize,
        pivot: f64,
        index: usize,
    },

    #[error("boundary form is singular")]
    SingularBoundaryForm,

    #[error("trial function has (numerically) zero boundary trace")]
    ZeroBoundaryTrace,

    #[error("uncertified spectrum access at k = {k} (certified through {certified_k})")]
    Uncertified { k: usize, certified_k: usize },

    #[error(
        "failed to certify the first {requested} eigenvalues within the mode budget \
         (j <= {j_max}, l <= {l_max})"
    )]
    BudgetExceeded {
        requested: usize,
        j_max: usize,
        l_max: usize,
    },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("family construction infeasible: {0}")]
    InfeasibleFamily(String),

    #[error("deficit saturated beyond resolution: delta = {delta} <= tol = {tol}")]
    SaturatedDeficit { delta: f64, tol: f64 },

    #[error("unknown fiber kind: {0}")]
    UnknownFiber(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
