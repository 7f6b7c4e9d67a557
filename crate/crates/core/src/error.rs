use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("invalid incident field: {0}")]
    InvalidIncident(String),

    #[error("ambiguous interface point ({x}, {y})")]
    OnInterface { x: f64, y: f64 },

    #[error("unknown interface id {0}")]
    UnknownInterface(usize),

    #[error("sector radius h = {h} exceeds the admissible limit {limit} at vertex {vertex}")]
    SectorTooLarge { vertex: usize, h: f64, limit: f64 },

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("point lies on the branch cut or at the origin: ({x}, {y})")]
    BranchCut { x: f64, y: f64 },

    #[error("evaluation at the point source location")]
    AtSource,

    #[error("quadrature did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("singular mode system at angular order {0}")]
    SingularMode(i64),

    #[error("far-field grids do not match")]
    GridMismatch,

    #[error("denominator too small in extraction: |{0:e}|")]
    DegenerateDenominator(f64),

    #[error("field value at the apex below threshold: |u(0)| = {value:e}")]
    VanishingApexValue { value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
