use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("closest-point projection is not unique at ({x}, {y})")]
    NonUniqueProjection { x: f64, y: f64 },

    #[error("interface clearance {clearance} to the domain boundary is below 2*h = {required}")]
    ClearanceTooSmall { clearance: f64, required: f64 },

    #[error("interface is not star-shaped about its center")]
    NotStarShaped,

    #[error("element {element} has a non-positive Jacobian (det = {det:e})")]
    JacobianFlip { element: usize, det: f64 },

    #[error("boundary node {node} received a non-zero displacement")]
    BoundaryDisplacement { node: usize },

    #[error("singular saddle system: {0}")]
    SingularSystem(String),

    #[error("reference run does not match: {0}")]
    ReferenceMismatch(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh file line {line}: {msg}")]
    MeshFormat { line: usize, msg: String },

    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
