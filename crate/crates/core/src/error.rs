use thiserror::Error;

/// Errors raised by the kernel, the rod model and the solver.
///
/// Magnitudes are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (|A + Aᵀ| = {0:e})")]
    NotSkew(f64),

    #[error("not a rotation: {0}")]
    InvalidRotation(String),

    #[error("tangent vector is not of the form R·hat(ω) (residual {0:e})")]
    NotTangent(f64),

    #[error("logarithm is singular: rotation angle {angle} is within 1e-6 of π")]
    LogSingular { angle: f64 },

    #[error("mesh too coarse: poses at nodes {node} and {next} differ by a rotation near π", next = .node + 1)]
    MeshTooCoarse { node: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid rod properties at node {node}: {reason}")]
    InvalidProperties { node: usize, reason: String },

    #[error("invalid stiffness law at node {node}: {reason}")]
    InvalidStiffness { node: usize, reason: String },

    #[error("field has {got} entries but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite state at t = {t}: {what}")]
    NonFiniteState { t: f64, what: String },

    #[error("control law `{law}` returned a non-finite wrench at node {node}, t = {t}")]
    NonFiniteControl { law: String, node: usize, t: f64 },

    #[error("boundary strain is not zero at node {node} (|ξ| = {magnitude:e})")]
    BoundaryStrain { node: usize, magnitude: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
