use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("form degree {degree} invalid here: {reason}")]
    Degree { degree: usize, reason: String },

    #[error("invalid profile parameters: {0}")]
    InvalidProfile(String),

    #[error("frequency {freq} is not resolved by {n} points")]
    Unresolved { freq: i64, n: usize },

    #[error("pullback aliasing: residual {residual:.3e} above the resolved band")]
    Aliasing { residual: f64 },

    #[error("form is not contact: {0}")]
    NotContact(String),

    #[error("form outside the supported family: {0}")]
    UnsupportedForm(String),

    #[error("section is outside the bundle range (residual {residual:.3e})")]
    OutOfRange { residual: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator is not equivariant (relative defect {defect:.3e})")]
    NotEquivariant { defect: f64 },

    #[error("dense truncation of dimension {dim} exceeds the cap {cap}")]
    MemoryGuard { dim: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
