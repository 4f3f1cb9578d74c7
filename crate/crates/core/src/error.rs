use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("point outside the light cone: t={t}, r={r}")]
    Domain { t: f64, r: f64 },
    #[error("capability: {0}")]
    Capability(String),
    #[error("construction violates {tag}: {detail}")]
    Construction { tag: String, detail: String },
    #[error("quadrature resolution: {0}")]
    Resolution(String),
    #[error("seam mismatch in {field}: {detail}")]
    Assembly { field: String, detail: String },
    #[error("lift: {0}")]
    Lift(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("load {file}: {detail}")]
    Load { file: String, detail: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ForgeError>;
