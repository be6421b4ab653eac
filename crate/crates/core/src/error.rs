use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("space kind mismatch: {0}")]
    KindMismatch(&'static str),

    /// A parameter fell outside the admissible region of a formula.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("planes do not intersect (|<n1,n2>| = {inner})")]
    NonIntersecting { inner: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("point sets are not congruent (max residual {residual:.3e})")]
    Congruence { residual: f64 },

    #[error("point configuration does not span the ambient space")]
    Rank,

    #[error("point outside chart domain: {0}")]
    ChartDomain(String),

    #[error("surface is not closed: {0}")]
    OpenSurface(String),

    #[error("orientation conflict: {0}")]
    Orientation(String),

    #[error("unknown vertex label `{0}`")]
    UnknownLabel(String),

    #[error("unknown report column `{0}`")]
    UnknownColumn(String),

    /// A patch does not fit onto its host with the requested clearance.
    #[error("margin violation: {0}")]
    Margin(String),

    #[error("infeasible family: {0}")]
    Infeasible(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
