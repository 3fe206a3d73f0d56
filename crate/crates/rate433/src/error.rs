//! Crate-wide error type with stable machine-readable codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rational `{0}`: expected an integer `p` or a fraction `p/q`")]
    InvalidRational(String),

    #[error("invalid variable token `{0}`")]
    InvalidVariable(String),

    #[error("invalid information expression `{expr}`: {reason}")]
    InvalidExpression { expr: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("facet not provable from the reduced constraint system")]
    FacetNotProvable,

    #[error("certificate failed verification: {0}")]
    CertificateInvalid(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable kebab-case code used in the CLI's single-line error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidRational(_) => "invalid-rational",
            Error::InvalidVariable(_) => "invalid-variable",
            Error::InvalidExpression { .. } => "invalid-expression",
            Error::Domain(_) => "domain-error",
            Error::MalformedLp(_) => "malformed-lp",
            Error::FacetNotProvable => "facet-not-provable",
            Error::CertificateInvalid(_) => "certificate-invalid",
            Error::Decode(_) => "decode-error",
            Error::Io(_) => "io-error",
            Error::Json(_) => "json-error",
        }
    }
}
