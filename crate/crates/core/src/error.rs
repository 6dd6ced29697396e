use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("singular evaluation at z = {z}")]
    SingularEvaluation { z: Complex64 },
    #[error("pole at z = 1")]
    PoleAtOne,
    #[error("pole at w = -1")]
    PoleAtMinusOne,
    #[error("point {z} is not in the unit disk")]
    NotInDisk { z: Complex64 },
    #[error("generator grid unreliable: {skipped} of {total} samples singular")]
    GridUnreliable { skipped: usize, total: usize },
    #[error("step size underflow at t = {t} (z = {z})")]
    StiffFailure { t: f64, z: Complex64 },
    #[error("quadrature failed to converge between {from} and {to}")]
    QuadratureFailure { from: Complex64, to: Complex64 },
    #[error("Newton inversion failed near {last} (target w = {target})")]
    InversionFailure { last: Complex64, target: Complex64 },
    #[error("exponent estimate alpha = {alpha} outside [0, 2]")]
    NotInClass { alpha: f64 },
    #[error("h(D) not contained in the model half-plane; witness {witness}")]
    NotContained { witness: Complex64 },
    #[error("strip or half-plane of the model group is not contained in h(D) near {witness}")]
    StripNotContained { witness: Complex64 },
    #[error("corner opening undetermined (fit R^2 = {r2})")]
    CornerUndetermined { r2: f64 },
    #[error("limit estimate did not converge: {what}")]
    Undetermined { what: String },
    #[error("unknown catalog id `{0}`")]
    UnknownCatalogId(String),
    #[error("{0}")]
    Config(String),
}

impl Error {
    /// Parse and configuration problems map to exit code 2, numeric failures to 3.
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self,
            Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::UnknownCatalogId(_) | Error::Config(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax-error",
            Error::UnknownIdentifier { .. } => "unknown-identifier",
            Error::SingularEvaluation { .. } => "singular-evaluation",
            Error::PoleAtOne => "pole-at-one",
            Error::PoleAtMinusOne => "pole-at-minus-one",
            Error::NotInDisk { .. } => "not-in-disk",
            Error::GridUnreliable { .. } => "grid-unreliable",
            Error::StiffFailure { .. } => "stiff-failure",
            Error::QuadratureFailure { .. } => "quadrature-failure",
            Error::InversionFailure { .. } => "inversion-failure",
            Error::NotInClass { .. } => "not-in-class",
            Error::NotContained { .. } => "not-contained",
            Error::StripNotContained { .. } => "strip-not-contained",
            Error::CornerUndetermined { .. } => "corner-undetermined",
            Error::Undetermined { .. } => "undetermined",
            Error::UnknownCatalogId(_) => "unknown-id",
            Error::Config(_) => "config-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
