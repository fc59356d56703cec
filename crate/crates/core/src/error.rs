use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (asymmetry {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix has a negative eigenvalue {value:.3e}")]
    NegativeEigenvalue { value: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {value:.3e})")]
    NotPsd { value: f64 },

    #[error("basis columns are not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("coefficient matrix is not a conjugation (residual {residual:.3e})")]
    InvalidConjugation { residual: f64 },

    #[error("operator is not a contraction (norm {norm:.17e})")]
    NotContraction { norm: f64 },

    #[error("operator is not C-symmetric (residual {residual:.3e})")]
    NotCSymmetric { residual: f64 },

    #[error("operator is not C-self-adjoint (residual {residual:.3e})")]
    NotCSelfAdjoint { residual: f64 },

    #[error("operator does not extend V (residual {residual:.3e})")]
    NotExtension { residual: f64 },

    #[error("generator equations for X0 are inconsistent (residual {residual:.3e})")]
    InconsistentGenerators { residual: f64 },

    #[error("range or support constraint violated (residual {residual:.3e})")]
    SupportViolation { residual: f64 },

    #[error("parameter reconstruction failed (residual {residual:.3e})")]
    ReconstructionResidual { residual: f64 },

    #[error("invalid parameter: {reason} (residual {residual:.3e})")]
    InvalidParam { reason: String, residual: f64 },

    #[error("operator is not dissipative (margin {margin:.3e})")]
    NotDissipative { margin: f64 },

    #[error("lambda must lie in the open upper half-plane (Im = {im})")]
    LambdaNotUpperHalfPlane { im: f64 },

    #[error("1 is numerically in the spectrum (distance {distance:.3e}); the inverse Cayley transform is a relation")]
    OneInSpectrum { distance: f64 },

    #[error("operator is not maximal: domain has dimension {domain_dim} < {ambient_dim}")]
    NotMaximal { domain_dim: usize, ambient_dim: usize },

    #[error("bad dimensions: {0}")]
    BadDims(String),

    #[error("grid enumeration requires an ambient dimension of 2, found {0}")]
    DimNot2(usize),
}

impl Error {
    /// Residual or magnitude carried by the error, if any.
    pub fn residual(&self) -> Option<f64> {
        match *self {
            Error::NotHermitian { residual }
            | Error::NotOrthonormal { residual }
            | Error::InvalidConjugation { residual }
            | Error::NotCSymmetric { residual }
            | Error::NotCSelfAdjoint { residual }
            | Error::NotExtension { residual }
            | Error::InconsistentGenerators { residual }
            | Error::SupportViolation { residual }
            | Error::ReconstructionResidual { residual }
            | Error::InvalidParam { residual, .. } => Some(residual),
            Error::NegativeEigenvalue { value } | Error::NotPsd { value } => Some(value),
            Error::NotContraction { norm } => Some(norm),
            Error::NotDissipative { margin } => Some(margin),
            Error::OneInSpectrum { distance } => Some(distance),
            Error::LambdaNotUpperHalfPlane { im } => Some(im),
            _ => None,
        }
    }

    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFinite => "NonFinite",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NegativeEigenvalue { .. } => "NegativeEigenvalue",
            Error::NotPsd { .. } => "NotPSD",
            Error::NotOrthonormal { .. } => "NotOrthonormal",
            Error::InvalidConjugation { .. } => "InvalidConjugation",
            Error::NotContraction { .. } => "NotContraction",
            Error::NotCSymmetric { .. } => "NotCSymmetric",
            Error::NotCSelfAdjoint { .. } => "NotCSelfAdjoint",
            Error::NotExtension { .. } => "NotExtension",
            Error::InconsistentGenerators { .. } => "InconsistentGenerators",
            Error::SupportViolation { .. } => "SupportViolation",
            Error::ReconstructionResidual { .. } => "ReconstructionResidual",
            Error::InvalidParam { .. } => "InvalidParam",
            Error::NotDissipative { .. } => "NotDissipative",
            Error::LambdaNotUpperHalfPlane { .. } => "LambdaNotUpperHalfPlane",
            Error::OneInSpectrum { .. } => "OneInSpectrum",
            Error::NotMaximal { .. } => "NotMaximal",
            Error::BadDims(_) => "BadDims",
            Error::DimNot2(_) => "DimNot2",
        }
    }

    /// Numerical failures (as opposed to invalid input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::OneInSpectrum { .. }
                | Error::InconsistentGenerators { .. }
                | Error::ReconstructionResidual { .. }
                | Error::NonFinite
        )
    }
}

pub(crate) fn shape_mismatch(expected: (usize, usize), found: (usize, usize)) -> Error {
    Error::DimensionMismatch {
        expected: format!("{}x{}", expected.0, expected.1),
        found: format!("{}x{}", found.0, found.1),
    }
}
