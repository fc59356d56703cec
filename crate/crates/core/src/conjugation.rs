//! Antilinear conjugations `C x = S conj(x)` and the C-twisted adjoint.
//!
//! A conjugation is stored only through its coefficient matrix `S`; `C` is an
//! involutive isometry exactly when `S` is unitary and symmetric. For a linear
//! `A` the operator `C A C` has matrix `S conj(A) conj(S)` and `C A^* C` has
//! matrix `S A^T conj(S)`.

use serde::Serialize;

use crate::error::{shape_mismatch, Error, Result};
use crate::linalg::{c, conj, ensure_finite, ensure_square, fro, identity, CMatrix, CVector, Subspace, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct Conjugation {
    s: CMatrix,
}

/// The unitary `U = C J` together with the residuals that certify it.
#[derive(Debug, Clone, Serialize)]
pub struct Composition {
    #[serde(skip)]
    pub unitary: CMatrix,
    pub unitary_residual: f64,
    pub c_self_adjoint_residual: f64,
}

impl Conjugation {
    pub fn new(s: CMatrix, tol: Tolerance) -> Result<Self> {
        let n = ensure_square(&s)?;
        ensure_finite(&s)?;
        let unitary = fro(&(&s * s.adjoint() - identity(n)));
        let symmetric = fro(&(&s - s.transpose()));
        let residual = unitary.max(symmetric);
        if residual > tol.residual_tol {
            return Err(Error::InvalidConjugation { residual });
        }
        Ok(Conjugation { s })
    }

    /// Entrywise complex conjugation on `C^n`.
    pub fn standard(n: usize) -> Self {
        Conjugation { s: identity(n) }
    }

    pub(crate) fn from_symmetric_unitary(s: CMatrix) -> Self {
        Conjugation { s }
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn coefficient(&self) -> &CMatrix {
        &self.s
    }

    fn check_dim(&self, rows: usize) -> Result<()> {
        if rows != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("dimension {}", self.dim()),
                found: format!("dimension {rows}"),
            });
        }
        Ok(())
    }

    /// `C x = S conj(x)`.
    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        self.check_dim(x.len())?;
        Ok(&self.s * x.map(|z| z.conj()))
    }

    /// Applies `C` to every column of `x`.
    pub fn apply_columns(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_dim(x.nrows())?;
        Ok(&self.s * conj(x))
    }

    pub(crate) fn on_columns(&self, x: &CMatrix) -> CMatrix {
        &self.s * conj(x)
    }

    /// Matrix of `C A^* C`, i.e. `S A^T conj(S)`.
    pub fn c_star(&self, a: &CMatrix) -> Result<CMatrix> {
        let n = ensure_square(a)?;
        if n != self.dim() {
            return Err(shape_mismatch((self.dim(), self.dim()), a.shape()));
        }
        Ok(self.c_star_unchecked(a))
    }

    pub(crate) fn c_star_unchecked(&self, a: &CMatrix) -> CMatrix {
        &self.s * a.transpose() * conj(&self.s)
    }

    /// Matrix of `C A C`, i.e. `S conj(A) conj(S)`.
    pub fn sandwich(&self, a: &CMatrix) -> Result<CMatrix> {
        let n = ensure_square(a)?;
        if n != self.dim() {
            return Err(shape_mismatch((self.dim(), self.dim()), a.shape()));
        }
        Ok(self.sandwich_unchecked(a))
    }

    pub(crate) fn sandwich_unchecked(&self, a: &CMatrix) -> CMatrix {
        &self.s * conj(a) * conj(&self.s)
    }

    /// `(A + C A^* C) / 2`, the nearest-in-form C-self-adjoint operator whose
    /// norm does not exceed `||A||`.
    pub fn symmetrize(&self, a: &CMatrix) -> Result<CMatrix> {
        let twisted = self.c_star(a)?;
        Ok((a + twisted) * c(0.5, 0.0))
    }

    /// `||A - C A^* C||_F`.
    pub fn c_self_adjoint_residual(&self, a: &CMatrix) -> Result<f64> {
        Ok(fro(&(a - self.c_star(a)?)))
    }

    /// The linear unitary `U = C J` (matrix `S_C conj(S_J)`), which is
    /// C-self-adjoint.
    pub fn compose_with_conjugation(&self, other: &Conjugation) -> Result<Composition> {
        self.check_dim(other.dim())?;
        let unitary = &self.s * conj(&other.s);
        let n = self.dim();
        let unitary_residual = fro(&(&unitary * unitary.adjoint() - identity(n)));
        let c_self_adjoint_residual = fro(&(&unitary - self.c_star_unchecked(&unitary)));
        Ok(Composition {
            unitary,
            unitary_residual,
            c_self_adjoint_residual,
        })
    }

    /// `C U` for a subspace `U`; its projector equals `C P_U C`.
    pub fn conj_image(&self, u: &Subspace) -> Result<Subspace> {
        self.check_dim(u.ambient_dim())?;
        Ok(Subspace::from_orthonormal(self.on_columns(u.basis())))
    }
}
