//! Dense complex matrix primitives and subspace computations.
//!
//! Every rank decision in the crate goes through [`Tolerance::rank_tol`]:
//! a singular value `s` is treated as zero when
//! `s < rank_tol * max(s_max, scale) * max(rows, cols)`. The plain entry
//! points use `scale = 0` (purely relative cutoff); the `_scaled` variants
//! let callers that know the natural magnitude of a problem (defect operators
//! of contractions live on the unit scale) pin the cutoff to that magnitude so
//! that pure rounding noise is never promoted to a direction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{shape_mismatch, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative thresholds for rank decisions and residual verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub rank_tol: f64,
    pub residual_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_tol: 1e-10,
            residual_tol: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, residual_tol: f64) -> Result<Self> {
        if !(rank_tol > 0.0 && rank_tol.is_finite()) || !(residual_tol > 0.0 && residual_tol.is_finite())
        {
            return Err(Error::BadDims(format!(
                "tolerances must be positive and finite (rank_tol = {rank_tol}, residual_tol = {residual_tol})"
            )));
        }
        Ok(Tolerance {
            rank_tol,
            residual_tol,
        })
    }

    pub fn with_residual(self, residual_tol: f64) -> Self {
        Tolerance {
            residual_tol,
            ..self
        }
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a complex matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Standard basis vector `e_k` (zero-based) as an `n x 1` matrix.
pub fn unit_vector(n: usize, k: usize) -> CMatrix {
    let mut v = zeros(n, 1);
    v[(k, 0)] = ONE;
    v
}

pub fn ensure_finite(a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn ensure_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(shape_mismatch((a.nrows(), a.nrows()), a.shape()));
    }
    Ok(a.nrows())
}

pub(crate) fn ensure_shape(a: &CMatrix, shape: (usize, usize)) -> Result<()> {
    if a.shape() != shape {
        return Err(shape_mismatch(shape, a.shape()));
    }
    Ok(())
}

/// Entrywise complex conjugate.
pub fn conj(a: &CMatrix) -> CMatrix {
    a.map(|z| z.conj())
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c(0.5, 0.0)
}

/// Frobenius norm (cheap upper bound of the operator norm).
pub fn fro(a: &CMatrix) -> f64 {
    a.norm()
}

/// Thin SVD with singular values in descending order. Empty inputs yield
/// empty factors.
///
/// One-sided Jacobi: nalgebra's complex bidiagonal SVD loses accuracy on
/// rank-deficient inputs, which breaks rank decisions near the cutoff.
pub(crate) fn svd(a: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (r, cc) = a.shape();
    if r.min(cc) == 0 {
        return (zeros(r, 0), Vec::new(), zeros(cc, 0));
    }
    if r < cc {
        let (u, s, v) = jacobi_svd(&a.adjoint(), true);
        return (v, s, u);
    }
    jacobi_svd(a, true)
}

fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() >= a.ncols() {
        jacobi_svd(a, false).1
    } else {
        jacobi_svd(&a.adjoint(), false).1
    }
}

/// Hestenes one-sided Jacobi for `rows >= cols`.
fn jacobi_svd(a: &CMatrix, vectors: bool) -> (CMatrix, Vec<f64>, CMatrix) {
    let (m, n) = a.shape();
    let mut g = a.clone();
    let mut v = if vectors { identity(n) } else { zeros(0, 0) };
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dotc(&g.column(q));
                let mag = gamma.norm();
                if mag == 0.0 || mag <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / mag;
                let zeta = (beta - alpha) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..m {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)] * phase;
                    g[(i, p)] = gp * cs - gq * sn;
                    g[(i, q)] = gp * sn + gq * cs;
                }
                if vectors {
                    for i in 0..n {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)] * phase;
                        v[(i, p)] = vp * cs - vq * sn;
                        v[(i, q)] = vp * sn + vq * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| g.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    if !vectors {
        return (zeros(0, 0), s, zeros(0, 0));
    }
    let mut u = zeros(m, n);
    let mut filled = 0;
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            let col = g.column(j) / c(norms[j], 0.0);
            u.set_column(k, &col);
            filled = k + 1;
        }
    }
    // Complete the left factor for exactly zero singular values.
    let mut candidate = 0;
    for k in filled..n {
        loop {
            let mut e = zeros(m, 1);
            e[(candidate % m, 0)] = ONE;
            candidate += 1;
            for _ in 0..2 {
                let prev = u.columns(0, k).into_owned();
                e = &e - &prev * (prev.adjoint() * &e);
            }
            let norm = e.norm();
            if norm > 0.5 {
                u.set_column(k, &(e.column(0) / c(norm, 0.0)));
                break;
            }
        }
    }
    let v = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    (u, s, v)
}

fn rank_cutoff(sigma_max: f64, rows: usize, cols: usize, scale: f64, tol: Tolerance) -> f64 {
    tol.rank_tol * sigma_max.max(scale) * rows.max(cols) as f64
}

/// Largest singular value; zero for empty matrices.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Smallest singular value over `min(rows, cols)` values; zero for empty.
pub fn min_singular_value(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// `true` when `||a|| <= bound`, decided by a Cholesky factorization of
/// `bound^2 I - a^H a` (no SVD).
pub fn within_norm(a: &CMatrix, bound: f64) -> bool {
    let (r, cc) = a.shape();
    if r == 0 || cc == 0 {
        return bound >= 0.0;
    }
    let gram = if r < cc { a * a.adjoint() } else { a.adjoint() * a };
    let k = gram.nrows();
    let m = CMatrix::identity(k, k) * c(bound * bound, 0.0) - gram;
    positive_definite_in_place(&mut hermitian_part(&m))
}

/// Cholesky factorization with a strict positive-pivot test. Only the lower
/// triangle of `l` is read; it is overwritten by the factor.
pub(crate) fn positive_definite_in_place(l: &mut CMatrix) -> bool {
    let n = l.nrows();
    for j in 0..n {
        let mut d = l[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = c(d, 0.0);
        for i in (j + 1)..n {
            let mut acc = l[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / d;
        }
    }
    true
}

/// Eigen-decomposition of the Hermitian part of `a`: ascending eigenvalues
/// with matching eigenvector columns.
pub(crate) fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal));
    let vecs = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (order.iter().map(|&j| vals[j]).collect(), vecs)
}

/// Minimum eigenvalue of the Hermitian part; `+inf` for empty matrices.
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigen(a).0.first().copied().unwrap_or(f64::INFINITY)
}

fn check_hermitian(a: &CMatrix, tol: Tolerance) -> Result<()> {
    let asym = fro(&(a - a.adjoint())) * 0.5;
    if asym > tol.residual_tol * fro(a).max(f64::MIN_POSITIVE) && asym > 0.0 {
        return Err(Error::NotHermitian { residual: asym });
    }
    Ok(())
}

/// Positive semidefinite square root of a Hermitian matrix.
pub fn psd_sqrt(a: &CMatrix, tol: Tolerance) -> Result<CMatrix> {
    psd_sqrt_scaled(a, 0.0, tol)
}

/// [`psd_sqrt`] with eigenvalue clamping relative to `max(||a||, scale)`.
pub fn psd_sqrt_scaled(a: &CMatrix, scale: f64, tol: Tolerance) -> Result<CMatrix> {
    let n = ensure_square(a)?;
    ensure_finite(a)?;
    check_hermitian(a, tol)?;
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let (vals, vecs) = hermitian_eigen(a);
    let spread = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cut = rank_cutoff(spread, n, n, scale, tol);
    let mut roots = Vec::with_capacity(n);
    for &v in &vals {
        if v < -cut {
            return Err(Error::NegativeEigenvalue { value: v });
        }
        roots.push(if v <= cut { 0.0 } else { v.sqrt() });
    }
    let scaled = CMatrix::from_fn(n, n, |i, j| vecs[(i, j)] * roots[j]);
    Ok(hermitian_part(&(scaled * vecs.adjoint())))
}

/// Defect operator `(I - Z^H Z)^{1/2}` of a contraction, clamped on the unit
/// scale.
pub fn defect(z: &CMatrix, tol: Tolerance) -> Result<CMatrix> {
    let k = z.ncols();
    let gram = CMatrix::identity(k, k) - z.adjoint() * z;
    psd_sqrt_scaled(&gram, 1.0, tol)
}

/// Moore-Penrose pseudo-inverse.
pub fn pinv(a: &CMatrix, tol: Tolerance) -> CMatrix {
    pinv_scaled(a, 0.0, tol)
}

pub fn pinv_scaled(a: &CMatrix, scale: f64, tol: Tolerance) -> CMatrix {
    let (r, cc) = a.shape();
    let (u, s, v) = svd(a);
    let mut out = zeros(cc, r);
    let Some(&smax) = s.first() else {
        return out;
    };
    let cut = rank_cutoff(smax, r, cc, scale, tol);
    for (k, &sk) in s.iter().enumerate() {
        if sk <= cut || sk == 0.0 {
            break;
        }
        let vk = v.column(k);
        let uk = u.column(k);
        out += (vk * uk.adjoint()) * c(1.0 / sk, 0.0);
    }
    out
}

/// Makes the largest-modulus entry of every column real and positive.
fn normalize_phases(basis: &mut CMatrix) {
    for mut col in basis.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, z) in col.iter().enumerate() {
            let a = z.norm();
            if a > best_abs * (1.0 + 1e-12) {
                best = i;
                best_abs = a;
            }
        }
        if best_abs > 0.0 {
            let phase = col[best].conj() / best_abs;
            col *= phase;
        }
    }
}

/// Orthonormal basis of a subspace of `C^n`, stored as the columns of an
/// `n x k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    /// Wraps a basis after checking `basis^H basis = I`.
    pub fn new(basis: CMatrix, tol: Tolerance) -> Result<Self> {
        ensure_finite(&basis)?;
        let k = basis.ncols();
        let residual = fro(&(basis.adjoint() * &basis - CMatrix::identity(k, k)));
        if residual > tol.residual_tol {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Subspace { basis })
    }

    pub(crate) fn from_orthonormal(basis: CMatrix) -> Self {
        Subspace { basis }
    }

    pub fn zero(n: usize) -> Self {
        Subspace { basis: zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            basis: identity(n),
        }
    }

    /// Span of the given standard basis vectors (zero-based indices).
    pub fn coordinate(n: usize, indices: &[usize]) -> Self {
        let mut basis = zeros(n, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            basis[(i, j)] = ONE;
        }
        Subspace { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> CMatrix {
        self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn complement(&self) -> Subspace {
        complement(self)
    }

    /// `||(I - P) a||_F`: how far the columns of `a` stick out of the subspace.
    pub fn excess(&self, a: &CMatrix) -> f64 {
        let inside = &self.basis * (self.basis.adjoint() * a);
        fro(&(a - inside))
    }

    pub fn contains(&self, other: &Subspace, tol: Tolerance) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.excess(&other.basis) <= tol.residual_tol
    }

    /// Operator-norm distance between orthogonal projectors.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.ambient_dim() != other.ambient_dim() {
            return f64::INFINITY;
        }
        operator_norm(&(self.projector() - other.projector()))
    }
}

/// Orthonormal basis of the numerical column space of `a`.
pub fn range_basis(a: &CMatrix, tol: Tolerance) -> Subspace {
    range_basis_scaled(a, 0.0, tol)
}

pub fn range_basis_scaled(a: &CMatrix, scale: f64, tol: Tolerance) -> Subspace {
    let (r, cc) = a.shape();
    let (u, s, _) = svd(a);
    let Some(&smax) = s.first() else {
        return Subspace::zero(r);
    };
    let cut = rank_cutoff(smax, r, cc, scale, tol);
    let rank = s.iter().take_while(|&&x| x > cut && x > 0.0).count();
    let mut basis = u.columns(0, rank).into_owned();
    normalize_phases(&mut basis);
    Subspace { basis }
}

/// Orthonormal basis of the numerical kernel of `a`.
pub fn null_basis(a: &CMatrix, tol: Tolerance) -> Subspace {
    null_basis_scaled(a, 0.0, tol)
}

pub fn null_basis_scaled(a: &CMatrix, scale: f64, tol: Tolerance) -> Subspace {
    complement(&range_basis_scaled(&a.adjoint(), scale, tol))
}

pub fn complement(u: &Subspace) -> Subspace {
    let n = u.ambient_dim();
    if u.is_zero() {
        return Subspace::full(n);
    }
    if u.is_full() {
        return Subspace::zero(n);
    }
    let p = identity(n) - u.projector();
    // Projector singular values are 0 or 1; any fixed cutoff separates them.
    range_basis_scaled(&p, 1.0, Tolerance::default())
}

pub fn projector(u: &Subspace) -> CMatrix {
    u.projector()
}

/// `U ∩ W` via principal angles: directions whose cosine is at least
/// `1 - rank_tol`.
pub fn intersect(u: &Subspace, w: &Subspace, tol: Tolerance) -> Result<Subspace> {
    if u.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("ambient dim {}", u.ambient_dim()),
            found: format!("ambient dim {}", w.ambient_dim()),
        });
    }
    let n = u.ambient_dim();
    if u.is_zero() || w.is_zero() {
        return Ok(Subspace::zero(n));
    }
    let m = u.basis().adjoint() * w.basis();
    let (left, s, _) = svd(&m);
    let k = s.iter().take_while(|&&x| x >= 1.0 - tol.rank_tol).count();
    let dirs = u.basis() * left.columns(0, k);
    let mut basis = dirs;
    normalize_phases(&mut basis);
    Ok(Subspace { basis })
}

/// `U + W`.
pub fn sum(u: &Subspace, w: &Subspace, tol: Tolerance) -> Result<Subspace> {
    if u.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("ambient dim {}", u.ambient_dim()),
            found: format!("ambient dim {}", w.ambient_dim()),
        });
    }
    let n = u.ambient_dim();
    let mut joined = zeros(n, u.dim() + w.dim());
    joined.columns_mut(0, u.dim()).copy_from(u.basis());
    joined.columns_mut(u.dim(), w.dim()).copy_from(w.basis());
    Ok(range_basis_scaled(&joined, 1.0, tol))
}

/// Kreĭn shorted operator of a PSD matrix `b` to the subspace `n`:
/// `B^{1/2} P_Ω B^{1/2}` with `Ω = ker(P_{N^⊥} B^{1/2})`.
pub fn shorted_operator(b: &CMatrix, n: &Subspace, tol: Tolerance) -> Result<CMatrix> {
    let dim = ensure_square(b)?;
    if n.ambient_dim() != dim {
        return Err(shape_mismatch((dim, dim), (n.ambient_dim(), n.ambient_dim())));
    }
    let root = psd_sqrt(b, tol).map_err(|e| match e {
        Error::NegativeEigenvalue { value } => Error::NotPsd { value },
        other => other,
    })?;
    let scale = operator_norm(&root);
    if scale == 0.0 {
        return Ok(zeros(dim, dim));
    }
    let outside = identity(dim) - n.projector();
    let omega = null_basis_scaled(&(outside * &root), scale, tol);
    Ok(hermitian_part(&(&root * omega.projector() * &root)))
}

/// Solves `a x = b` for square invertible `a`.
pub(crate) fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    if a.nrows() == 0 {
        return Some(zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

/// Horizontal concatenation.
pub fn hstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}
