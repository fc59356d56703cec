//! Operators defined on a subspace `H_V` of the ambient space, and the
//! extension machinery derived from a C-symmetric contraction.

use serde::Serialize;

use crate::certificate::Certificate;
use crate::conjugation::Conjugation;
use crate::error::{shape_mismatch, Error, Result};
use crate::linalg::{
    complement, conj, defect, ensure_finite, fro, identity, null_basis_scaled, operator_norm,
    pinv_scaled, psd_sqrt_scaled, range_basis, range_basis_scaled, CMatrix, Subspace, Tolerance,
};
use crate::oracle::{gaussian_matrix, trial_rng};

/// A linear operator `V: H_V -> H`, stored as an orthonormal basis `Q` of
/// `H_V` and the images `V q_j` as the columns of `action`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialOperator {
    domain: Subspace,
    action: CMatrix,
}

impl PartialOperator {
    pub fn new(domain: Subspace, action: CMatrix) -> Result<Self> {
        ensure_finite(&action)?;
        let expected = (domain.ambient_dim(), domain.dim());
        if action.shape() != expected {
            return Err(shape_mismatch(expected, action.shape()));
        }
        Ok(PartialOperator { domain, action })
    }

    /// Operator given on an arbitrary (full column rank) basis: `V b_j = y_j`.
    pub fn from_images(basis: &CMatrix, images: &CMatrix, tol: Tolerance) -> Result<Self> {
        ensure_finite(basis)?;
        ensure_finite(images)?;
        if basis.shape() != images.shape() {
            return Err(shape_mismatch(basis.shape(), images.shape()));
        }
        let domain = range_basis(basis, tol);
        if domain.dim() != basis.ncols() {
            return Err(Error::BadDims(format!(
                "domain basis has rank {} but {} columns",
                domain.dim(),
                basis.ncols()
            )));
        }
        let coords = crate::linalg::pinv(basis, tol) * domain.basis();
        let action = images * coords;
        Ok(PartialOperator { domain, action })
    }

    /// Everywhere-defined operator.
    pub fn full(matrix: CMatrix) -> Result<Self> {
        let n = crate::linalg::ensure_square(&matrix)?;
        PartialOperator::new(Subspace::full(n), matrix)
    }

    /// Restriction of an everywhere-defined operator to `domain`.
    pub fn restriction(matrix: &CMatrix, domain: Subspace) -> Result<Self> {
        let action = matrix * domain.basis();
        PartialOperator::new(domain, action)
    }

    pub fn ambient_dim(&self) -> usize {
        self.domain.ambient_dim()
    }

    pub fn domain_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    pub fn action(&self) -> &CMatrix {
        &self.action
    }

    pub fn is_total(&self) -> bool {
        self.domain.is_full()
    }

    /// `V P_{H_V}` as an ambient matrix.
    pub fn extended_by_zero(&self) -> CMatrix {
        &self.action * self.domain.basis().adjoint()
    }

    /// Matrix of `V^*: H -> H_V` in the domain basis (`action^H`).
    pub fn adjoint_on_domain(&self) -> CMatrix {
        self.action.adjoint()
    }

    /// `V^*` as an ambient matrix with range in `H_V`.
    pub fn adjoint_ambient(&self) -> CMatrix {
        self.domain.basis() * self.action.adjoint()
    }

    pub fn norm(&self) -> f64 {
        operator_norm(&self.action)
    }

    /// Largest deviation `||P_{H_V} C V q - V^* C q||` over the domain basis.
    pub fn c_symmetry_residual(&self, conj_op: &Conjugation) -> Result<f64> {
        if conj_op.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("dimension {}", self.ambient_dim()),
                found: format!("conjugation of dimension {}", conj_op.dim()),
            });
        }
        let q = self.domain.basis();
        let lhs = q * (q.adjoint() * conj_op.on_columns(&self.action));
        let rhs = self.adjoint_ambient() * conj_op.on_columns(q);
        let diff = lhs - rhs;
        Ok(diff
            .column_iter()
            .map(|col| col.norm())
            .fold(0.0_f64, f64::max))
    }

    pub fn check_c_symmetric(&self, conj_op: &Conjugation, tol: Tolerance) -> Result<Certificate> {
        let residual = self.c_symmetry_residual(conj_op)?;
        let mut cert = Certificate::new();
        cert.at_most("c_symmetric", residual, tol.residual_tol);
        Ok(cert)
    }
}

/// Precomputed extension data for a C-symmetric contraction `V` and a
/// conjugation `C`. Operators between subspaces are stored ambient-sized.
#[derive(Debug, Clone)]
pub struct ExtensionKit {
    pub(crate) v: PartialOperator,
    pub(crate) conj: Conjugation,
    pub(crate) tol: Tolerance,

    pub(crate) h_perp: Subspace,
    pub(crate) c_h: Subspace,
    pub(crate) c_h_perp: Subspace,
    pub(crate) p_dom: CMatrix,
    pub(crate) p_perp: CMatrix,
    pub(crate) p_c_h_perp: CMatrix,

    pub(crate) v_p: CMatrix,
    pub(crate) c_vstar_c: CMatrix,

    pub(crate) d_vstar: CMatrix,
    pub(crate) d_vstar_pinv: CMatrix,
    pub(crate) d_v: CMatrix,
    pub(crate) frak_d_vstar: Subspace,

    pub(crate) z0: CMatrix,
    pub(crate) x0: CMatrix,
    pub(crate) x0_generator_residual: f64,
    pub(crate) l0: Subspace,
    pub(crate) l0_perp: Subspace,
    pub(crate) d_x0star: CMatrix,
    pub(crate) d_x0star_pinv: CMatrix,
    pub(crate) frak_d_x0star: Subspace,

    pub(crate) omega_l: Subspace,
    pub(crate) omega_r: Subspace,

    pub(crate) invariants: Certificate,
}

/// Dimensions of the subspaces carried by a kit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KitDims {
    pub ambient: usize,
    pub domain: usize,
    pub defect_space: usize,
    pub l0: usize,
    pub l0_perp: usize,
    pub x0_defect_space: usize,
    pub omega_l: usize,
}

/// Builds the extension kit for `V` and `C`.
///
/// Fails when `V` is not a contraction, is not C-symmetric, or the numerical
/// realization of `X0` violates its invariants (which signals a tolerance
/// misconfiguration rather than bad input).
pub fn build_kit(v: &PartialOperator, conj_op: &Conjugation, tol: Tolerance) -> Result<ExtensionKit> {
    let n = v.ambient_dim();
    if conj_op.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("dimension {n}"),
            found: format!("conjugation of dimension {}", conj_op.dim()),
        });
    }
    let a = v.action();
    let norm = v.norm();
    if norm > 1.0 + tol.residual_tol {
        return Err(Error::NotContraction { norm });
    }
    let sym = v.c_symmetry_residual(conj_op)?;
    if sym > tol.residual_tol {
        return Err(Error::NotCSymmetric { residual: sym });
    }

    let q = v.domain().basis();
    let p_dom = v.domain().projector();
    let p_perp = identity(n) - &p_dom;
    let h_perp = complement(v.domain());
    let c_h = conj_op.conj_image(v.domain())?;
    let c_h_perp = conj_op.conj_image(&h_perp)?;
    let p_c_h = c_h.projector();
    let p_c_h_perp = c_h_perp.projector();

    let v_p = v.extended_by_zero();
    let c_vstar_c = conj_op.sandwich_unchecked(&v.adjoint_ambient());

    let d_vstar = defect(&a.adjoint(), tol)?;
    let d_v = defect(a, tol)?;
    let d_vstar_pinv = pinv_scaled(&d_vstar, 1.0, tol);
    let frak_d_vstar = range_basis_scaled(&d_vstar, 1.0, tol);

    let c_q = conj_op.on_columns(q);
    let c_a = conj_op.on_columns(a);
    let z0 = &p_perp * &c_a * c_q.adjoint();

    // X0 maps the generators D_{V*} C q_j to P_{H_V^⊥} C V q_j.
    let generators = &d_vstar * &c_q;
    let targets = &p_perp * &c_a;
    let x0_raw = &targets * pinv_scaled(&generators, 1.0, tol);
    let x0_generator_residual = fro(&(&x0_raw * &generators - &targets));
    if x0_generator_residual > tol.residual_tol * (1.0 + fro(&targets)) {
        return Err(Error::InconsistentGenerators {
            residual: x0_generator_residual,
        });
    }
    let l0 = range_basis_scaled(&generators, 1.0, tol);
    let p_l0 = l0.projector();
    let x0 = x0_raw * &p_l0;
    let l0_perp = range_basis_scaled(&((identity(n) - &p_l0) * frak_d_vstar.basis()), 1.0, tol);

    let x0_gram = crate::linalg::hermitian_part(&(&p_perp - &x0 * x0.adjoint()));
    let d_x0star = psd_sqrt_scaled(&x0_gram, 1.0, tol).map_err(|e| match e {
        Error::NegativeEigenvalue { value } => Error::NotContraction { norm: (1.0 - value).sqrt() },
        other => other,
    })?;
    let d_x0star_pinv = pinv_scaled(&d_x0star, 1.0, tol);
    let frak_d_x0star = range_basis_scaled(&d_x0star, 1.0, tol);

    let omega_l = null_basis_scaled(&(&p_c_h * &d_vstar), 1.0, tol);
    let omega_r_conj = null_basis_scaled(&(&p_c_h * &d_vstar * conj_op.coefficient()), 1.0, tol);
    let omega_r = Subspace::from_orthonormal(conj(omega_r_conj.basis()));

    let mut invariants = Certificate::new();
    invariants.at_most("z0_norm_excess", operator_norm(&z0) - norm, tol.residual_tol);
    invariants.at_most("x0_norm_excess", operator_norm(&x0) - 1.0, tol.residual_tol);
    invariants.at_most("l0_in_defect_space", frak_d_vstar.excess(l0.basis()), tol.residual_tol);
    let omega_gap = if omega_r.dim() == omega_l.dim() {
        omega_r.distance(&conj_op.conj_image(&omega_l)?)
    } else {
        f64::INFINITY
    };
    invariants.at_most("omega_r_is_c_omega_l", omega_gap, tol.residual_tol);
    let dim_gap = (l0.dim() + l0_perp.dim()) as f64 - frak_d_vstar.dim() as f64;
    invariants.at_most("l0_split_dims", dim_gap.abs(), 0.0);
    if !invariants.passed() {
        let worst = invariants.failures().map(|c| c.value).fold(0.0_f64, f64::max);
        return Err(Error::InconsistentGenerators { residual: worst });
    }

    Ok(ExtensionKit {
        v: v.clone(),
        conj: conj_op.clone(),
        tol,
        h_perp,
        c_h,
        c_h_perp,
        p_dom,
        p_perp,
        p_c_h_perp,
        v_p,
        c_vstar_c,
        d_vstar,
        d_vstar_pinv,
        d_v,
        frak_d_vstar,
        z0,
        x0,
        x0_generator_residual,
        l0,
        l0_perp,
        d_x0star,
        d_x0star_pinv,
        frak_d_x0star,
        omega_l,
        omega_r,
        invariants,
    })
}

impl ExtensionKit {
    pub fn v(&self) -> &PartialOperator {
        &self.v
    }
    pub fn conjugation(&self) -> &Conjugation {
        &self.conj
    }
    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }
    pub fn ambient_dim(&self) -> usize {
        self.v.ambient_dim()
    }
    pub fn domain(&self) -> &Subspace {
        self.v.domain()
    }
    pub fn domain_perp(&self) -> &Subspace {
        &self.h_perp
    }
    pub fn c_domain(&self) -> &Subspace {
        &self.c_h
    }
    pub fn c_domain_perp(&self) -> &Subspace {
        &self.c_h_perp
    }
    /// `V P_{H_V}`.
    pub fn v_p(&self) -> &CMatrix {
        &self.v_p
    }
    /// `C V^* C` as an ambient matrix.
    pub fn c_vstar_c(&self) -> &CMatrix {
        &self.c_vstar_c
    }
    /// `D_{V*} = (I - V V^*)^{1/2}` on the ambient space.
    pub fn d_vstar(&self) -> &CMatrix {
        &self.d_vstar
    }
    /// `D_V = (I - V^* V)^{1/2}` in the domain basis.
    pub fn d_v(&self) -> &CMatrix {
        &self.d_v
    }
    /// `𝔇_{V*}`, the closure of the range of `D_{V*}`.
    pub fn defect_space(&self) -> &Subspace {
        &self.frak_d_vstar
    }
    /// `Z0: C h -> P_{H_V^⊥} C V h`, zero on `C H_V^⊥`.
    pub fn z0(&self) -> &CMatrix {
        &self.z0
    }
    /// `X0: D_{V*} C h -> P_{H_V^⊥} C V h`, zero off `L0`.
    pub fn x0(&self) -> &CMatrix {
        &self.x0
    }
    pub fn x0_generator_residual(&self) -> f64 {
        self.x0_generator_residual
    }
    pub fn l0(&self) -> &Subspace {
        &self.l0
    }
    /// `L0^⊥` taken inside `𝔇_{V*}`.
    pub fn l0_perp(&self) -> &Subspace {
        &self.l0_perp
    }
    /// `D_{X0*} = (I - X0 X0^*)^{1/2}` on `H_V^⊥`, zero on `H_V`.
    pub fn d_x0star(&self) -> &CMatrix {
        &self.d_x0star
    }
    pub fn x0_defect_space(&self) -> &Subspace {
        &self.frak_d_x0star
    }
    /// `Ω_l = {h : D_{V*} h ∈ C H_V^⊥}`.
    pub fn omega_l(&self) -> &Subspace {
        &self.omega_l
    }
    /// `Ω_r = {g : D_{V*} C g ∈ C H_V^⊥}`.
    pub fn omega_r(&self) -> &Subspace {
        &self.omega_r
    }
    pub fn invariants(&self) -> &Certificate {
        &self.invariants
    }
    pub fn dims(&self) -> KitDims {
        KitDims {
            ambient: self.ambient_dim(),
            domain: self.v.domain_dim(),
            defect_space: self.frak_d_vstar.dim(),
            l0: self.l0.dim(),
            l0_perp: self.l0_perp.dim(),
            x0_defect_space: self.frak_d_x0star.dim(),
            omega_l: self.omega_l.dim(),
        }
    }

    /// `||C V^* C g - Z0^* g||` over `H_V^⊥`.
    pub fn z0_adjoint_residual(&self) -> f64 {
        fro(&((&self.c_vstar_c - self.z0.adjoint()) * &self.p_perp))
    }

    /// Deviation of `D_{V*} X0^* f = C V^* C f + P_{C H_V^⊥} D_{V*} X0^* f`
    /// over a basis of `H_V^⊥`.
    pub fn x0_adjoint_identity_residual(&self) -> f64 {
        let lhs = &self.d_vstar * self.x0.adjoint();
        let rhs = &self.c_vstar_c + &self.p_c_h_perp * &lhs;
        fro(&((lhs - rhs) * self.h_perp.basis()))
    }
}

/// Checks `||D_{V*} C h||^2 - ||P_{H_V^⊥} C V h||^2 = ||h||^2 - ||V h||^2` on
/// the domain basis and on `samples` random domain vectors.
pub fn check_x0_identity(kit: &ExtensionKit, samples: usize, seed: u64) -> Certificate {
    let q = kit.domain().basis();
    let m = q.ncols();
    let mut coeffs = identity(m);
    if m > 0 && samples > 0 {
        let mut rng = trial_rng(seed, 0);
        let random = gaussian_matrix(&mut rng, m, samples);
        coeffs = crate::linalg::hstack(&coeffs, &random);
    }
    let h = q * &coeffs;
    let vh = kit.v.action() * &coeffs;
    let c_h = kit.conj.on_columns(&h);
    let lhs_a = &kit.d_vstar * &c_h;
    let lhs_b = &kit.p_perp * kit.conj.on_columns(&vh);
    let mut worst = 0.0_f64;
    for j in 0..coeffs.ncols() {
        let lhs = lhs_a.column(j).norm_squared() - lhs_b.column(j).norm_squared();
        let rhs = h.column(j).norm_squared() - vh.column(j).norm_squared();
        let scale = 1.0 + h.column(j).norm_squared();
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    let mut cert = Certificate::new();
    cert.at_most("x0_norm_identity", worst, kit.tol.residual_tol);
    cert
}
