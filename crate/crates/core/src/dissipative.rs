//! Dissipative operators, the Cayley transform onto contractions, and
//! maximal C-self-adjoint-type dissipative extensions built from
//! C-self-adjoint contractive ones.

use num_complex::Complex64;
use serde::Serialize;

use crate::certificate::Certificate;
use crate::conjugation::Conjugation;
use crate::error::{Error, Result};
use crate::extensions::{
    cself_contractive_extend, regularized_ratio, uniqueness_report, worst_affine_residual,
    ContractiveParam, UniquenessReport,
};
use crate::linalg::{
    c, complement, defect, fro, hermitian_eigen, hermitian_part, identity, intersect,
    min_singular_value, operator_norm, pinv, range_basis, range_basis_scaled, solve, CMatrix,
    Subspace, Tolerance,
};
use crate::oracle::{gaussian_matrix, trial_rng};
use crate::partial::{build_kit, ExtensionKit, PartialOperator};

/// `min Im (T f, f)` over unit `f` in the domain (`+inf` on a zero domain).
pub fn dissipativity_margin(t: &PartialOperator) -> f64 {
    if t.domain_dim() == 0 {
        return f64::INFINITY;
    }
    let b = t.domain().basis().adjoint() * t.action();
    let imag = (&b - b.adjoint()) * c(0.0, -0.5);
    hermitian_eigen(&hermitian_part(&imag)).0[0]
}

/// A partial operator with `Im (T f, f) >= 0` on its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipativeOperator {
    op: PartialOperator,
    margin: f64,
}

impl DissipativeOperator {
    pub fn new(op: PartialOperator, tol: Tolerance) -> Result<Self> {
        let margin = dissipativity_margin(&op);
        let scale = 1.0 + op.norm();
        if margin < -tol.residual_tol * scale {
            return Err(Error::NotDissipative { margin });
        }
        Ok(DissipativeOperator { op, margin })
    }

    pub fn op(&self) -> &PartialOperator {
        &self.op
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn is_maximal(&self) -> bool {
        self.op.is_total()
    }

    /// Matrix of an everywhere-defined operator.
    pub fn matrix(&self) -> Result<CMatrix> {
        if !self.op.is_total() {
            return Err(Error::NotMaximal {
                domain_dim: self.op.domain_dim(),
                ambient_dim: self.op.ambient_dim(),
            });
        }
        let q = self.op.domain().basis();
        Ok(self.op.action() * q.adjoint())
    }
}

fn check_lambda(lambda: Complex64) -> Result<()> {
    if !(lambda.im > 0.0) || !lambda.re.is_finite() {
        return Err(Error::LambdaNotUpperHalfPlane { im: lambda.im });
    }
    Ok(())
}

/// `V_λ = (T - λ)(T - λ̄)^{-1}` on `M_λ = (T - λ̄) dom T`, the defect subspace
/// `N_λ = M_λ^⊥`, the maximal extension `T̃_λ = T ∔ λ I|N_λ` and
/// `G_λ = (T̃_λ^* - λ)^{-1} C M_λ` (the last one only when a conjugation is
/// supplied).
#[derive(Debug, Clone)]
pub struct CayleyData {
    pub lambda: Complex64,
    pub v_lambda: PartialOperator,
    pub n_lambda: Subspace,
    pub t_tilde: CMatrix,
    /// `||(T̃ - λ)(T̃ - λ̄)^{-1} P_M - V_λ P_M||_F`.
    pub cayley_residual: f64,
    pub g_lambda: Option<Subspace>,
}

pub fn cayley_forward(t: &DissipativeOperator, lambda: Complex64, conj_op: Option<&Conjugation>, tol: Tolerance) -> Result<CayleyData> {
    check_lambda(lambda)?;
    let op = t.op();
    let q = op.domain().basis();
    let a = op.action();
    let psi = a - q * lambda.conj();
    let phi = a - q * lambda;
    let m = range_basis(&psi, tol);
    if m.dim() != op.domain_dim() {
        return Err(Error::NotDissipative { margin: t.margin() });
    }
    let v_action = &phi * pinv(&psi, tol) * m.basis();
    let v_lambda = PartialOperator::new(m.clone(), v_action)?;
    let n_lambda = complement(&m);
    let ext = extend_by_nlambda(t, lambda, tol)?;
    let t_tilde = ext.matrix;
    let g_lambda = match conj_op {
        Some(conj_op) => {
            let n = op.ambient_dim();
            let shifted = t_tilde.adjoint() - identity(n) * lambda;
            let rhs = conj_op.on_columns(m.basis());
            let g = solve(&shifted, &rhs).ok_or(Error::NotDissipative { margin: t.margin() })?;
            Some(range_basis(&g, tol))
        }
        None => None,
    };
    Ok(CayleyData {
        lambda,
        v_lambda,
        n_lambda,
        t_tilde,
        cayley_residual: ext.cayley_residual,
        g_lambda,
    })
}

/// Inverse Cayley transform of a contraction `W` with `ker(I - W) = {0}`:
/// `T = (λ - λ̄ W)(I - W)^{-1}` on `(I - W) dom W`.
pub fn cayley_inverse(w: &PartialOperator, lambda: Complex64, tol: Tolerance) -> Result<DissipativeOperator> {
    check_lambda(lambda)?;
    let q = w.domain().basis();
    let b = w.action();
    let f = q - b;
    let g = q * lambda - b * lambda.conj();
    if w.domain_dim() > 0 {
        let sigma = min_singular_value(&f);
        let cutoff = tol.rank_tol * operator_norm(&f).max(1.0) * f.nrows().max(f.ncols()) as f64;
        if sigma <= cutoff {
            return Err(Error::OneInSpectrum { distance: sigma });
        }
    }
    let dom = range_basis(&f, tol);
    let action = &g * pinv(&f, tol) * dom.basis();
    let op = PartialOperator::new(dom, action)?;
    DissipativeOperator::new(op, tol)
}

/// The maximal dissipative extension `T ∔ λ I|N_λ`.
#[derive(Debug, Clone)]
pub struct MaximalExtension {
    pub matrix: CMatrix,
    pub margin: f64,
    /// `dim(dom T ∩ N_λ)`, zero for a valid direct sum.
    pub intersection_dim: usize,
    pub cayley_residual: f64,
}

pub fn extend_by_nlambda(t: &DissipativeOperator, lambda: Complex64, tol: Tolerance) -> Result<MaximalExtension> {
    check_lambda(lambda)?;
    let op = t.op();
    let n = op.ambient_dim();
    let q = op.domain().basis();
    let a = op.action();
    let psi = a - q * lambda.conj();
    let m = range_basis(&psi, tol);
    let n_lambda = complement(&m);
    let intersection_dim = intersect(op.domain(), &n_lambda, tol)?.dim();
    if intersection_dim > 0 {
        return Err(Error::NotDissipative { margin: t.margin() });
    }
    let basis = crate::linalg::hstack(q, n_lambda.basis());
    let images = crate::linalg::hstack(a, &(n_lambda.basis() * lambda));
    let inv = solve(&basis, &identity(n)).ok_or(Error::NotDissipative { margin: t.margin() })?;
    let matrix = images * inv;
    let full = PartialOperator::full(matrix.clone())?;
    let margin = dissipativity_margin(&full);

    let phi = a - q * lambda;
    let v_action = &phi * pinv(&psi, tol) * m.basis();
    let shifted = &matrix - identity(n) * lambda.conj();
    let cayley_residual = match solve(&shifted, m.basis()) {
        Some(pre) => fro(&((&matrix - identity(n) * lambda) * pre - v_action)),
        None => f64::INFINITY,
    };
    Ok(MaximalExtension {
        matrix,
        margin,
        intersection_dim,
        cayley_residual,
    })
}

/// `||D_V ψ||^2 = 4 Im λ Im (T f, f)` with `ψ = (T - λ̄) f`, and the
/// companion identity `||D_{V*} φ||^2 = -4 Im λ Im (T^* g, g)` with
/// `φ = (T^* - λ) g`, for a maximal dissipative `T`. Deviations are relative
/// to `1 + ||ψ||^2`.
pub fn check_defect_identities(t: &DissipativeOperator, lambda: Complex64, samples: usize, seed: u64, tol: Tolerance) -> Result<Certificate> {
    check_lambda(lambda)?;
    let tm = t.matrix()?;
    let n = tm.nrows();
    let minus_bar = &tm - identity(n) * lambda.conj();
    let inv = solve(&minus_bar, &identity(n)).ok_or(Error::NotDissipative { margin: t.margin() })?;
    let v = (&tm - identity(n) * lambda) * &inv;
    let d_v = defect(&v, tol)?;
    let d_v_star = defect(&v.adjoint(), tol)?;
    let t_star_shift = tm.adjoint() - identity(n) * lambda;
    let inv_star = solve(&t_star_shift, &identity(n)).ok_or(Error::NotDissipative { margin: t.margin() })?;

    let mut rng = trial_rng(seed, 0);
    let xs = gaussian_matrix(&mut rng, n, samples.max(1));
    let four_im = 4.0 * lambda.im;
    let mut first = 0.0_f64;
    let mut second = 0.0_f64;
    for j in 0..xs.ncols() {
        let x = xs.column(j).into_owned();
        let scale = 1.0 + x.norm_squared();
        let f = &inv * &x;
        let tf = &tm * &f;
        let lhs = (&d_v * &x).norm_squared();
        let rhs = four_im * f.dotc(&tf).im;
        first = first.max((lhs - rhs).abs() / scale);
        let g = &inv_star * &x;
        let tsg = tm.adjoint() * &g;
        let lhs = (&d_v_star * &x).norm_squared();
        let rhs = -four_im * g.dotc(&tsg).im;
        second = second.max((lhs - rhs).abs() / scale);
    }
    let mut cert = Certificate::new();
    cert.at_most("defect_identity", first, tol.residual_tol)
        .at_most("adjoint_defect_identity", second, tol.residual_tol)
        .at_most("cayley_norm_excess", operator_norm(&v) - 1.0, tol.residual_tol);
    Ok(cert)
}

/// Checks that `T` is C-symmetric and dissipative.
fn check_c_symmetric_dissipative(t: &DissipativeOperator, conj_op: &Conjugation, tol: Tolerance) -> Result<()> {
    let residual = t.op().c_symmetry_residual(conj_op)?;
    if residual > tol.residual_tol * (1.0 + t.op().norm()) {
        return Err(Error::NotCSymmetric { residual });
    }
    Ok(())
}

/// A maximal dissipative extension of a C-symmetric dissipative operator
/// whose Cayley transform is C-self-adjoint.
#[derive(Debug, Clone)]
pub struct GlazmanExtension {
    pub lambda: Complex64,
    pub matrix: CMatrix,
    /// The C-self-adjoint contractive extension of `V_λ` it comes from.
    pub contraction: CMatrix,
    pub certificate: Certificate,
}

/// Extends a C-symmetric dissipative `T` to a maximal dissipative operator
/// `T̃` with `T̃ = C T̃^* C`, through the C-self-adjoint contractive extension
/// of `V_λ` with parameter `param` (the center when `None`).
pub fn glazman_extend(
    t: &DissipativeOperator,
    conj_op: &Conjugation,
    lambda: Complex64,
    param: Option<&CMatrix>,
    tol: Tolerance,
) -> Result<GlazmanExtension> {
    check_lambda(lambda)?;
    check_c_symmetric_dissipative(t, conj_op, tol)?;
    let data = cayley_forward(t, lambda, None, tol)?;
    let kit = build_kit(&data.v_lambda, conj_op, tol)?;
    let p = match param {
        Some(m) => ContractiveParam::new(m.clone()),
        None => ContractiveParam::zero(kit.ambient_dim()),
    };
    let ext = cself_contractive_extend(&kit, &p)?;
    let full = PartialOperator::full(ext.w.clone())?;
    let t_ext = cayley_inverse(&full, lambda, tol)?;
    let matrix = t_ext.matrix()?;
    let n = matrix.nrows();

    let mut cert = Certificate::new();
    cert.merge("contraction", ext.certificate.clone());
    let ext_res = fro(&(&matrix * t.op().domain().basis() - t.op().action()));
    let scale = 1.0 + operator_norm(&matrix);
    cert.at_most("extension", ext_res / scale, tol.residual_tol)
        .at_most("c_self_adjoint", fro(&(&matrix - conj_op.c_star_unchecked(&matrix))) / scale, tol.residual_tol)
        .at_least("dissipativity_margin", t_ext.margin() / scale, -tol.residual_tol)
        .at_most("maximal", (n - t_ext.op().domain_dim()) as f64, 0.0);
    Ok(GlazmanExtension {
        lambda,
        matrix,
        contraction: ext.w,
        certificate: cert,
    })
}

/// Uniqueness of the maximal dissipative C-self-adjoint-type extension for
/// a fixed `λ`.
#[derive(Debug, Clone, Serialize)]
pub struct DissipativeUniqueness {
    #[serde(serialize_with = "crate::serialize_complex")]
    pub lambda: Complex64,
    /// Report for the Cayley transform `V_λ`.
    pub contraction: UniquenessReport,
    /// `dim(ran D_{V_λ*} ∩ C N_λ)`.
    pub intersection_dim: usize,
    /// `max_f inf_{g ∈ G_λ} ||B^{1/2}(f - g)||^2 / ||B||`, `B = Im T̃_λ`.
    pub g_lambda_infimum: f64,
    pub g_lambda_infimum_holds: bool,
    /// Regularized `min_φ sup_g |(C (T̃^* - λ̄) g, φ)|^2 / (B g, g)`.
    pub adjoint_ratio: f64,
    pub adjoint_ratio_unbounded: bool,
    pub unique: bool,
    pub criteria_agree: bool,
}

pub fn dissipative_uniqueness(
    t: &DissipativeOperator,
    conj_op: &Conjugation,
    lambda: Complex64,
    probes: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<DissipativeUniqueness> {
    check_lambda(lambda)?;
    check_c_symmetric_dissipative(t, conj_op, tol)?;
    let data = cayley_forward(t, lambda, Some(conj_op), tol)?;
    let kit = build_kit(&data.v_lambda, conj_op, tol)?;
    let report = uniqueness_report(&kit, probes, seed)?;
    let n = kit.ambient_dim();

    let tt = &data.t_tilde;
    let b = hermitian_part(&((tt - tt.adjoint()) * c(0.0, -0.5)));
    let b_norm = operator_norm(&b);
    let (g_inf, ratio) = if b_norm == 0.0 {
        (0.0, 0.0)
    } else {
        let b_hat = &b / c(b_norm, 0.0);
        let root = crate::linalg::psd_sqrt_scaled(&b_hat, 1.0, tol)?;
        let g = data.g_lambda.as_ref().expect("conjugation supplied");
        let g_inf = worst_affine_residual(&root, g.basis(), &identity(n), 1.0, tol);

        let phi = conj_op.on_columns(data.n_lambda.basis());
        let w = (tt - identity(n) * lambda) * phi;
        let span = range_basis_scaled(&w, operator_norm(&w).max(1.0), tol);
        let ratio = if span.dim() < data.n_lambda.dim() {
            0.0
        } else {
            regularized_ratio(&b_hat, span.basis(), tol.rank_tol * tol.rank_tol)
        };
        (g_inf, ratio)
    };
    let g_holds = g_inf <= tol.residual_tol;
    let ratio_unbounded = ratio >= 1.0 / tol.rank_tol;
    let unique = report.intersection_dim == 0;
    let criteria_agree = report.criteria_agree && unique == g_holds;
    Ok(DissipativeUniqueness {
        lambda,
        intersection_dim: report.intersection_dim,
        contraction: report,
        g_lambda_infimum: g_inf,
        g_lambda_infimum_holds: g_holds,
        adjoint_ratio: ratio,
        adjoint_ratio_unbounded: ratio_unbounded,
        unique,
        criteria_agree,
    })
}

/// Runs [`dissipative_uniqueness`] at every `λ` and reports whether the
/// uniqueness verdict is the same for all of them.
pub fn lambda_independence(
    t: &DissipativeOperator,
    conj_op: &Conjugation,
    lambdas: &[Complex64],
    tol: Tolerance,
) -> Result<(Vec<DissipativeUniqueness>, bool)> {
    let reports = lambdas
        .iter()
        .map(|&l| dissipative_uniqueness(t, conj_op, l, 0, 0, tol))
        .collect::<Result<Vec<_>>>()?;
    let consistent = reports.windows(2).all(|w| w[0].unique == w[1].unique);
    Ok((reports, consistent))
}

/// Convenience: the kit of the Cayley transform at `λ`.
pub fn cayley_kit(t: &DissipativeOperator, conj_op: &Conjugation, lambda: Complex64, tol: Tolerance) -> Result<ExtensionKit> {
    let data = cayley_forward(t, lambda, None, tol)?;
    build_kit(&data.v_lambda, conj_op, tol)
}
