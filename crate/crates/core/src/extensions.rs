//! Parameterizations of the extension sets of a C-symmetric contraction:
//! all contractive extensions, all bounded C-self-adjoint extensions (two
//! equivalent forms), all C-self-adjoint contractive extensions, the operator
//! ball they live in, and the uniqueness criteria.

use serde::Serialize;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::linalg::{
    c, ensure_finite, ensure_shape, fro, hermitian_eigen, identity, intersect, operator_norm,
    pinv_scaled, psd_sqrt_scaled, range_basis_scaled, shorted_operator, within_norm, CMatrix,
    Subspace,
};
use crate::oracle::{gaussian_matrix, trial_rng};
use crate::partial::ExtensionKit;

const HALF: f64 = 0.5;

/// Parameter of a bounded C-self-adjoint extension.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundedParam {
    /// C-self-adjoint `R` with `R = P_{C H_V^⊥} R P_{H_V^⊥}`; the extension is
    /// `V P + (C V^* C + R) P^⊥`.
    Raikh(CMatrix),
    /// `Ỹ: C H_V^⊥ -> H_V^⊥`; the extension is
    /// `V P + C V^* C P^⊥ + (Ỹ^* + C Ỹ C) P^⊥ / 2`.
    Tz(CMatrix),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundedVariant {
    Raikh,
    Tz,
}

impl BoundedParam {
    pub fn variant(&self) -> BoundedVariant {
        match self {
            BoundedParam::Raikh(_) => BoundedVariant::Raikh,
            BoundedParam::Tz(_) => BoundedVariant::Tz,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        match self {
            BoundedParam::Raikh(m) | BoundedParam::Tz(m) => m,
        }
    }

    pub fn validate(&self, kit: &ExtensionKit) -> Result<()> {
        let n = kit.ambient_dim();
        let m = self.matrix();
        ensure_shape(m, (n, n))?;
        ensure_finite(m)?;
        let tol = kit.tol.residual_tol;
        let scale = 1.0 + fro(m);
        match self {
            BoundedParam::Raikh(r) => {
                let support = fro(&(r - &kit.p_c_h_perp * r * &kit.p_perp));
                if support > tol * scale {
                    return Err(invalid("raikh parameter must map H_V^⊥ into C H_V^⊥", support));
                }
                let sym = fro(&(r - kit.conj.c_star_unchecked(r)));
                if sym > tol * scale {
                    return Err(invalid("raikh parameter must be C-self-adjoint", sym));
                }
            }
            BoundedParam::Tz(y) => {
                let support = fro(&(y - &kit.p_perp * y * &kit.p_c_h_perp));
                if support > tol * scale {
                    return Err(invalid("tz parameter must map C H_V^⊥ into H_V^⊥", support));
                }
            }
        }
        Ok(())
    }
}

fn invalid(reason: &str, residual: f64) -> Error {
    Error::InvalidParam {
        reason: reason.to_string(),
        residual,
    }
}

/// Parameter `Ỹ: L0^⊥ -> 𝔇_{X0*}` of a C-self-adjoint contractive extension,
/// stored ambient-sized.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractiveParam {
    y: CMatrix,
}

impl ContractiveParam {
    pub fn new(y: CMatrix) -> Self {
        ContractiveParam { y }
    }

    pub fn zero(n: usize) -> Self {
        ContractiveParam {
            y: CMatrix::zeros(n, n),
        }
    }

    /// Compresses an arbitrary matrix onto the admissible blocks,
    /// `P_{𝔇_{X0*}} m P_{L0^⊥}`. The result may still need rescaling to be a
    /// contraction.
    pub fn project(kit: &ExtensionKit, m: &CMatrix) -> Result<Self> {
        let n = kit.ambient_dim();
        ensure_shape(m, (n, n))?;
        Ok(ContractiveParam {
            y: kit.frak_d_x0star.projector() * m * kit.l0_perp.projector(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.y
    }

    pub fn into_matrix(self) -> CMatrix {
        self.y
    }

    pub fn validate(&self, kit: &ExtensionKit) -> Result<()> {
        let n = kit.ambient_dim();
        ensure_shape(&self.y, (n, n))?;
        ensure_finite(&self.y)?;
        let tol = kit.tol.residual_tol;
        let support = fro(&(&self.y - &self.y * kit.l0_perp.projector()));
        if support > tol {
            return Err(invalid("parameter must vanish on L0", support));
        }
        let range = kit.frak_d_x0star.excess(&self.y);
        if range > tol {
            return Err(invalid("parameter range must lie in the defect space of X0*", range));
        }
        if !within_norm(&self.y, 1.0 + tol) {
            return Err(invalid("parameter must be a contraction", operator_norm(&self.y)));
        }
        Ok(())
    }
}

/// `Ṽ_K = V P_{H_V} + D_{V*} K P_{H_V^⊥}` for a contraction `K: H_V^⊥ -> 𝔇_{V*}`.
pub fn crandall_extend(kit: &ExtensionKit, k: &CMatrix) -> Result<CMatrix> {
    let n = kit.ambient_dim();
    ensure_shape(k, (n, n))?;
    ensure_finite(k)?;
    let kp = k * &kit.p_perp;
    let outside = kit.frak_d_vstar.excess(&kp);
    if outside > kit.tol.residual_tol {
        return Err(Error::SupportViolation { residual: outside });
    }
    if !within_norm(&kp, 1.0 + kit.tol.residual_tol) {
        return Err(Error::NotContraction {
            norm: operator_norm(&kp),
        });
    }
    Ok(&kit.v_p + &kit.d_vstar * kp)
}

/// `||W q - V q||` over the domain basis.
pub fn extension_residual(kit: &ExtensionKit, w: &CMatrix) -> f64 {
    fro(&(w * kit.v.domain().basis() - kit.v.action()))
}

/// Inverse of [`crandall_extend`]: `K = D_{V*}^+ W P_{H_V^⊥}`.
pub fn crandall_recover(kit: &ExtensionKit, w: &CMatrix) -> Result<CMatrix> {
    let n = kit.ambient_dim();
    ensure_shape(w, (n, n))?;
    ensure_finite(w)?;
    let tol = kit.tol.residual_tol;
    let ext = extension_residual(kit, w);
    if ext > tol {
        return Err(Error::NotExtension { residual: ext });
    }
    if !within_norm(w, 1.0 + tol) {
        return Err(Error::NotContraction {
            norm: operator_norm(w),
        });
    }
    let wp = w * &kit.p_perp;
    let k = &kit.d_vstar_pinv * &wp;
    let residual = fro(&(&kit.d_vstar * &k - &wp));
    if residual > tol {
        return Err(Error::ReconstructionResidual { residual });
    }
    if !within_norm(&k, 1.0 + tol) {
        return Err(Error::ReconstructionResidual {
            residual: operator_norm(&k) - 1.0,
        });
    }
    Ok(k)
}

/// Tests whether `Ṽ_K` is C-self-adjoint, both through the two block
/// conditions on `K` and directly.
///
/// * `adjoint_extends_x0`: `K^* D_{V*} C h = P_{H_V^⊥} C V h` on `H_V`.
/// * `perp_block_symmetry`: `P_{H_V^⊥} C D_{V*} K f = K^* D_{V*} C f` on `H_V^⊥`.
/// * `c_self_adjoint`: `||Ṽ_K - C Ṽ_K^* C||`.
///
/// `criteria_disagree` is 1 when the block verdict and the direct verdict
/// differ.
pub fn validate_cself_contractive(kit: &ExtensionKit, k: &CMatrix) -> Result<Certificate> {
    let n = kit.ambient_dim();
    ensure_shape(k, (n, n))?;
    let tol = kit.tol.residual_tol;
    let conj_op = &kit.conj;
    let kp = k * &kit.p_perp;
    let q = kit.v.domain().basis();
    let perp = kit.h_perp.basis();

    let lhs = kp.adjoint() * &kit.d_vstar * conj_op.on_columns(q);
    let rhs = &kit.p_perp * conj_op.on_columns(kit.v.action());
    let first = max_column_norm(&(lhs - rhs));

    let lhs = &kit.p_perp * conj_op.on_columns(&(&kit.d_vstar * &kp * perp));
    let rhs = kp.adjoint() * &kit.d_vstar * conj_op.on_columns(perp);
    let second = max_column_norm(&(lhs - rhs));

    let vk = &kit.v_p + &kit.d_vstar * &kp;
    let direct = fro(&(&vk - conj_op.c_star_unchecked(&vk)));

    let blocks_ok = first <= tol && second <= tol;
    let direct_ok = direct <= tol;
    let mut cert = Certificate::new();
    cert.at_most("adjoint_extends_x0", first, tol)
        .at_most("perp_block_symmetry", second, tol)
        .at_most("c_self_adjoint", direct, tol)
        .at_most("criteria_disagree", f64::from(u8::from(blocks_ok != direct_ok)), 0.0);
    Ok(cert)
}

fn max_column_norm(m: &CMatrix) -> f64 {
    m.column_iter().map(|col| col.norm()).fold(0.0_f64, f64::max)
}

/// A C-self-adjoint contractive extension together with its construction
/// data and certificate.
#[derive(Debug, Clone)]
pub struct ContractiveExtension {
    pub w: CMatrix,
    /// Crandall parameter `K = X̃^*`.
    pub k: CMatrix,
    /// Contractive extension `X̃` of `X0` to `𝔇_{V*}`.
    pub x_tilde: CMatrix,
    pub certificate: Certificate,
}

/// `X̃ = X0 P_{L0} + D_{X0*} Ỹ P_{L0^⊥}`.
pub(crate) fn x_tilde(kit: &ExtensionKit, y: &CMatrix) -> CMatrix {
    &kit.x0 + &kit.d_x0star * y * kit.l0_perp.projector()
}

/// `(Ṽ_K + C Ṽ_K^* C) / 2` with `K = X̃^*`.
pub(crate) fn symmetrized_crandall(kit: &ExtensionKit, x_tilde: &CMatrix) -> CMatrix {
    let vk = &kit.v_p + &kit.d_vstar * x_tilde.adjoint() * &kit.p_perp;
    (&vk + kit.conj.c_star_unchecked(&vk)) * c(HALF, 0.0)
}

/// Builds the C-self-adjoint contractive extension with parameter `p`, and
/// certifies it (extension, C-self-adjointness, contractivity, agreement
/// with the center-plus-correction representation).
pub fn cself_contractive_extend(kit: &ExtensionKit, p: &ContractiveParam) -> Result<ContractiveExtension> {
    p.validate(kit)?;
    let xt = x_tilde(kit, p.matrix());
    let w = symmetrized_crandall(kit, &xt);

    // W = W0 + (M + C M^* C) P^⊥ / 2 with M = D_{V*} Ỹ^* D_{X0*}.
    let w0 = symmetrized_crandall(kit, &kit.x0);
    let m = &kit.d_vstar * p.matrix().adjoint() * &kit.d_x0star;
    let correction = (&m + kit.conj.c_star_unchecked(&m)) * &kit.p_perp * c(HALF, 0.0);
    let alt = w0 + correction;

    let tol = kit.tol.residual_tol;
    let mut cert = Certificate::new();
    cert.at_most("extension", extension_residual(kit, &w), tol)
        .at_most("c_self_adjoint", fro(&(&w - kit.conj.c_star_unchecked(&w))), tol)
        .at_most("norm_excess", operator_norm(&w) - 1.0, tol)
        .at_most("center_form_agreement", fro(&(&w - alt)), tol);
    Ok(ContractiveExtension {
        w,
        k: xt.adjoint(),
        x_tilde: xt,
        certificate: cert,
    })
}

/// Recovers the parameter `Ỹ` of a C-self-adjoint contractive extension `W`.
/// Returns the parameter and the reconstruction residual
/// `||W - W(Ỹ)||_F`.
pub fn contractive_recover(kit: &ExtensionKit, w: &CMatrix) -> Result<(ContractiveParam, f64)> {
    let k = crandall_recover(kit, w)?;
    let xt = k.adjoint();
    let y = &kit.d_x0star_pinv * xt * kit.l0_perp.projector();
    let rebuilt = symmetrized_crandall(kit, &x_tilde(kit, &y));
    let residual = fro(&(w - rebuilt));
    Ok((ContractiveParam::new(y), residual))
}

/// The center `W0` in its defining and expanded forms.
#[derive(Debug, Clone)]
pub struct Center {
    /// `W0 = (Ṽ_{X0*} + C Ṽ_{X0*}^* C) / 2`.
    pub w0: CMatrix,
    /// `Ṽ_{X0*} = V P + D_{V*} X0^* P^⊥`.
    pub crandall_center: CMatrix,
    /// Deviation from `V P + C V^* C P^⊥ + (C P^⊥ C D_{V*} X0^* + C X̃0 D_{V*} C) P^⊥ / 2`.
    pub expanded_residual: f64,
    /// Deviation from `Ṽ_{X0*} + (C X̃0 D_{V*} C - C P^⊥ C D_{V*} X0^*) P^⊥ / 2`.
    pub corrected_residual: f64,
}

pub fn center_w0(kit: &ExtensionKit) -> Center {
    let conj_op = &kit.conj;
    let d_x0s = &kit.d_vstar * kit.x0.adjoint();
    let crandall_center = &kit.v_p + &d_x0s * &kit.p_perp;
    let w0 = (&crandall_center + conj_op.c_star_unchecked(&crandall_center)) * c(HALF, 0.0);

    let twisted = conj_op.sandwich_unchecked(&(&kit.x0 * &kit.d_vstar));
    let projected = &kit.p_c_h_perp * &d_x0s;
    let expanded = &kit.v_p
        + &kit.c_vstar_c * &kit.p_perp
        + (&projected + &twisted) * &kit.p_perp * c(HALF, 0.0);
    let corrected = &crandall_center + (&twisted - &projected) * &kit.p_perp * c(HALF, 0.0);
    Center {
        expanded_residual: fro(&(&w0 - expanded)),
        corrected_residual: fro(&(&w0 - corrected)),
        w0,
        crandall_center,
    }
}

/// `V P + C V^* C P^⊥`, the extension at `Ỹ = 0` / `R = 0`.
pub fn t_z0(kit: &ExtensionKit) -> CMatrix {
    &kit.v_p + &kit.c_vstar_c * &kit.p_perp
}

/// Bounded C-self-adjoint extension from either parameterization.
pub fn bounded_extend(kit: &ExtensionKit, p: &BoundedParam) -> Result<CMatrix> {
    p.validate(kit)?;
    let base = t_z0(kit);
    Ok(match p {
        BoundedParam::Raikh(r) => base + r * &kit.p_perp,
        BoundedParam::Tz(y) => {
            let sym = y.adjoint() + kit.conj.sandwich_unchecked(y);
            base + sym * &kit.p_perp * c(HALF, 0.0)
        }
    })
}

/// `(Ṽ_Z̃ + C Ṽ_Z̃^* C) / 2` with `Ṽ_Z̃ = V P + Z̃^* P^⊥`, for an extension
/// `Z̃: H -> H_V^⊥` of `Z0`.
pub fn symmetrized_extension(kit: &ExtensionKit, z_tilde: &CMatrix) -> Result<CMatrix> {
    let n = kit.ambient_dim();
    ensure_shape(z_tilde, (n, n))?;
    let tol = kit.tol.residual_tol;
    let mismatch = fro(&(z_tilde * kit.c_h.projector() - &kit.z0));
    if mismatch > tol {
        return Err(invalid("Z̃ must extend Z0 on C H_V", mismatch));
    }
    let range = fro(&(z_tilde - &kit.p_perp * z_tilde));
    if range > tol {
        return Err(invalid("Z̃ must map into H_V^⊥", range));
    }
    let vz = &kit.v_p + z_tilde.adjoint() * &kit.p_perp;
    Ok((&vz + kit.conj.c_star_unchecked(&vz)) * c(HALF, 0.0))
}

/// Extension and C-self-adjointness residuals of a candidate extension.
pub fn bounded_certificate(kit: &ExtensionKit, t: &CMatrix) -> Certificate {
    let tol = kit.tol.residual_tol;
    let mut cert = Certificate::new();
    cert.at_most("extension", extension_residual(kit, t), tol)
        .at_most("c_self_adjoint", fro(&(t - kit.conj.c_star_unchecked(t))), tol);
    cert
}

/// Recovers the parameter of a bounded C-self-adjoint extension `T`.
///
/// For the `tz` form the map `Ỹ -> T` is not injective; the canonical
/// representative `Ỹ = (T - T_{Z0})^*` is returned, for which
/// `(Ỹ^* + C Ỹ C) / 2 = Ỹ^*`.
pub fn bounded_recover(kit: &ExtensionKit, t: &CMatrix, variant: BoundedVariant) -> Result<BoundedParam> {
    let n = kit.ambient_dim();
    ensure_shape(t, (n, n))?;
    ensure_finite(t)?;
    let tol = kit.tol.residual_tol;
    let ext = extension_residual(kit, t);
    if ext > tol {
        return Err(Error::NotExtension { residual: ext });
    }
    let sym = fro(&(t - kit.conj.c_star_unchecked(t)));
    if sym > tol * (1.0 + fro(t)) {
        return Err(Error::NotCSelfAdjoint { residual: sym });
    }
    let delta = &kit.p_c_h_perp * (t - t_z0(kit)) * &kit.p_perp;
    let delta = kit
        .conj
        .symmetrize(&delta)
        .expect("kit dimensions are consistent");
    let param = match variant {
        BoundedVariant::Raikh => BoundedParam::Raikh(delta),
        BoundedVariant::Tz => BoundedParam::Tz(delta.adjoint()),
    };
    let rebuilt = bounded_extend(kit, &param)?;
    let residual = fro(&(rebuilt - t));
    if residual > tol * (1.0 + fro(t)) {
        return Err(Error::ReconstructionResidual { residual });
    }
    Ok(param)
}

/// The ball `center + R_l Y R_r` of contractive extensions of the pair
/// `{V, C V C}`.
#[derive(Debug, Clone)]
pub struct OperatorBall {
    pub center: CMatrix,
    pub r_l: CMatrix,
    pub r_r: CMatrix,
    /// `||R_l^2 - (D_{V*}^2)_{C H_V^⊥}||` against the shorted operator.
    pub shorted_residual: f64,
    /// `||R_r^2 - C D_{V*} C P_{Ω_r} C D_{V*} C||`.
    pub right_radius_residual: f64,
}

pub fn operator_ball(kit: &ExtensionKit) -> Result<OperatorBall> {
    let tol = kit.tol;
    let d = &kit.d_vstar;
    let center = &kit.v_p + d * kit.x0.adjoint() * &kit.p_perp;
    let r_l_sq = crate::linalg::hermitian_part(&(d * kit.omega_l.projector() * d));
    let r_r_sq = crate::linalg::hermitian_part(&kit.conj.sandwich_unchecked(&r_l_sq));
    let r_l = psd_sqrt_scaled(&r_l_sq, 1.0, tol)?;
    let r_r = psd_sqrt_scaled(&r_r_sq, 1.0, tol)?;
    let shorted = shorted_operator(&(d * d), &kit.c_h_perp, tol)?;
    let c_d_c = kit.conj.sandwich_unchecked(d);
    let right = &c_d_c * kit.omega_r.projector() * &c_d_c;
    Ok(OperatorBall {
        shorted_residual: fro(&(&r_l_sq - shorted)),
        right_radius_residual: fro(&(&r_r_sq - right)),
        center,
        r_l,
        r_r,
    })
}

impl OperatorBall {
    pub fn is_point(&self, tol: f64) -> bool {
        operator_norm(&self.r_l) <= tol
    }

    /// Coordinates `Y' = R_l^+ (W - center) R_r^+` of `W` in the ball and the
    /// reconstruction residual `||center + R_l Y' R_r - W||_F`.
    pub fn coordinates(&self, w: &CMatrix, tol: crate::linalg::Tolerance) -> (CMatrix, f64) {
        let n = self.center.nrows();
        if self.is_point(tol.residual_tol) {
            return (CMatrix::zeros(n, n), fro(&(w - &self.center)));
        }
        let left = pinv_scaled(&self.r_l, 1.0, tol);
        let right = pinv_scaled(&self.r_r, 1.0, tol);
        let y = left * (w - &self.center) * right;
        let rebuilt = &self.center + &self.r_l * &y * &self.r_r;
        (y, fro(&(rebuilt - w)))
    }
}

/// One computable probe of a uniqueness condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub id: String,
    pub value: f64,
    pub verdict: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    /// `dim(ran D_{V*} ∩ C H_V^⊥)`.
    pub intersection_dim: usize,
    /// `||X0 X0^* - I||` on `H_V^⊥`.
    pub x0_coisometry_residual: f64,
    /// `L0 = 𝔇_{V*}`.
    pub l0_full: bool,
    pub radius_norm: f64,
    pub radius_zero: bool,
    pub unique: bool,
    /// The three exactly equivalent criteria agree, and a unique extension
    /// comes with a co-isometric `X0`.
    pub criteria_agree: bool,
    pub probe_results: Vec<Probe>,
}

/// `max_{h ∈ N, |h| = 1} min_{φ ∈ span(G)} ||B^{1/2} (h - φ)||^2` where the
/// square root `root` and generator `g` are given.
pub(crate) fn worst_affine_residual(root: &CMatrix, g: &CMatrix, n_basis: &CMatrix, scale: f64, tol: crate::linalg::Tolerance) -> f64 {
    if n_basis.ncols() == 0 {
        return 0.0;
    }
    let reach = range_basis_scaled(&(root * g), scale, tol);
    let image = root * n_basis;
    let leftover = &image - reach.basis() * (reach.basis().adjoint() * &image);
    let s = operator_norm(&leftover);
    s * s
}

/// `min_{h ∈ span(h_basis), |h| = 1} h^* (B + eps)^{-1} h` for PSD `b` with
/// unit scale; large values mean every such `h` leaves `ran B^{1/2}`.
pub(crate) fn regularized_ratio(b: &CMatrix, h_basis: &CMatrix, eps: f64) -> f64 {
    if h_basis.ncols() == 0 {
        return f64::INFINITY;
    }
    let (vals, vecs) = clamped_eigen(b);
    let inv = CMatrix::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j {
            c(1.0 / (vals[i].max(0.0) + eps), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let resolvent = &vecs * inv * vecs.adjoint();
    let compressed = h_basis.adjoint() * resolvent * h_basis;
    hermitian_eigen(&compressed).0.first().copied().unwrap_or(f64::INFINITY)
}

/// Eigen-decomposition of a PSD matrix with rounding-level eigenvalues set
/// to zero.
fn clamped_eigen(b: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (mut vals, vecs) = hermitian_eigen(b);
    let top = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 64.0 * f64::EPSILON * vals.len() as f64 * top;
    for v in &mut vals {
        if *v <= floor {
            *v = 0.0;
        }
    }
    (vals, vecs)
}

/// Uniqueness of the C-self-adjoint contractive extension: exact criteria
/// plus numerical probes of the equivalent quadratic-minimization and
/// unboundedness conditions (`probes` random directions, seeded).
pub fn uniqueness_report(kit: &ExtensionKit, probes: usize, seed: u64) -> Result<UniquenessReport> {
    let tol = kit.tol;
    let n = kit.ambient_dim();
    let range_d = range_basis_scaled(&kit.d_vstar, 1.0, tol);
    let inter = intersect(&range_d, &kit.c_h_perp, tol)?;
    let coiso = fro(&((&kit.x0 * kit.x0.adjoint() - &kit.p_perp) * kit.h_perp.basis()));
    let l0_full = kit.l0.dim() == kit.frak_d_vstar.dim();
    let ball = operator_ball(kit)?;
    let radius_norm = operator_norm(&ball.r_l);
    let radius_zero = radius_norm <= tol.residual_tol;
    let unique = inter.dim() == 0;
    let criteria_agree = unique == l0_full
        && unique == radius_zero
        && (!unique || coiso <= tol.residual_tol);

    let d = &kit.d_vstar;
    let d_sq = crate::linalg::hermitian_part(&(d * d));
    let n_basis = kit.c_h_perp.basis();
    let eps = tol.rank_tol * tol.rank_tol;
    let threshold = 1.0 / tol.rank_tol;
    let mut probe_results = Vec::new();

    let inf_exact = worst_affine_residual(d, kit.c_h.basis(), n_basis, 1.0, tol);
    probe_results.push(Probe {
        id: "infimum_over_complement".into(),
        value: inf_exact,
        verdict: inf_exact <= tol.residual_tol,
    });
    let ratio_exact = regularized_ratio(&d_sq, n_basis, eps);
    probe_results.push(Probe {
        id: "unbounded_ratio".into(),
        value: ratio_exact,
        verdict: ratio_exact >= threshold,
    });

    if probes > 0 && !n_basis.is_empty() {
        let mut rng = trial_rng(seed, 0);
        let coeffs = gaussian_matrix(&mut rng, n_basis.ncols(), probes);
        let reach = range_basis_scaled(&(d * kit.c_h.basis()), 1.0, tol);
        let mut worst_inf = 0.0_f64;
        let mut worst_ratio = f64::INFINITY;
        let (vals, vecs) = clamped_eigen(&d_sq);
        for j in 0..probes {
            let h = n_basis * coeffs.column(j);
            let h = &h / c(h.norm(), 0.0);
            let image = d * &h;
            let leftover = &image - reach.basis() * (reach.basis().adjoint() * &image);
            worst_inf = worst_inf.max(leftover.norm_squared());
            let coords = vecs.adjoint() * &h;
            let ratio: f64 = coords
                .iter()
                .zip(&vals)
                .map(|(z, &l)| z.norm_sqr() / (l.max(0.0) + eps))
                .sum();
            worst_ratio = worst_ratio.min(ratio);
        }
        probe_results.push(Probe {
            id: "infimum_sampled".into(),
            value: worst_inf,
            verdict: worst_inf <= tol.residual_tol,
        });
        probe_results.push(Probe {
            id: "unbounded_ratio_sampled".into(),
            value: worst_ratio,
            verdict: worst_ratio >= threshold,
        });
    }

    let center = center_w0(kit);
    let center_gap = fro(&(&center.w0 - &center.crandall_center));
    probe_results.push(Probe {
        id: "center_equals_crandall_center".into(),
        value: center_gap,
        verdict: center_gap <= tol.residual_tol,
    });
    let perp = kit.h_perp.basis();
    let lhs = &kit.p_perp * kit.conj.on_columns(&(d * kit.x0.adjoint() * perp));
    let rhs = &kit.x0 * d * kit.conj.on_columns(perp);
    let block = max_column_norm(&(lhs - rhs));
    probe_results.push(Probe {
        id: "perp_block_identity".into(),
        value: block,
        verdict: block <= tol.residual_tol,
    });
    let _ = n;

    Ok(UniquenessReport {
        intersection_dim: inter.dim(),
        x0_coisometry_residual: coiso,
        l0_full,
        radius_norm,
        radius_zero,
        unique,
        criteria_agree,
        probe_results,
    })
}

impl UniquenessReport {
    pub fn probe(&self, id: &str) -> Option<&Probe> {
        self.probe_results.iter().find(|p| p.id == id)
    }
}

/// `||D_{Ṽ} f||^2` identities for a Crandall extension, evaluated on
/// `samples` random vectors. Values are relative to `1 + ||f||^2`.
pub fn check_crandall_defects(kit: &ExtensionKit, k: &CMatrix, samples: usize, seed: u64) -> Result<Certificate> {
    let tol = kit.tol;
    let n = kit.ambient_dim();
    let vk = crandall_extend(kit, k)?;
    let kp = k * &kit.p_perp;
    let d_vk = crate::linalg::defect(&vk, tol)?;
    let d_vk_star = crate::linalg::defect(&vk.adjoint(), tol)?;
    let d_k = crate::linalg::defect(&kp, tol)?;
    let d_k_star = crate::linalg::defect(&kp.adjoint(), tol)?;
    let q = kit.v.domain().basis();
    // D_V acts on H_V; lift it to the ambient space through the domain basis.
    let d_v_amb = q * &kit.d_v * q.adjoint();
    let v_star = kit.v.adjoint_ambient();

    let mut rng = trial_rng(seed, 0);
    let fs = gaussian_matrix(&mut rng, n, samples);
    let mut first = 0.0_f64;
    let mut second = 0.0_f64;
    for j in 0..samples {
        let f = fs.column(j).into_owned();
        let scale = 1.0 + f.norm_squared();
        let pf = &kit.p_dom * &f;
        let pf_perp = &kit.p_perp * &f;
        let lhs = (&d_vk * &f).norm_squared();
        let rhs = (&d_v_amb * &pf - &v_star * &kp * &pf_perp).norm_squared()
            + (&d_k * &pf_perp).norm_squared();
        first = first.max((lhs - rhs).abs() / scale);
        let lhs = (&d_vk_star * &f).norm_squared();
        let rhs = (&d_k_star * &kit.d_vstar * &f).norm_squared();
        second = second.max((lhs - rhs).abs() / scale);
    }
    let mut cert = Certificate::new();
    cert.at_most("defect_of_extension", first, tol.residual_tol)
        .at_most("defect_of_adjoint", second, tol.residual_tol);
    Ok(cert)
}

/// For C-self-adjoint contractive `W`: `||D_W^2 - C D_{W*}^2 C||` and the
/// polynomial identities `φ(W^* W) = C φ(W W^*) C` for `φ(t) = t, t^2`.
pub fn check_defect_symmetry(kit: &ExtensionKit, w: &CMatrix) -> Certificate {
    let n = kit.ambient_dim();
    let conj_op = &kit.conj;
    let wsw = w.adjoint() * w;
    let wws = w * w.adjoint();
    let d_sq = identity(n) - &wsw;
    let d_star_sq = identity(n) - &wws;
    let tol = kit.tol.residual_tol;
    let mut cert = Certificate::new();
    cert.at_most("defect_squares", fro(&(&d_sq - conj_op.sandwich_unchecked(&d_star_sq))), tol)
        .at_most("polynomial_t", fro(&(&wsw - conj_op.sandwich_unchecked(&wws))), tol)
        .at_most(
            "polynomial_t2",
            fro(&(&wsw * &wsw - conj_op.sandwich_unchecked(&(&wws * &wws)))),
            tol,
        );
    cert
}

/// Checks the characterization of the center's own parameter `Ỹ0`:
/// `D_{V*} Ỹ0^* D_{X0*} f = (C X̃0 D_{V*} C - P_{C H_V^⊥} D_{V*} X0^*) f / 2`
/// on `H_V^⊥`.
pub fn center_parameter_residual(kit: &ExtensionKit) -> Result<f64> {
    let center = center_w0(kit);
    let (param, _) = contractive_recover(kit, &center.w0)?;
    let d = &kit.d_vstar;
    let lhs = d * param.matrix().adjoint() * &kit.d_x0star;
    let rhs = (kit.conj.sandwich_unchecked(&(&kit.x0 * d)) - &kit.p_c_h_perp * d * kit.x0.adjoint())
        * c(HALF, 0.0);
    Ok(fro(&((lhs - rhs) * kit.h_perp.basis())))
}

/// Random C-self-adjoint direction supported as `C H_V^⊥ <- H_V^⊥`,
/// normalized to unit operator norm (zero when `H_V^⊥ = {0}`).
pub(crate) fn random_raikh_direction(kit: &ExtensionKit, rng: &mut impl rand::Rng) -> CMatrix {
    let n = kit.ambient_dim();
    let g = gaussian_matrix(rng, n, n);
    let r = kit.conj.symmetrize(&(&kit.p_c_h_perp * g * &kit.p_perp)).expect("square");
    let norm = operator_norm(&r);
    if norm == 0.0 {
        r
    } else {
        r / c(norm, 0.0)
    }
}

/// Subspace helper for callers that need `𝔇_{V*}` intersections.
pub fn defect_range(kit: &ExtensionKit) -> Subspace {
    range_basis_scaled(&kit.d_vstar, 1.0, kit.tol)
}
