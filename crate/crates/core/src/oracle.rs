//! Seeded random instances, fixtures and brute-force completeness searches.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::conjugation::Conjugation;
use crate::dissipative::{cayley_inverse, DissipativeOperator};
use crate::error::{Error, Result};
use crate::extensions::{
    center_w0, contractive_recover, cself_contractive_extend, extension_residual,
    random_raikh_direction, ContractiveParam,
};
use crate::linalg::{
    c, conj, fro, identity, intersect, range_basis, range_basis_scaled, within_norm, CMatrix,
    Subspace, Tolerance,
};
use crate::partial::{build_kit, ExtensionKit, PartialOperator};

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    })
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase fix).
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random conjugation `S = U U^T` with `U` Haar unitary.
pub fn random_conjugation(rng: &mut impl Rng, n: usize) -> Conjugation {
    let u = random_unitary(rng, n);
    let s = &u * u.transpose();
    let s = (&s + s.transpose()) * c(0.5, 0.0);
    Conjugation::from_symmetric_unitary(s)
}

/// Uniformly distributed `m`-dimensional subspace.
pub fn random_subspace(rng: &mut impl Rng, n: usize, m: usize) -> Subspace {
    if m == 0 {
        return Subspace::zero(n);
    }
    let u = random_unitary(rng, n);
    Subspace::new(u.columns(0, m).into_owned(), Tolerance::default()).expect("unitary columns")
}

/// A C-symmetric contraction together with its conjugation.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub conj: Conjugation,
    pub v: PartialOperator,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.v.ambient_dim()
    }

    pub fn kit(&self, tol: Tolerance) -> Result<ExtensionKit> {
        build_kit(&self.v, &self.conj, tol)
    }
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n == 0 || m > n {
        return Err(Error::BadDims(format!("need 0 < n and m <= n, got n = {n}, m = {m}")));
    }
    Ok(())
}

/// Random C-symmetric contraction: the restriction of a random C-self-adjoint
/// matrix of norm in `[0.2, 0.95]` to a random `m`-dimensional subspace.
pub fn random_instance(seed: u64, n: usize, m: usize) -> Result<ProblemInstance> {
    check_dims(n, m)?;
    let mut rng = trial_rng(seed, 0);
    let conj_op = random_conjugation(&mut rng, n);
    let g = gaussian_matrix(&mut rng, n, n);
    let sym = conj_op.symmetrize(&g)?;
    let target: f64 = rng.random_range(0.2..0.95);
    let norm = crate::linalg::operator_norm(&sym);
    let sym = if norm > 0.0 { sym * c(target / norm, 0.0) } else { sym };
    let domain = random_subspace(&mut rng, n, m);
    let v = PartialOperator::restriction(&sym, domain)?;
    Ok(ProblemInstance { conj: conj_op, v, seed })
}

/// Random C-symmetric isometry on `m >= n/2` dimensions, resampled until the
/// C-self-adjoint contractive extension is unique.
pub fn unique_instance(seed: u64, n: usize, m: usize) -> Result<ProblemInstance> {
    check_dims(n, m)?;
    if 2 * m < n {
        return Err(Error::BadDims(format!("unique instances need 2m >= n, got n = {n}, m = {m}")));
    }
    let tol = Tolerance::default();
    for attempt in 0..100u64 {
        let mut rng = trial_rng(seed, attempt);
        let conj_op = random_conjugation(&mut rng, n);
        let other = random_conjugation(&mut rng, n);
        let u = conj_op.compose_with_conjugation(&other)?.unitary;
        let domain = random_subspace(&mut rng, n, m);
        let v = PartialOperator::restriction(&u, domain)?;
        let inst = ProblemInstance { conj: conj_op, v, seed };
        let kit = match inst.kit(tol) {
            Ok(k) => k,
            Err(_) => continue,
        };
        let range_d = range_basis_scaled(kit.d_vstar(), 1.0, tol);
        if intersect(&range_d, kit.c_domain_perp(), tol)?.dim() == 0 {
            return Ok(inst);
        }
    }
    Err(Error::BadDims(format!("no unique instance found for n = {n}, m = {m}")))
}

/// Random dissipative operator on a random `k`-dimensional domain:
/// `T q = Q (H + i P) + (I - Q Q^*) R`, `H` Hermitian, `P >= 0`.
pub fn random_dissipative(seed: u64, n: usize, k: usize) -> Result<DissipativeOperator> {
    check_dims(n, k)?;
    let tol = Tolerance::default();
    let mut rng = trial_rng(seed, 0);
    let domain = random_subspace(&mut rng, n, k);
    let q = domain.basis().clone();
    let h = crate::linalg::hermitian_part(&gaussian_matrix(&mut rng, k, k));
    let g = gaussian_matrix(&mut rng, k, k);
    let p = &g * g.adjoint() * c(0.25, 0.0);
    let r = gaussian_matrix(&mut rng, n, k);
    let inner = h + p * c(0.0, 1.0);
    let action = &q * inner + (identity(n) - &q * q.adjoint()) * r;
    let op = PartialOperator::new(domain, action)?;
    DissipativeOperator::new(op, tol)
}

/// Random C-symmetric dissipative operator: the inverse Cayley transform at
/// `λ = i` of a random C-symmetric contraction (an isometric one with unique
/// extension when `unique` is set).
pub fn random_csym_dissipative(seed: u64, n: usize, m: usize, unique: bool) -> Result<(Conjugation, DissipativeOperator)> {
    let tol = Tolerance::default();
    let lambda = c(0.0, 1.0);
    let mut last = None;
    for attempt in 0..20u64 {
        let sub = seed.wrapping_mul(1_000_003).wrapping_add(attempt);
        let inst = if unique {
            unique_instance(sub, n, m)?
        } else {
            random_instance(sub, n, m)?
        };
        match cayley_inverse(&inst.v, lambda, tol) {
            Ok(t) => return Ok((inst.conj, t)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::BadDims("no dissipative instance".into())))
}

pub mod fixtures {
    //! Small hand-checkable instances on `C^2` with the standard conjugation.

    use super::*;
    use crate::linalg::{unit_vector, zeros, I as IM};

    #[derive(Debug, Clone)]
    pub struct Fixture {
        pub conj: Conjugation,
        pub v: PartialOperator,
    }

    impl Fixture {
        pub fn instance(&self) -> ProblemInstance {
            ProblemInstance {
                conj: self.conj.clone(),
                v: self.v.clone(),
                seed: 0,
            }
        }
    }

    /// `V e1 = e2` on `span{e1}`: unique extension (the swap).
    pub fn e1() -> Fixture {
        Fixture {
            conj: Conjugation::standard(2),
            v: PartialOperator::new(Subspace::coordinate(2, &[0]), unit_vector(2, 1)).unwrap(),
        }
    }

    /// `V = 0` on `span{e1}`: extensions `diag(0, b)`, `|b| <= 1`.
    pub fn e2() -> Fixture {
        Fixture {
            conj: Conjugation::standard(2),
            v: PartialOperator::new(Subspace::coordinate(2, &[0]), zeros(2, 1)).unwrap(),
        }
    }

    #[derive(Debug, Clone)]
    pub struct DissipativeFixture {
        pub conj: Conjugation,
        pub t: DissipativeOperator,
    }

    /// `T e1 = i e1` on `span{e1}`.
    pub fn glazman() -> DissipativeFixture {
        let op = PartialOperator::new(Subspace::coordinate(2, &[0]), unit_vector(2, 0) * IM).unwrap();
        DissipativeFixture {
            conj: Conjugation::standard(2),
            t: DissipativeOperator::new(op, Tolerance::default()).unwrap(),
        }
    }
}

/// Outcome of a randomized completeness search.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub trials: usize,
    /// Samples whose parameter could be recovered and re-validated.
    pub recovered: usize,
    /// `max ||W - W(Ỹ(W))||_F` over samples, with `+inf` for samples whose
    /// recovered parameter was not a contraction.
    pub max_distance_to_formula_set: f64,
    pub max_distance_to_center: f64,
    #[serde(skip)]
    pub witnesses: Vec<CMatrix>,
}

struct Trial {
    distance: f64,
    center_distance: f64,
    recovered: bool,
    witness: Option<CMatrix>,
}

/// `(W + t R)^* (W + t R) = A + t B + t^2 C` for fast contraction tests
/// along a line.
struct Pencil {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
}

impl Pencil {
    fn new(w: &CMatrix, r: &CMatrix) -> Self {
        let cross = w.adjoint() * r;
        Pencil {
            a: w.adjoint() * w,
            b: &cross + cross.adjoint(),
            c: r.adjoint() * r,
        }
    }

    fn contractive_at(&self, t: f64, bound: f64, scratch: &mut CMatrix) -> bool {
        let n = self.a.nrows();
        let b2 = bound * bound;
        for j in 0..n {
            for i in j..n {
                let mut z = -(self.a[(i, j)] + self.b[(i, j)] * t + self.c[(i, j)] * (t * t));
                if i == j {
                    z = c(z.re + b2, 0.0);
                }
                scratch[(i, j)] = z;
            }
        }
        crate::linalg::positive_definite_in_place(scratch)
    }
}

/// Samples C-self-adjoint contractive extensions independently of the
/// parameterization (center plus a random C-self-adjoint direction supported
/// on `C H_V^⊥ <- H_V^⊥`, scaled up to the contraction boundary) and measures
/// how far each is from the parameterized family.
pub fn coverage_search(inst: &ProblemInstance, trials: usize, tol: Tolerance) -> Result<SearchReport> {
    let kit = inst.kit(tol)?;
    let w0 = center_w0(&kit).w0;
    let bound = 1.0 + 1e-13;
    let results: Vec<Result<Trial>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(inst.seed, trial as u64 + 1);
            let dir = random_raikh_direction(&kit, &mut rng);
            let mut lo = 0.0_f64;
            if fro(&dir) > 0.0 {
                let pencil = Pencil::new(&w0, &dir);
                let mut scratch = CMatrix::zeros(w0.nrows(), w0.ncols());
                let mut hi = 2.0_f64;
                for _ in 0..48 {
                    let mid = 0.5 * (lo + hi);
                    if pencil.contractive_at(mid, bound, &mut scratch) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
            let t = if rng.random_range(0..4) == 0 {
                lo
            } else {
                lo * rng.random::<f64>()
            };
            let w = &w0 + &dir * c(t, 0.0);
            let center_distance = fro(&(&w - &w0));
            let (param, residual) = contractive_recover(&kit, &w)?;
            let contractive = within_norm(param.matrix(), 1.0 + tol.residual_tol);
            let distance = if contractive { residual } else { f64::INFINITY };
            let recovered = contractive && residual <= tol.residual_tol;
            Ok(Trial {
                distance,
                center_distance,
                recovered,
                witness: (!recovered).then_some(w),
            })
        })
        .collect();
    let mut report = SearchReport {
        trials,
        recovered: 0,
        max_distance_to_formula_set: 0.0,
        max_distance_to_center: 0.0,
        witnesses: Vec::new(),
    };
    for r in results {
        let t = r?;
        report.recovered += usize::from(t.recovered);
        report.max_distance_to_formula_set = report.max_distance_to_formula_set.max(t.distance);
        report.max_distance_to_center = report.max_distance_to_center.max(t.center_distance);
        if let Some(w) = t.witness {
            if report.witnesses.len() < 10 {
                report.witnesses.push(w);
            }
        }
    }
    Ok(report)
}

/// Outcome of the exhaustive grid comparison on `C^2`.
#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub step: f64,
    pub grid_points: usize,
    /// Grid points classified as C-self-adjoint contractive extensions.
    pub classified: usize,
    /// Extensions produced by the formula over a parameter grid.
    pub formula_points: usize,
    /// `max` over classified points of the distance to the nearest formula point.
    pub forward_distance: f64,
    /// `max` over formula points of the distance to the nearest classified point.
    pub backward_distance: f64,
    /// `max ||W - W(Ỹ(W))||_F` over classified points.
    pub max_distance_to_formula_set: f64,
}

const GRID_LIMIT: usize = 50_000_000;

type M2 = [[Complex64; 2]; 2];

fn to_m2(m: &CMatrix) -> M2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn from_m2(m: &M2) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| m[i][j])
}

fn fro2(a: &M2, b: &M2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (a[i][j] - b[i][j]).norm_sqr();
        }
    }
    s.sqrt()
}

/// Largest singular value of a 2x2 matrix.
fn norm2(a: &M2) -> f64 {
    let f: f64 = a.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (f * f - 4.0 * det.norm_sqr()).max(0.0);
    ((f + disc.sqrt()) / 2.0).sqrt()
}

/// `S A^T conj(S)` for 2x2 matrices.
fn c_star2(s: &M2, a: &M2) -> M2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = c(0.0, 0.0);
            for k in 0..2 {
                for l in 0..2 {
                    acc += s[i][k] * a[l][k] * s[l][j].conj();
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

fn grid_values(step: f64) -> Vec<f64> {
    let count = (2.0 / step + 1e-9).floor() as usize;
    (0..=count).map(|i| -1.0 + i as f64 * step).collect()
}

/// Brute-force comparison on `C^2`: enumerates every `W = V P + l e^*` on a
/// grid of step `step` (with `e` spanning `H_V^⊥`), keeps the C-self-adjoint
/// contractions, and compares them with the formula evaluated on a grid of
/// parameters.
pub fn grid_enumerate_2x2(inst: &ProblemInstance, step: f64, tol: Tolerance) -> Result<GridReport> {
    let n = inst.dim();
    if n != 2 {
        return Err(Error::DimNot2(n));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::BadDims(format!("grid step must lie in (0, 1], got {step}")));
    }
    let kit = inst.kit(tol)?;
    let values = grid_values(step);
    let k = kit.domain_perp().dim();
    let free = 4 * k;
    let grid_points = values
        .len()
        .checked_pow(free as u32)
        .filter(|&p| p <= GRID_LIMIT)
        .ok_or_else(|| Error::BadDims(format!("grid with {} free reals is too large", free)))?;
    let s = to_m2(inst.conj.coefficient());
    let base = to_m2(kit.v_p());
    let sym_tol = tol.residual_tol.max(1e-12);

    let mut classified: Vec<M2> = Vec::new();
    let mut accept = |w: M2| {
        let sym = fro2(&w, &c_star2(&s, &w));
        if sym <= sym_tol && norm2(&w) <= 1.0 + sym_tol {
            classified.push(w);
        }
    };
    match k {
        0 => accept(base),
        1 => {
            let e = kit.domain_perp().basis();
            let (e0, e1) = (e[(0, 0)].conj(), e[(1, 0)].conj());
            for &a in &values {
                for &b in &values {
                    let l0 = c(a, b);
                    for &x in &values {
                        for &y in &values {
                            let l1 = c(x, y);
                            let w = [
                                [base[0][0] + l0 * e0, base[0][1] + l0 * e1],
                                [base[1][0] + l1 * e0, base[1][1] + l1 * e1],
                            ];
                            accept(w);
                        }
                    }
                }
            }
        }
        _ => {
            return Err(Error::BadDims(format!(
                "grid with {} free reals is too large",
                free
            )))
        }
    }

    let formula = formula_grid(&kit, &values)?;
    let forward_distance = classified
        .iter()
        .map(|g| formula.iter().map(|f| fro2(g, f)).fold(f64::INFINITY, f64::min))
        .fold(0.0_f64, f64::max);
    let backward_distance = formula
        .iter()
        .map(|f| classified.iter().map(|g| fro2(g, f)).fold(f64::INFINITY, f64::min))
        .fold(0.0_f64, f64::max);
    let mut recovery = 0.0_f64;
    for g in &classified {
        let w = from_m2(g);
        let (param, residual) = contractive_recover(&kit, &w)?;
        let d = if within_norm(param.matrix(), 1.0 + tol.residual_tol) {
            residual
        } else {
            f64::INFINITY
        };
        recovery = recovery.max(d);
    }
    Ok(GridReport {
        step,
        grid_points,
        classified: classified.len(),
        formula_points: formula.len(),
        forward_distance,
        backward_distance,
        max_distance_to_formula_set: recovery,
    })
}

/// Formula outputs `W(Ỹ)` for `Ỹ = y u w^*` with `y` on the complex grid,
/// `|y| <= 1`, where `u`, `w` span `𝔇_{X0*}` and `L0^⊥` (each at most one
/// dimensional on `C^2` with a one-dimensional domain).
fn formula_grid(kit: &ExtensionKit, values: &[f64]) -> Result<Vec<M2>> {
    let u = kit.x0_defect_space();
    let w = kit.l0_perp();
    if u.dim() * w.dim() == 0 {
        let ext = cself_contractive_extend(kit, &ContractiveParam::zero(2))?;
        return Ok(vec![to_m2(&ext.w)]);
    }
    if u.dim() > 1 || w.dim() > 1 {
        return Err(Error::BadDims("formula grid needs one-dimensional parameter blocks".into()));
    }
    let outer = u.basis() * w.basis().adjoint();
    let mut out = Vec::new();
    for &a in values {
        for &b in values {
            let y = c(a, b);
            if y.norm() > 1.0 + 1e-12 {
                continue;
            }
            let y = if y.norm() > 1.0 { y / y.norm() } else { y };
            let ext = cself_contractive_extend(kit, &ContractiveParam::new(&outer * y))?;
            out.push(to_m2(&ext.w));
        }
    }
    Ok(out)
}

/// A C-self-adjoint contractive extension that is an independent certificate
/// of existence: `W0` checked directly for every property.
pub fn certify_center(kit: &ExtensionKit) -> (CMatrix, f64) {
    let w0 = center_w0(kit).w0;
    let sym = fro(&(&w0 - kit.conjugation().c_star(&w0).expect("square")));
    let ext = extension_residual(kit, &w0);
    let excess = crate::linalg::operator_norm(&w0) - 1.0;
    (w0, sym.max(ext).max(excess))
}

/// Elementwise conjugate of a subspace basis, re-orthonormalized.
pub fn conj_subspace(u: &Subspace, tol: Tolerance) -> Subspace {
    range_basis(&conj(u.basis()), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator_norm;

    #[test]
    fn random_instances_are_valid() {
        let tol = Tolerance::default();
        for seed in 0..5 {
            let inst = random_instance(seed, 4, 2).unwrap();
            assert!(inst.v.c_symmetry_residual(&inst.conj).unwrap() < 1e-12);
            assert!(inst.v.norm() <= 0.95 + 1e-12);
            assert!(inst.kit(tol).is_ok());
        }
        assert!(matches!(random_instance(0, 2, 3), Err(Error::BadDims(_))));
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = random_instance(7, 3, 2).unwrap();
        let b = random_instance(7, 3, 2).unwrap();
        assert_eq!(a.v, b.v);
        assert_eq!(a.conj, b.conj);
    }

    #[test]
    fn unique_instances_are_isometric() {
        let inst = unique_instance(3, 4, 2).unwrap();
        let a = inst.v.action();
        assert!(fro(&(a.adjoint() * a - identity(2))) < 1e-12);
        assert!(matches!(unique_instance(0, 5, 2), Err(Error::BadDims(_))));
    }

    #[test]
    fn random_dissipative_is_dissipative() {
        for seed in 0..4 {
            let t = random_dissipative(seed, 4, 2).unwrap();
            assert!(t.margin() >= -1e-12);
        }
        let (conj_op, t) = random_csym_dissipative(1, 4, 2, false).unwrap();
        assert!(t.op().c_symmetry_residual(&conj_op).unwrap() < 1e-9 * (1.0 + t.op().norm()));
    }

    #[test]
    fn coverage_on_fixtures() {
        let tol = Tolerance::default();
        let r = coverage_search(&fixtures::e2().instance(), 64, tol).unwrap();
        assert_eq!(r.recovered, 64);
        assert!(r.max_distance_to_formula_set <= 1e-9);
        assert!(r.max_distance_to_center > 0.1);
        let r = coverage_search(&fixtures::e1().instance(), 16, tol).unwrap();
        assert_eq!(r.recovered, 16);
        assert!(r.max_distance_to_center <= 1e-12);
    }

    #[test]
    fn grid_on_fixtures() {
        let tol = Tolerance::default();
        let r = grid_enumerate_2x2(&fixtures::e2().instance(), 0.1, tol).unwrap();
        assert!(r.classified > 100);
        assert!(r.forward_distance <= 1e-9 && r.backward_distance <= 1e-9, "{r:?}");
        let r = grid_enumerate_2x2(&fixtures::e1().instance(), 0.05, tol).unwrap();
        assert_eq!(r.classified, 1);
        assert!(r.forward_distance <= 1e-9 && r.backward_distance <= 1e-9);
        let big = random_instance(0, 3, 1).unwrap();
        assert!(matches!(grid_enumerate_2x2(&big, 0.1, tol), Err(Error::DimNot2(3))));
    }

    #[test]
    fn center_is_certified() {
        let inst = random_instance(11, 5, 2).unwrap();
        let kit = inst.kit(Tolerance::default()).unwrap();
        let (w0, worst) = certify_center(&kit);
        assert!(worst <= 1e-9);
        assert!(operator_norm(&w0) <= 1.0 + 1e-9);
    }
}
