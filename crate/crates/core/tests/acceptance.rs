//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use csext::dissipative::{cayley_kit, check_defect_identities};
use csext::extensions::{
    bounded_certificate, check_crandall_defects, symmetrized_extension, t_z0,
};
use csext::linalg::{
    c, fro, hermitian_part, identity, operator_norm, shorted_operator, CMatrix, Subspace,
};
use csext::oracle::{
    coverage_search, fixtures, gaussian_matrix, grid_enumerate_2x2, random_csym_dissipative,
    random_dissipative, random_instance, random_subspace, trial_rng, unique_instance,
};
use csext::*;
use nalgebra::SymmetricEigen;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn tol() -> Tolerance {
    Tolerance::default()
}

/// Random contraction supported on the admissible blocks, with a random
/// norm in `[0, 1]`.
fn random_contractive_param(kit: &ExtensionKit, rng: &mut impl Rng) -> ContractiveParam {
    let n = kit.ambient_dim();
    let p = ContractiveParam::project(kit, &gaussian_matrix(rng, n, n)).unwrap();
    let norm = operator_norm(p.matrix());
    if norm == 0.0 {
        return p;
    }
    let r: f64 = rng.random();
    ContractiveParam::new(p.into_matrix() * c(r / norm, 0.0))
}

/// Random contraction `K: H_V^⊥ -> 𝔇_{V*}`.
fn random_crandall_param(kit: &ExtensionKit, rng: &mut impl Rng) -> CMatrix {
    let n = kit.ambient_dim();
    let g = kit.defect_space().projector() * gaussian_matrix(rng, n, n) * kit.domain_perp().projector();
    let norm = operator_norm(&g);
    if norm == 0.0 {
        return g;
    }
    let r: f64 = rng.random();
    g * c(r / norm, 0.0)
}

fn shape(rng: &mut impl Rng, lo: usize, hi: usize) -> (usize, usize) {
    let n = rng.random_range(lo..=hi);
    let m = rng.random_range(0..n);
    (n, m)
}

fn criterion_1() -> Outcome {
    let mut rng = trial_rng(1, 0);
    let mut worst = [0.0_f64; 3];
    for seed in 0..500 {
        let (n, m) = shape(&mut rng, 2, 8);
        let inst = random_instance(1000 + seed, n, m).unwrap();
        let kit = inst.kit(tol()).unwrap();
        let p = random_contractive_param(&kit, &mut rng);
        let ext = cself_contractive_extend(&kit, &p).unwrap();
        worst[0] = worst[0].max(ext.certificate.value("extension"));
        worst[1] = worst[1].max(ext.certificate.value("c_self_adjoint"));
        worst[2] = worst[2].max(ext.certificate.value("norm_excess"));
    }
    Outcome {
        pass: worst.iter().all(|&w| w <= 1e-8),
        detail: format!(
            "500 instances: extension {:.2e}, C-self-adjoint {:.2e}, norm excess {:.2e} (bound 1e-8)",
            worst[0], worst[1], worst[2]
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, fx) in [("E1", fixtures::e1()), ("E2", fixtures::e2())] {
        let r = grid_enumerate_2x2(&fx.instance(), 0.05, tol()).unwrap();
        pass &= r.forward_distance <= 1e-6 && r.backward_distance <= 1e-6 && r.classified > 0;
        detail.push(format!(
            "{name}: {} of {} grid points classified, forward {:.2e}, backward {:.2e}",
            r.classified, r.grid_points, r.forward_distance, r.backward_distance
        ));
    }
    Outcome {
        pass,
        detail: format!("{} (bound 1e-6)", detail.join("; ")),
    }
}

fn criterion_3() -> Outcome {
    let mut rng = trial_rng(3, 0);
    let mut agree = true;
    let mut worst_coiso = 0.0_f64;
    let mut worst_radius = 0.0_f64;
    let mut worst_diameter = 0.0_f64;
    let mut max_inter = 0;
    for seed in 0..200 {
        let n: usize = rng.random_range(2..=6);
        let m = rng.random_range(n.div_ceil(2)..n);
        let inst = unique_instance(3000 + seed, n, m).unwrap();
        let kit = inst.kit(tol()).unwrap();
        let r = uniqueness_report(&kit, 0, seed).unwrap();
        agree &= r.unique && r.l0_full && r.criteria_agree;
        max_inter = max_inter.max(r.intersection_dim);
        worst_coiso = worst_coiso.max(r.x0_coisometry_residual);
        worst_radius = worst_radius.max(r.radius_norm);
        let search = coverage_search(&inst, 10_000, tol()).unwrap();
        worst_diameter = worst_diameter.max(search.max_distance_to_center);
    }
    Outcome {
        pass: agree && max_inter == 0 && worst_coiso <= 1e-8 && worst_radius <= 1e-8 && worst_diameter <= 1e-8,
        detail: format!(
            "200 instances: criteria agree {agree}, max intersection dim {max_inter}, co-isometry {:.2e}, radius {:.2e}, sample distance to W0 {:.2e} (bound 1e-8)",
            worst_coiso, worst_radius, worst_diameter
        ),
    }
}

fn criterion_4() -> Outcome {
    let mut rng = trial_rng(4, 0);
    let mut worst = [0.0_f64; 3];
    for seed in 0..500 {
        let (n, m) = shape(&mut rng, 2, 8);
        let inst = random_instance(4000 + seed, n, m).unwrap();
        let kit = inst.kit(tol()).unwrap();

        let k = random_crandall_param(&kit, &mut rng);
        let w = crandall_extend(&kit, &k).unwrap();
        let back = crandall_recover(&kit, &w).unwrap();
        worst[0] = worst[0].max(fro(&(back - &k)));

        let r = kit
            .conjugation()
            .symmetrize(&(kit.c_domain_perp().projector() * gaussian_matrix(&mut rng, n, n) * kit.domain_perp().projector()))
            .unwrap();
        let t = bounded_extend(&kit, &BoundedParam::Raikh(r.clone())).unwrap();
        let back = bounded_recover(&kit, &t, BoundedVariant::Raikh).unwrap();
        worst[1] = worst[1].max(fro(&(back.matrix() - &r)));

        // The tz map has a kernel; compare with the canonical representative.
        let y = kit.domain_perp().projector() * gaussian_matrix(&mut rng, n, n) * kit.c_domain_perp().projector();
        let t = bounded_extend(&kit, &BoundedParam::Tz(y.clone())).unwrap();
        let back = bounded_recover(&kit, &t, BoundedVariant::Tz).unwrap();
        let sym = (y.adjoint() + kit.conjugation().sandwich(&y).unwrap()) * kit.domain_perp().projector() * c(0.5, 0.0);
        worst[2] = worst[2].max(fro(&(back.matrix() - sym.adjoint())));
    }
    Outcome {
        pass: worst.iter().all(|&w| w <= 1e-9),
        detail: format!(
            "500 instances: crandall {:.2e}, raikh {:.2e}, tz canonical {:.2e} (bound 1e-9)",
            worst[0], worst[1], worst[2]
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = trial_rng(5, 0);
    let mut worst = 0.0_f64;
    for seed in 0..200 {
        let (n, m) = shape(&mut rng, 2, 4);
        let inst = random_instance(5000 + seed, n, m).unwrap();
        let kit = inst.kit(tol()).unwrap();
        let perp = kit.domain_perp().projector();
        let c_perp = kit.c_domain_perp().projector();

        // Raikh -> tz -> extension.
        let r = kit.conjugation().symmetrize(&(&c_perp * gaussian_matrix(&mut rng, n, n) * &perp)).unwrap();
        let t = bounded_extend(&kit, &BoundedParam::Raikh(r)).unwrap();
        let y = bounded_recover(&kit, &t, BoundedVariant::Tz).unwrap();
        worst = worst.max(fro(&(bounded_extend(&kit, &y).unwrap() - &t)));

        // tz -> Raikh -> extension.
        let y = &perp * gaussian_matrix(&mut rng, n, n) * &c_perp;
        let t = bounded_extend(&kit, &BoundedParam::Tz(y)).unwrap();
        let r = bounded_recover(&kit, &t, BoundedVariant::Raikh).unwrap();
        worst = worst.max(fro(&(bounded_extend(&kit, &r).unwrap() - &t)));

        // Symmetrized extension of an arbitrary extension of Z0 -> Raikh.
        let z = kit.z0() + &perp * gaussian_matrix(&mut rng, n, n) * &c_perp;
        let t = symmetrized_extension(&kit, &z).unwrap();
        worst = worst.max(bounded_certificate(&kit, &t).checks.iter().map(|c| c.value).fold(0.0, f64::max));
        let r = bounded_recover(&kit, &t, BoundedVariant::Raikh).unwrap();
        worst = worst.max(fro(&(bounded_extend(&kit, &r).unwrap() - &t)));
        let _ = t_z0(&kit);
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("200 instances (n <= 4): mutual recovery residual {:.2e} (bound 1e-8)", worst),
    }
}

fn criterion_6() -> Outcome {
    let mut rng = trial_rng(6, 0);
    let mut worst = 0.0_f64;
    for seed in 0..100u64 {
        let (n, m) = shape(&mut rng, 2, 6);
        let inst = random_instance(6000 + seed, n, m).unwrap();
        let kit = inst.kit(tol()).unwrap();
        let k = random_crandall_param(&kit, &mut rng);
        let cert = check_crandall_defects(&kit, &k, 100, seed).unwrap();
        worst = cert.checks.iter().map(|c| c.value).fold(worst, f64::max);

        let t = random_dissipative(6000 + seed, n, n).unwrap();
        let lambda = c(rng.random_range(-2.0..2.0), rng.random_range(0.2..3.0));
        let cert = check_defect_identities(&t, lambda, 100, seed, tol()).unwrap();
        worst = worst.max(cert.value("defect_identity")).max(cert.value("adjoint_defect_identity"));
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("100 instances x 100 vectors: max deviation {:.2e} (bound 1e-8)", worst),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = trial_rng(7, 0);
    let lambdas = [c(0.0, 1.0), c(1.0, 1.0), c(0.0, 3.0)];
    let mut worst_proj = 0.0_f64;
    let mut worst_action = 0.0_f64;
    for seed in 0..500u64 {
        let n: usize = rng.random_range(2..=6);
        let k = rng.random_range(0..=n);
        let t = random_dissipative(7000 + seed, n, k).unwrap();
        let lambda = lambdas[seed as usize % 3];
        let data = cayley_forward(&t, lambda, None, tol()).unwrap();
        let back = cayley_inverse(&data.v_lambda, lambda, tol()).unwrap();
        worst_proj = worst_proj.max(fro(&(back.op().domain().projector() - t.op().domain().projector())));
        let a = t.op().action() * t.op().domain().basis().adjoint();
        let b = back.op().action() * back.op().domain().basis().adjoint();
        worst_action = worst_action.max(fro(&(a - b)));
    }
    Outcome {
        pass: worst_proj <= 1e-9 && worst_action <= 1e-9,
        detail: format!(
            "500 operators: domain projector {:.2e}, action {:.2e} (bound 1e-9)",
            worst_proj, worst_action
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut rng = trial_rng(8, 0);
    let lambda = c(0.0, 1.0);
    let mut worst_ext = 0.0_f64;
    let mut worst_sym = 0.0_f64;
    let mut worst_margin = f64::INFINITY;
    let mut all_full = true;
    let mut skipped = 0;
    for seed in 0..200u64 {
        let n: usize = rng.random_range(2..=6);
        let m = rng.random_range(0..n);
        let (conj_op, t) = random_csym_dissipative(8000 + seed, n, m, seed % 4 == 0 && 2 * m >= n).unwrap();
        let kit = cayley_kit(&t, &conj_op, lambda, tol()).unwrap();
        let p = random_contractive_param(&kit, &mut rng);
        let ext = match glazman_extend(&t, &conj_op, lambda, Some(p.matrix()), tol()) {
            Ok(e) => e,
            Err(Error::OneInSpectrum { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => panic!("glazman pipeline failed: {e}"),
        };
        let mat = &ext.matrix;
        worst_ext = worst_ext.max(fro(&(mat * t.op().domain().basis() - t.op().action())));
        worst_sym = worst_sym.max(fro(&(mat - conj_op.c_star(mat).unwrap())));
        let full = PartialOperator::full(mat.clone()).unwrap();
        worst_margin = worst_margin.min(csext::dissipative::dissipativity_margin(&full));
        all_full &= mat.nrows() == n;
    }

    let fx = fixtures::glazman();
    let mut worst_family = 0.0_f64;
    for _ in 0..50 {
        let radius: f64 = rng.random::<f64>().sqrt() * 0.95;
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let y = c(radius * angle.cos(), radius * angle.sin());
        let mut param = CMatrix::zeros(2, 2);
        param[(1, 1)] = y;
        let ext = glazman_extend(&fx.t, &fx.conj, lambda, Some(&param), tol()).unwrap();
        let mut expected = CMatrix::zeros(2, 2);
        expected[(0, 0)] = c(0.0, 1.0);
        expected[(1, 1)] = c(0.0, 1.0) * (c(1.0, 0.0) + y.conj()) / (c(1.0, 0.0) - y.conj());
        worst_family = worst_family.max(fro(&(&ext.matrix - expected)));
    }
    Outcome {
        pass: worst_ext <= 1e-8 && worst_sym <= 1e-8 && worst_margin >= -1e-9 && all_full && worst_family <= 1e-9,
        detail: format!(
            "200 instances ({skipped} hit 1 in the spectrum): extension {:.2e}, C-self-adjoint {:.2e}, min margin {:.2e}, full domain {all_full}; closed-form family {:.2e}",
            worst_ext, worst_sym, worst_margin, worst_family
        ),
    }
}

fn criterion_9() -> Outcome {
    let mut rng = trial_rng(9, 0);
    let mut disagreements = 0;
    let mut unique_count = 0;
    for seed in 0..200u64 {
        let n: usize = rng.random_range(2..=6);
        let m = rng.random_range(n.div_ceil(2)..=n.max(1) - 1).max(1);
        let unique = seed % 2 == 0;
        let (conj_op, t) = random_csym_dissipative(9000 + seed, n, m, unique).unwrap();
        let l2 = c(rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0));
        let (reports, consistent) = lambda_independence(&t, &conj_op, &[c(0.0, 1.0), l2], tol()).unwrap();
        if !consistent || reports.iter().any(|r| !r.criteria_agree) {
            disagreements += 1;
        }
        unique_count += usize::from(reports[0].unique);
    }
    Outcome {
        pass: disagreements == 0,
        detail: format!("200 instances ({unique_count} unique): {disagreements} verdict disagreements"),
    }
}

/// `B11 - B12 B22^+ B21` in an orthonormal basis adapted to `N ⊕ N^⊥`, with
/// the pseudo-inverse taken through a Hermitian eigendecomposition.
fn schur_shorted(b: &CMatrix, n: &Subspace) -> CMatrix {
    let q1 = n.basis().clone();
    let q2 = n.complement().basis().clone();
    let b11 = q1.adjoint() * b * &q1;
    let b12 = q1.adjoint() * b * &q2;
    let b22 = hermitian_part(&(q2.adjoint() * b * &q2));
    let k = b22.nrows();
    let pinv22 = if k == 0 {
        CMatrix::zeros(0, 0)
    } else {
        let eig = SymmetricEigen::new(b22.clone());
        let top = eig.eigenvalues.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
        let inv = eig.eigenvalues.map(|x| if x > 1e-12 * top.max(1.0) { c(1.0 / x, 0.0) } else { c(0.0, 0.0) });
        &eig.eigenvectors * CMatrix::from_diagonal(&inv) * eig.eigenvectors.adjoint()
    };
    let schur = b11 - &b12 * pinv22 * b12.adjoint();
    &q1 * schur * q1.adjoint()
}

fn criterion_10() -> Outcome {
    let mut rng = trial_rng(10, 0);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let r = rng.random_range(0..=n);
        let g = gaussian_matrix(&mut rng, n, r);
        let b = hermitian_part(&(&g * g.adjoint()));
        let k = rng.random_range(0..=n);
        let sub = random_subspace(&mut rng, n, k);
        let shorted = shorted_operator(&b, &sub, tol()).unwrap();
        let oracle = schur_shorted(&b, &sub);
        worst = worst.max(fro(&(shorted - oracle)) / (1.0 + fro(&b)));
    }
    let _ = identity(1);
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("200 PSD matrices (n <= 6): deviation {:.2e} (bound 1e-8)", worst),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("constructive extension suite", criterion_1, Some(Duration::from_secs(30))),
        ("completeness on the 2x2 grid", criterion_2, Some(Duration::from_secs(60))),
        ("uniqueness", criterion_3, Some(Duration::from_secs(60))),
        ("crandall and bounded roundtrips", criterion_4, None),
        ("parameterization set equality", criterion_5, None),
        ("defect identities", criterion_6, None),
        ("cayley roundtrip", criterion_7, None),
        ("glazman pipeline", criterion_8, None),
        ("equivalence stability in lambda", criterion_9, None),
        ("shorted operator vs schur complement", criterion_10, None),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let on_time = budget.is_none_or(|b| elapsed <= b);
        let pass = outcome.pass && on_time;
        if !pass {
            failed += 1;
        }
        let budget_note = budget.map(|b| format!(" / {}s budget", b.as_secs())).unwrap_or_default();
        println!(
            "[{}] {:>2}. {name}: {} ({:.1}s{budget_note})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
