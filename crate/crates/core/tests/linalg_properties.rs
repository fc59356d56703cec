use csext::linalg::{
    c, complement, fro, identity, intersect, min_eigenvalue, null_basis, operator_norm, pinv, psd_sqrt, range_basis,
    shorted_operator, sum, CMatrix,
};
use csext::oracle::{gaussian_matrix, random_conjugation, random_subspace, trial_rng};
use csext::*;
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

/// Random PSD matrix of the given rank.
fn psd(seed: u64, n: usize, rank: usize) -> CMatrix {
    let g = gaussian_matrix(&mut trial_rng(seed, 1), n, rank);
    &g * g.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn psd_sqrt_squares_back(seed in 0u64..10_000, n in 1usize..8, r_frac in 0.0f64..=1.0) {
        let a = psd(seed, n, ((n as f64) * r_frac).round() as usize);
        let root = psd_sqrt(&a, tol()).unwrap();
        prop_assert!(fro(&(&root - root.adjoint())) <= 1e-12 * (1.0 + fro(&a)));
        prop_assert!(min_eigenvalue(&root) >= -1e-10 * (1.0 + operator_norm(&root)));
        prop_assert!(fro(&(&root * &root - &a)) <= 1e-9 * (1.0 + fro(&a)));
    }

    #[test]
    fn penrose_identities(seed in 0u64..10_000, rows in 1usize..7, cols in 1usize..7, rank in 0usize..7) {
        let rank = rank.min(rows).min(cols);
        let mut rng = trial_rng(seed, 2);
        let a = gaussian_matrix(&mut rng, rows, rank) * gaussian_matrix(&mut rng, rank, cols);
        let p = pinv(&a, tol());
        let scale = 1.0 + fro(&a) * fro(&p);
        prop_assert!(fro(&(&a * &p * &a - &a)) <= 1e-9 * scale * (1.0 + fro(&a)));
        prop_assert!(fro(&(&p * &a * &p - &p)) <= 1e-9 * scale * (1.0 + fro(&p)));
        let ap = &a * &p;
        let pa = &p * &a;
        prop_assert!(fro(&(&ap - ap.adjoint())) <= 1e-9 * scale);
        prop_assert!(fro(&(&pa - pa.adjoint())) <= 1e-9 * scale);
    }

    #[test]
    fn rank_nullity_and_dimension_formula(seed in 0u64..10_000, n in 1usize..8, a in 0usize..8, b in 0usize..8) {
        let (a, b) = (a.min(n), b.min(n));
        let mut rng = trial_rng(seed, 3);
        let m = gaussian_matrix(&mut rng, n, a) * gaussian_matrix(&mut rng, a, n);
        prop_assert_eq!(range_basis(&m, tol()).dim() + null_basis(&m, tol()).dim(), n);
        let u = random_subspace(&mut rng, n, a);
        let w = random_subspace(&mut rng, n, b);
        let cap = intersect(&u, &w, tol()).unwrap();
        let cup = sum(&u, &w, tol()).unwrap();
        prop_assert_eq!(cap.dim() + cup.dim(), a + b);
        prop_assert_eq!(cap.dim(), (a + b).saturating_sub(n));
        prop_assert_eq!(complement(&u).dim(), n - a);
    }

    #[test]
    fn shorted_matches_inverse_formula(seed in 0u64..10_000, n in 1usize..7, k in 0usize..7) {
        // For invertible B the shorted operator is P (P B^{-1} P)^+ P.
        let k = k.min(n);
        let b = psd(seed, n, n) + identity(n) * c(0.1, 0.0);
        let sub = random_subspace(&mut trial_rng(seed, 4), n, k);
        let shorted = shorted_operator(&b, &sub, tol()).unwrap();
        let p = sub.projector();
        let inv = b.clone().try_inverse().unwrap();
        let oracle = pinv(&(&p * inv * &p), tol());
        prop_assert!(fro(&(&shorted - &oracle)) <= 1e-8 * (1.0 + fro(&b)), "{}", fro(&(&shorted - &oracle)));
    }

    #[test]
    fn shorted_is_maximal_below(seed in 0u64..10_000, n in 1usize..7, rank in 0usize..7, k in 0usize..7) {
        let b = psd(seed, n, rank.min(n));
        let sub = random_subspace(&mut trial_rng(seed, 5), n, k.min(n));
        let s = shorted_operator(&b, &sub, tol()).unwrap();
        let scale = 1.0 + operator_norm(&b);
        prop_assert!(min_eigenvalue(&s) >= -1e-9 * scale);
        prop_assert!(min_eigenvalue(&(&b - &s)) >= -1e-9 * scale);
        prop_assert!(fro(&((identity(n) - sub.projector()) * &s)) <= 1e-9 * scale);
    }

    #[test]
    fn c_star_is_an_anti_multiplicative_involution(seed in 0u64..10_000, n in 1usize..7) {
        let mut rng = trial_rng(seed, 6);
        let conj_op = random_conjugation(&mut rng, n);
        let a = gaussian_matrix(&mut rng, n, n);
        let b = gaussian_matrix(&mut rng, n, n);
        let lhs = conj_op.c_star(&(&a * &b)).unwrap();
        let rhs = conj_op.c_star(&b).unwrap() * conj_op.c_star(&a).unwrap();
        prop_assert!(fro(&(lhs - rhs)) <= 1e-10 * (1.0 + fro(&a) * fro(&b)));
        let twice = conj_op.c_star(&conj_op.c_star(&a).unwrap()).unwrap();
        prop_assert!(fro(&(twice - &a)) <= 1e-10 * (1.0 + fro(&a)));
        let sym = conj_op.symmetrize(&a).unwrap();
        prop_assert!(conj_op.c_self_adjoint_residual(&sym).unwrap() <= 1e-10 * (1.0 + fro(&a)));
    }

    #[test]
    fn conjugate_projector_identity(seed in 0u64..10_000, n in 1usize..7, k in 0usize..7) {
        let mut rng = trial_rng(seed, 7);
        let conj_op = random_conjugation(&mut rng, n);
        let u = random_subspace(&mut rng, n, k.min(n));
        let image = conj_op.conj_image(&u).unwrap();
        let sandwiched = conj_op.sandwich(&u.projector()).unwrap();
        prop_assert!(fro(&(image.projector() - sandwiched)) <= 1e-10);
    }

    #[test]
    fn compositions_are_c_self_adjoint_unitaries(seed in 0u64..10_000, n in 1usize..7) {
        let mut rng = trial_rng(seed, 8);
        let a = random_conjugation(&mut rng, n);
        let b = random_conjugation(&mut rng, n);
        let comp = a.compose_with_conjugation(&b).unwrap();
        prop_assert!(comp.unitary_residual <= 1e-10);
        prop_assert!(comp.c_self_adjoint_residual <= 1e-10);
        // Composing back recovers the second conjugation's coefficient.
        let s_back = comp.unitary.adjoint() * a.coefficient();
        prop_assert!(fro(&(s_back - b.coefficient())) <= 1e-10);
    }
}
