use lls_sense::conditioning::{f_general, kappa_component, kappa_solution, NormWeights, SolutionMethod};
use lls_sense::covariance::{cov_column, cov_diagonal, cov_full, functional_variance};
use lls_sense::dense::{norm2, DenseMatrix};
use lls_sense::oracle::instance::{conditioned_matrix, gaussian_matrix, gaussian_vector, random_problem, random_upper_triangular, rng};
use lls_sense::oracle::jacobian_kappa;
use lls_sense::svd::singular_values;
use lls_sense::{cholesky_upper, householder_qr, inv_norm_estimate, solve_normal_equations, solve_qr, NormKind, Triangular};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qr_invariants(m in 2usize..12, extra in 0usize..4, seed in any::<u64>()) {
        let n = m.saturating_sub(extra).max(1);
        let a = gaussian_matrix(m, n, seed);
        let qr = householder_qr(&a).unwrap();
        let r = qr.r().matrix();
        prop_assert!(r.is_upper_triangular());
        prop_assert!(r.diagonal().iter().all(|&d| d > 0.0));
        let bound = (n * m) as f64 * f64::EPSILON;
        prop_assert!(rel(r.frobenius_norm(), a.frobenius_norm()) <= bound);
    }

    #[test]
    fn triangular_solve_residual(n in 1usize..10, seed in any::<u64>()) {
        let r = random_upper_triangular(n, seed);
        let v = gaussian_vector(n, &mut rng(seed ^ 1));
        let x = r.solve(&v, Triangular::Plain).unwrap();
        let back = r.matrix().matvec(&x).unwrap();
        let resid: Vec<f64> = back.iter().zip(&v).map(|(p, q)| p - q).collect();
        let bound = 64.0 * n as f64 * f64::EPSILON * r.matrix().frobenius_norm() * norm2(&x);
        prop_assert!(norm2(&resid) <= bound);
    }

    #[test]
    fn inverse_norm_brackets(n in 1usize..9, seed in any::<u64>()) {
        let r = random_upper_triangular(n, seed);
        let inv = r.inverse();
        let s = singular_values(&inv)[0];
        let sq = (n as f64).sqrt();
        let slack = 1.0 + 1e-12;
        let (f, n1, ninf) = (inv.frobenius_norm(), inv.norm_one(), inv.norm_inf());
        prop_assert!(f / sq <= s * slack && s <= f * slack);
        prop_assert!(n1 / sq <= s * slack && s <= sq * n1 * slack);
        prop_assert!(ninf / sq <= s * slack && s <= sq * ninf * slack);
        prop_assert!(inv_norm_estimate(&r, NormKind::One) <= n1 * slack);
        prop_assert!(inv_norm_estimate(&r, NormKind::Infinity) <= ninf * slack);
    }

    #[test]
    fn covariance_column_diagonal_and_psd(seed in any::<u64>()) {
        let (a, b) = random_problem(9, 4, 100.0, seed);
        let sol = solve_qr(&a, &b, None).unwrap();
        let diag = cov_diagonal(&sol, None).unwrap();
        for i in 0..4 {
            prop_assert!(rel(cov_column(&sol, i, None).unwrap()[i], diag[i]) <= 1e-12);
        }
        let mut g = rng(seed);
        for _ in 0..100 {
            let ell = gaussian_vector(4, &mut g);
            prop_assert!(functional_variance(&sol, &ell, None).unwrap() >= 0.0);
        }
    }

    #[test]
    fn covariance_scales_linearly(seed in any::<u64>(), s in 0.01f64..100.0) {
        let (a, b) = random_problem(8, 3, 10.0, seed);
        let sol = solve_qr(&a, &b, None).unwrap();
        let base = cov_full(&sol, Some(1.0)).unwrap();
        let scaled = cov_full(&sol, Some(s)).unwrap();
        for (x, y) in base.as_slice().iter().zip(scaled.as_slice()) {
            prop_assert!((y - s * x).abs() <= 1e-14 * (s * x).abs().max(1e-300));
        }
    }

    #[test]
    fn monotone_in_weights(seed in any::<u64>(), ia in 0.0f64..10.0, ib in 0.0f64..10.0, bump in 0.0f64..5.0) {
        prop_assume!(ia > 0.0 || ib > 0.0);
        let (a, b) = random_problem(8, 3, 100.0, seed);
        let sol = solve_qr(&a, &b, None).unwrap();
        let w = NormWeights::from_inverse_squares(ia, ib).unwrap();
        let wa = NormWeights::from_inverse_squares(ia + bump, ib).unwrap();
        let wb = NormWeights::from_inverse_squares(ia, ib + bump).unwrap();
        for i in 0..3 {
            let k = kappa_component(&sol, i, &w).unwrap();
            prop_assert!(kappa_component(&sol, i, &wa).unwrap() >= k);
            prop_assert!(kappa_component(&sol, i, &wb).unwrap() >= k);
        }
    }

    #[test]
    fn trace_bracket(seed in any::<u64>(), n in 1usize..6, t in 0i32..5) {
        let (a, b) = random_problem(n + 4, n, 10f64.powi(t), seed);
        let sol = solve_qr(&a, &b, None).unwrap();
        for w in [NormWeights::unit(), NormWeights::b_only(), NormWeights::a_only()] {
            let exact = kappa_solution(&sol, &w, SolutionMethod::ExactSigmaMin).unwrap();
            let trace = kappa_solution(&sol, &w, SolutionMethod::TraceApprox).unwrap();
            prop_assert!(exact <= trace * (1.0 + 1e-12));
            prop_assert!(trace <= n as f64 * exact * (1.0 + 1e-12));
        }
    }
}

#[test]
fn qr_matches_cholesky_of_gram() {
    for seed in 0..20 {
        let a = conditioned_matrix(12, 5, 1e4, seed);
        let r_qr = householder_qr(&a).unwrap().r().matrix().clone();
        let r_ch = cholesky_upper(&a.gram()).unwrap().r().matrix().clone();
        for i in 0..5 {
            for j in i..5 {
                let (p, q) = (r_qr.get(i, j), r_ch.get(i, j));
                assert!((p - q).abs() <= 1e-8 * p.abs().max(r_qr.get(i, i)), "seed {seed} ({i},{j}): {p} vs {q}");
            }
        }
    }
}

#[test]
fn qr_and_normal_equation_routes_agree() {
    for seed in 0..20 {
        let (a, b) = random_problem(15, 4, 1e3, seed);
        let qr = solve_qr(&a, &b, None).unwrap();
        let ne = solve_normal_equations(&a.gram(), &a.transpose_matvec(&b).unwrap(), 15, qr.residual_norm().powi(2)).unwrap();
        for (x, y) in qr.x().iter().zip(ne.x()) {
            assert!((x - y).abs() <= 1e-6 * norm2(qr.x()), "seed {seed}");
        }
    }
}

#[test]
fn closed_forms_equal_jacobian_singular_value() {
    for seed in 0..6 {
        let (a, b) = random_problem(6, 3, 10f64.powi(seed as i32 % 5), seed);
        let sol = solve_qr(&a, &b, None).unwrap();
        for w in [NormWeights::unit(), NormWeights::b_only(), NormWeights::new(0.5, 2.0).unwrap()] {
            for i in 0..3 {
                let l = DenseMatrix::new(3, 1, lls_sense::dense::unit_vector(3, i)).unwrap();
                let oracle = jacobian_kappa(&a, &b, &l, &w).unwrap().sigma_max;
                let closed = kappa_component(&sol, i, &w).unwrap();
                assert!(rel(closed, oracle) <= 1e-3, "seed {seed} i {i}: {closed} vs {oracle}");
            }
            let oracle = jacobian_kappa(&a, &b, &DenseMatrix::identity(3), &w).unwrap().sigma_max;
            let closed = kappa_solution(&sol, &w, SolutionMethod::ExactSigmaMin).unwrap();
            assert!(rel(closed, oracle) <= 1e-3, "seed {seed}: {closed} vs {oracle}");
        }
    }
}

#[test]
fn general_l_bracket() {
    for seed in 0..8 {
        let (a, b) = random_problem(6, 4, 50.0, seed);
        let sol = solve_qr(&a, &b, None).unwrap();
        let k = 1 + (seed as usize % 3);
        let l = gaussian_matrix(4, k, seed + 100);
        for w in [NormWeights::unit(), NormWeights::b_only(), NormWeights::a_only()] {
            let f = f_general(&sol, &l, &w).unwrap();
            let oracle = jacobian_kappa(&a, &b, &l, &w).unwrap().sigma_max;
            assert!(oracle <= f * (1.0 + 1e-3), "seed {seed}: {oracle} > {f}");
            assert!(oracle >= f / 3f64.sqrt() * (1.0 - 1e-3), "seed {seed}: {oracle} < f/√3");
        }
    }
}

#[test]
fn sampled_functional_variance_reaches_spectral_norm() {
    let (a, b) = random_problem(10, 4, 100.0, 3);
    let sol = solve_qr(&a, &b, None).unwrap();
    let spectral = sol.mse() * kappa_solution(&sol, &NormWeights::b_only(), SolutionMethod::ExactSigmaMin).unwrap().powi(2);
    let mut g = rng(5);
    let mut best: f64 = 0.0;
    for _ in 0..1000 {
        let ell = gaussian_vector(4, &mut g);
        let ell: Vec<f64> = ell.iter().map(|v| v / norm2(&ell)).collect();
        let v = functional_variance(&sol, &ell, None).unwrap();
        assert!(v <= spectral * (1.0 + 1e-12));
        best = best.max(v);
    }
    let top = lls_sense::oracle::dominant_covariance_direction(sol.factors().r(), 0);
    best = best.max(functional_variance(&sol, &top, None).unwrap());
    assert!(best >= 0.9 * spectral);
}
