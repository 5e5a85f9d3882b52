use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;

use multlab::classical::{hilbert_symbol, riesz_symbol};
use multlab::groupalg::{lp_group_norm, FolnerNet, FourierSeries, GroupModel, GroupWindow};
use multlab::multiplier::{atomic_action_ratio, SchurSymbol};
use multlab::random::{gaussian_matrix, gaussian_series, random_atomic_measure, rng_for};
use multlab::schatten::{schatten_norm, CMatrix, Convention, Exponent};
use multlab::{
    amplified_norm, brute_oracle_norm, extend_rank_one, greedy_sumset_select, random_rank_one_spec,
    schur_multiplier_norm, szego_convergence_report, AscentOptions,
};

fn norm(a: &CMatrix<f64>, p: f64) -> f64 {
    schatten_norm(a, &Exponent::p(p).unwrap(), Convention::Standard).unwrap()
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(4.0), Just(f64::INFINITY), 1.0f64..8.0]
}

fn matrix(rows: usize, cols: usize, seed: u64) -> CMatrix<f64> {
    gaussian_matrix(rows, cols, &mut rng_for(seed, 0))
}

fn quick() -> AscentOptions {
    AscentOptions { restarts: 4, max_iter: 2000, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality(p in exponent(), rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let a = matrix(rows, cols, seed);
        let b = matrix(rows, cols, seed ^ 0x5555);
        let lhs = norm(&a.add(&b).unwrap(), p);
        prop_assert!(lhs <= (norm(&a, p) + norm(&b, p)) * (1.0 + 1e-12));
    }

    #[test]
    fn holder_inequality(p in 1.0f64..6.0, q in 1.0f64..6.0, n in 1usize..6, seed in any::<u64>()) {
        let r = 1.0 / (1.0 / p + 1.0 / q);
        let a = matrix(n, n, seed);
        let b = matrix(n, n, seed.wrapping_add(1));
        let prod = a.matmul(&b).unwrap();
        prop_assert!(norm(&prod, r) <= norm(&a, p) * norm(&b, q) * (1.0 + 1e-10));
    }

    #[test]
    fn unitarily_invariant_and_homogeneous(p in exponent(), rows in 1usize..6, cols in 1usize..6, seed in any::<u64>(), s in -3.0f64..3.0) {
        let a = matrix(rows, cols, seed);
        let x = norm(&a, p);
        prop_assert!((norm(&a.transpose(), p) - x).abs() <= 1e-10 * x.max(1.0));
        prop_assert!((norm(&a.adjoint(), p) - x).abs() <= 1e-10 * x.max(1.0));
        let z = Complex::new(s, 0.5);
        prop_assert!((norm(&a.scale(z), p) - z.norm() * x).abs() <= 1e-10 * (z.norm() * x).max(1.0));
    }

    #[test]
    fn hilbert_schmidt_is_frobenius(rows in 1usize..7, cols in 1usize..7, seed in any::<u64>()) {
        let a = matrix(rows, cols, seed);
        let direct = a.inner().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((norm(&a, 2.0) - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn hilbert_and_riesz_symbols_are_affinely_related(n in 1usize..12) {
        let h = hilbert_symbol::<f64>(n).unwrap().to_matrix();
        let r = riesz_symbol::<f64>(n).unwrap().to_matrix();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!((h.get(i, j) + 1.0) / 2.0, r.get(i, j));
            }
        }
    }

    #[test]
    fn parseval_on_cyclic_groups(order in 2u64..24, block in 1usize..3, seed in any::<u64>()) {
        let g = GroupModel::cyclic(order).unwrap();
        let x = gaussian_series::<f64>(g, &g.elements(), block, &mut rng_for(seed, 1)).unwrap();
        let direct = x.coeffs().values().map(|a| a.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>().sqrt();
        let l2 = lp_group_norm(&x, &Exponent::p(2.0).unwrap(), &GroupWindow::Full).unwrap();
        prop_assert!((l2 - direct).abs() <= 1e-10 * direct.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimates_dominate_the_grid_oracle(
        cells in proptest::sample::subsequence(vec![(0usize, 0usize), (0, 1), (1, 0), (1, 1), (2, 0), (0, 2)], 1..=3),
        p in prop_oneof![Just(1.0), Just(3.0), Just(4.0), Just(f64::INFINITY)],
        seed in any::<u64>(),
    ) {
        let mut rng = rng_for(seed, 2);
        let values = gaussian_matrix::<f64>(1, cells.len(), &mut rng);
        let entries: Vec<_> = cells.iter().enumerate().map(|(k, &rc)| (rc, values.get(0, k))).collect();
        let rho = SchurSymbol::new(3, 3, &entries).unwrap();
        let e = Exponent::p(p).unwrap();
        let est = schur_multiplier_norm(&rho, &e, &quick()).unwrap();
        let (oracle, _) = brute_oracle_norm(&rho, &e, 6).unwrap();
        prop_assert!(est.lower >= oracle - 1e-9, "ascent {} below oracle {}", est.lower, oracle);
        prop_assert!(est.lower <= rho.max_abs() * (cells.len() as f64) + 1e-9);
        if let Some(u) = est.upper {
            prop_assert!(est.lower <= u + 1e-9);
        }
    }

    #[test]
    fn amplification_never_decreases(n in 2usize..4, p in prop_oneof![Just(1.0), Just(4.0)], seed in any::<u64>()) {
        let rho = SchurSymbol::dense(&matrix(n, n, seed));
        let e = Exponent::p(p).unwrap();
        let base = schur_multiplier_norm(&rho, &e, &quick()).unwrap();
        let amp = amplified_norm(&rho, &e, 2, &quick()).unwrap();
        prop_assert!(amp.lower >= base.lower - 1e-9, "{} < {}", amp.lower, base.lower);
    }

    #[test]
    fn extensions_agree_on_the_support_and_stay_contractive(seed in any::<u64>()) {
        let spec = random_rank_one_spec(&mut rng_for(seed, 3), 6, 10).unwrap();
        let cert = extend_rank_one(&spec).unwrap();
        let checks = cert.structural_checks();
        prop_assert!(checks.passed(), "{checks:?}");
        let b = spec.bound();
        for r in 0..cert.product.nrows() {
            for c in 0..cert.product.ncols() {
                let v = cert.product.value(r, c).unwrap_or_default();
                prop_assert!(v.norm() <= b * (1.0 + 1e-12) + 1e-15);
            }
        }
    }

    #[test]
    fn toeplitz_moment_errors_stay_below_the_boundary_bound(
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..4),
        a0 in -1.0f64..1.0,
    ) {
        let g = GroupModel::integers(128);
        let mut terms = vec![(g.el(0), Complex::new(a0, 0.0))];
        for (k, &(re, im)) in coeffs.iter().enumerate() {
            let z = Complex::new(re, im);
            terms.push((g.el(k as i64 + 1), z));
            terms.push((g.el(-(k as i64) - 1), z.conj()));
        }
        let y = FourierSeries::scalar(g, &terms).unwrap();
        let net = FolnerNet::new(g, vec![g.interval(0, 15), g.interval(0, 63)]).unwrap();
        let rep = szego_convergence_report(&y, &net, &[1, 2, 3, 4]).unwrap();
        prop_assert!(rep.within_bound(), "{:?}", rep.rows);
        prop_assert!(rep.constants_finite());
    }

    #[test]
    fn atomic_symbols_contract_below_one(seed in any::<u64>(), atoms in 1usize..4, p in prop_oneof![Just(0.5), Just(0.25), Just(1.0)]) {
        let g = GroupModel::cyclic(12).unwrap();
        let mut rng = rng_for(seed, 4);
        let x = gaussian_series::<f64>(g, &g.elements(), 2, &mut rng).unwrap();
        let mu = random_atomic_measure(12, atoms, p, &mut rng).unwrap();
        let ratio = atomic_action_ratio(&mu, &x, &Exponent::p(p).unwrap()).unwrap();
        prop_assert!(ratio <= 1.0 + 1e-10, "{ratio}");
        if atoms == 1 {
            prop_assert!((ratio - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn greedy_sumsets_have_distinct_products() {
    for n in 1..=4usize {
        let g = GroupModel::integers((n * n * n + n) as i64);
        let rows: Vec<_> = (0..n as i64).map(|k| g.el(k)).collect();
        let cols: Vec<_> = (0..(n * n * n) as i64).map(|k| g.el(k)).collect();
        let sel = greedy_sumset_select(&g, &rows, &cols, n).unwrap();
        assert!(sel.verify());
        assert_eq!(sel.cols.len(), n);
        assert!(sel.inspected <= n * n * n);
    }
}

#[test]
fn block_shift_moments_match_walk_counts() {
    // y = e_12 λ_1 + e_21 λ_{-1} squares to the identity.
    let g = GroupModel::integers(64);
    let mut a = DMatrix::zeros(2, 2);
    a[(0, 1)] = Complex::new(1.0, 0.0);
    let y = multlab::szego::hermitian_shift::<f64>(g, &a).unwrap();
    let moments = multlab::spectral_moments(&y, &[1, 2, 3, 4]).unwrap();
    let traces: Vec<f64> = moments.iter().map(|m| m.trace().re).collect();
    assert_eq!(traces, [0.0, 2.0, 0.0, 2.0]);
}
