use idos_core::debt::{check_lemma5, classify_pattern, debt_step, enumerate_worst_case_windows, DebtState};
use idos_core::exponents::{
    decompose_dominance, dominance_by_enumeration, find_dominant_permutation, infer_constraints, lift,
};
use idos_core::linalg::{for_each_permutation, mat_solve, support_has_nontrivial_term};
use idos_core::{CodeParams, Exp, ExponentMatrix, FieldCtx, FieldMatrix, PatternClass};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exp_strategy(max: u64) -> impl Strategy<Value = Exp> {
    prop_oneof![1 => Just(Exp::NegInf), 4 => (0..=max).prop_map(Exp::Fin)]
}

fn square_exponents(max_n: usize, max_e: u64) -> impl Strategy<Value = ExponentMatrix> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(exp_strategy(max_e), n * n)
            .prop_map(move |e| ExponentMatrix::from_entries(n, n, e).unwrap())
    })
}

fn field(d: usize) -> FieldCtx {
    FieldCtx::new(d, None, Some(0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exponent_addition_matches_multiplication(e1 in 0u64..60, e2 in 0u64..60) {
        let f = field(7);
        prop_assert_eq!(f.mul(&f.pow(e1), &f.pow(e2)), f.pow(e1 + e2));
    }

    #[test]
    fn nonzero_low_degree_polynomials_do_not_vanish_at_alpha(
        d in 2usize..80,
        bits in prop::collection::btree_set(0usize..80, 1..12),
    ) {
        let f = field(d);
        let bits: Vec<usize> = bits.into_iter().filter(|&b| b < d).collect();
        prop_assume!(!bits.is_empty());
        prop_assert!(!f.eval_at_alpha(&bits).is_zero());
    }

    #[test]
    fn elimination_and_leibniz_determinants_agree(size in 1usize..=5, seed in any::<u64>()) {
        let f = field(17);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = FieldMatrix::random(&f, size, size, &mut rng);
        prop_assert_eq!(a.det().unwrap(), a.det_leibniz().unwrap());
    }

    #[test]
    fn nonzero_determinant_iff_full_rank_iff_solvable(m in square_exponents(4, 3), seed in any::<u64>()) {
        // lifting small exponents over a small field yields plenty of singular cases
        let f = field(3);
        let a = lift(&m, &f);
        let n = a.rows();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<_> = (0..n).map(|_| f.random(&mut rng)).collect();
        let nonsingular = !a.det().unwrap().is_zero();
        prop_assert_eq!(nonsingular, a.rank() == n);
        match mat_solve(&a, &b) {
            Ok(x) => prop_assert_eq!(&a.mul_vec(&x), &b),
            Err(_) => prop_assert!(!nonsingular),
        }
        if nonsingular {
            prop_assert!(mat_solve(&a, &b).is_ok());
        }
    }

    #[test]
    fn nontrivial_support_matches_permutation_scan(
        n in 1usize..=6,
        cells in prop::collection::vec(prop::bool::weighted(0.4), 36),
    ) {
        let pattern: Vec<Vec<bool>> = (0..n).map(|i| cells[i * 6..i * 6 + n].to_vec()).collect();
        let mut any = false;
        for_each_permutation(n, |p| any |= (0..n).all(|c| pattern[p[c]][c]));
        prop_assert_eq!(support_has_nontrivial_term(&pattern), any);
    }

    #[test]
    fn fast_dominance_matches_enumeration(m in square_exponents(7, 6)) {
        prop_assert_eq!(find_dominant_permutation(&m), dominance_by_enumeration(&m));
    }

    #[test]
    fn dominant_permutations_avoid_neg_inf_and_beat_runner_up(m in square_exponents(8, 9)) {
        let r = find_dominant_permutation(&m);
        if let Some(sigma) = &r.sigma_star {
            for (c, &row) in sigma.iter().enumerate() {
                prop_assert!(m.get(row, c).is_finite());
            }
            prop_assert_eq!(m.permutation_sum(sigma), r.dominant_sum);
            if let Some(second) = r.runner_up_sum {
                prop_assert!(r.dominant_sum.unwrap() >= second + 1);
            }
        }
        prop_assert_eq!(r.exists, r.sigma_star.is_some());
    }

    #[test]
    fn dominance_forces_nonsingular_lift(m in square_exponents(5, 8)) {
        if let Some(sum) = find_dominant_permutation(&m).dominant_sum {
            let f = field(sum as usize + 1);
            prop_assert!(!lift(&m, &f).det().unwrap().is_zero());
        }
    }

    #[test]
    fn decomposition_certificates_agree_with_direct_search(m in square_exponents(6, 6), split in 1usize..6) {
        let n = m.rows();
        prop_assume!(split < n);
        let parts = vec![(0..split).collect::<Vec<_>>(), (split..n).collect()];
        let constraints = infer_constraints(&m, &parts);
        let pairs: Vec<_> = parts.into_iter().zip(constraints).collect();
        if let Some(cert) = decompose_dominance(&m, &pairs).unwrap() {
            let direct = find_dominant_permutation(&m);
            prop_assert!(direct.exists);
            prop_assert_eq!(direct.dominant_sum, Some(cert.total));
            prop_assert_eq!(direct.sigma_star, Some(cert.sigma_star));
        }
    }

    #[test]
    fn more_symbols_never_raise_debt(
        debt in 0u64..20,
        n_t in 0usize..6,
        extra in 1usize..4,
        k in 1usize..5,
    ) {
        let params = CodeParams::new(6, k, 3, 3).unwrap();
        let st = DebtState { debt, ..DebtState::new() };
        let lo = debt_step(st, n_t, &params);
        let hi = debt_step(st, n_t + extra, &params);
        prop_assert!(hi.debt <= lo.debt);
    }
}

fn counting_params() -> Vec<CodeParams> {
    let mut out = vec![CodeParams::new(4, 2, 1, 2).unwrap()];
    for n in 2..=5 {
        for k in 1..n {
            for tau in 1..=2 {
                out.push(CodeParams::new(n, k, 1, tau).unwrap());
            }
        }
    }
    out
}

#[test]
fn worst_case_windows_satisfy_counting_lemma() {
    let mut total = 0;
    for p in counting_params() {
        for w in enumerate_worst_case_windows(&p) {
            total += 1;
            assert_eq!(check_lemma5(&w, &p), Ok(()), "{p} {w:?}");
        }
    }
    assert_eq!(total, 77);
}

#[test]
fn worst_case_windows_close_exactly_at_their_end() {
    for p in counting_params().into_iter().chain([CodeParams::new(4, 2, 2, 3).unwrap(), CodeParams::new(3, 1, 2, 4).unwrap()]) {
        for w in enumerate_worst_case_windows(&p) {
            assert_eq!(classify_pattern(&p, &w), PatternClass::Acceptable, "{p} {w:?}");
            assert_eq!(w.iter().sum::<usize>(), p.k * w.len());
            assert!(w.len() <= p.tau + 1);
            let mut st = DebtState::new();
            for (i, &c) in w.iter().enumerate() {
                st.step(c, &p);
                assert_eq!(st.debt == 0, i + 1 == w.len(), "{p} {w:?} slot {}", i + 1);
            }
        }
    }
}
