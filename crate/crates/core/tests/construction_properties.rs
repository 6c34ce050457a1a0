use idos_core::constructions::{build_stacked_exponents, check_theorem3_conditions, construct_a, construct_b};
use idos_core::exponents::{find_dominant_permutation, find_dominant_submatrix, RowConstraint, RowQuota};
use idos_core::{CodeParams, ConstructionKind, Exp, ExponentMatrix, GeneratorSpec};

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == r {
            out.push((0..n).filter(|i| mask >> i & 1 == 1).collect());
        }
    }
    out
}

fn small_params() -> Vec<(usize, usize)> {
    (2..=6).flat_map(|n| (1..n).map(move |k| (n, k))).collect()
}

#[test]
fn columns_of_m0_increase_downwards_and_m1_upwards() {
    for (n, k) in small_params() {
        let (m1, m0) = construct_a(n, k).unwrap();
        for j in 0..k {
            for i in 1..n {
                assert!(m0.get(i, j) > m0.get(i - 1, j), "({n},{k}) M0 column {j}");
                assert!(m1.get(i - 1, j) > m1.get(i, j), "({n},{k}) M1 column {j}");
            }
        }
    }
}

/// Stacking `r` rows of M0 over `k - r` rows of M1 gives a dominant
/// permutation, except when the stack holds both row 1 of M0 and row n of
/// M1 with `0 < r < k`: both rows are all zeros, so swapping their
/// columns never changes the sum.
#[test]
fn mixed_row_stacks_have_dominant_permutations_except_zero_row_pair() {
    for (n, k) in small_params() {
        let (m1, m0) = construct_a(n, k).unwrap();
        for r in 0..=k {
            for r0 in subsets(n, r) {
                for r1 in subsets(n, k - r) {
                    let mut rows = m0.select_rows(&r0).to_rows();
                    rows.extend(m1.select_rows(&r1).to_rows());
                    let stack = ExponentMatrix::from_rows(rows).unwrap();
                    let degenerate = r0.contains(&0) && r1.contains(&(n - 1)) && k >= 2;
                    let exists = find_dominant_permutation(&stack).exists;
                    assert_eq!(exists, !degenerate, "({n},{k}) r={r} M0 rows {r0:?} M1 rows {r1:?}");
                }
            }
        }
    }
}

/// With `w0` rows of M0 above `w1` rows of M1 and the split fixed at
/// `(r, k - r)`, the last `r` M0 rows and the first `k - r` M1 rows win
/// whenever any admissible choice has a dominant permutation.
#[test]
fn constrained_dominant_submatrix_takes_last_m0_rows_and_first_m1_rows() {
    for (n, k) in small_params().into_iter().filter(|&(n, _)| n <= 5) {
        let (m1, m0) = construct_a(n, k).unwrap();
        for r in 0..=k {
            for w0 in subsets(n, r.max(1)).into_iter().chain(std::iter::once(Vec::new())) {
                if w0.len() < r {
                    continue;
                }
                for w1 in subsets(n, (k - r).max(1)) {
                    if w1.len() < k - r {
                        continue;
                    }
                    let mut rows = m0.select_rows(&w0).to_rows();
                    rows.extend(m1.select_rows(&w1).to_rows());
                    let hat = ExponentMatrix::from_rows(rows).unwrap();
                    let top: Vec<usize> = (0..w0.len()).collect();
                    let constraint = RowConstraint {
                        quotas: vec![RowQuota { rows: top, count: r }],
                        ..Default::default()
                    };
                    let expect: Vec<usize> = (w0.len() - r..w0.len() + (k - r)).collect();
                    let chosen_m0: Vec<usize> = expect[..r].iter().map(|&i| w0[i]).collect();
                    let chosen_m1: Vec<usize> = expect[r..].iter().map(|&i| w1[i - w0.len()]).collect();
                    let degenerate = chosen_m0.contains(&0) && chosen_m1.contains(&(n - 1)) && k >= 2;
                    match find_dominant_submatrix(&hat, &constraint) {
                        Some(choice) => assert_eq!(choice.rows, expect, "({n},{k}) r={r} {w0:?} {w1:?}"),
                        None => assert!(degenerate, "({n},{k}) r={r} {w0:?} {w1:?}"),
                    }
                }
            }
        }
    }
}

#[test]
fn general_construction_entries_are_positive_powers_of_two() {
    for (n, k, m) in [(2, 1, 1), (3, 1, 2), (4, 2, 2), (5, 3, 3)] {
        let mats = construct_b(n, k, m).unwrap();
        for mt in &mats {
            for e in mt.entries() {
                let v = e.finite().unwrap();
                assert!(v > 0 && v.is_power_of_two());
            }
            // rows and columns of each block are strictly ordered by the doubling
            for i in 0..n {
                for j in 1..k {
                    assert_eq!(mt.get(i, j - 1).finite().unwrap(), 2 * mt.get(i, j).finite().unwrap());
                }
            }
            for i in 1..n {
                for j in 0..k {
                    assert_eq!(mt.get(i, j).finite().unwrap(), 2 * mt.get(i - 1, j).finite().unwrap());
                }
            }
        }
        for (t, pair) in mats.windows(2).enumerate() {
            assert_eq!(
                pair[1].get(0, 0).finite().unwrap(),
                pair[0].get(0, 0).finite().unwrap() << n,
                "({n},{k},{m}) block {t}"
            );
        }
    }
}

#[test]
fn printed_memory_two_example() {
    let mats = construct_b(4, 2, 2).unwrap();
    let rows = |t: usize| mats[t].to_rows();
    let fin = |v: Vec<Vec<u64>>| v.into_iter().map(|r| r.into_iter().map(Exp::Fin).collect::<Vec<_>>()).collect::<Vec<_>>();
    let p = |e: [[u32; 2]; 4]| fin(e.iter().map(|r| r.iter().map(|&x| 1u64 << x).collect()).collect());
    assert_eq!(rows(0), p([[1, 0], [2, 1], [3, 2], [4, 3]]));
    assert_eq!(rows(1), p([[5, 4], [6, 5], [7, 6], [8, 7]]));
    assert_eq!(rows(2), p([[9, 8], [10, 9], [11, 10], [12, 11]]));
}

#[test]
fn structural_conditions_hold_on_general_stacks() {
    for (n, k, m, ell) in [(2, 1, 1, 2), (3, 1, 1, 3), (4, 2, 2, 4), (3, 2, 3, 5)] {
        let params = CodeParams::new(n, k, m, ell).unwrap();
        let spec = GeneratorSpec::construct(ConstructionKind::B, params, Some(8), None, 0, true).unwrap();
        let stack = build_stacked_exponents(&spec, ell);
        assert_eq!((stack.rows(), stack.cols()), (n * ell, k * ell));
        let report = check_theorem3_conditions(&stack);
        assert!(report.holds, "({n},{k},{m}) ell={ell}: {:?}", report.violations);
    }
}

#[test]
fn unit_memory_stack_breaks_positivity() {
    let params = CodeParams::new(4, 2, 1, 2).unwrap();
    let spec = GeneratorSpec::construct(ConstructionKind::A, params, None, None, 0, false).unwrap();
    assert!(!check_theorem3_conditions(&build_stacked_exponents(&spec, 2)).holds);
}
