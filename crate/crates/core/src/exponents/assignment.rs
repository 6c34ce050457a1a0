//! Maximum-weight perfect assignment on square matrices with forbidden
//! entries, and the exact top-two value profile used for dominance tests.

/// `weights[r][c] = None` marks a forbidden entry (exponent -inf).
pub(crate) type Weights = Vec<Vec<Option<u64>>>;

/// Best permutation value, whether it is attained by exactly one permutation,
/// and the best value strictly below it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentProfile {
    pub best: u64,
    /// `sigma[c]` is the row matched to column `c` by a maximizer.
    pub sigma: Vec<usize>,
    pub unique: bool,
    pub second: Option<u64>,
}

const INF: i128 = i128::MAX / 4;

/// Hungarian algorithm with potentials (O(n^3)); forbidden edges are never
/// relaxed. Returns `None` if no perfect matching avoids them.
pub(crate) fn max_assignment(w: &Weights, banned: Option<(usize, usize)>) -> Option<(u64, Vec<usize>)> {
    let n = w.len();
    if n == 0 {
        return Some((0, Vec::new()));
    }
    let cost = |i: usize, j: usize| -> Option<i128> {
        if banned == Some((i - 1, j - 1)) {
            return None;
        }
        w[i - 1][j - 1].map(|x| -(x as i128))
    };
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                if let Some(c) = cost(i0, j) {
                    let cur = c - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if delta >= INF {
                return None;
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else if minv[j] < INF {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let sigma: Vec<usize> = (1..=n).map(|j| p[j] - 1).collect();
    let total = sigma
        .iter()
        .enumerate()
        .map(|(c, &r)| w[r][c].expect("matching uses allowed edges"))
        .sum();
    Some((total, sigma))
}

/// Best assignment plus the best competitor, found by banning each edge of
/// the optimum in turn (every other permutation misses at least one of them).
pub(crate) fn profile_ranked(w: &Weights) -> Option<AssignmentProfile> {
    let (best, sigma) = max_assignment(w, None)?;
    let mut second: Option<u64> = None;
    for (c, &r) in sigma.iter().enumerate() {
        if let Some((val, _)) = max_assignment(w, Some((r, c))) {
            second = Some(second.map_or(val, |s| s.max(val)));
        }
    }
    let unique = second.is_none_or(|s| s < best);
    Some(AssignmentProfile {
        best,
        sigma,
        unique,
        second: if unique { second } else { Some(best) },
    })
}

#[derive(Clone, Copy, Default)]
struct Cell {
    best: Option<u64>,
    count: u8,
    second: Option<u64>,
    from_row: usize,
}

impl Cell {
    fn offer(&mut self, value: u64, count: u8, row: usize) {
        match self.best {
            None => {
                self.best = Some(value);
                self.count = count;
                self.from_row = row;
            }
            Some(b) if value > b => {
                self.second = Some(b);
                self.best = Some(value);
                self.count = count;
                self.from_row = row;
            }
            Some(b) if value == b => self.count = (self.count + count).min(2),
            Some(_) => self.second = Some(self.second.map_or(value, |s| s.max(value))),
        }
    }
}

/// Exact profile by dynamic programming over row subsets: columns are
/// assigned left to right and each state keeps its two best distinct values.
/// Equivalent to scanning all `n!` permutations, in `O(2^n n)`.
pub(crate) fn profile_subset_dp(w: &Weights) -> Option<AssignmentProfile> {
    let n = w.len();
    assert!(n <= 20, "subset DP is exponential in the matrix size");
    let full = (1usize << n) - 1;
    let mut cells = vec![Cell::default(); 1 << n];
    cells[0] = Cell {
        best: Some(0),
        count: 1,
        second: None,
        from_row: 0,
    };
    for mask in 0..full {
        let cell = cells[mask];
        let Some(best) = cell.best else { continue };
        let c = mask.count_ones() as usize;
        for r in 0..n {
            if mask >> r & 1 == 1 {
                continue;
            }
            let Some(x) = w[r][c] else { continue };
            let next = &mut cells[mask | 1 << r];
            next.offer(best + x, cell.count, r);
            if let Some(s) = cell.second {
                next.offer(s + x, 1, r);
            }
        }
    }
    let last = cells[full];
    let best = last.best?;
    let mut sigma = vec![0; n];
    let mut mask = full;
    for c in (0..n).rev() {
        let r = cells[mask].from_row;
        sigma[c] = r;
        mask ^= 1 << r;
    }
    let unique = last.count == 1;
    Some(AssignmentProfile {
        best,
        sigma,
        unique,
        second: if unique { last.second } else { Some(best) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::for_each_permutation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(w: &Weights) -> Option<(u64, usize, Option<u64>)> {
        let mut sums = Vec::new();
        for_each_permutation(w.len(), |s| {
            let v: Option<u64> = s.iter().enumerate().map(|(c, &r)| w[r][c]).sum();
            if let Some(v) = v {
                sums.push(v);
            }
        });
        let best = *sums.iter().max()?;
        let count = sums.iter().filter(|&&v| v == best).count();
        let second = sums.iter().copied().filter(|&v| v < best).max();
        Some((best, count, second))
    }

    fn random_weights(rng: &mut ChaCha8Rng, n: usize, max: u64, p_inf: f64) -> Weights {
        (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| if rng.random_bool(p_inf) { None } else { Some(rng.random_range(0..=max)) })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn three_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=6 {
            for _ in 0..300 {
                let w = random_weights(&mut rng, n, 6, 0.3);
                let b = brute(&w);
                let dp = profile_subset_dp(&w);
                let hu = profile_ranked(&w);
                match b {
                    None => {
                        assert!(dp.is_none());
                        assert!(hu.is_none());
                    }
                    Some((best, count, second)) => {
                        for p in [dp.unwrap(), hu.unwrap()] {
                            assert_eq!(p.best, best);
                            assert_eq!(p.unique, count == 1);
                            if count == 1 {
                                assert_eq!(p.second, second);
                            }
                            let s: u64 = p.sigma.iter().enumerate().map(|(c, &r)| w[r][c].unwrap()).sum();
                            assert_eq!(s, best);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dp_and_ranked_agree_on_larger_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 7..=12 {
            for _ in 0..40 {
                let w = random_weights(&mut rng, n, 40, 0.25);
                let dp = profile_subset_dp(&w);
                let hu = profile_ranked(&w);
                assert_eq!(dp.is_some(), hu.is_some());
                if let (Some(a), Some(b)) = (dp, hu) {
                    assert_eq!(a.best, b.best);
                    assert_eq!(a.unique, b.unique);
                    assert_eq!(a.second, b.second);
                    if a.unique {
                        assert_eq!(a.sigma, b.sigma);
                    }
                }
            }
        }
    }

    #[test]
    fn infeasible_support() {
        let w: Weights = vec![vec![Some(1), Some(2)], vec![None, None]];
        assert!(max_assignment(&w, None).is_none());
        assert!(profile_subset_dp(&w).is_none());
    }
}
