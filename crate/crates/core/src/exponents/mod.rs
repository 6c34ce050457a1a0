//! Exponent matrices over `{-inf, 0, 1, 2, ...}` and dominance analysis.
//!
//! A square exponent matrix `M` has a *dominant permutation* when exactly
//! one permutation attains the maximal entry sum (permutations touching
//! `-inf` never count). If it exists with sum `s` and the field degree
//! exceeds `s`, the lifted matrix `alpha^M` is nonsingular: its determinant
//! is a nonzero GF(2) polynomial of degree `s` evaluated at `alpha`.

mod assignment;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use assignment::AssignmentProfile;

use crate::field::{FieldCtx, FieldError};
use crate::linalg::{for_each_permutation, FieldMatrix};

/// Above this size the subset DP gives way to ranked assignment.
pub const EXHAUSTIVE_LIMIT: usize = 9;

/// An exponent: `-inf` or a non-negative integer. `NegInf` orders below every `Fin`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exp {
    NegInf,
    Fin(u64),
}

impl Exp {
    pub fn is_finite(self) -> bool {
        matches!(self, Exp::Fin(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Exp::Fin(v) => Some(v),
            Exp::NegInf => None,
        }
    }
}

impl From<u64> for Exp {
    fn from(v: u64) -> Self {
        Exp::Fin(v)
    }
}

impl From<Option<u64>> for Exp {
    fn from(v: Option<u64>) -> Self {
        v.map_or(Exp::NegInf, Exp::Fin)
    }
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exp::NegInf => write!(f, "-inf"),
            Exp::Fin(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Exp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.finite().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.into())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExponentError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("column sets do not partition the columns")]
    NotAPartition,
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// JSON form: `{"rows":R,"cols":C,"entries":[...]}` row-major, `null` for `-inf`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct ExponentMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Exp>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Exp>,
}

impl TryFrom<RawMatrix> for ExponentMatrix {
    type Error = ExponentError;

    fn try_from(r: RawMatrix) -> Result<Self, Self::Error> {
        ExponentMatrix::from_entries(r.rows, r.cols, r.entries)
    }
}

impl fmt::Debug for ExponentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExponentMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|e| format!("{e:>4}")).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl ExponentMatrix {
    pub fn filled(rows: usize, cols: usize, value: Exp) -> Self {
        ExponentMatrix {
            rows,
            cols,
            entries: vec![value; rows * cols],
        }
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Exp>) -> Result<Self, ExponentError> {
        if entries.len() != rows * cols {
            return Err(ExponentError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(ExponentMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Exp>>) -> Result<Self, ExponentError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(ExponentError::Dimension("ragged rows".into()));
        }
        Self::from_entries(r, c, rows.into_iter().flatten().collect())
    }

    /// All-finite matrix from plain integers.
    pub fn from_finite(rows: &[Vec<u64>]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| Exp::Fin(v)).collect()).collect())
            .expect("rectangular input")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Exp {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Exp) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Exp] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Exp] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<Exp>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn max_finite(&self) -> Option<u64> {
        self.entries.iter().filter_map(|e| e.finite()).max()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> ExponentMatrix {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                entries.push(self.get(r, c));
            }
        }
        ExponentMatrix {
            rows: rows.len(),
            cols: cols.len(),
            entries,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> ExponentMatrix {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.submatrix(rows, &cols)
    }

    /// Copies `block` into this matrix with its top-left corner at `(r0, c0)`.
    pub fn put_block(&mut self, r0: usize, c0: usize, block: &ExponentMatrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c));
            }
        }
    }

    /// Sum along `sigma` (column `c` uses row `sigma[c]`), `None` if it hits `-inf`.
    pub fn permutation_sum(&self, sigma: &[usize]) -> Option<u64> {
        sigma.iter().enumerate().map(|(c, &r)| self.get(r, c).finite()).sum()
    }

    fn weights(&self) -> assignment::Weights {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|e| e.finite()).collect())
            .collect()
    }

    pub fn support(&self) -> Vec<Vec<bool>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|e| e.is_finite()).collect())
            .collect()
    }
}

/// Entrywise `alpha^M` with `alpha^(-inf) = 0`.
pub fn lift(m: &ExponentMatrix, ctx: &FieldCtx) -> FieldMatrix {
    let mut cache = HashMap::new();
    let entries = m
        .entries
        .iter()
        .map(|&e| cache.entry(e).or_insert_with(|| ctx.pow_exp(e)).clone())
        .collect();
    FieldMatrix::from_entries(ctx, m.rows, m.cols, entries).expect("shape and field match")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub exists: bool,
    /// Column `i` maps to row `sigma_star[i]` (0-based).
    pub sigma_star: Option<Vec<usize>>,
    pub dominant_sum: Option<u64>,
    /// Best permutation sum strictly below the dominant sum.
    pub runner_up_sum: Option<u64>,
    /// Largest finite permutation sum, whether or not it is unique.
    pub max_sum: Option<u64>,
}

impl DominanceReport {
    fn from_profile(p: Option<AssignmentProfile>) -> Self {
        match p {
            None => DominanceReport {
                exists: false,
                sigma_star: None,
                dominant_sum: None,
                runner_up_sum: None,
                max_sum: None,
            },
            Some(p) if p.unique => DominanceReport {
                exists: true,
                sigma_star: Some(p.sigma),
                dominant_sum: Some(p.best),
                runner_up_sum: p.second,
                max_sum: Some(p.best),
            },
            Some(p) => DominanceReport {
                exists: false,
                sigma_star: None,
                dominant_sum: None,
                runner_up_sum: None,
                max_sum: Some(p.best),
            },
        }
    }
}

fn square_profile(m: &ExponentMatrix) -> Option<AssignmentProfile> {
    assert!(m.is_square(), "dominance is defined for square matrices");
    let w = m.weights();
    if m.rows <= EXHAUSTIVE_LIMIT {
        assignment::profile_subset_dp(&w)
    } else {
        assignment::profile_ranked(&w)
    }
}

/// Dominant permutation of a square matrix. Exact over all permutations for
/// sizes up to [`EXHAUSTIVE_LIMIT`], best-versus-second-best assignment above.
pub fn find_dominant_permutation(m: &ExponentMatrix) -> DominanceReport {
    DominanceReport::from_profile(square_profile(m))
}

/// Literal scan of all `x!` permutations. Used as an independent oracle.
pub fn dominance_by_enumeration(m: &ExponentMatrix) -> DominanceReport {
    assert!(m.is_square());
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut ties = 0usize;
    let mut second: Option<u64> = None;
    for_each_permutation(m.rows, |sigma| {
        let Some(s) = m.permutation_sum(sigma) else { return };
        match &best {
            Some((b, _)) if s < *b => second = Some(second.map_or(s, |x| x.max(s))),
            Some((b, _)) if s == *b => ties += 1,
            _ => {
                if let Some((b, _)) = &best {
                    second = Some(*b);
                }
                best = Some((s, sigma.to_vec()));
                ties = 0;
            }
        }
    });
    DominanceReport::from_profile(best.map(|(b, sigma)| AssignmentProfile {
        best: b,
        sigma,
        unique: ties == 0,
        second: if ties == 0 { second } else { Some(b) },
    }))
}

/// Requires `count` of the chosen rows to come from `rows`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowQuota {
    pub rows: Vec<usize>,
    pub count: usize,
}

/// Restricts which rows a square row-submatrix may use.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RowConstraint {
    pub forced: Vec<usize>,
    /// `None` allows every row.
    pub allowed: Option<Vec<usize>>,
    pub quotas: Vec<RowQuota>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmatrixChoice {
    /// Chosen rows of the input, ascending.
    pub rows: Vec<usize>,
    /// Report for the chosen square submatrix; `sigma_star` indexes into `rows`.
    pub report: DominanceReport,
}

fn combinations(pool: &[usize], k: usize, mut f: impl FnMut(&[usize])) {
    fn rec(pool: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = k - cur.len();
        for i in start..=pool.len().saturating_sub(need) {
            if pool.len() < need {
                break;
            }
            cur.push(pool[i]);
            rec(pool, k, i + 1, cur, f);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(k);
    rec(pool, k, 0, &mut cur, &mut f);
}

/// Constrained dominant submatrix of an `x` by `y` matrix (`y <= x`): the
/// admissible `y`-row choice whose dominant sum strictly exceeds the best
/// permutation sum of every other admissible choice.
///
/// Other choices are compared by their maximal permutation sum even when
/// they lack a dominant permutation; this keeps the decomposition argument
/// sound.
pub fn find_dominant_submatrix(m: &ExponentMatrix, constraint: &RowConstraint) -> Option<SubmatrixChoice> {
    let y = m.cols;
    if y > m.rows {
        return None;
    }
    let allowed: BTreeSet<usize> = match &constraint.allowed {
        Some(a) => a.iter().copied().filter(|&r| r < m.rows).collect(),
        None => (0..m.rows).collect(),
    };
    let forced: BTreeSet<usize> = constraint.forced.iter().copied().collect();
    if !forced.is_subset(&allowed) || forced.len() > y {
        return None;
    }
    let pool: Vec<usize> = allowed.difference(&forced).copied().collect();
    let cols: Vec<usize> = (0..y).collect();
    let mut best: Option<(u64, Vec<usize>, AssignmentProfile)> = None;
    let mut tied = false;
    combinations(&pool, y - forced.len(), |extra| {
        let mut rows: Vec<usize> = forced.iter().copied().chain(extra.iter().copied()).collect();
        rows.sort_unstable();
        let ok = constraint
            .quotas
            .iter()
            .all(|q| rows.iter().filter(|r| q.rows.contains(r)).count() == q.count);
        if !ok {
            return;
        }
        let Some(p) = square_profile(&m.submatrix(&rows, &cols)) else { return };
        match &best {
            Some((b, _, _)) if p.best < *b => {}
            Some((b, _, _)) if p.best == *b => tied = true,
            _ => {
                best = Some((p.best, rows, p));
                tied = false;
            }
        }
    });
    let (_, rows, profile) = best?;
    if tied || !profile.unique {
        return None;
    }
    Some(SubmatrixChoice {
        rows,
        report: DominanceReport::from_profile(Some(profile)),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartCertificate {
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
    pub dominant_sum: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    pub parts: Vec<PartCertificate>,
    pub total: u64,
    /// Assembled dominant permutation of the whole matrix, column to row.
    pub sigma_star: Vec<usize>,
}

/// Submatrix decomposition: find the constrained dominant submatrix of every
/// column part; if their row sets are pairwise disjoint the whole matrix has
/// a dominant permutation whose sum is the sum of the parts.
///
/// The constraints must be necessary conditions on any finite permutation
/// (for example those from [`infer_constraints`]); otherwise the certificate
/// proves nothing.
pub fn decompose_dominance(
    m: &ExponentMatrix,
    parts: &[(Vec<usize>, RowConstraint)],
) -> Result<Option<DecompositionCertificate>, ExponentError> {
    if !m.is_square() {
        return Err(ExponentError::Dimension("decomposition needs a square matrix".into()));
    }
    let mut seen = vec![false; m.cols];
    for (cols, _) in parts {
        for &c in cols {
            if c >= m.cols || std::mem::replace(&mut seen[c], true) {
                return Err(ExponentError::NotAPartition);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(ExponentError::NotAPartition);
    }
    let all_rows: Vec<usize> = (0..m.rows).collect();
    let mut used = vec![false; m.rows];
    let mut sigma = vec![0usize; m.cols];
    let mut out = Vec::with_capacity(parts.len());
    let mut total = 0;
    for (cols, constraint) in parts {
        let sub = m.submatrix(&all_rows, cols);
        let Some(choice) = find_dominant_submatrix(&sub, constraint) else {
            return Ok(None);
        };
        for &r in &choice.rows {
            if std::mem::replace(&mut used[r], true) {
                return Ok(None);
            }
        }
        let local = choice.report.sigma_star.as_ref().expect("dominant choice has sigma");
        for (i, &c) in cols.iter().enumerate() {
            sigma[c] = choice.rows[local[i]];
        }
        let s = choice.report.dominant_sum.expect("dominant choice has sum");
        total += s;
        out.push(PartCertificate {
            columns: cols.clone(),
            rows: choice.rows,
            dominant_sum: s,
        });
    }
    Ok(Some(DecompositionCertificate {
        parts: out,
        total,
        sigma_star: sigma,
    }))
}

/// Constraints implied by the `-inf` pattern alone: a row whose finite
/// entries all lie in one part must be used by that part, and a part may
/// only use rows with a finite entry in its columns that are not forced
/// elsewhere.
pub fn infer_constraints(m: &ExponentMatrix, partition: &[Vec<usize>]) -> Vec<RowConstraint> {
    let owner: Vec<Option<usize>> = (0..m.rows)
        .map(|r| {
            let touched: BTreeSet<usize> = partition
                .iter()
                .enumerate()
                .filter(|(_, cols)| cols.iter().any(|&c| m.get(r, c).is_finite()))
                .map(|(i, _)| i)
                .collect();
            (touched.len() == 1).then(|| *touched.iter().next().unwrap())
        })
        .collect();
    partition
        .iter()
        .enumerate()
        .map(|(i, cols)| {
            let forced = (0..m.rows).filter(|&r| owner[r] == Some(i)).collect();
            let allowed = (0..m.rows)
                .filter(|&r| cols.iter().any(|&c| m.get(r, c).is_finite()))
                .filter(|&r| owner[r].is_none_or(|o| o == i))
                .collect();
            RowConstraint {
                forced,
                allowed: Some(allowed),
                quotas: Vec::new(),
            }
        })
        .collect()
}

/// Lifts `m` into a field of degree `d` and reports whether the lift is
/// nonsingular. Requires a dominant permutation with sum below `d`.
pub fn check_dominance_implies_invertible(m: &ExponentMatrix, d: usize) -> Result<bool, ExponentError> {
    let report = find_dominant_permutation(m);
    let Some(s) = report.dominant_sum else {
        return Err(ExponentError::PreconditionUnmet("no dominant permutation".into()));
    };
    if (d as u64) <= s {
        return Err(ExponentError::PreconditionUnmet(format!(
            "degree {d} does not exceed dominant sum {s}"
        )));
    }
    let ctx = FieldCtx::new(d, None, Some(0))?;
    Ok(!lift(m, &ctx).det().expect("square").is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Negative numbers stand for `-inf`.
    pub(crate) fn em(rows: &[&[i64]]) -> ExponentMatrix {
        ExponentMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| if v < 0 { Exp::NegInf } else { Exp::Fin(v as u64) }).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn lift_examples() {
        let f = FieldCtx::new(37, None, Some(1)).unwrap();
        assert!(lift(&em(&[&[0]]), &f).get(0, 0).is_one());
        assert!(lift(&em(&[&[-1]]), &f).get(0, 0).is_zero());
        let l = lift(&em(&[&[0, 0], &[1, 2]]), &f);
        assert!(l.get(0, 0).is_one() && l.get(0, 1).is_one());
        assert_eq!(*l.get(1, 0), f.alpha());
        assert_eq!(*l.get(1, 1), f.mul(&f.alpha(), &f.alpha()));
    }

    #[test]
    fn dominant_permutation_examples() {
        let r = find_dominant_permutation(&em(&[&[0, 0], &[1, 2]]));
        assert!(r.exists);
        assert_eq!(r.sigma_star, Some(vec![0, 1]));
        assert_eq!(r.dominant_sum, Some(2));
        assert_eq!(r.runner_up_sum, Some(1));

        let r = find_dominant_permutation(&em(&[&[0, 0], &[0, 0]]));
        assert!(!r.exists);
        assert_eq!(r.max_sum, Some(0));

        let r = find_dominant_permutation(&em(&[&[0, -1], &[-1, 5]]));
        assert!(r.exists);
        assert_eq!(r.sigma_star, Some(vec![0, 1]));
        assert_eq!(r.dominant_sum, Some(5));
        assert_eq!(r.runner_up_sum, None);

        let r = find_dominant_permutation(&em(&[&[-1, -1], &[3, 4]]));
        assert!(!r.exists);
        assert_eq!(r.max_sum, None);
    }

    #[test]
    fn enumeration_matches_fast_route() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for n in 1..=7 {
            for _ in 0..100 {
                let rows: Vec<Vec<Exp>> = (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| if rng.random_bool(0.2) { Exp::NegInf } else { Exp::Fin(rng.random_range(0..8)) })
                            .collect()
                    })
                    .collect();
                let m = ExponentMatrix::from_rows(rows).unwrap();
                let a = find_dominant_permutation(&m);
                let b = dominance_by_enumeration(&m);
                assert_eq!(a, b, "{m:?}");
            }
        }
    }

    #[test]
    fn sigma_never_hits_neg_inf() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in [3usize, 8, 10, 12] {
            for _ in 0..50 {
                let rows: Vec<Vec<Exp>> = (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| if rng.random_bool(0.3) { Exp::NegInf } else { Exp::Fin(rng.random_range(0..100)) })
                            .collect()
                    })
                    .collect();
                let m = ExponentMatrix::from_rows(rows).unwrap();
                let r = find_dominant_permutation(&m);
                if let Some(s) = &r.sigma_star {
                    assert!(s.iter().enumerate().all(|(c, &row)| m.get(row, c).is_finite()));
                    assert_eq!(m.permutation_sum(s), r.dominant_sum);
                    if let Some(ru) = r.runner_up_sum {
                        assert!(r.dominant_sum.unwrap() > ru);
                    }
                }
            }
        }
    }

    #[test]
    fn submatrix_of_unit_memory_blocks() {
        // n=4, k=2 blocks of the unit-memory construction
        let m0 = em(&[&[0, 0], &[1, 2], &[2, 4], &[3, 6]]);
        let m1 = em(&[&[6, 3], &[4, 2], &[2, 1], &[0, 0]]);
        let c0 = find_dominant_submatrix(&m0, &RowConstraint::default()).unwrap();
        assert_eq!(c0.rows, vec![2, 3]);
        let c1 = find_dominant_submatrix(&m1, &RowConstraint::default()).unwrap();
        assert_eq!(c1.rows, vec![0, 1]);
    }

    #[test]
    fn submatrix_square_reduces_to_permutation() {
        let m = em(&[&[0, 0], &[1, 2]]);
        let c = find_dominant_submatrix(&m, &RowConstraint::default()).unwrap();
        assert_eq!(c.rows, vec![0, 1]);
        assert_eq!(c.report, find_dominant_permutation(&m));
    }

    #[test]
    fn submatrix_constraints() {
        let m1 = em(&[&[6, 3], &[4, 2], &[2, 1], &[0, 0]]);
        let c = find_dominant_submatrix(
            &m1,
            &RowConstraint {
                forced: vec![3],
                allowed: None,
                quotas: vec![],
            },
        )
        .unwrap();
        assert_eq!(c.rows, vec![0, 3]);
        let c = find_dominant_submatrix(
            &m1,
            &RowConstraint {
                forced: vec![],
                allowed: Some(vec![1, 2, 3]),
                quotas: vec![RowQuota { rows: vec![3], count: 1 }],
            },
        )
        .unwrap();
        assert_eq!(c.rows, vec![1, 3]);
        // tie between two choices
        let flat = em(&[&[1, 1], &[1, 1], &[0, 0]]);
        assert!(find_dominant_submatrix(&flat, &RowConstraint::default()).is_none());
    }

    #[test]
    fn decomposition_single_part_matches_permutation() {
        let m = em(&[&[0, 0, 1], &[1, 2, 0], &[5, 1, 3]]);
        let parts = vec![((0..3).collect(), RowConstraint::default())];
        let cert = decompose_dominance(&m, &parts).unwrap();
        let r = find_dominant_permutation(&m);
        assert_eq!(cert.is_some(), r.exists);
        let cert = cert.unwrap();
        assert_eq!(Some(cert.total), r.dominant_sum);
        assert_eq!(Some(cert.sigma_star), r.sigma_star);
    }

    #[test]
    fn decomposition_with_overlapping_rows_fails() {
        // both column parts want row 2
        let sq = em(&[&[0, 0, 0], &[1, 0, 1], &[9, 1, 9]]);
        let parts = vec![(vec![0], RowConstraint::default()), (vec![1, 2], RowConstraint::default())];
        assert_eq!(decompose_dominance(&sq, &parts).unwrap(), None);
    }

    #[test]
    fn decomposition_rejects_bad_partition() {
        let m = em(&[&[0, 0], &[1, 2]]);
        assert_eq!(
            decompose_dominance(&m, &[(vec![0], RowConstraint::default())]).unwrap_err(),
            ExponentError::NotAPartition
        );
    }

    #[test]
    fn inferred_constraints_force_isolated_rows() {
        // (1,3) window of the n=4,k=2 unit-memory code: row 0 only reaches thick column 0
        let m = em(&[
            &[0, 0, -1, -1],
            &[6, 3, 0, 0],
            &[4, 2, 1, 2],
            &[2, 1, 2, 4],
        ]);
        let partition = vec![vec![0, 1], vec![2, 3]];
        let cons = infer_constraints(&m, &partition);
        assert_eq!(cons[0].forced, vec![0]);
        assert_eq!(cons[1].allowed, Some(vec![1, 2, 3]));
        let parts: Vec<_> = partition.into_iter().zip(cons).collect();
        let cert = decompose_dominance(&m, &parts).unwrap().unwrap();
        assert_eq!(cert.parts[0].rows, vec![0, 1]);
        assert_eq!(cert.parts[1].rows, vec![2, 3]);
        let r = find_dominant_permutation(&m);
        assert_eq!(Some(cert.total), r.dominant_sum);
        assert_eq!(Some(cert.sigma_star), r.sigma_star);
    }

    #[test]
    fn invertibility_from_dominance() {
        assert!(check_dominance_implies_invertible(&em(&[&[0, 0], &[1, 2]]), 3).unwrap());
        assert!(check_dominance_implies_invertible(&em(&[&[0]]), 1).unwrap());
        assert!(matches!(
            check_dominance_implies_invertible(&em(&[&[0, 0], &[0, 0]]), 5),
            Err(ExponentError::PreconditionUnmet(_))
        ));
        assert!(matches!(
            check_dominance_implies_invertible(&em(&[&[0, 0], &[1, 2]]), 2),
            Err(ExponentError::PreconditionUnmet(_))
        ));
    }

    #[test]
    fn json_uses_null_for_neg_inf() {
        let m = em(&[&[0, -1], &[3, 4]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"entries":[0,null,3,4]}"#);
        let back: ExponentMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ExponentMatrix>(r#"{"rows":2,"cols":2,"entries":[0]}"#).is_err());
    }
}
