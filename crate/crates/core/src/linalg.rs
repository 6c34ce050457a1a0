//! Dense linear algebra over a [`FieldCtx`] by Gaussian elimination.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldCtx, FieldElement, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix has rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },
    #[error("overdetermined system is inconsistent")]
    Inconsistent,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("Leibniz expansion limited to size 6, got {0}")]
    TooLarge(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    ctx: FieldCtx,
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
}

impl std::fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "FieldMatrix {}x{} over {:?}", self.rows, self.cols, self.ctx)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|e| self.ctx.to_hex(e)).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Row-reduced echelon form of `[A | b]`.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub matrix: FieldMatrix,
    pub rhs: Vec<FieldElement>,
    /// `pivots[i]` is the pivot column of row `i`.
    pub pivots: Vec<usize>,
}

impl FieldMatrix {
    pub fn zeros(ctx: &FieldCtx, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            ctx: ctx.clone(),
            rows,
            cols,
            entries: vec![ctx.zero(); rows * cols],
        }
    }

    pub fn identity(ctx: &FieldCtx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    pub fn from_entries(ctx: &FieldCtx, rows: usize, cols: usize, entries: Vec<FieldElement>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if !entries.iter().all(|e| ctx.owns(e)) {
            return Err(FieldError::ContextMismatch.into());
        }
        Ok(FieldMatrix {
            ctx: ctx.clone(),
            rows,
            cols,
            entries,
        })
    }

    pub fn random<R: rand::RngCore + ?Sized>(ctx: &FieldCtx, rows: usize, cols: usize, rng: &mut R) -> Self {
        let entries = (0..rows * cols).map(|_| ctx.random(rng)).collect();
        FieldMatrix {
            ctx: ctx.clone(),
            rows,
            cols,
            entries,
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &FieldElement {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn select_rows(&self, rows: &[usize]) -> FieldMatrix {
        let mut entries = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            entries.extend_from_slice(self.row(r));
        }
        FieldMatrix {
            ctx: self.ctx.clone(),
            rows: rows.len(),
            cols: self.cols,
            entries,
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> FieldMatrix {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                entries.push(self.get(r, c).clone());
            }
        }
        FieldMatrix {
            ctx: self.ctx.clone(),
            rows: rows.len(),
            cols: cols.len(),
            entries,
        }
    }

    pub fn mul_vec(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = self.ctx.zero();
                for (a, b) in self.row(r).iter().zip(x) {
                    if !a.is_zero() && !b.is_zero() {
                        self.ctx.add_assign(&mut acc, &self.ctx.mul(a, b));
                    }
                }
                acc
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// `row[dst] += factor * row[src]`, touching columns `from..`.
    fn axpy_row(&mut self, dst: usize, src: usize, factor: &FieldElement, from: usize) {
        for c in from..self.cols {
            let s = &self.entries[src * self.cols + c];
            if s.is_zero() {
                continue;
            }
            let t = self.ctx.mul(factor, s);
            self.ctx.add_assign(&mut self.entries[dst * self.cols + c], &t);
        }
    }

    fn scale_row(&mut self, r: usize, factor: &FieldElement, from: usize) {
        for c in from..self.cols {
            let v = self.ctx.mul(factor, &self.entries[r * self.cols + c]);
            self.entries[r * self.cols + c] = v;
        }
    }

    /// Reduced row echelon form; pivots are chosen as the first nonzero entry
    /// in column order, rows scanned top to bottom.
    pub fn rref(&self, rhs: Option<&[FieldElement]>) -> Echelon {
        let ctx = &self.ctx;
        let mut a = self.clone();
        let mut b: Vec<FieldElement> = match rhs {
            Some(v) => v.to_vec(),
            None => vec![ctx.zero(); self.rows],
        };
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(p) = (r..a.rows).find(|&i| !a.get(i, c).is_zero()) else {
                continue;
            };
            a.swap_rows(r, p);
            b.swap(r, p);
            let inv = ctx.inv(a.get(r, c)).expect("pivot is nonzero");
            a.scale_row(r, &inv, c);
            b[r] = ctx.mul(&inv, &b[r]);
            for i in 0..a.rows {
                if i == r || a.get(i, c).is_zero() {
                    continue;
                }
                let f = a.get(i, c).clone();
                a.axpy_row(i, r, &f, c);
                let t = ctx.mul(&f, &b[r]);
                ctx.add_assign(&mut b[i], &t);
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: a, rhs: b, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref(None).pivots.len()
    }

    pub fn det(&self) -> Result<FieldElement, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Dimension("determinant of a non-square matrix".into()));
        }
        let ctx = &self.ctx;
        let mut a = self.clone();
        let mut det = ctx.one();
        for c in 0..a.cols {
            let Some(p) = (c..a.rows).find(|&i| !a.get(i, c).is_zero()) else {
                return Ok(ctx.zero());
            };
            // row swaps flip the sign, which is invisible in characteristic 2
            a.swap_rows(c, p);
            let pivot = a.get(c, c).clone();
            det = ctx.mul(&det, &pivot);
            let inv = ctx.inv(&pivot)?;
            for i in c + 1..a.rows {
                if a.get(i, c).is_zero() {
                    continue;
                }
                let f = ctx.mul(a.get(i, c), &inv);
                a.axpy_row(i, c, &f, c);
            }
        }
        Ok(det)
    }

    /// Literal Leibniz expansion, all `x!` permutations (sign is +1 in characteristic 2).
    pub fn det_leibniz(&self) -> Result<FieldElement, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Dimension("determinant of a non-square matrix".into()));
        }
        if self.rows > 6 {
            return Err(LinalgError::TooLarge(self.rows));
        }
        let ctx = &self.ctx;
        let mut total = ctx.zero();
        for_each_permutation(self.rows, |sigma| {
            let mut term = ctx.one();
            for (col, &row) in sigma.iter().enumerate() {
                term = ctx.mul(&term, self.get(row, col));
            }
            ctx.add_assign(&mut total, &term);
        });
        Ok(total)
    }

    pub fn inverse(&self) -> Result<FieldMatrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![self.ctx.zero(); n];
            e[j] = self.ctx.one();
            cols.push(mat_solve(self, &e)?);
        }
        let mut out = FieldMatrix::zeros(&self.ctx, n, n);
        for (j, col) in cols.into_iter().enumerate() {
            for (i, v) in col.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Ok(out)
    }
}

/// Solves `A x = b` for square or tall `A` with full column rank.
pub fn mat_solve(a: &FieldMatrix, b: &[FieldElement]) -> Result<Vec<FieldElement>, LinalgError> {
    if a.rows < a.cols {
        return Err(LinalgError::Dimension(format!(
            "{}x{} system is underdetermined",
            a.rows, a.cols
        )));
    }
    if b.len() != a.rows {
        return Err(LinalgError::Dimension(format!(
            "right-hand side has {} entries, expected {}",
            b.len(),
            a.rows
        )));
    }
    if !b.iter().all(|e| a.ctx.owns(e)) {
        return Err(FieldError::ContextMismatch.into());
    }
    let ech = a.rref(Some(b));
    let rank = ech.pivots.len();
    if rank < a.cols {
        return Err(LinalgError::RankDeficient {
            rank,
            needed: a.cols,
        });
    }
    if ech.rhs[rank..].iter().any(|v| !v.is_zero()) {
        return Err(LinalgError::Inconsistent);
    }
    Ok(ech.rhs[..rank].to_vec())
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm). Entry `i` is
/// the row matched with column `i`.
pub fn for_each_permutation<F: FnMut(&[usize])>(n: usize, mut f: F) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// True iff some permutation avoids every `false` entry, i.e. the bipartite
/// support graph has a perfect matching (Kuhn's augmenting paths).
pub fn support_has_nontrivial_term(pattern: &[Vec<bool>]) -> bool {
    let n = pattern.len();
    if pattern.iter().any(|r| r.len() != n) {
        return false;
    }
    let mut row_of_col: Vec<Option<usize>> = vec![None; n];
    for r in 0..n {
        let mut seen = vec![false; n];
        if !augment(pattern, r, &mut seen, &mut row_of_col) {
            return false;
        }
    }
    true
}

fn augment(pattern: &[Vec<bool>], r: usize, seen: &mut [bool], row_of_col: &mut [Option<usize>]) -> bool {
    for c in 0..pattern.len() {
        if !pattern[r][c] || seen[c] {
            continue;
        }
        seen[c] = true;
        if row_of_col[c].is_none_or(|r2| augment(pattern, r2, seen, row_of_col)) {
            row_of_col[c] = Some(r);
            return true;
        }
    }
    false
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<String>,
}

impl FieldMatrix {
    /// `{"rows":R,"cols":C,"entries":["0x..", ...]}`, row-major.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| self.ctx.to_hex(e)).collect(),
        })
        .expect("plain data serializes")
    }

    pub fn from_json(ctx: &FieldCtx, v: &serde_json::Value) -> Result<Self, LinalgError> {
        let m: MatrixJson =
            serde_json::from_value(v.clone()).map_err(|e| LinalgError::Dimension(e.to_string()))?;
        let entries = m
            .entries
            .iter()
            .map(|s| ctx.parse_hex(s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_entries(ctx, m.rows, m.cols, entries)
    }
}
