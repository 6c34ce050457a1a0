//! Explicit generator constructions, field-degree bounds, the stacked
//! exponent matrix of a window and the structural superregularity test.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{lift, Exp, ExponentError, ExponentMatrix};
use crate::field::{search_modulus, FieldCtx, FieldError};
use crate::linalg::FieldMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("degree {degree} does not exceed the bound {bound}")]
    BelowBound { degree: usize, bound: usize },
    #[error("malformed generator spec: {0}")]
    Malformed(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub tau: usize,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, m: usize, tau: usize) -> Result<Self, ConstructionError> {
        let p = CodeParams { n, k, m, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ConstructionError> {
        if self.k == 0 || self.n <= self.k {
            return Err(ConstructionError::BadParams(format!(
                "need n > k >= 1, got n={} k={}",
                self.n, self.k
            )));
        }
        if self.m == 0 || self.tau == 0 {
            return Err(ConstructionError::BadParams("m and tau must be positive".into()));
        }
        Ok(())
    }
}

impl std::fmt::Display for CodeParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.n, self.k, self.m, self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstructionKind {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "B")]
    B,
    #[serde(rename = "custom")]
    Custom,
}

impl std::str::FromStr for ConstructionKind {
    type Err = ConstructionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(ConstructionKind::A),
            "b" => Ok(ConstructionKind::B),
            "custom" => Ok(ConstructionKind::Custom),
            other => Err(ConstructionError::BadParams(format!("unknown construction {other:?}"))),
        }
    }
}

/// Unit-memory construction: returns `(M1, M0)` with
/// `M0(i,j) = (i-1) j` and `M1(i,j) = (n-i)(k+1-j)`, 1-based.
pub fn construct_a(n: usize, k: usize) -> Result<(ExponentMatrix, ExponentMatrix), ConstructionError> {
    if k == 0 || n <= k {
        return Err(ConstructionError::BadParams(format!("need n > k >= 1, got n={n} k={k}")));
    }
    let m0 = (1..=n)
        .map(|i| (1..=k).map(|j| ((i - 1) * j) as u64).collect())
        .collect::<Vec<Vec<u64>>>();
    let m1 = (1..=n)
        .map(|i| (1..=k).map(|j| ((n - i) * (k + 1 - j)) as u64).collect())
        .collect::<Vec<Vec<u64>>>();
    Ok((ExponentMatrix::from_finite(&m1), ExponentMatrix::from_finite(&m0)))
}

/// General-memory construction: `[M^(0), ..., M^(m)]` with
/// `M^(t)(i,j) = 2^(t n + i + k - 1 - j)`, 1-based.
pub fn construct_b(n: usize, k: usize, m: usize) -> Result<Vec<ExponentMatrix>, ConstructionError> {
    if k == 0 || n <= k || m == 0 {
        return Err(ConstructionError::BadParams(format!(
            "need n > k >= 1 and m >= 1, got n={n} k={k} m={m}"
        )));
    }
    if m * n + n + k - 2 > 63 {
        return Err(ConstructionError::BadParams("exponents exceed 2^63".into()));
    }
    Ok((0..=m)
        .map(|t| {
            let rows: Vec<Vec<u64>> = (1..=n)
                .map(|i| (1..=k).map(|j| 1u64 << (t * n + i + k - 1 - j)).collect())
                .collect();
            ExponentMatrix::from_finite(&rows)
        })
        .collect())
}

/// Smallest degree covered by the sufficiency theorem of the construction.
pub fn min_degree(params: &CodeParams, kind: ConstructionKind) -> Result<usize, ConstructionError> {
    params.validate()?;
    let CodeParams { n, k, m, tau } = *params;
    let bound: u128 = match kind {
        ConstructionKind::A => {
            if m != 1 {
                return Err(ConstructionError::BadParams("construction A needs m = 1".into()));
            }
            ((n - 1) * k * k * (tau + 1)) as u128
        }
        ConstructionKind::B => {
            let shift = (m + 1) * n + k - 2;
            if shift > 100 {
                return Err(ConstructionError::BadParams("degree bound overflows".into()));
            }
            (1u128 << shift) * (tau as u128 + 1) * k as u128
        }
        ConstructionKind::Custom => {
            return Err(ConstructionError::BadParams("custom specs carry no bound".into()));
        }
    };
    usize::try_from(bound + 1).map_err(|_| ConstructionError::BadParams("degree bound overflows".into()))
}

/// Serialized as `{"n","k","m","tau","construction","degree","modulus","exponent_matrices"}`
/// with the matrices ordered `[M^(m), ..., M^(0)]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub params: CodeParams,
    pub construction: ConstructionKind,
    pub degree: usize,
    /// Exponents of the modulus, descending.
    pub modulus: Vec<usize>,
    pub exponent_matrices: Vec<ExponentMatrix>,
}

impl GeneratorSpec {
    /// Builds construction A or B. Without a degree the theorem bound is used;
    /// a smaller explicit degree is rejected unless `allow_below_bound`.
    pub fn construct(
        kind: ConstructionKind,
        params: CodeParams,
        degree: Option<usize>,
        modulus: Option<Vec<usize>>,
        seed: u64,
        allow_below_bound: bool,
    ) -> Result<Self, ConstructionError> {
        params.validate()?;
        let matrices = match kind {
            ConstructionKind::A => {
                if params.m != 1 {
                    return Err(ConstructionError::BadParams("construction A needs m = 1".into()));
                }
                let (m1, m0) = construct_a(params.n, params.k)?;
                vec![m1, m0]
            }
            ConstructionKind::B => {
                let mut v = construct_b(params.n, params.k, params.m)?;
                v.reverse();
                v
            }
            ConstructionKind::Custom => {
                return Err(ConstructionError::BadParams("use GeneratorSpec::custom".into()));
            }
        };
        let bound = min_degree(&params, kind)?;
        let degree = degree.unwrap_or(bound);
        if degree < bound && !allow_below_bound {
            return Err(ConstructionError::BelowBound { degree, bound: bound - 1 });
        }
        let modulus = resolve_modulus(degree, modulus, seed)?;
        Ok(GeneratorSpec {
            params,
            construction: kind,
            degree,
            modulus,
            exponent_matrices: matrices,
        })
    }

    /// User-supplied matrices, ordered `[M^(m), ..., M^(0)]`.
    pub fn custom(
        params: CodeParams,
        matrices: Vec<ExponentMatrix>,
        degree: usize,
        modulus: Option<Vec<usize>>,
        seed: u64,
    ) -> Result<Self, ConstructionError> {
        let modulus = resolve_modulus(degree, modulus, seed)?;
        let spec = GeneratorSpec {
            params,
            construction: ConstructionKind::Custom,
            degree,
            modulus,
            exponent_matrices: matrices,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(s: &str) -> Result<Self, ConstructionError> {
        let spec: GeneratorSpec = serde_json::from_str(s).map_err(|e| ConstructionError::Malformed(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), ConstructionError> {
        self.params.validate()?;
        let CodeParams { n, k, m, .. } = self.params;
        if self.exponent_matrices.len() != m + 1 {
            return Err(ConstructionError::Malformed(format!(
                "expected {} exponent matrices, found {}",
                m + 1,
                self.exponent_matrices.len()
            )));
        }
        if let Some(bad) = self.exponent_matrices.iter().find(|e| e.rows() != n || e.cols() != k) {
            return Err(ConstructionError::Malformed(format!(
                "exponent matrix is {}x{}, expected {n}x{k}",
                bad.rows(),
                bad.cols()
            )));
        }
        if self.construction == ConstructionKind::A && m != 1 {
            return Err(ConstructionError::Malformed("construction A needs m = 1".into()));
        }
        if self.degree == 0 || self.modulus.first() != Some(&self.degree) {
            return Err(ConstructionError::Malformed("modulus must lead with the degree".into()));
        }
        Ok(())
    }

    /// The field this spec lives in (checks the modulus is irreducible).
    pub fn field(&self) -> Result<FieldCtx, ConstructionError> {
        Ok(FieldCtx::with_modulus(self.degree, &self.modulus)?)
    }

    /// `M^(t)` for `0 <= t <= m`.
    pub fn matrix(&self, t: usize) -> &ExponentMatrix {
        &self.exponent_matrices[self.params.m - t]
    }

    /// Whether the degree clears the theorem bound; `None` for custom specs.
    pub fn meets_bound(&self) -> Option<bool> {
        min_degree(&self.params, self.construction).ok().map(|b| self.degree >= b)
    }
}

fn resolve_modulus(degree: usize, modulus: Option<Vec<usize>>, seed: u64) -> Result<Vec<usize>, ConstructionError> {
    match modulus {
        Some(m) => Ok(FieldCtx::with_modulus(degree, &m)?.modulus()),
        None => Ok(search_modulus(degree, seed)?),
    }
}

/// `G = [alpha^M^(m) ... alpha^M^(0)]`, an `n x (m+1)k` field matrix.
pub fn build_generator(spec: &GeneratorSpec, ctx: &FieldCtx) -> Result<FieldMatrix, ConstructionError> {
    if ctx.degree() != spec.degree {
        return Err(FieldError::DegreeMismatch {
            expected: spec.degree,
            found: ctx.degree(),
        }
        .into());
    }
    let CodeParams { n, k, m, .. } = spec.params;
    let mut g = FieldMatrix::zeros(ctx, n, (m + 1) * k);
    for (b, e) in spec.exponent_matrices.iter().enumerate() {
        let l = lift(e, ctx);
        for r in 0..n {
            for c in 0..k {
                g.set(r, b * k + c, l.get(r, c).clone());
            }
        }
    }
    Ok(g)
}

/// Exponent pattern of the `n ell x k ell` map from `s(1..ell)` to `c(1..ell)`:
/// block `(t, t')` is `M^(t - t')` when `0 <= t - t' <= m`, `-inf` otherwise.
pub fn build_stacked_exponents(spec: &GeneratorSpec, ell: usize) -> ExponentMatrix {
    let CodeParams { n, k, m, .. } = spec.params;
    let mut out = ExponentMatrix::filled(n * ell, k * ell, Exp::NegInf);
    for t in 0..ell {
        for tp in t.saturating_sub(m)..=t {
            out.put_block(t * n, tp * k, spec.matrix(t - tp));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum StructureViolation {
    /// A finite exponent that is not positive.
    NonPositive { row: usize, col: usize },
    /// A zero entry with a nonzero somewhere below it and somewhere to its right.
    ZeroPropagation { row: usize, col: usize },
    /// `2 beta(i,j) > beta(i,j')` for some `j' < j`.
    RowDoubling { row: usize, col: usize, left_col: usize },
    /// `2 beta(i,j) > beta(i',j)` for some `i' > i`.
    ColumnDoubling { row: usize, col: usize, lower_row: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub holds: bool,
    pub violations: Vec<StructureViolation>,
}

/// Scans the four structural hypotheses of the superregularity theorem
/// (positivity, zero propagation, row and column doubling); `-inf` stands
/// for a zero entry. Indices in the report are 0-based.
pub fn check_theorem3_conditions(m: &ExponentMatrix) -> StructureReport {
    let (rows, cols) = (m.rows(), m.cols());
    let mut violations = Vec::new();
    let twice = |v: u64| (v as u128) * 2;
    for i in 0..rows {
        for j in 0..cols {
            match m.get(i, j) {
                Exp::NegInf => {
                    let below_zero = (i + 1..rows).all(|r| !m.get(r, j).is_finite());
                    let right_zero = (j + 1..cols).all(|c| !m.get(i, c).is_finite());
                    if !below_zero && !right_zero {
                        violations.push(StructureViolation::ZeroPropagation { row: i, col: j });
                    }
                }
                Exp::Fin(b) => {
                    if b == 0 {
                        violations.push(StructureViolation::NonPositive { row: i, col: j });
                    }
                    for jp in 0..j {
                        if let Exp::Fin(bl) = m.get(i, jp) {
                            if twice(b) > bl as u128 {
                                violations.push(StructureViolation::RowDoubling {
                                    row: i,
                                    col: j,
                                    left_col: jp,
                                });
                            }
                        }
                    }
                    for ip in i + 1..rows {
                        if let Exp::Fin(bb) = m.get(ip, j) {
                            if twice(b) > bb as u128 {
                                violations.push(StructureViolation::ColumnDoubling {
                                    row: i,
                                    col: j,
                                    lower_row: ip,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    StructureReport {
        holds: violations.is_empty(),
        violations,
    }
}
