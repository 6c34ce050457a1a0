//! Information-debt bookkeeping, acceptability of erasure patterns and the
//! enumeration of worst-case decoding windows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::CodeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DebtExceeded,
    DelayExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub slot: u64,
}

/// Debt after slot `t`. `theta_last` is the latest slot with zero debt and
/// `violation` the first threshold crossed in the window opened after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DebtState {
    pub t: u64,
    pub debt: u64,
    pub theta_last: u64,
    pub violation: Option<Violation>,
}

impl DebtState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advances one slot with `n_t` received symbols; returns a violation
    /// first detected at this slot. A delay overrun is reported as soon as
    /// the debt is still positive `tau + 1` slots after the last zero; it
    /// takes precedence when both thresholds break at once.
    pub fn step(&mut self, n_t: usize, params: &CodeParams) -> Option<Violation> {
        if self.debt == 0 {
            self.violation = None;
        }
        self.t += 1;
        self.debt = (self.debt + params.k as u64).saturating_sub(n_t as u64);
        if self.debt == 0 {
            self.theta_last = self.t;
            return None;
        }
        if self.violation.is_some() {
            return None;
        }
        let kind = if self.t - self.theta_last > params.tau as u64 {
            ViolationKind::DelayExceeded
        } else if self.debt > (params.m * params.k) as u64 {
            ViolationKind::DebtExceeded
        } else {
            return None;
        };
        let v = Violation { kind, slot: self.t };
        self.violation = Some(v);
        Some(v)
    }

    /// Slots since the last zero of the debt.
    pub fn window_len(&self) -> u64 {
        self.t - self.theta_last
    }
}

/// Pure form of [`DebtState::step`].
pub fn debt_step(state: DebtState, n_t: usize, params: &CodeParams) -> DebtState {
    let mut s = state;
    s.step(n_t, params);
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum PatternClass {
    Acceptable,
    Violation { kind: ViolationKind, slot: u64 },
    /// No threshold crossed, but the debt is still positive at the end.
    Incomplete,
}

/// Runs the debt recursion over `counts` (slots `1..`).
pub fn classify_pattern(params: &CodeParams, counts: &[usize]) -> PatternClass {
    let mut st = DebtState::new();
    for &c in counts {
        if let Some(v) = st.step(c, params) {
            return PatternClass::Violation {
                kind: v.kind,
                slot: v.slot,
            };
        }
    }
    if st.debt == 0 {
        PatternClass::Acceptable
    } else {
        PatternClass::Incomplete
    }
}

/// All count sequences `(n_1..n_ell)` of a worst-case window: `ell <= tau+1`,
/// `n_t <= n`, total `k ell`, and every proper prefix `ell'` sums into
/// `[k ell' - m k, k ell')`. Ordered by `ell`, then lexicographically.
pub fn enumerate_worst_case_windows(params: &CodeParams) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for ell in 1..=params.tau + 1 {
        let mut cur = Vec::with_capacity(ell);
        windows_of_len(params, ell, 0, &mut cur, &mut out);
    }
    out
}

fn windows_of_len(p: &CodeParams, ell: usize, sum: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let (k, mk) = (p.k, p.m * p.k);
    let pos = cur.len() + 1;
    if pos == ell {
        let last = k * ell - sum;
        if sum <= k * ell && last <= p.n {
            cur.push(last);
            out.push(cur.clone());
            cur.pop();
        }
        return;
    }
    let lo = (k * pos).saturating_sub(mk);
    for v in 0..=p.n {
        let s = sum + v;
        if s >= k * pos {
            break;
        }
        if s < lo {
            continue;
        }
        cur.push(v);
        windows_of_len(p, ell, s, cur, out);
        cur.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingClause {
    /// `n_ell >= k`
    LastAtLeastK,
    /// `n_l != 0` for `l >= 2`
    NoInnerZero,
    /// `sum_{i > ell-mu+1} n_i <= mu k < sum_{i > ell-mu} n_i`
    SuffixBounds,
    /// `n_l + n_{l+1} >= k`
    AdjacentPairs,
}

/// Checks the four count properties of a unit-memory worst-case window,
/// reporting the first clause that fails.
pub fn check_lemma5(counts: &[usize], params: &CodeParams) -> Result<(), CountingClause> {
    let k = params.k;
    let ell = counts.len();
    if ell == 0 || counts[ell - 1] < k {
        return Err(CountingClause::LastAtLeastK);
    }
    if counts[1..].contains(&0) {
        return Err(CountingClause::NoInnerZero);
    }
    for mu in 1..ell {
        let outer: usize = counts[ell - mu..].iter().sum();
        let inner: usize = counts[ell - mu + 1..].iter().sum();
        if !(inner <= mu * k && mu * k < outer) {
            return Err(CountingClause::SuffixBounds);
        }
    }
    if counts.windows(2).any(|w| w[0] + w[1] < k) {
        return Err(CountingClause::AdjacentPairs);
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("received set for slot {slot} has {found} indices, expected {expected}")]
    CountMismatch { slot: usize, expected: usize, found: usize },
    #[error("symbol index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("received set for slot {0} is not strictly increasing")]
    Unsorted(usize),
    #[error("window length {0} does not match the counts")]
    LengthMismatch(usize),
}

/// A window: per-slot counts and, optionally, which symbols arrived.
/// JSON indices are 1-based; in memory they are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WindowPattern {
    pub counts: Vec<usize>,
    pub received_sets: Option<Vec<Vec<usize>>>,
}

#[derive(Serialize, Deserialize)]
struct WindowPatternJson {
    ell: usize,
    counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    received_sets: Option<Vec<Vec<usize>>>,
}

impl Serialize for WindowPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WindowPatternJson {
            ell: self.ell(),
            counts: self.counts.clone(),
            received_sets: self
                .received_sets
                .as_ref()
                .map(|sets| sets.iter().map(|r| r.iter().map(|i| i + 1).collect()).collect()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WindowPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = WindowPatternJson::deserialize(d)?;
        if raw.ell != raw.counts.len() {
            return Err(D::Error::custom(PatternError::LengthMismatch(raw.ell)));
        }
        let received_sets = match raw.received_sets {
            None => None,
            Some(sets) => Some(
                sets.into_iter()
                    .map(|r| {
                        r.into_iter()
                            .map(|i| i.checked_sub(1).ok_or_else(|| D::Error::custom(PatternError::IndexOutOfRange(0))))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        Ok(WindowPattern {
            counts: raw.counts,
            received_sets,
        })
    }
}

impl WindowPattern {
    pub fn ell(&self) -> usize {
        self.counts.len()
    }

    /// Builds a pattern from 0-based received sets.
    pub fn from_sets(sets: Vec<Vec<usize>>) -> Self {
        WindowPattern {
            counts: sets.iter().map(Vec::len).collect(),
            received_sets: Some(sets),
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), PatternError> {
        let Some(sets) = &self.received_sets else { return Ok(()) };
        if sets.len() != self.counts.len() {
            return Err(PatternError::LengthMismatch(sets.len()));
        }
        for (t, (set, &c)) in sets.iter().zip(&self.counts).enumerate() {
            if set.len() != c {
                return Err(PatternError::CountMismatch {
                    slot: t + 1,
                    expected: c,
                    found: set.len(),
                });
            }
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(PatternError::IndexOutOfRange(bad + 1));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(PatternError::Unsorted(t + 1));
            }
        }
        Ok(())
    }
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of patterns [`expand_received_sets`] yields.
pub fn received_set_count(counts: &[usize], n: usize) -> u128 {
    counts.iter().map(|&c| binomial(n, c)).product()
}

/// Every choice of received index sets for `counts`: the Cartesian product
/// of the size-`n_t` subsets of `[n]`, first slot varying slowest and
/// subsets in lexicographic order.
pub fn expand_received_sets(counts: &[usize], n: usize) -> ReceivedSets {
    let state = if counts.iter().any(|&c| c > n) {
        None
    } else {
        Some(counts.iter().map(|&c| (0..c).collect()).collect())
    };
    ReceivedSets {
        counts: counts.to_vec(),
        n,
        state,
    }
}

pub struct ReceivedSets {
    counts: Vec<usize>,
    n: usize,
    state: Option<Vec<Vec<usize>>>,
}

/// Next `r`-subset of `[n]` in lexicographic order, in place.
fn next_subset(s: &mut [usize], n: usize) -> bool {
    let r = s.len();
    for i in (0..r).rev() {
        if s[i] < n - r + i {
            s[i] += 1;
            for j in i + 1..r {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

impl Iterator for ReceivedSets {
    type Item = WindowPattern;

    fn next(&mut self) -> Option<WindowPattern> {
        let cur = self.state.take()?;
        let out = WindowPattern {
            counts: self.counts.clone(),
            received_sets: Some(cur.clone()),
        };
        let mut nxt = cur;
        for t in (0..nxt.len()).rev() {
            if next_subset(&mut nxt[t], self.n) {
                self.state = Some(nxt);
                return Some(out);
            }
            nxt[t] = (0..self.counts[t]).collect();
        }
        Some(out)
    }
}
