//! Exhaustive verification over all worst-case windows, plus executable
//! checks of the dominance structure behind the unit-memory construction,
//! the superregularity route of the general construction, and the
//! dominance-implies-nonsingular oracle.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{build_decode_window, Decoder, DecoderEvent, Encoder};
use crate::constructions::{
    build_stacked_exponents, check_theorem3_conditions, construct_a, CodeParams, ConstructionError, ConstructionKind,
    GeneratorSpec, StructureReport,
};
use crate::debt::{enumerate_worst_case_windows, expand_received_sets, received_set_count, WindowPattern};
use crate::exponents::{
    decompose_dominance, dominance_by_enumeration, find_dominant_permutation, lift, Exp, ExponentMatrix, RowConstraint,
    RowQuota,
};
use crate::field::{FieldCtx, FieldElement, FieldError};
use crate::linalg::support_has_nontrivial_term;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("estimated {estimate} cases exceeds the cap of {cap}")]
    Guardrail { estimate: u128, cap: u128 },
    #[error("field degree {found} does not match the spec degree {expected}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Invertibility,
    Roundtrip,
    Both,
}

impl std::str::FromStr for VerifyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "invertibility" => Ok(VerifyMode::Invertibility),
            "roundtrip" => Ok(VerifyMode::Roundtrip),
            "both" => Ok(VerifyMode::Both),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub mode: VerifyMode,
    pub jobs: usize,
    pub max_cases: Option<u128>,
    pub seed: u64,
    /// Independent message draws per pattern in roundtrip mode.
    pub trials: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: VerifyMode::Both,
            jobs: 1,
            max_cases: None,
            seed: 0,
            trials: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub pattern: WindowPattern,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceStats {
    pub matrices_with_dominant_permutation: u64,
    pub max_dominant_sum: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub spec_id: String,
    pub params: CodeParams,
    pub construction: ConstructionKind,
    pub degree: usize,
    pub mode: VerifyMode,
    pub seed: u64,
    pub verdict: String,
    pub windows_checked: u64,
    pub matrices_checked: u64,
    pub roundtrips_run: u64,
    pub failures: Vec<Failure>,
    pub dominance_stats: DominanceStats,
    pub elapsed_ms: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The report with the wall-clock field cleared, for comparisons.
    pub fn without_timing(&self) -> Self {
        VerificationReport {
            elapsed_ms: 0.0,
            ..self.clone()
        }
    }
}

/// Short identifier: construction, parameters, degree and a hash of the spec.
pub fn spec_id(spec: &GeneratorSpec) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in spec.to_json().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let kind = match spec.construction {
        ConstructionKind::A => "A",
        ConstructionKind::B => "B",
        ConstructionKind::Custom => "custom",
    };
    format!("{kind}{}-d{}-{:016x}", spec.params, spec.degree, h)
}

/// Number of decoding matrices in the exhaustive run.
pub fn estimate_cases(params: &CodeParams) -> u128 {
    enumerate_worst_case_windows(params)
        .iter()
        .map(|c| received_set_count(c, params.n))
        .sum()
}

/// Every worst-case pattern with received sets, in enumeration order.
pub fn all_patterns(params: &CodeParams) -> Vec<WindowPattern> {
    enumerate_worst_case_windows(params)
        .iter()
        .flat_map(|c| expand_received_sets(c, params.n))
        .collect()
}

struct Outcome {
    failures: Vec<Failure>,
    dominant_sum: Option<u64>,
    roundtrips: u64,
}

/// Checks that every worst-case decoding matrix of `spec` is nonsingular
/// and/or that encode, erase and decode reproduces the messages.
pub fn verify_idos(spec: &GeneratorSpec, ctx: &FieldCtx, opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    spec.validate()?;
    if ctx.degree() != spec.degree {
        return Err(VerifyError::DegreeMismatch {
            expected: spec.degree,
            found: ctx.degree(),
        });
    }
    let params = spec.params;
    let estimate = estimate_cases(&params);
    if let Some(cap) = opts.max_cases {
        if estimate > cap {
            return Err(VerifyError::Guardrail { estimate, cap });
        }
    }
    let windows = enumerate_worst_case_windows(&params);
    let patterns = all_patterns(&params);
    let jobs = opts.jobs.max(1).min(patterns.len().max(1));
    let chunk = patterns.len().div_ceil(jobs).max(1);
    let outcomes: Vec<Outcome> = if jobs == 1 {
        patterns
            .iter()
            .enumerate()
            .map(|(i, p)| check_pattern(spec, ctx, p, i as u64, opts))
            .collect()
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = patterns
                .chunks(chunk)
                .enumerate()
                .map(|(ci, part)| {
                    s.spawn(move || {
                        part.iter()
                            .enumerate()
                            .map(|(j, p)| check_pattern(spec, ctx, p, (ci * chunk + j) as u64, opts))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
        })
    };
    let mut failures = Vec::new();
    let mut with_dom = 0;
    let mut max_sum = None;
    let mut roundtrips = 0;
    for o in outcomes {
        failures.extend(o.failures);
        if let Some(s) = o.dominant_sum {
            with_dom += 1;
            max_sum = max_sum.max(Some(s));
        }
        roundtrips += o.roundtrips;
    }
    Ok(VerificationReport {
        spec_id: spec_id(spec),
        params,
        construction: spec.construction,
        degree: spec.degree,
        mode: opts.mode,
        seed: opts.seed,
        verdict: if failures.is_empty() { "PASS" } else { "FAIL" }.into(),
        windows_checked: windows.len() as u64,
        matrices_checked: patterns.len() as u64,
        roundtrips_run: roundtrips,
        failures,
        dominance_stats: DominanceStats {
            matrices_with_dominant_permutation: with_dom,
            max_dominant_sum: max_sum,
        },
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn check_pattern(spec: &GeneratorSpec, ctx: &FieldCtx, pattern: &WindowPattern, index: u64, opts: &VerifyOptions) -> Outcome {
    let mut failures = Vec::new();
    let m_dec = build_decode_window(spec, pattern).expect("enumerated patterns are well formed");
    let dominant_sum = find_dominant_permutation(&m_dec).dominant_sum;
    if matches!(opts.mode, VerifyMode::Invertibility | VerifyMode::Both) {
        let det = lift(&m_dec, ctx).det().expect("decoding matrix is square");
        if det.is_zero() {
            failures.push(Failure {
                pattern: pattern.clone(),
                reason: "singular decoding matrix".into(),
            });
        }
    }
    let mut roundtrips = 0;
    if matches!(opts.mode, VerifyMode::Roundtrip | VerifyMode::Both) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(index);
        for _ in 0..opts.trials {
            roundtrips += 1;
            if let Err(reason) = roundtrip(spec, ctx, pattern, &m_dec, &mut rng) {
                failures.push(Failure {
                    pattern: pattern.clone(),
                    reason: format!("roundtrip: {reason}"),
                });
                break;
            }
        }
    }
    Outcome {
        failures,
        dominant_sum,
        roundtrips,
    }
}

/// Sends `m` fully received slots (nonzero history to cancel), then the
/// window; the decoder must recover the whole window at its last slot.
fn roundtrip(
    spec: &GeneratorSpec,
    ctx: &FieldCtx,
    pattern: &WindowPattern,
    m_dec: &ExponentMatrix,
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    let CodeParams { n, k, m, .. } = spec.params;
    let sets = pattern.received_sets.as_ref().expect("expanded pattern");
    let prefix = m;
    let total = prefix + pattern.ell();
    let msgs: Vec<Vec<FieldElement>> = (0..total).map(|_| (0..k).map(|_| ctx.random(rng)).collect()).collect();
    let mut enc = Encoder::new(spec, ctx).map_err(|e| e.to_string())?;
    let mut dec = Decoder::new(spec, ctx).map_err(|e| e.to_string())?;
    let blocks: Vec<_> = (0..=m).map(|i| lift(spec.matrix(i), ctx)).collect();
    let mut cancelled = Vec::new();
    for (t0, s) in msgs.iter().enumerate() {
        let t = t0 as u64 + 1;
        let c = enc.encode_step(s).map_err(|e| e.to_string())?;
        let keep: Vec<usize> = if t0 < prefix { (0..n).collect() } else { sets[t0 - prefix].clone() };
        let rx: Vec<(usize, FieldElement)> = keep.iter().map(|&j| (j, c[j].clone())).collect();
        if t0 >= prefix {
            for &j in &keep {
                let mut v = c[j].clone();
                for (lag, g) in blocks.iter().enumerate() {
                    if lag <= t0 && t0 - lag < prefix {
                        for (e, x) in g.row(j).iter().zip(&msgs[t0 - lag]) {
                            ctx.add_assign(&mut v, &ctx.mul(e, x));
                        }
                    }
                }
                cancelled.push(v);
            }
        }
        let events = dec.ingest(t, &rx).map_err(|e| e.to_string())?;
        let expect_recovery = t0 < prefix || t0 + 1 == total;
        match (expect_recovery, events.as_slice()) {
            (false, []) => {}
            (
                true,
                [DecoderEvent::Recovered {
                    slots,
                    messages,
                    best_effort: false,
                    ..
                }],
            ) => {
                let first = if t0 < prefix { t } else { prefix as u64 + 1 };
                let want: Vec<u64> = (first..=t).collect();
                if *slots != want {
                    return Err(format!("recovered slots {slots:?} at slot {t}, expected {want:?}"));
                }
                if messages.as_slice() != &msgs[first as usize - 1..t as usize] {
                    return Err(format!("wrong messages recovered at slot {t}"));
                }
            }
            (_, evs) => return Err(format!("unexpected decoder events at slot {t}: {evs:?}")),
        }
    }
    let window_msgs: Vec<FieldElement> = msgs[prefix..].iter().flatten().cloned().collect();
    if lift(m_dec, ctx).mul_vec(&window_msgs) != cancelled {
        return Err("decoding system does not reproduce the cancelled symbols".into());
    }
    Ok(())
}

/// Per-thick-column data of one decoding matrix (0-based indices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThickColumnPlan {
    /// Thick column `j` covers columns `[j k, (j+1) k)`.
    pub columns: Vec<std::ops::Range<usize>>,
    /// Rows of the decoding matrix coming from slot `j`.
    pub row_blocks: Vec<std::ops::Range<usize>>,
    /// `r[j]`: rows thick column `j` must take from its own slot.
    pub own_rows: Vec<usize>,
}

impl ThickColumnPlan {
    pub fn new(counts: &[usize], k: usize) -> Self {
        let ell = counts.len();
        let mut row_blocks = Vec::with_capacity(ell);
        let mut acc = 0;
        for &c in counts {
            row_blocks.push(acc..acc + c);
            acc += c;
        }
        let own_rows = (0..ell)
            .map(|j| {
                let mu = ell - 1 - j;
                let tail: usize = counts[j + 1..].iter().sum();
                ((mu + 1) * k).saturating_sub(tail)
            })
            .collect();
        ThickColumnPlan {
            columns: (0..ell).map(|j| j * k..(j + 1) * k).collect(),
            row_blocks,
            own_rows,
        }
    }

    /// Necessary conditions on any finite permutation: thick column `j`
    /// draws `own_rows[j]` rows from slot `j` and the rest from slot `j+1`.
    pub fn constraints(&self) -> Vec<(Vec<usize>, RowConstraint)> {
        let ell = self.columns.len();
        (0..ell)
            .map(|j| {
                let own: Vec<usize> = self.row_blocks[j].clone().collect();
                let mut allowed = own.clone();
                if j + 1 < ell {
                    allowed.extend(self.row_blocks[j + 1].clone());
                }
                (
                    self.columns[j].clone().collect(),
                    RowConstraint {
                        forced: Vec::new(),
                        allowed: Some(allowed),
                        quotas: vec![RowQuota {
                            rows: own,
                            count: self.own_rows[j],
                        }],
                    },
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceStructureReport {
    pub params: CodeParams,
    pub matrices_checked: u64,
    pub max_dominant_sum: Option<u64>,
    pub bound: u64,
    pub certificates_agreeing: u64,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

/// For every worst-case decoding matrix of the unit-memory construction:
/// (i) a dominant permutation exists; (ii) it maps each thick column onto
/// the same-indexed rows; (iii) each thick column takes the prescribed
/// number of rows from its own slot and the rest from the next one;
/// (iv) its sum stays within `(n-1) k^2 (tau+1)`. The thick-column
/// decomposition certificate must also agree with the direct search.
pub fn verify_dominance_structure(n: usize, k: usize, tau: usize) -> Result<DominanceStructureReport, VerifyError> {
    let params = CodeParams::new(n, k, 1, tau)?;
    let (m1, m0) = construct_a(n, k)?;
    let spec = GeneratorSpec {
        params,
        construction: ConstructionKind::A,
        degree: 1,
        modulus: vec![1, 0],
        exponent_matrices: vec![m1, m0],
    };
    let bound = ((n - 1) * k * k * (tau + 1)) as u64;
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut agreeing = 0;
    let mut max_sum = None;
    for pattern in all_patterns(&params) {
        checked += 1;
        let m_dec = build_decode_window(&spec, &pattern).expect("well formed");
        let plan = ThickColumnPlan::new(&pattern.counts, k);
        let mut fail = |reason: String| {
            failures.push(Failure {
                pattern: pattern.clone(),
                reason,
            })
        };
        let report = find_dominant_permutation(&m_dec);
        let (Some(sigma), Some(sum)) = (report.sigma_star, report.dominant_sum) else {
            fail("(i) no dominant permutation".into());
            continue;
        };
        max_sum = max_sum.max(Some(sum));
        for (j, cols) in plan.columns.iter().enumerate() {
            let mut rows: Vec<usize> = cols.clone().map(|c| sigma[c]).collect();
            rows.sort_unstable();
            if rows != cols.clone().collect::<Vec<_>>() {
                fail(format!("(ii) thick column {} maps to rows {rows:?}", j + 1));
            }
            let own = rows.iter().filter(|r| plan.row_blocks[j].contains(r)).count();
            let next = if j + 1 < plan.row_blocks.len() {
                rows.iter().filter(|r| plan.row_blocks[j + 1].contains(r)).count()
            } else {
                0
            };
            if own != plan.own_rows[j] || own + next != k {
                fail(format!(
                    "(iii) thick column {} takes {own}/{next} rows, expected {}/{}",
                    j + 1,
                    plan.own_rows[j],
                    k - plan.own_rows[j]
                ));
            }
        }
        if sum > bound {
            fail(format!("(iv) dominant sum {sum} exceeds {bound}"));
        }
        match decompose_dominance(&m_dec, &plan.constraints()) {
            Ok(Some(cert)) if cert.total == sum && cert.sigma_star == sigma => agreeing += 1,
            other => fail(format!("decomposition certificate disagrees: {other:?}")),
        }
    }
    Ok(DominanceStructureReport {
        params,
        matrices_checked: checked,
        max_dominant_sum: max_sum,
        bound,
        certificates_agreeing: agreeing,
        passed: failures.is_empty(),
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperregularReport {
    pub ell: usize,
    pub structure: StructureReport,
    pub diagonal_windows_checked: u64,
    pub diagonal_failures: Vec<WindowPattern>,
    pub minor_cap: usize,
    pub minors_checked: u64,
    pub minors_trivial: u64,
    /// `(rows, cols)` of singular nontrivial minors, 0-based.
    pub singular_minors: Vec<(Vec<usize>, Vec<usize>)>,
    pub passed: bool,
}

fn combos(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    if r > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..r).rev().find(|&i| cur[i] < n - r + i) else { return out };
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Superregularity route for the general construction: (i) the structural
/// hypotheses on the `ell`-slot stack; (ii) every worst-case decoding
/// matrix has a finite diagonal; (iii) when a field is given, every
/// nontrivial square submatrix of the stack up to `minor_cap` is nonsingular.
pub fn verify_superregular_route(
    spec: &GeneratorSpec,
    ell: usize,
    ctx: Option<&FieldCtx>,
    minor_cap: usize,
) -> SuperregularReport {
    let stack = build_stacked_exponents(spec, ell);
    let structure = check_theorem3_conditions(&stack);
    let mut diagonal_failures = Vec::new();
    let mut diagonal_windows = 0;
    for pattern in all_patterns(&spec.params) {
        diagonal_windows += 1;
        let m_dec = build_decode_window(spec, &pattern).expect("well formed");
        if (0..m_dec.rows()).any(|i| !m_dec.get(i, i).is_finite()) {
            diagonal_failures.push(pattern);
        }
    }
    let (mut checked, mut trivial, mut singular) = (0, 0, Vec::new());
    if let Some(ctx) = ctx {
        let lifted = lift(&stack, ctx);
        for size in 1..=minor_cap.min(stack.cols()) {
            let col_sets = combos(stack.cols(), size);
            for rows in combos(stack.rows(), size) {
                for cols in &col_sets {
                    let sub = stack.submatrix(&rows, cols);
                    if !support_has_nontrivial_term(&sub.support()) {
                        trivial += 1;
                        continue;
                    }
                    checked += 1;
                    if lifted.submatrix(&rows, cols).det().expect("square").is_zero() {
                        singular.push((rows.clone(), cols.clone()));
                    }
                }
            }
        }
    }
    SuperregularReport {
        ell,
        passed: structure.holds && diagonal_failures.is_empty() && singular.is_empty(),
        structure,
        diagonal_windows_checked: diagonal_windows,
        diagonal_failures,
        minor_cap,
        minors_checked: checked,
        minors_trivial: trivial,
        singular_minors: singular,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceLiftReport {
    pub size: usize,
    pub max_entry: u64,
    pub seed: u64,
    pub drawn: u64,
    pub tested: u64,
    pub nonsingular: u64,
    pub failures: Vec<ExponentMatrix>,
}

/// Draws random `size x size` matrices over `{-inf} U [0, max_entry]`
/// until `trials` of them have a dominant permutation (found by literal
/// enumeration), and checks each lifts to a nonsingular matrix over a field
/// of degree `dominant_sum + 1`.
pub fn lemma1_oracle_suite(trials: usize, size: usize, max_entry: u64, seed: u64) -> Result<DominanceLiftReport, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields: HashMap<usize, FieldCtx> = HashMap::new();
    let (mut drawn, mut tested, mut ok) = (0u64, 0u64, 0u64);
    let mut failures = Vec::new();
    let draw_cap = 1000 * trials.max(1) as u64;
    while (tested as usize) < trials && drawn < draw_cap {
        drawn += 1;
        let entries = (0..size * size)
            .map(|_| {
                let v = rng.random_range(0..=max_entry + 1);
                if v == 0 {
                    Exp::NegInf
                } else {
                    Exp::Fin(v - 1)
                }
            })
            .collect();
        let m = ExponentMatrix::from_entries(size, size, entries).expect("square");
        let Some(sum) = dominance_by_enumeration(&m).dominant_sum else { continue };
        tested += 1;
        let d = sum as usize + 1;
        let ctx = match fields.get(&d) {
            Some(c) => c.clone(),
            None => {
                let c = FieldCtx::new(d, None, Some(seed))?;
                fields.insert(d, c.clone());
                c
            }
        };
        if lift(&m, &ctx).det().expect("square").is_zero() {
            failures.push(m);
        } else {
            ok += 1;
        }
    }
    Ok(DominanceLiftReport {
        size,
        max_entry,
        seed,
        drawn,
        tested,
        nonsingular: ok,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ConstructionKind, n: usize, k: usize, m: usize, tau: usize) -> (GeneratorSpec, FieldCtx) {
        let s = GeneratorSpec::construct(kind, CodeParams::new(n, k, m, tau).unwrap(), None, None, 1, false).unwrap();
        let c = s.field().unwrap();
        (s, c)
    }

    #[test]
    fn plan_for_unit_memory_window() {
        let p = ThickColumnPlan::new(&[1, 2, 3], 2);
        assert_eq!(p.row_blocks, vec![0..1, 1..3, 3..6]);
        // r_2 = 3*2 - 5 = 1, r_1 = 2*2 - 3 = 1, r_0 = k
        assert_eq!(p.own_rows, vec![1, 1, 2]);
    }

    fn degenerate_window(n: usize) -> WindowPattern {
        WindowPattern {
            counts: vec![1, 1, 4],
            received_sets: Some(vec![vec![0], vec![n - 1], (0..4).collect()]),
        }
    }

    #[test]
    fn unit_memory_example_has_one_singular_window() {
        // Row 1 of M0 and row n of M1 are both all-zero exponents, so keeping
        // exactly those two symbols for the first thick column gives two
        // identical columns. Every other window decodes.
        let (s, c) = spec(ConstructionKind::A, 4, 2, 1, 2);
        let r = verify_idos(&s, &c, &VerifyOptions::default()).unwrap();
        assert_eq!(r.matrices_checked, 157);
        assert_eq!(r.windows_checked, 7);
        assert_eq!(r.roundtrips_run, 3 * 156 + 1);
        assert_eq!(r.failures.len(), 2);
        assert!(r.failures.iter().all(|f| f.pattern == degenerate_window(4)));
        assert_eq!(r.failures[0].reason, "singular decoding matrix");
        assert!(r.failures[1].reason.starts_with("roundtrip"));
        assert_eq!(r.dominance_stats.matrices_with_dominant_permutation, 156);
        assert!(r.dominance_stats.max_dominant_sum.unwrap() <= 36);
    }

    #[test]
    fn worker_count_does_not_change_report() {
        let (s, c) = spec(ConstructionKind::A, 4, 2, 1, 2);
        let one = verify_idos(&s, &c, &VerifyOptions::default()).unwrap();
        let four = verify_idos(
            &s,
            &c,
            &VerifyOptions {
                jobs: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one.without_timing(), four.without_timing());
    }

    #[test]
    fn guardrail_aborts() {
        let (s, c) = spec(ConstructionKind::A, 4, 2, 1, 2);
        let err = verify_idos(
            &s,
            &c,
            &VerifyOptions {
                max_cases: Some(100),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, VerifyError::Guardrail { estimate: 157, cap: 100 }));
    }

    #[test]
    fn all_zero_exponents_fail() {
        let p = CodeParams::new(4, 2, 1, 2).unwrap();
        let z = ExponentMatrix::filled(4, 2, Exp::Fin(0));
        let s = GeneratorSpec::custom(p, vec![z.clone(), z], 37, None, 1).unwrap();
        let c = s.field().unwrap();
        let r = verify_idos(&s, &c, &VerifyOptions::default()).unwrap();
        assert!(!r.passed());
        assert!(r.failures.iter().any(|f| f.reason == "singular decoding matrix"));
        let inv: Vec<_> = r.failures.iter().filter(|f| !f.reason.starts_with("roundtrip")).map(|f| &f.pattern).collect();
        let rt: Vec<_> = r.failures.iter().filter(|f| f.reason.starts_with("roundtrip")).map(|f| &f.pattern).collect();
        assert_eq!(inv, rt);
    }

    #[test]
    fn general_construction_small_cases() {
        let (s, c) = spec(ConstructionKind::B, 2, 1, 1, 1);
        assert_eq!(s.degree, 17);
        assert!(verify_idos(&s, &c, &VerifyOptions::default()).unwrap().passed());
        let r = verify_superregular_route(&s, 2, Some(&c), 3);
        assert!(r.passed, "{r:?}");
        assert_eq!(r.minors_checked + r.minors_trivial, 8 + 6);
    }

    #[test]
    fn dominance_structure_small() {
        let r = verify_dominance_structure(4, 2, 2).unwrap();
        assert_eq!(r.matrices_checked, 157);
        assert_eq!(r.certificates_agreeing, 156);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].pattern, degenerate_window(4));
        assert_eq!(r.failures[0].reason, "(i) no dominant permutation");
        assert!(r.max_dominant_sum.unwrap() <= 36);
        let r = verify_dominance_structure(2, 1, 1).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn dominance_lift_small_suite() {
        let r = lemma1_oracle_suite(50, 3, 6, 11).unwrap();
        assert_eq!(r.tested, 50);
        assert_eq!(r.nonsingular, 50);
        let r = lemma1_oracle_suite(1, 1, 0, 0).unwrap();
        assert_eq!(r.nonsingular, 1);
    }
}
