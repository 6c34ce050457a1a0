//! Time-invariant convolutional encoder and the sliding-window decoder that
//! recovers all outstanding messages whenever the information debt clears.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{build_stacked_exponents, CodeParams, GeneratorSpec};
use crate::debt::{DebtState, PatternError, ViolationKind, WindowPattern};
use crate::exponents::{lift, ExponentMatrix};
use crate::field::{FieldCtx, FieldElement, FieldError};
use crate::linalg::{mat_solve, FieldMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("slot {got} arrived after slot {last}")]
    OutOfOrderSlot { last: u64, got: u64 },
    #[error("message has {found} symbols, expected {expected}")]
    MessageLength { expected: usize, found: usize },
    #[error("symbol index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("symbol index {0} received twice in one slot")]
    DuplicateIndex(usize),
    #[error("field degree {found} does not match the spec degree {expected}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("window pattern has no received sets")]
    MissingReceivedSets,
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Lifted `G^(i) = alpha^M^(i)`, indexed by lag `i`.
fn lifted_blocks(spec: &GeneratorSpec, ctx: &FieldCtx) -> Result<Vec<FieldMatrix>, CodecError> {
    if ctx.degree() != spec.degree {
        return Err(CodecError::DegreeMismatch {
            expected: spec.degree,
            found: ctx.degree(),
        });
    }
    Ok((0..=spec.params.m).map(|i| lift(spec.matrix(i), ctx)).collect())
}

/// `c(t) = sum_i G^(i) s(t - i)`, with `s(t) = 0` before the first slot.
pub struct Encoder {
    ctx: FieldCtx,
    params: CodeParams,
    blocks: Vec<FieldMatrix>,
    /// `history[0]` is `s(t-1)`.
    history: Vec<Vec<FieldElement>>,
    t: u64,
}

impl Encoder {
    pub fn new(spec: &GeneratorSpec, ctx: &FieldCtx) -> Result<Self, CodecError> {
        let blocks = lifted_blocks(spec, ctx)?;
        let p = spec.params;
        Ok(Encoder {
            ctx: ctx.clone(),
            params: p,
            blocks,
            history: vec![vec![ctx.zero(); p.k]; p.m],
            t: 0,
        })
    }

    /// Slot of the last encoded vector (0 before the first call).
    pub fn slot(&self) -> u64 {
        self.t
    }

    pub fn encode_step(&mut self, s: &[FieldElement]) -> Result<Vec<FieldElement>, CodecError> {
        if s.len() != self.params.k {
            return Err(CodecError::MessageLength {
                expected: self.params.k,
                found: s.len(),
            });
        }
        if !s.iter().all(|e| self.ctx.owns(e)) {
            return Err(FieldError::ContextMismatch.into());
        }
        let mut c = self.blocks[0].mul_vec(s);
        for (lag, past) in self.history.iter().enumerate() {
            for (acc, v) in c.iter_mut().zip(self.blocks[lag + 1].mul_vec(past)) {
                self.ctx.add_assign(acc, &v);
            }
        }
        if self.params.m > 0 {
            self.history.pop();
            self.history.insert(0, s.to_vec());
        }
        self.t += 1;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecoderEvent {
    /// Messages of `slots` recovered at slot `at`. `best_effort` marks
    /// recoveries outside the acceptable-pattern guarantee.
    Recovered {
        at: u64,
        slots: Vec<u64>,
        messages: Vec<Vec<FieldElement>>,
        best_effort: bool,
    },
    Violation {
        slot: u64,
        kind: ViolationKind,
    },
    /// The debt cleared but the window system was singular.
    DecodeFailed {
        slot: u64,
    },
    /// Slots given up on: they fell out of the decoding horizon unrecovered.
    Lost {
        slots: Vec<u64>,
    },
}

/// Streaming decoder. Feed every slot in order with the symbols that
/// arrived; absent slots count as fully erased.
pub struct Decoder {
    ctx: FieldCtx,
    params: CodeParams,
    blocks: Vec<FieldMatrix>,
    debt: DebtState,
    known: BTreeMap<u64, Vec<FieldElement>>,
    unknown: BTreeSet<u64>,
    lost: BTreeSet<u64>,
    /// Raw symbols `(slot, index, value)` that still involve unknown slots.
    pending: Vec<(u64, usize, FieldElement)>,
    /// The open window began with no unresolved history and has not
    /// broken a threshold.
    clean: bool,
    best_effort_mode: bool,
}

impl Decoder {
    pub fn new(spec: &GeneratorSpec, ctx: &FieldCtx) -> Result<Self, CodecError> {
        let blocks = lifted_blocks(spec, ctx)?;
        Ok(Decoder {
            ctx: ctx.clone(),
            params: spec.params,
            blocks,
            debt: DebtState::new(),
            known: BTreeMap::new(),
            unknown: BTreeSet::new(),
            lost: BTreeSet::new(),
            pending: Vec::new(),
            clean: true,
            best_effort_mode: false,
        })
    }

    pub fn debt(&self) -> &DebtState {
        &self.debt
    }

    /// Whether the currently open window is covered by the recovery guarantee.
    pub fn window_guaranteed(&self) -> bool {
        self.clean
    }

    pub fn known(&self, slot: u64) -> Option<&[FieldElement]> {
        self.known.get(&slot).map(Vec::as_slice)
    }

    /// Unknown slots older than this many slots are declared lost.
    pub fn horizon(&self) -> u64 {
        (self.params.tau + 1 + self.params.m) as u64
    }

    /// Processes slot `t`; skipped slots in between are treated as erased.
    pub fn ingest(&mut self, t: u64, received: &[(usize, FieldElement)]) -> Result<Vec<DecoderEvent>, CodecError> {
        if t <= self.debt.t {
            return Err(CodecError::OutOfOrderSlot {
                last: self.debt.t,
                got: t,
            });
        }
        let mut seen = BTreeSet::new();
        for (j, v) in received {
            if *j >= self.params.n {
                return Err(CodecError::IndexOutOfRange(*j));
            }
            if !seen.insert(*j) {
                return Err(CodecError::DuplicateIndex(*j));
            }
            if !self.ctx.owns(v) {
                return Err(FieldError::ContextMismatch.into());
            }
        }
        let mut events = Vec::new();
        while self.debt.t + 1 < t {
            let gap = self.debt.t + 1;
            self.slot(gap, &[], &mut events);
        }
        self.slot(t, received, &mut events);
        Ok(events)
    }

    fn slot(&mut self, t: u64, received: &[(usize, FieldElement)], events: &mut Vec<DecoderEvent>) {
        let m = self.params.m as u64;
        if self.debt.debt == 0 {
            let history_lost = self.lost.range(t.saturating_sub(m)..t).next().is_some();
            self.clean = self.unknown.is_empty() && !history_lost;
        }
        if let Some(v) = self.debt.step(received.len(), &self.params) {
            events.push(DecoderEvent::Violation {
                slot: v.slot,
                kind: v.kind,
            });
            self.clean = false;
        }
        self.unknown.insert(t);
        for (j, v) in received {
            if (t.saturating_sub(m)..=t).any(|u| self.lost.contains(&u)) {
                continue;
            }
            self.pending.push((t, *j, v.clone()));
        }

        if self.debt.debt == 0 {
            if self.clean {
                self.solve_window(t, events);
            } else {
                self.solve_partial(t, events);
            }
        } else if !self.clean || self.best_effort_mode {
            self.solve_partial(t, events);
        }
        self.expire(t, events);
        if self.unknown.is_empty() {
            self.best_effort_mode = false;
        }
    }

    /// Variables are the messages of the unknown slots, in slot order.
    fn system(&self) -> (Vec<u64>, FieldMatrix, Vec<FieldElement>) {
        let ctx = &self.ctx;
        let k = self.params.k;
        let slots: Vec<u64> = self.unknown.iter().copied().collect();
        let col_of: BTreeMap<u64, usize> = slots.iter().enumerate().map(|(i, &s)| (s, i * k)).collect();
        let mut a = FieldMatrix::zeros(ctx, self.pending.len(), slots.len() * k);
        let mut b = Vec::with_capacity(self.pending.len());
        for (row, (t, j, v)) in self.pending.iter().enumerate() {
            let mut rhs = v.clone();
            for (lag, g) in self.blocks.iter().enumerate() {
                let Some(u) = t.checked_sub(lag as u64).filter(|&u| u >= 1) else { break };
                let coeffs = g.row(*j);
                if let Some(&c0) = col_of.get(&u) {
                    for (c, e) in coeffs.iter().enumerate() {
                        a.set(row, c0 + c, e.clone());
                    }
                } else if let Some(msg) = self.known.get(&u) {
                    for (e, s) in coeffs.iter().zip(msg) {
                        if !e.is_zero() && !s.is_zero() {
                            ctx.add_assign(&mut rhs, &ctx.mul(e, s));
                        }
                    }
                }
            }
            b.push(rhs);
        }
        (slots, a, b)
    }

    fn solve_window(&mut self, t: u64, events: &mut Vec<DecoderEvent>) {
        let (slots, a, b) = self.system();
        match mat_solve(&a, &b) {
            Ok(x) => {
                let messages: Vec<Vec<FieldElement>> = x.chunks(self.params.k).map(<[_]>::to_vec).collect();
                self.commit(t, slots, messages, false, events);
            }
            Err(_) => {
                events.push(DecoderEvent::DecodeFailed { slot: t });
                self.best_effort_mode = true;
                self.clean = false;
                self.solve_partial(t, events);
            }
        }
    }

    /// Recovers every unknown slot whose messages the pending equations
    /// determine uniquely, even if the whole system is underdetermined.
    fn solve_partial(&mut self, t: u64, events: &mut Vec<DecoderEvent>) {
        if self.pending.is_empty() || self.unknown.is_empty() {
            return;
        }
        let (slots, a, b) = self.system();
        let ech = a.rref(Some(&b));
        let rank = ech.pivots.len();
        if ech.rhs[rank..].iter().any(|v| !v.is_zero()) {
            return;
        }
        let vars = a.cols();
        let pivot_set: BTreeSet<usize> = ech.pivots.iter().copied().collect();
        let mut value: Vec<Option<FieldElement>> = vec![None; vars];
        for (r, &c) in ech.pivots.iter().enumerate() {
            let free_touch = (0..vars).any(|cc| !pivot_set.contains(&cc) && !ech.matrix.get(r, cc).is_zero());
            if !free_touch {
                value[c] = Some(ech.rhs[r].clone());
            }
        }
        let k = self.params.k;
        let mut got_slots = Vec::new();
        let mut got_msgs = Vec::new();
        for (i, &s) in slots.iter().enumerate() {
            let vals: Option<Vec<FieldElement>> = value[i * k..(i + 1) * k].iter().cloned().collect();
            if let Some(v) = vals {
                got_slots.push(s);
                got_msgs.push(v);
            }
        }
        if !got_slots.is_empty() {
            self.commit(t, got_slots, got_msgs, true, events);
        }
    }

    fn commit(
        &mut self,
        t: u64,
        slots: Vec<u64>,
        messages: Vec<Vec<FieldElement>>,
        best_effort: bool,
        events: &mut Vec<DecoderEvent>,
    ) {
        for (s, msg) in slots.iter().zip(&messages) {
            self.unknown.remove(s);
            self.known.insert(*s, msg.clone());
        }
        self.retain_useful_pending();
        events.push(DecoderEvent::Recovered {
            at: t,
            slots,
            messages,
            best_effort,
        });
    }

    fn retain_useful_pending(&mut self) {
        let m = self.params.m as u64;
        let unknown = &self.unknown;
        self.pending
            .retain(|(t, _, _)| (t.saturating_sub(m)..=*t).any(|u| unknown.contains(&u)));
    }

    fn expire(&mut self, t: u64, events: &mut Vec<DecoderEvent>) {
        let h = self.horizon();
        let expired: Vec<u64> = self.unknown.iter().copied().filter(|&u| t >= u + h).collect();
        if !expired.is_empty() {
            for u in &expired {
                self.unknown.remove(u);
                self.lost.insert(*u);
            }
            let m = self.params.m as u64;
            let lost = &self.lost;
            self.pending
                .retain(|(s, _, _)| !(s.saturating_sub(m)..=*s).any(|u| lost.contains(&u)));
            self.retain_useful_pending();
            self.best_effort_mode = true;
            events.push(DecoderEvent::Lost { slots: expired });
        }
        let keep_from = t.saturating_sub(h + self.params.m as u64);
        self.known = self.known.split_off(&keep_from);
        self.lost = self.lost.split_off(&keep_from);
    }
}

/// Exponent form of the decoding matrix of a window: rows `(t-1)n + j`,
/// `j in R_t`, of the stacked matrix for `ell` slots.
pub fn build_decode_window(spec: &GeneratorSpec, pattern: &WindowPattern) -> Result<ExponentMatrix, CodecError> {
    let sets = pattern.received_sets.as_ref().ok_or(CodecError::MissingReceivedSets)?;
    pattern.validate(spec.params.n)?;
    let n = spec.params.n;
    let rows: Vec<usize> = sets
        .iter()
        .enumerate()
        .flat_map(|(t, r)| r.iter().map(move |j| t * n + j))
        .collect();
    Ok(build_stacked_exponents(spec, pattern.ell()).select_rows(&rows))
}

/// Hex-encoded event for trace files; slots are 1-based as in the stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventRecord {
    Recovered {
        at: u64,
        slots: Vec<u64>,
        messages: Vec<Vec<String>>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        best_effort: bool,
    },
    Violation {
        slot: u64,
        kind: ViolationKind,
    },
    DecodeFailed {
        slot: u64,
    },
    Lost {
        slots: Vec<u64>,
    },
}

impl EventRecord {
    pub fn from_event(ev: &DecoderEvent, ctx: &FieldCtx) -> Self {
        match ev {
            DecoderEvent::Recovered {
                at,
                slots,
                messages,
                best_effort,
            } => EventRecord::Recovered {
                at: *at,
                slots: slots.clone(),
                messages: messages.iter().map(|m| m.iter().map(|e| ctx.to_hex(e)).collect()).collect(),
                best_effort: *best_effort,
            },
            DecoderEvent::Violation { slot, kind } => EventRecord::Violation { slot: *slot, kind: *kind },
            DecoderEvent::DecodeFailed { slot } => EventRecord::DecodeFailed { slot: *slot },
            DecoderEvent::Lost { slots } => EventRecord::Lost { slots: slots.clone() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::ConstructionKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec_a() -> (GeneratorSpec, FieldCtx) {
        let spec = GeneratorSpec::construct(ConstructionKind::A, CodeParams::new(4, 2, 1, 2).unwrap(), None, None, 1, false)
            .unwrap();
        let ctx = spec.field().unwrap();
        (spec, ctx)
    }

    #[test]
    fn zero_messages_give_zero_codewords() {
        let (spec, ctx) = spec_a();
        let mut enc = Encoder::new(&spec, &ctx).unwrap();
        for _ in 0..5 {
            let c = enc.encode_step(&[ctx.zero(), ctx.zero()]).unwrap();
            assert!(c.iter().all(FieldElement::is_zero));
        }
    }

    #[test]
    fn encoder_columns_match_lifted_blocks() {
        let (spec, ctx) = spec_a();
        let mut enc = Encoder::new(&spec, &ctx).unwrap();
        let a = ctx.alpha();
        let c1 = enc.encode_step(&[ctx.one(), ctx.zero()]).unwrap();
        assert_eq!(c1, vec![ctx.one(), a.clone(), ctx.pow(2), ctx.pow(3)]);
        let c2 = enc.encode_step(&[ctx.zero(), ctx.zero()]).unwrap();
        assert_eq!(c2, vec![ctx.pow(6), ctx.pow(4), ctx.pow(2), ctx.one()]);
        assert!(enc.encode_step(&[ctx.one()]).is_err());
    }

    fn run(pattern: &[&[usize]], seed: u64) -> (Vec<Vec<FieldElement>>, Vec<DecoderEvent>) {
        let (spec, ctx) = spec_a();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut enc = Encoder::new(&spec, &ctx).unwrap();
        let mut dec = Decoder::new(&spec, &ctx).unwrap();
        let mut msgs = Vec::new();
        let mut events = Vec::new();
        for (t, keep) in pattern.iter().enumerate() {
            let s = vec![ctx.random(&mut rng), ctx.random(&mut rng)];
            let c = enc.encode_step(&s).unwrap();
            msgs.push(s);
            let rx: Vec<_> = keep.iter().map(|&j| (j, c[j].clone())).collect();
            events.extend(dec.ingest(t as u64 + 1, &rx).unwrap());
        }
        (msgs, events)
    }

    #[test]
    fn no_erasures_recover_every_slot() {
        let all: &[usize] = &[0, 1, 2, 3];
        let (msgs, events) = run(&[all; 6], 3);
        assert_eq!(events.len(), 6);
        for (t, ev) in events.iter().enumerate() {
            let DecoderEvent::Recovered { slots, messages, best_effort, .. } = ev else { panic!("{ev:?}") };
            assert_eq!(slots, &vec![t as u64 + 1]);
            assert_eq!(messages[0], msgs[t]);
            assert!(!best_effort);
        }
    }

    #[test]
    fn burst_then_recovery() {
        let (msgs, events) = run(&[&[], &[0, 1, 2, 3]], 4);
        assert_eq!(
            events,
            vec![DecoderEvent::Recovered {
                at: 2,
                slots: vec![1, 2],
                messages: msgs,
                best_effort: false
            }]
        );
    }

    #[test]
    fn cancellation_after_clean_prefix() {
        let all: &[usize] = &[0, 1, 2, 3];
        let (msgs, events) = run(&[all, all, &[1], &[0, 2], &[1, 2, 3]], 9);
        let last = events.last().unwrap();
        assert_eq!(
            *last,
            DecoderEvent::Recovered {
                at: 5,
                slots: vec![3, 4, 5],
                messages: msgs[2..].to_vec(),
                best_effort: false
            }
        );
    }

    #[test]
    fn delay_violation_reported() {
        let (_, events) = run(&[&[0], &[0], &[0], &[0]], 5);
        assert!(events.contains(&DecoderEvent::Violation {
            slot: 3,
            kind: ViolationKind::DelayExceeded
        }));
    }

    #[test]
    fn total_loss_expires_slots() {
        let none: &[usize] = &[];
        let (_, events) = run(&[none; 6], 6);
        assert!(events.iter().any(|e| matches!(e, DecoderEvent::Lost { slots } if slots == &vec![1])));
        assert!(!events.iter().any(|e| matches!(e, DecoderEvent::Recovered { .. })));
    }

    #[test]
    fn recovers_after_violation_best_effort() {
        let all: &[usize] = &[0, 1, 2, 3];
        let none: &[usize] = &[];
        // debt 2, 4 (violation), 2, 0; slot 1 never enters any equation
        let (msgs, events) = run(&[none, none, all, all, all, all], 8);
        let recovered: BTreeMap<u64, Vec<FieldElement>> = events
            .iter()
            .filter_map(|e| match e {
                DecoderEvent::Recovered { slots, messages, .. } => Some(slots.iter().copied().zip(messages.clone())),
                _ => None,
            })
            .flatten()
            .collect();
        for (t, m) in recovered {
            assert_eq!(m, msgs[t as usize - 1]);
        }
        assert!(events.contains(&DecoderEvent::Lost { slots: vec![1] }));
        assert!(matches!(events.last().unwrap(), DecoderEvent::Recovered { best_effort: false, .. }));
    }

    #[test]
    fn out_of_order_rejected() {
        let (spec, ctx) = spec_a();
        let mut dec = Decoder::new(&spec, &ctx).unwrap();
        dec.ingest(2, &[]).unwrap();
        assert_eq!(dec.ingest(2, &[]).unwrap_err(), CodecError::OutOfOrderSlot { last: 2, got: 2 });
        assert!(matches!(dec.ingest(3, &[(7, ctx.one())]), Err(CodecError::IndexOutOfRange(7))));
    }

    #[test]
    fn decode_window_rows() {
        let (spec, _) = spec_a();
        let w = build_decode_window(&spec, &WindowPattern::from_sets(vec![vec![0, 3]])).unwrap();
        assert_eq!(w, spec.matrix(0).select_rows(&[0, 3]));
        let w = build_decode_window(&spec, &WindowPattern::from_sets(vec![vec![], vec![0, 1, 2, 3]])).unwrap();
        let mut expect = ExponentMatrix::filled(4, 4, crate::exponents::Exp::NegInf);
        expect.put_block(0, 0, spec.matrix(1));
        expect.put_block(0, 2, spec.matrix(0));
        assert_eq!(w, expect);
        let w = build_decode_window(&spec, &WindowPattern::from_sets(vec![vec![0], vec![0, 1, 2]])).unwrap();
        let stack = build_stacked_exponents(&spec, 2);
        assert_eq!(w, stack.select_rows(&[0, 4, 5, 6]));
    }
}
