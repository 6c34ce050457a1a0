//! Exact arithmetic in GF(2^d) for arbitrary `d`.
//!
//! Elements are residues of GF(2)[x] modulo an irreducible polynomial of
//! degree `d`, stored as little-endian coefficient bits. The distinguished
//! generator `alpha` is the class of `x`. Any irreducible modulus works: a
//! nonzero GF(2) polynomial of degree below `d` never vanishes at `alpha`,
//! which is all the nonsingularity arguments built on top of this need.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exponents::Exp;
use crate::gf2poly::Modulus;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field degree must be at least 1")]
    ZeroDegree,
    #[error("modulus has degree {found}, expected {expected}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("modulus is reducible over GF(2)")]
    ProvidedModulusReducible,
    #[error("no irreducible modulus of degree {0} found within the attempt budget")]
    SearchExhausted(usize),
    #[error("operands belong to different fields")]
    ContextMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid field element encoding: {0}")]
    Parse(String),
}

const PENTANOMIAL_ATTEMPTS: usize = 4096;
const DENSE_ATTEMPTS: usize = 1024;

struct Inner {
    modulus: Modulus,
    tag: u64,
}

/// The field GF(2^d). Cheap to clone; immutable after construction.
#[derive(Clone)]
pub struct FieldCtx {
    inner: Arc<Inner>,
}

/// An element of a particular [`FieldCtx`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    tag: u64,
    words: Vec<u64>,
}

impl FieldCtx {
    /// Creates GF(2^d). With `modulus = None` an irreducible polynomial is
    /// found by a search that is deterministic in `seed` (default 0).
    pub fn new(degree: usize, modulus: Option<&[usize]>, seed: Option<u64>) -> Result<Self, FieldError> {
        if degree == 0 {
            return Err(FieldError::ZeroDegree);
        }
        match modulus {
            Some(exps) => Self::with_modulus(degree, exps),
            None => {
                let exps = search_modulus(degree, seed.unwrap_or(0))?;
                Ok(Self::from_checked(Modulus::new(&exps)))
            }
        }
    }

    pub fn with_modulus(degree: usize, exps: &[usize]) -> Result<Self, FieldError> {
        if degree == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let found = exps.iter().copied().max().unwrap_or(0);
        let m = Modulus::new(exps);
        if found != degree || m.degree != degree {
            return Err(FieldError::DegreeMismatch {
                expected: degree,
                found: m.degree.min(found),
            });
        }
        if !m.is_irreducible() {
            return Err(FieldError::ProvidedModulusReducible);
        }
        Ok(Self::from_checked(m))
    }

    fn from_checked(modulus: Modulus) -> Self {
        // FNV-1a over the modulus exponents
        let mut tag: u64 = 0xcbf2_9ce4_8422_2325;
        for e in modulus.exponents() {
            for b in (e as u64).to_le_bytes() {
                tag ^= b as u64;
                tag = tag.wrapping_mul(0x0100_0000_01b3);
            }
        }
        FieldCtx {
            inner: Arc::new(Inner { modulus, tag }),
        }
    }

    pub fn degree(&self) -> usize {
        self.inner.modulus.degree
    }

    /// Modulus exponents in strictly descending order.
    pub fn modulus(&self) -> Vec<usize> {
        self.inner.modulus.exponents()
    }

    fn words(&self) -> usize {
        self.inner.modulus.words
    }

    fn elem(&self, words: Vec<u64>) -> FieldElement {
        FieldElement {
            tag: self.inner.tag,
            words,
        }
    }

    pub fn owns(&self, a: &FieldElement) -> bool {
        a.tag == self.inner.tag && a.words.len() == self.words()
    }

    pub fn zero(&self) -> FieldElement {
        self.elem(vec![0; self.words()])
    }

    pub fn one(&self) -> FieldElement {
        let mut w = vec![0; self.words()];
        w[0] = 1;
        self.elem(w)
    }

    pub fn alpha(&self) -> FieldElement {
        self.from_bits(&[1])
    }

    /// The element whose polynomial has coefficient 1 exactly at `bits`.
    /// Bits at or above the degree are reduced.
    pub fn from_bits(&self, bits: &[usize]) -> FieldElement {
        let p = crate::gf2poly::Poly::from_exponents(bits);
        self.elem(self.inner.modulus.reduce(p))
    }

    pub fn from_u64(&self, v: u64) -> FieldElement {
        self.elem(self.inner.modulus.reduce(crate::gf2poly::Poly::from_words(vec![v])))
    }

    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let mut w: Vec<u64> = (0..self.words()).map(|_| rng.next_u64()).collect();
        let rem = self.degree() % 64;
        if rem != 0 {
            *w.last_mut().unwrap() &= (1u64 << rem) - 1;
        }
        self.elem(w)
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        debug_assert!(self.owns(a) && self.owns(b));
        self.elem(a.words.iter().zip(&b.words).map(|(x, y)| x ^ y).collect())
    }

    pub fn add_assign(&self, a: &mut FieldElement, b: &FieldElement) {
        debug_assert!(self.owns(a) && self.owns(b));
        for (x, y) in a.words.iter_mut().zip(&b.words) {
            *x ^= y;
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        debug_assert!(self.owns(a) && self.owns(b));
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        self.elem(self.inner.modulus.mul_words(&a.words, &b.words))
    }

    pub fn square(&self, a: &FieldElement) -> FieldElement {
        self.elem(self.inner.modulus.square_words(&a.words))
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, FieldError> {
        if !self.owns(a) {
            return Err(FieldError::ContextMismatch);
        }
        self.inner
            .modulus
            .inv_words(&a.words)
            .map(|w| self.elem(w))
            .ok_or(FieldError::DivisionByZero)
    }

    pub fn checked_add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        if !(self.owns(a) && self.owns(b)) {
            return Err(FieldError::ContextMismatch);
        }
        Ok(self.add(a, b))
    }

    pub fn checked_mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        if !(self.owns(a) && self.owns(b)) {
            return Err(FieldError::ContextMismatch);
        }
        Ok(self.mul(a, b))
    }

    /// `alpha^e` by square-and-multiply.
    pub fn pow(&self, e: u64) -> FieldElement {
        let base = self.alpha();
        let mut acc = self.one();
        if e == 0 {
            return acc;
        }
        for i in (0..64 - e.leading_zeros()).rev() {
            acc = self.square(&acc);
            if (e >> i) & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
        }
        acc
    }

    /// `alpha^e` with `alpha^(-inf) = 0`.
    pub fn pow_exp(&self, e: Exp) -> FieldElement {
        match e {
            Exp::NegInf => self.zero(),
            Exp::Fin(v) => self.pow(v),
        }
    }

    /// Lowercase hex, most significant coefficient first, `ceil(d/4)` digits.
    pub fn to_hex(&self, a: &FieldElement) -> String {
        let digits = self.degree().div_ceil(4);
        let mut s = String::with_capacity(digits + 2);
        s.push_str("0x");
        for i in (0..digits).rev() {
            let nib = (a.words[i / 16] >> ((i % 16) * 4)) & 0xf;
            s.push(char::from_digit(nib as u32, 16).unwrap());
        }
        s
    }

    pub fn parse_hex(&self, s: &str) -> Result<FieldElement, FieldError> {
        let body = s
            .strip_prefix("0x")
            .ok_or_else(|| FieldError::Parse(format!("missing 0x prefix in {s:?}")))?;
        let digits = self.degree().div_ceil(4);
        if body.len() != digits {
            return Err(FieldError::Parse(format!(
                "expected {digits} hex digits, got {}",
                body.len()
            )));
        }
        let mut words = vec![0u64; self.words()];
        for (i, c) in body.chars().rev().enumerate() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| FieldError::Parse(format!("bad hex digit {c:?}")))? as u64;
            if c.is_ascii_uppercase() {
                return Err(FieldError::Parse("hex digits must be lowercase".into()));
            }
            words[i / 16] |= nib << ((i % 16) * 4);
        }
        let rem = self.degree() % 64;
        if rem != 0 && words.last().unwrap() >> rem != 0 {
            return Err(FieldError::Parse(format!("{s} exceeds the field degree")));
        }
        Ok(self.elem(words))
    }

    /// Evaluates the GF(2) polynomial with coefficients at `bits` at `alpha`.
    pub fn eval_at_alpha(&self, bits: &[usize]) -> FieldElement {
        let mut acc = self.zero();
        for &b in bits {
            self.add_assign(&mut acc, &self.pow(b as u64));
        }
        acc
    }
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:?}", self.degree(), self.modulus())
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.inner.tag == other.inner.tag && self.modulus() == other.modulus()
    }
}

impl Eq for FieldCtx {}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.words[0] == 1 && self.words[1..].iter().all(|&w| w == 0)
    }

    /// Indices of nonzero coefficients, ascending.
    pub fn bits(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(i * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement{:?}", self.bits())
    }
}

/// Rabin irreducibility test for a polynomial given by its exponent set.
/// Returns false when the polynomial is not of degree exactly `d`.
pub fn irreducibility_test(modulus: &[usize], d: usize) -> bool {
    if d == 0 || modulus.is_empty() {
        return false;
    }
    let m = Modulus::new(modulus);
    m.degree == d && m.is_irreducible()
}

/// Seeded search: shuffled trinomials, then random pentanomials, then random
/// dense polynomials. Trinomials are skipped when `8 | d` (none are irreducible).
pub fn search_modulus(d: usize, seed: u64) -> Result<Vec<usize>, FieldError> {
    if d == 0 {
        return Err(FieldError::ZeroDegree);
    }
    if d == 1 {
        return Ok(vec![1, 0]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let test = |exps: &[usize]| Modulus::new(exps).is_irreducible();
    if d % 8 != 0 {
        let mut mids: Vec<usize> = (1..d).collect();
        mids.shuffle(&mut rng);
        for a in mids {
            let cand = [d, a, 0];
            if test(&cand) {
                return Ok(cand.to_vec());
            }
        }
    }
    if d >= 4 {
        for _ in 0..PENTANOMIAL_ATTEMPTS.max(8 * d) {
            let mut mids: Vec<usize> = rand::seq::index::sample(&mut rng, d - 1, 3)
                .into_iter()
                .map(|i| i + 1)
                .collect();
            mids.sort_unstable_by(|a, b| b.cmp(a));
            let cand = [d, mids[0], mids[1], mids[2], 0];
            if test(&cand) {
                return Ok(cand.to_vec());
            }
        }
    }
    for _ in 0..DENSE_ATTEMPTS {
        let mut cand = vec![d];
        cand.extend((1..d).rev().filter(|_| rng.random::<bool>()));
        cand.push(0);
        if test(&cand) {
            return Ok(cand);
        }
    }
    Err(FieldError::SearchExhausted(d))
}
