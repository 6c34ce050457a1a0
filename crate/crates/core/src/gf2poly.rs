//! Dense polynomials over GF(2) packed into little-endian `u64` words, plus
//! reduction modulo a fixed degree-`d` polynomial.

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub(crate) struct Poly {
    pub(crate) words: Vec<u64>,
}

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly { words: Vec::new() }
    }

    pub(crate) fn one() -> Self {
        Poly { words: vec![1] }
    }

    pub(crate) fn from_words(words: Vec<u64>) -> Self {
        let mut p = Poly { words };
        p.trim();
        p
    }

    pub(crate) fn from_exponents(exps: &[usize]) -> Self {
        let mut p = Poly::zero();
        for &e in exps {
            p.flip(e);
        }
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub(crate) fn is_one(&self) -> bool {
        self.degree() == Some(0)
    }

    pub(crate) fn degree(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(i * 64 + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    pub(crate) fn bit(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub(crate) fn flip(&mut self, i: usize) {
        let w = i / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1 << (i % 64);
    }

    /// `self ^= other * x^shift`
    pub(crate) fn xor_shifted(&mut self, other: &Poly, shift: usize) {
        let Some(deg) = other.degree() else { return };
        let need = (deg + shift) / 64 + 1;
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        let (ws, bs) = (shift / 64, shift % 64);
        for (i, &w) in other.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            self.words[i + ws] ^= w << bs;
            if bs != 0 && i + ws + 1 < self.words.len() {
                self.words[i + ws + 1] ^= w >> (64 - bs);
            }
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.xor_shifted(other, 0);
        out.trim();
        out
    }

    /// Carry-less product.
    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (wi, &w) in other.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.xor_shifted(self, wi * 64 + b);
                w &= w - 1;
            }
        }
        out.trim();
        out
    }

    pub(crate) fn square(&self) -> Poly {
        let mut words = vec![0u64; self.words.len() * 2];
        for (i, &w) in self.words.iter().enumerate() {
            words[2 * i] = spread(w as u32);
            words[2 * i + 1] = spread((w >> 32) as u32);
        }
        Poly::from_words(words)
    }

    pub(crate) fn rem(&self, m: &Poly) -> Poly {
        let dm = m.degree().expect("remainder by zero polynomial");
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < dm {
                break;
            }
            r.xor_shifted(m, dr - dm);
        }
        r.trim();
        r
    }

    pub(crate) fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.trim();
        a
    }
}

/// Interleaves zero bits: bit i of `x` moves to bit 2i.
fn spread(x: u32) -> u64 {
    let mut x = x as u64;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

/// A monic modulus of degree `d` with the data needed for fast reduction.
#[derive(Clone, Debug)]
pub(crate) struct Modulus {
    pub(crate) degree: usize,
    pub(crate) poly: Poly,
    /// Exponents of the non-leading terms.
    taps: Vec<usize>,
    pub(crate) words: usize,
}

const SPARSE_TAPS: usize = 8;

impl Modulus {
    /// `exps` must contain `degree` as its largest element.
    pub(crate) fn new(exps: &[usize]) -> Self {
        let poly = Poly::from_exponents(exps);
        let degree = poly.degree().expect("nonzero modulus");
        let mut taps: Vec<usize> = (0..degree).filter(|&e| poly.bit(e)).collect();
        taps.reverse();
        Modulus {
            degree,
            poly,
            taps,
            words: degree.div_ceil(64),
        }
    }

    pub(crate) fn exponents(&self) -> Vec<usize> {
        let mut v = vec![self.degree];
        v.extend(self.taps.iter().copied());
        v
    }

    pub(crate) fn has_constant_term(&self) -> bool {
        self.poly.bit(0)
    }

    /// Reduces an arbitrary polynomial; the result has exactly `self.words` words.
    pub(crate) fn reduce(&self, mut p: Poly) -> Vec<u64> {
        let d = self.degree;
        if let Some(top) = p.degree() {
            if top >= d {
                if self.taps.len() <= SPARSE_TAPS {
                    self.fold_sparse(&mut p.words);
                } else {
                    for i in (d..=top).rev() {
                        if p.bit(i) {
                            p.xor_shifted(&self.poly, i - d);
                        }
                    }
                }
            }
        }
        p.words.resize(self.words, 0);
        p.words
    }

    /// Word-at-a-time reduction for a modulus with few terms: every word
    /// holding bits at or above `x^d` is cleared and folded onto the taps.
    fn fold_sparse(&self, w: &mut [u64]) {
        let d = self.degree;
        let (dw, db) = (d / 64, d % 64);
        for i in (dw..w.len()).rev() {
            let mask = if i == dw { !((1u64 << db) - 1) } else { !0 };
            loop {
                let t = w[i] & mask;
                if t == 0 {
                    break;
                }
                w[i] ^= t;
                for &e in &self.taps {
                    let base = (64 * i + e) as isize - d as isize;
                    if base >= 0 {
                        xor_at(w, t, base as usize);
                    } else {
                        xor_at(w, t >> (-base) as usize, 0);
                    }
                }
            }
        }
    }

    pub(crate) fn mul_words(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        if self.words == 1 {
            return vec![self.mul_single(a[0], b[0])];
        }
        let prod = Poly::from_words(a.to_vec()).mul(&Poly::from_words(b.to_vec()));
        self.reduce(prod)
    }

    fn mul_single(&self, a: u64, b: u64) -> u64 {
        let mut acc: u128 = 0;
        let mut w = b;
        while w != 0 {
            acc ^= (a as u128) << w.trailing_zeros();
            w &= w - 1;
        }
        let d = self.degree;
        let m = self.poly.words[0] as u128 | ((self.poly.words.get(1).copied().unwrap_or(0) as u128) << 64);
        while acc >> d != 0 {
            let top = 127 - acc.leading_zeros() as usize;
            acc ^= m << (top - d);
        }
        acc as u64
    }

    pub(crate) fn square_words(&self, a: &[u64]) -> Vec<u64> {
        if self.words == 1 {
            return vec![self.mul_single(a[0], a[0])];
        }
        self.reduce(Poly::from_words(a.to_vec()).square())
    }

    /// Inverse of a nonzero residue via the binary extended Euclidean algorithm.
    pub(crate) fn inv_words(&self, a: &[u64]) -> Option<Vec<u64>> {
        let mut u = Poly::from_words(a.to_vec());
        if u.is_zero() {
            return None;
        }
        let mut v = self.poly.clone();
        let mut g1 = Poly::one();
        let mut g2 = Poly::zero();
        while !u.is_one() {
            let du = u.degree()?;
            let dv = v.degree()?;
            if du < dv {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut g1, &mut g2);
                continue;
            }
            let j = du - dv;
            u.xor_shifted(&v, j);
            u.trim();
            g1.xor_shifted(&g2, j);
            g1.trim();
            if u.is_zero() {
                // only reachable when `a` shares a factor with a reducible modulus
                return None;
            }
        }
        Some(self.reduce(g1))
    }

    /// Rabin's test: `x^(2^d) = x mod f` and `gcd(x^(2^(d/r)) - x, f) = 1` for
    /// every prime `r | d`, preceded by a cheap small-degree-factor screen.
    pub(crate) fn is_irreducible(&self) -> bool {
        let d = self.degree;
        if d == 0 {
            return false;
        }
        if !self.has_constant_term() {
            return d == 1;
        }
        let exps = self.exponents();
        if (1..=(d / 2).min(SCREEN_DEGREE)).any(|i| has_factor_of_degree_dividing(&exps, i)) {
            return false;
        }
        let x = Poly::from_words(self.reduce(Poly::from_exponents(&[1])));
        let needed: Vec<usize> = prime_factors(d).iter().map(|r| d / r).collect();
        let mut cur = x.words_padded(self.words);
        for i in 1..=d {
            cur = self.square_words(&cur);
            if needed.contains(&i) {
                let g = Poly::gcd(&Poly::from_words(cur.clone()).add(&x), &self.poly);
                if !g.is_one() {
                    return false;
                }
            }
        }
        Poly::from_words(cur) == x
    }
}

const SCREEN_DEGREE: usize = 12;

/// `gcd(f, x^(2^i) - x) != 1`, computed on `f mod (x^(2^i) - x)` obtained by
/// folding exponents, so the cost depends on `i` and the term count only.
fn has_factor_of_degree_dividing(exps: &[usize], i: usize) -> bool {
    let period = (1usize << i) - 1;
    let mut folded = Poly::zero();
    for &e in exps {
        folded.flip(if e == 0 { 0 } else { (e - 1) % period + 1 });
    }
    folded.trim();
    let frob = Poly::from_exponents(&[1 << i, 1]);
    !Poly::gcd(&frob, &folded).is_one()
}

fn xor_at(w: &mut [u64], t: u64, bit: usize) {
    let (wi, b) = (bit / 64, bit % 64);
    w[wi] ^= t << b;
    if b != 0 && wi + 1 < w.len() {
        w[wi + 1] ^= t >> (64 - b);
    }
}

impl Poly {
    fn words_padded(&self, n: usize) -> Vec<u64> {
        let mut w = self.words.clone();
        w.resize(n, 0);
        w
    }
}

pub(crate) fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
