//! Arithmetic over GF(2)[x] and GF(2^m).
//!
//! Binary polynomials are bit-packed into `u64` words, lowest degree first.
//! Field elements of GF(2^m) are stored in polynomial representation modulo
//! a fixed primitive polynomial, so the class of `x` is a primitive element
//! `α` of the multiplicative group.
//!
//! # Hex serialization
//!
//! Polynomials serialize as lowercase hex strings of their coefficient bytes.
//! Byte `i` carries the coefficients of `x^{8i}` … `x^{8i+7}`, least
//! significant bit first, and bytes appear in increasing order. The string
//! has exactly `⌊deg/8⌋ + 1` bytes; the zero polynomial is the empty string.
//! For example `x^4 + x + 1` is `"13"` and `x^8 + 1` is `"0101"`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 20;

/// Canonical primitive polynomials, indexed by degree. Bit `i` is the
/// coefficient of `x^i`.
const PRIMITIVE_TABLE: [u32; MAX_DEGREE as usize + 1] = [
    0, 0x3,      // x + 1
    0x7,      // x^2 + x + 1
    0xb,      // x^3 + x + 1
    0x13,     // x^4 + x + 1
    0x25,     // x^5 + x^2 + 1
    0x43,     // x^6 + x + 1
    0x89,     // x^7 + x^3 + 1
    0x11d,    // x^8 + x^4 + x^3 + x^2 + 1
    0x211,    // x^9 + x^4 + 1
    0x409,    // x^10 + x^3 + 1
    0x805,    // x^11 + x^2 + 1
    0x1053,   // x^12 + x^6 + x^4 + x + 1
    0x201b,   // x^13 + x^4 + x^3 + x + 1
    0x4443,   // x^14 + x^10 + x^6 + x + 1
    0x8003,   // x^15 + x + 1
    0x1100b,  // x^16 + x^12 + x^3 + x + 1
    0x20009,  // x^17 + x^3 + 1
    0x40081,  // x^18 + x^7 + 1
    0x80027,  // x^19 + x^5 + x^2 + x + 1
    0x100009, // x^20 + x^3 + 1
];

/// A polynomial over GF(2).
///
/// Words are kept normalized: the last stored word is nonzero, so the zero
/// polynomial has no words and `degree()` returns `None`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BinaryPolynomial {
    words: Vec<u64>,
}

impl BinaryPolynomial {
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_word(1)
    }

    /// `x^degree`.
    pub fn monomial(degree: usize) -> Self {
        let mut words = vec![0u64; degree / 64 + 1];
        words[degree / 64] = 1 << (degree % 64);
        Self { words }
    }

    pub fn from_word(bits: u64) -> Self {
        Self::from_words(vec![bits])
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        let mut p = Self { words };
        p.normalize();
        p
    }

    /// Builds `Σ x^e` over the given exponents. Repeated exponents cancel.
    pub fn from_exponents(exponents: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::zero();
        for e in exponents {
            p.flip(e);
        }
        p
    }

    /// Coefficients lowest degree first.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            words[i / 64] |= 1 << (i % 64);
        }
        Self::from_words(words)
    }

    fn normalize(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    /// Toggles the coefficient of `x^i`.
    pub fn flip(&mut self, i: usize) {
        if self.words.len() <= i / 64 {
            self.words.resize(i / 64 + 1, 0);
        }
        self.words[i / 64] ^= 1 << (i % 64);
        self.normalize();
    }

    /// Number of nonzero coefficients.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Exponents of the nonzero coefficients, ascending.
    pub fn exponents(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Coefficients lowest degree first, padded or truncated to `len`.
    pub fn to_bits(&self, len: usize) -> Vec<bool> {
        (0..len).map(|i| self.coeff(i)).collect()
    }

    /// `self ^= other · x^shift`.
    pub fn add_shifted(&mut self, other: &BinaryPolynomial, shift: usize) {
        xor_shifted(&mut self.words, &other.words, shift);
        self.normalize();
    }

    pub fn shifted(&self, shift: usize) -> Self {
        let mut out = Self::zero();
        out.add_shifted(self, shift);
        out
    }

    pub fn mul(&self, other: &BinaryPolynomial) -> Self {
        let (small, large) = if self.weight() <= other.weight() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = Vec::with_capacity(self.words.len() + other.words.len());
        for e in small.exponents() {
            xor_shifted(&mut words, &large.words, e);
        }
        Self::from_words(words)
    }

    /// Quotient and remainder of long division.
    pub fn div_rem(&self, divisor: &BinaryPolynomial) -> Result<(Self, Self)> {
        let d = divisor
            .degree()
            .ok_or_else(|| Error::invalid("division by the zero polynomial"))?;
        let mut rem = self.words.clone();
        let Some(top) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if top < d {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![0u64; (top - d) / 64 + 1];
        for i in (d..=top).rev() {
            if (rem[i / 64] >> (i % 64)) & 1 == 1 {
                quot[(i - d) / 64] |= 1 << ((i - d) % 64);
                xor_shifted(&mut rem, &divisor.words, i - d);
            }
        }
        Ok((Self::from_words(quot), Self::from_words(rem)))
    }

    pub fn rem(&self, divisor: &BinaryPolynomial) -> Result<Self> {
        Ok(self.div_rem(divisor)?.1)
    }

    pub fn is_divisible_by(&self, divisor: &BinaryPolynomial) -> Result<bool> {
        Ok(self.rem(divisor)?.is_zero())
    }

    /// `x^deg · p(1/x)`: the coefficient sequence reversed.
    pub fn reciprocal(&self) -> Self {
        let Some(d) = self.degree() else {
            return Self::zero();
        };
        Self::from_exponents(self.exponents().map(|e| d - e))
    }

    /// Product of two polynomials in GF(2)[x] / (x^n + 1).
    pub fn mul_mod_cyclic(&self, other: &BinaryPolynomial, n: usize) -> Self {
        self.mul(other).reduce_cyclic(n)
    }

    /// Reduction modulo `x^n + 1`, folding exponent `e` onto `e mod n`.
    pub fn reduce_cyclic(&self, n: usize) -> Self {
        match self.degree() {
            Some(d) if d >= n => Self::from_exponents(self.exponents().map(|e| e % n)),
            _ => self.clone(),
        }
    }

    pub fn to_hex(&self) -> String {
        let Some(d) = self.degree() else {
            return String::new();
        };
        let bytes: Vec<u8> = (0..=d / 8)
            .map(|i| (self.words[i / 8] >> ((i % 8) * 8)) as u8)
            .collect();
        hex::encode(bytes)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes =
            hex::decode(s).map_err(|e| Error::invalid(format!("bad polynomial hex: {e}")))?;
        let mut words = vec![0u64; bytes.len().div_ceil(8)];
        for (i, b) in bytes.iter().enumerate() {
            words[i / 8] |= (*b as u64) << ((i % 8) * 8);
        }
        Ok(Self::from_words(words))
    }
}

/// `dst ^= src · x^shift`, growing `dst` as needed. Leaves `dst` unnormalized.
pub(crate) fn xor_shifted(dst: &mut Vec<u64>, src: &[u64], shift: usize) {
    if src.is_empty() {
        return;
    }
    let ws = shift / 64;
    let bs = shift % 64;
    let need = ws + src.len() + usize::from(bs != 0);
    if dst.len() < need {
        dst.resize(need, 0);
    }
    if bs == 0 {
        for (d, s) in dst[ws..].iter_mut().zip(src) {
            *d ^= s;
        }
    } else {
        for (i, &w) in src.iter().enumerate() {
            dst[ws + i] ^= w << bs;
            dst[ws + i + 1] ^= w >> (64 - bs);
        }
    }
}

impl fmt::Display for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut exps: Vec<usize> = self.exponents().collect();
        exps.reverse();
        for (i, e) in exps.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match e {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryPolynomial({self})")
    }
}

impl Serialize for BinaryPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for BinaryPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

impl std::ops::BitXor for &BinaryPolynomial {
    type Output = BinaryPolynomial;

    fn bitxor(self, rhs: Self) -> BinaryPolynomial {
        let mut out = self.clone();
        out.add_shifted(rhs, 0);
        out
    }
}

/// The canonical primitive polynomial of degree `m`.
pub fn default_primitive_poly(m: u32) -> Result<BinaryPolynomial> {
    if !(1..=MAX_DEGREE).contains(&m) {
        return Err(Error::UnsupportedDegree(m));
    }
    Ok(BinaryPolynomial::from_word(
        PRIMITIVE_TABLE[m as usize] as u64,
    ))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
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

/// True when `poly` has degree `m` and `x` has multiplicative order
/// exactly `2^m − 1` modulo it.
pub fn is_primitive(poly: &BinaryPolynomial, m: u32) -> bool {
    if !(1..=MAX_DEGREE).contains(&m) || poly.degree() != Some(m as usize) || !poly.coeff(0) {
        return false;
    }
    let params = FieldParams::unchecked(m, poly.clone());
    let n = params.n as u64;
    let alpha = params.alpha();
    if params.pow(alpha, n) != FieldElement::ONE {
        return false;
    }
    prime_factors(n)
        .into_iter()
        .all(|q| params.pow(alpha, n / q) != FieldElement::ONE)
}

/// An element of GF(2^m) in polynomial representation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn new(value: u32) -> Self {
        FieldElement(value)
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

/// Arithmetic context for GF(2^m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldParams {
    m: u32,
    modulus: BinaryPolynomial,
    modulus_bits: u64,
    n: u32,
}

impl FieldParams {
    /// GF(2^m) over the canonical primitive polynomial.
    pub fn new(m: u32) -> Result<Self> {
        Ok(Self::unchecked(m, default_primitive_poly(m)?))
    }

    /// GF(2^m) over a caller-supplied modulus, which must be primitive.
    pub fn with_modulus(m: u32, modulus: BinaryPolynomial) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(Error::UnsupportedDegree(m));
        }
        if !is_primitive(&modulus, m) {
            return Err(Error::invalid(format!(
                "{modulus} is not primitive of degree {m}"
            )));
        }
        Ok(Self::unchecked(m, modulus))
    }

    fn unchecked(m: u32, modulus: BinaryPolynomial) -> Self {
        let modulus_bits = modulus.words().first().copied().unwrap_or(0);
        Self {
            m,
            modulus,
            modulus_bits,
            n: (1u32 << m) - 1,
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Order of the multiplicative group, `2^m − 1`.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> &BinaryPolynomial {
        &self.modulus
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 >> self.m == 0
    }

    fn reduce(&self, mut v: u64) -> FieldElement {
        let m = self.m;
        while v >> m != 0 {
            let top = 63 - v.leading_zeros();
            v ^= self.modulus_bits << (top - m);
        }
        FieldElement(v as u32)
    }

    /// Product of two reduced elements.
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        let (a, mut b) = (a.0 as u64, b.0);
        let mut acc = 0u64;
        while b != 0 {
            let i = b.trailing_zeros();
            acc ^= a << i;
            b &= b - 1;
        }
        self.reduce(acc)
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `a^{2^m − 2}`.
    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        (!a.is_zero()).then(|| self.pow(a, self.n as u64 - 1))
    }

    /// The primitive element `α`, the class of `x`.
    pub fn alpha(&self) -> FieldElement {
        self.reduce(2)
    }

    pub fn alpha_pow(&self, e: u64) -> FieldElement {
        self.pow(self.alpha(), e % self.n as u64)
    }

    /// Evaluates a binary polynomial at `a` by Horner's rule.
    pub fn eval(&self, poly: &BinaryPolynomial, a: FieldElement) -> FieldElement {
        let Some(d) = poly.degree() else {
            return FieldElement::ZERO;
        };
        (0..=d).rev().fold(FieldElement::ZERO, |acc, i| {
            let c = if poly.coeff(i) {
                FieldElement::ONE
            } else {
                FieldElement::ZERO
            };
            self.mul(acc, a) + c
        })
    }
}

/// Checked product in GF(2^m).
pub fn field_mul(a: FieldElement, b: FieldElement, params: &FieldParams) -> Result<FieldElement> {
    for x in [a, b] {
        if !params.contains(x) {
            return Err(Error::invalid(format!(
                "element {:#x} is wider than m = {} bits",
                x.0, params.m
            )));
        }
    }
    Ok(params.mul(a, b))
}

/// The orbit `{e·2^j mod n}`, sorted ascending.
pub fn cyclotomic_coset(e: u32, n: u32) -> Vec<u32> {
    assert!(
        n % 2 == 1 && e < n,
        "cyclotomic_coset needs odd n and e < n"
    );
    let mut out = vec![e];
    let mut cur = (e as u64 * 2 % n as u64) as u32;
    while cur != e {
        out.push(cur);
        cur = (cur as u64 * 2 % n as u64) as u32;
    }
    out.sort_unstable();
    out
}

/// All cyclotomic cosets modulo `n`, ordered by their smallest member.
pub fn cyclotomic_cosets(n: u32) -> Vec<Vec<u32>> {
    let mut seen = vec![false; n as usize];
    let mut out = Vec::new();
    for e in 0..n {
        if !seen[e as usize] {
            let coset = cyclotomic_coset(e, n);
            for &c in &coset {
                seen[c as usize] = true;
            }
            out.push(coset);
        }
    }
    out
}

/// Minimal polynomial of `α^e` over GF(2): `∏ (x − α^j)` over the coset of `e`.
pub fn minimal_polynomial(e: u32, params: &FieldParams) -> Result<BinaryPolynomial> {
    if e >= params.n {
        return Err(Error::invalid(format!(
            "exponent {e} out of range for n = {}",
            params.n
        )));
    }
    // Coefficients in GF(2^m), lowest degree first.
    let mut coeffs = vec![FieldElement::ONE];
    for j in cyclotomic_coset(e, params.n) {
        let root = params.alpha_pow(j as u64);
        let mut next = vec![FieldElement::ZERO; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] = next[i + 1] + c;
            next[i] = next[i] + params.mul(c, root);
        }
        coeffs = next;
    }
    let mut poly = BinaryPolynomial::zero();
    for (i, c) in coeffs.into_iter().enumerate() {
        match c.0 {
            0 => {}
            1 => poly.flip(i),
            other => {
                return Err(Error::ArithmeticCorruption(format!(
                    "minimal polynomial of α^{e} has non-binary coefficient {other:#x} at x^{i}"
                )))
            }
        }
    }
    Ok(poly)
}
