//! Binary cyclic codes: primitive narrow-sense BCH construction, dual codes,
//! nonsystematic encoding, seeded codeword sampling and exhaustive minimum
//! distance.
//!
//! # Codeword batch format
//!
//! A batch file starts with an 8-byte little-endian header: the block length
//! `n` as `u32` followed by the word count as `u32`. Each codeword follows as
//! `⌈n/8⌉` bytes; bit `j` of byte `i` (least significant first) is the
//! coefficient of `x^{8i+j}`, so the coefficient of `x^0` comes first.

use std::io::{Read, Write};

use log::warn;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gf2m::{cyclotomic_coset, minimal_polynomial, BinaryPolynomial, FieldParams};
use crate::{Error, Result};

/// Largest dimension accepted by [`min_distance_exact`].
pub const MIN_DISTANCE_MAX_DIMENSION: usize = 24;

/// A binary cyclic code of length `n = 2^m − 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicCode {
    n: usize,
    generator: BinaryPolynomial,
    k: usize,
    designed_distance: Option<u32>,
    field: FieldParams,
}

impl CyclicCode {
    /// Wraps a generator polynomial, checking that it divides `x^n + 1`
    /// and leaves a nontrivial code.
    pub fn new(
        field: FieldParams,
        generator: BinaryPolynomial,
        designed_distance: Option<u32>,
    ) -> Result<Self> {
        let n = field.n() as usize;
        let deg = generator
            .degree()
            .ok_or_else(|| Error::invalid("generator polynomial is zero"))?;
        if !x_n_plus_one(n).is_divisible_by(&generator)? {
            return Err(Error::invalid(format!(
                "{generator} does not divide x^{n} + 1"
            )));
        }
        if deg >= n {
            return Err(Error::DegenerateCode(format!(
                "generator degree {deg} leaves dimension 0 at n = {n}"
            )));
        }
        Ok(Self {
            n,
            generator,
            k: n - deg,
            designed_distance,
            field,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generator(&self) -> &BinaryPolynomial {
        &self.generator
    }

    pub fn designed_distance(&self) -> Option<u32> {
        self.designed_distance
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    /// Nonsystematic encoding: `message(x) · g(x) mod (x^n + 1)`.
    pub fn encode(&self, message: &[bool]) -> Result<Codeword> {
        if message.len() != self.k {
            return Err(Error::invalid(format!(
                "message has {} bits, code dimension is {}",
                message.len(),
                self.k
            )));
        }
        Ok(self.encode_poly(&BinaryPolynomial::from_bits(message)))
    }

    fn encode_poly(&self, message: &BinaryPolynomial) -> Codeword {
        debug_assert!(message.degree().is_none_or(|d| d < self.k));
        Codeword {
            bits: message.mul_mod_cyclic(&self.generator, self.n),
            n: self.n,
        }
    }

    /// Rows `x^i g(x)` for `i < k`: a generator matrix basis.
    pub fn basis(&self) -> Vec<Codeword> {
        (0..self.k)
            .map(|i| Codeword {
                bits: self.generator.shifted(i),
                n: self.n,
            })
            .collect()
    }

    pub fn contains(&self, word: &Codeword) -> bool {
        word.n == self.n && word.bits.is_divisible_by(&self.generator).unwrap_or(false)
    }

    /// Every codeword, indexed by message value. Only for small dimensions.
    pub fn enumerate(&self) -> Result<Vec<Codeword>> {
        if self.k > 20 {
            return Err(Error::ResourceLimit(format!(
                "enumerating 2^{} codewords",
                self.k
            )));
        }
        Ok((0..1u64 << self.k)
            .map(|msg| self.encode_poly(&BinaryPolynomial::from_word(msg)))
            .collect())
    }
}

/// A dual code together with the code it was derived from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCode {
    base: CyclicCode,
    check: BinaryPolynomial,
    code: CyclicCode,
}

impl DualCode {
    pub fn base(&self) -> &CyclicCode {
        &self.base
    }

    /// The dual as a cyclic code in its own right.
    pub fn code(&self) -> &CyclicCode {
        &self.code
    }

    /// Check polynomial `h(x) = (x^n + 1) / g(x)` of the base code.
    pub fn check_polynomial(&self) -> &BinaryPolynomial {
        &self.check
    }

    /// Generator of the dual, the reciprocal of `h(x)`.
    pub fn generator(&self) -> &BinaryPolynomial {
        self.code.generator()
    }

    pub fn n(&self) -> usize {
        self.code.n
    }

    pub fn k_dual(&self) -> usize {
        self.code.k
    }

    pub fn encode(&self, message: &[bool]) -> Result<Codeword> {
        self.code.encode(message)
    }

    /// Codeword `index` of the seeded stream. Message bits come from a
    /// ChaCha8 generator keyed by `seed` on stream `index`, so any prefix or
    /// parallel split of the index range reproduces the same words.
    pub fn sample(&self, seed: u64, index: u64) -> Codeword {
        let k = self.k_dual();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut words: Vec<u64> = (0..k.div_ceil(64)).map(|_| rng.next_u64()).collect();
        if !k.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (k % 64)) - 1;
            }
        }
        self.code.encode_poly(&BinaryPolynomial::from_words(words))
    }
}

fn x_n_plus_one(n: usize) -> BinaryPolynomial {
    BinaryPolynomial::from_exponents([0, n])
}

/// A codeword of length `n`, stored as its polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Codeword {
    bits: BinaryPolynomial,
    n: usize,
}

impl Codeword {
    pub fn from_bits(bits: &[bool]) -> Self {
        Self {
            bits: BinaryPolynomial::from_bits(bits),
            n: bits.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits.coeff(i)
    }

    pub fn weight(&self) -> usize {
        self.bits.weight()
    }

    pub fn polynomial(&self) -> &BinaryPolynomial {
        &self.bits
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.bits.to_bits(self.n)
    }

    /// Mod-2 inner product.
    pub fn dot(&self, other: &Codeword) -> bool {
        let ones: u32 = self
            .bits
            .words()
            .iter()
            .zip(other.bits.words())
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.n.div_ceil(8)];
        for (i, w) in self.bits.words().iter().enumerate() {
            for (j, b) in w.to_le_bytes().into_iter().enumerate() {
                if let Some(slot) = out.get_mut(i * 8 + j) {
                    *slot = b;
                }
            }
        }
        out
    }

    fn from_bytes(bytes: &[u8], n: usize) -> Self {
        let words = bytes
            .chunks(8)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(buf)
            })
            .collect();
        Self {
            bits: BinaryPolynomial::from_words(words),
            n,
        }
    }
}

/// Primitive narrow-sense binary BCH code with designed distance `delta`:
/// `g(x)` is the lcm of the minimal polynomials of `α, α², …, α^{δ−1}`.
///
/// Even `delta` is promoted to `delta + 1`; both give the same root set.
pub fn bch_generator(field: &FieldParams, delta: u32) -> Result<CyclicCode> {
    let n = field.n();
    if delta < 3 {
        return Err(Error::invalid(format!("designed distance {delta} < 3")));
    }
    if delta > n {
        return Err(Error::DegenerateCode(format!(
            "designed distance {delta} exceeds block length {n}"
        )));
    }
    let delta = if delta.is_multiple_of(2) {
        warn!("even designed distance {delta} promoted to {}", delta + 1);
        delta + 1
    } else {
        delta
    };
    let mut covered = vec![false; n as usize];
    let mut g = BinaryPolynomial::one();
    for e in 1..delta.min(n) {
        if covered[e as usize] {
            continue;
        }
        for c in cyclotomic_coset(e, n) {
            covered[c as usize] = true;
        }
        g = g.mul(&minimal_polynomial(e, field)?);
    }
    let code = CyclicCode::new(field.clone(), g, Some(delta))?;
    let t = (delta as usize - 1) / 2;
    let bound = (n as usize).saturating_sub(field.m() as usize * t);
    if code.k < bound {
        return Err(Error::ArithmeticCorruption(format!(
            "BCH dimension {} below n − mt = {bound}",
            code.k
        )));
    }
    Ok(code)
}

/// Smallest odd designed distance whose BCH code has dimension at most
/// `target_k`.
pub fn designed_distance_for_dimension(
    field: &FieldParams,
    target_k: usize,
) -> Result<(u32, CyclicCode)> {
    let mut delta = 3;
    while delta <= field.n() {
        let code = bch_generator(field, delta)?;
        if code.k <= target_k {
            return Ok((delta, code));
        }
        delta += 2;
    }
    Err(Error::DegenerateCode(format!(
        "no designed distance reaches dimension {target_k} at n = {}",
        field.n()
    )))
}

/// Dual of a cyclic code: generated by the reciprocal of
/// `h(x) = (x^n + 1) / g(x)`, dimension `n − k`.
pub fn dual_code(code: &CyclicCode) -> Result<DualCode> {
    let (h, rem) = x_n_plus_one(code.n).div_rem(&code.generator)?;
    if !rem.is_zero() {
        return Err(Error::ArithmeticCorruption(format!(
            "x^{} + 1 leaves remainder {rem} on division by {}",
            code.n, code.generator
        )));
    }
    if code.k == code.n {
        return Err(Error::DegenerateCode(
            "dual of the full space is {0}".into(),
        ));
    }
    let dual = CyclicCode::new(code.field.clone(), h.reciprocal(), None)?;
    Ok(DualCode {
        base: code.clone(),
        check: h,
        code: dual,
    })
}

/// `count` codewords from the seeded stream, in index order.
pub fn sample_codewords(dual: &DualCode, count: usize, seed: u64) -> Result<Vec<Codeword>> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| dual.sample(seed, i))
        .collect())
}

/// Minimum Hamming weight over all nonzero codewords, by Gray-code
/// enumeration of the `2^k − 1` nonzero messages.
pub fn min_distance_exact(code: &CyclicCode) -> Result<usize> {
    if code.k > MIN_DISTANCE_MAX_DIMENSION {
        return Err(Error::ResourceLimit(format!(
            "dimension {} exceeds exhaustive budget 2^{MIN_DISTANCE_MAX_DIMENSION}; use the designed distance",
            code.k
        )));
    }
    let words = code.n.div_ceil(64);
    let rows: Vec<Vec<u64>> = code
        .basis()
        .into_iter()
        .map(|c| {
            let mut w = c.bits.words().to_vec();
            w.resize(words, 0);
            w
        })
        .collect();
    let mut cur = vec![0u64; words];
    let mut best = usize::MAX;
    for t in 1u64..1 << code.k {
        let row = &rows[t.trailing_zeros() as usize];
        let mut weight = 0;
        for (c, r) in cur.iter_mut().zip(row) {
            *c ^= r;
            weight += c.count_ones() as usize;
        }
        best = best.min(weight);
    }
    Ok(best)
}

/// JSON summary of a code and its dual.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CodeSummary {
    pub m: u32,
    pub n: usize,
    pub delta: Option<u32>,
    pub generator_hex: BinaryPolynomial,
    pub k: usize,
    pub dual_generator_hex: BinaryPolynomial,
    pub k_dual: usize,
}

impl From<&DualCode> for CodeSummary {
    fn from(d: &DualCode) -> Self {
        Self {
            m: d.base.field.m(),
            n: d.base.n,
            delta: d.base.designed_distance,
            generator_hex: d.base.generator.clone(),
            k: d.base.k,
            dual_generator_hex: d.generator().clone(),
            k_dual: d.k_dual(),
        }
    }
}

pub fn write_codeword_batch<W: Write>(mut w: W, n: usize, words: &[Codeword]) -> Result<()> {
    let n32 = u32::try_from(n).map_err(|_| Error::invalid("block length exceeds u32"))?;
    let count =
        u32::try_from(words.len()).map_err(|_| Error::invalid("batch exceeds u32 words"))?;
    w.write_all(&n32.to_le_bytes())?;
    w.write_all(&count.to_le_bytes())?;
    for word in words {
        if word.n != n {
            return Err(Error::invalid(format!(
                "codeword of length {} in batch of n = {n}",
                word.n
            )));
        }
        w.write_all(&word.to_bytes())?;
    }
    Ok(())
}

pub fn read_codeword_batch<R: Read>(mut r: R) -> Result<(usize, Vec<Codeword>)> {
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let n = u32::from_le_bytes(header[..4].try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(header[4..].try_into().unwrap()) as usize;
    let mut buf = vec![0u8; n.div_ceil(8)];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        out.push(Codeword::from_bytes(&buf, n));
    }
    Ok((n, out))
}
