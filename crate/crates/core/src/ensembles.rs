//! Sign-matrix ensembles.
//!
//! Pseudo ensembles take one dual-code word per matrix. Symmetric matrices
//! use the first `N(N+1)/2` bits to fill the upper triangle row by row
//! (row `i` fills `(i,i)…(i,N−1)`); rectangular matrices use the first `N·p`
//! bits row by row. Bit `b` becomes the sign `(−1)^b` and surplus bits are
//! dropped. Random baselines draw i.i.d. fair signs from a ChaCha8 stream
//! keyed by `(seed, index)`.
//!
//! # Packed sign format
//!
//! [`write_packed`] emits a 24-byte header followed by one bit per entry:
//!
//! | offset | size | field                                             |
//! |--------|------|---------------------------------------------------|
//! | 0      | 4    | magic `PSGN`                                      |
//! | 4      | 1    | kind (0 pseudo-wigner, 1 pseudo-mp, 2 random-wigner, 3 random-mp) |
//! | 5      | 3    | zero                                              |
//! | 8      | 4    | rows `N`, u32 little-endian                       |
//! | 12     | 4    | columns `p`, u32 little-endian (`N` for Wigner)   |
//! | 16     | 8    | seed, u64 little-endian                           |
//!
//! Entries follow row-major, full matrix, bit set for `−1`, least
//! significant bit first, zero-padded to a byte boundary.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{Codeword, DualCode};
use crate::matrix::Matrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    PseudoWigner,
    PseudoMp,
    RandomWigner,
    RandomMp,
}

impl EnsembleKind {
    pub fn is_pseudo(self) -> bool {
        matches!(self, Self::PseudoWigner | Self::PseudoMp)
    }

    pub fn is_wigner(self) -> bool {
        matches!(self, Self::PseudoWigner | Self::RandomWigner)
    }

    fn tag(self) -> u8 {
        match self {
            Self::PseudoWigner => 0,
            Self::PseudoMp => 1,
            Self::RandomWigner => 2,
            Self::RandomMp => 3,
        }
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PseudoWigner => "pseudo-wigner",
            Self::PseudoMp => "pseudo-mp",
            Self::RandomWigner => "random-wigner",
            Self::RandomMp => "random-mp",
        })
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pseudo-wigner" => Self::PseudoWigner,
            "pseudo-mp" => Self::PseudoMp,
            "random-wigner" => Self::RandomWigner,
            "random-mp" => Self::RandomMp,
            other => return Err(Error::invalid(format!("unknown ensemble kind {other:?}"))),
        })
    }
}

/// Parameters of an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    /// Matrix order (Wigner) or number of rows (MP).
    pub n: usize,
    /// Columns, MP kinds only.
    pub p: Option<usize>,
    /// `p / N`, MP kinds only.
    pub gamma: Option<f64>,
    /// Guaranteed independence level; `None` means fully independent.
    pub r: Option<u64>,
    /// `log_N r`; `None` for random kinds.
    pub rho: Option<f64>,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn wigner(kind: EnsembleKind, n: usize, r: Option<u64>, seed: u64) -> Result<Self> {
        if !kind.is_wigner() {
            return Err(Error::invalid(format!("{kind} is not a Wigner kind")));
        }
        if n == 0 {
            return Err(Error::invalid("matrix order must be positive"));
        }
        Ok(Self {
            kind,
            n,
            p: None,
            gamma: None,
            r,
            rho: r.map(|r| independence_exponent(r, n)),
            seed,
        })
    }

    pub fn mp(kind: EnsembleKind, n: usize, p: usize, r: Option<u64>, seed: u64) -> Result<Self> {
        if kind.is_wigner() {
            return Err(Error::invalid(format!("{kind} is not an MP kind")));
        }
        if p == 0 || p > n {
            return Err(Error::invalid(format!(
                "need 0 < p ≤ N, got p = {p}, N = {n}"
            )));
        }
        Ok(Self {
            kind,
            n,
            p: Some(p),
            gamma: Some(p as f64 / n as f64),
            r,
            rho: r.map(|r| independence_exponent(r, n)),
            seed,
        })
    }

    /// Sign bits consumed per matrix.
    pub fn bits_needed(&self) -> usize {
        match self.p {
            Some(p) => self.n * p,
            None => self.n * (self.n + 1) / 2,
        }
    }

    /// Dimension of the matrices whose spectra are studied: `N` for Wigner,
    /// `p` for the `p×p` Gram matrix.
    pub fn spectral_dim(&self) -> usize {
        self.p.unwrap_or(self.n)
    }
}

/// `ρ = log_N r`.
pub fn independence_exponent(r: u64, n: usize) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    (r as f64).ln() / (n as f64).ln()
}

/// `p = ⌊γN⌋`.
pub fn columns_for_ratio(n: usize, gamma: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid(format!("γ = {gamma} outside (0, 1]")));
    }
    let p = (gamma * n as f64).floor() as usize;
    if p == 0 {
        return Err(Error::invalid(format!(
            "γ = {gamma} gives p = 0 at N = {n}"
        )));
    }
    Ok(p)
}

/// Symmetric `N×N` matrix of ±1 entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    n: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    /// Fills the upper triangle row-major from `upper`, then mirrors.
    fn from_upper(n: usize, mut upper: impl FnMut() -> i8) -> Self {
        let mut entries = vec![0i8; n * n];
        for i in 0..n {
            for j in i..n {
                let s = upper();
                entries[i * n + j] = s;
                entries[j * n + i] = s;
            }
        }
        Self { n, entries }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// `N×p` matrix of ±1 entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectSignMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl RectSignMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }
}

fn sign(bit: bool) -> i8 {
    if bit {
        -1
    } else {
        1
    }
}

pub fn pack_symmetric(word: &Codeword, n: usize) -> Result<SignMatrix> {
    let need = n * (n + 1) / 2;
    if need > word.len() {
        return Err(Error::invalid(format!(
            "N = {n} needs {need} bits, codeword has {}",
            word.len()
        )));
    }
    let mut pos = 0;
    Ok(SignMatrix::from_upper(n, || {
        let s = sign(word.bit(pos));
        pos += 1;
        s
    }))
}

pub fn pack_rect(word: &Codeword, n: usize, p: usize) -> Result<RectSignMatrix> {
    if p > n {
        return Err(Error::invalid(format!("p = {p} exceeds N = {n}")));
    }
    if n * p > word.len() {
        return Err(Error::invalid(format!(
            "{n}×{p} needs {} bits, codeword has {}",
            n * p,
            word.len()
        )));
    }
    Ok(RectSignMatrix {
        rows: n,
        cols: p,
        entries: (0..n * p).map(|i| sign(word.bit(i))).collect(),
    })
}

/// Entries scaled by `1/(2√N)`, so the limiting spectrum is `[−1, 1]`.
pub fn scaled_wigner(m: &SignMatrix) -> Matrix {
    let s = 0.5 / (m.n as f64).sqrt();
    Matrix::from_row_major(m.n, m.n, m.entries.iter().map(|&e| e as f64 * s).collect())
}

/// `YᵀY` with `Y = M/√N`; a `p×p` Gram matrix with unit diagonal.
pub fn scm(m: &RectSignMatrix) -> Matrix {
    let (n, p) = (m.rows, m.cols);
    // Integer Gram entries are exact; scale once at the end.
    let mut gram = vec![0i32; p * p];
    for row in m.entries.chunks(p) {
        for a in 0..p {
            let ra = row[a] as i32;
            for b in a..p {
                gram[a * p + b] += ra * row[b] as i32;
            }
        }
    }
    let inv = 1.0 / n as f64;
    Matrix::from_fn(p, p, |a, b| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        gram[lo * p + hi] as f64 * inv
    })
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One realization of an ensemble, before scaling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignSample {
    Wigner(SignMatrix),
    Mp(RectSignMatrix),
}

impl SignSample {
    /// The matrix whose spectrum is studied: the scaled Wigner matrix or
    /// the Gram matrix `YᵀY`.
    pub fn spectral_matrix(&self) -> Matrix {
        match self {
            Self::Wigner(m) => scaled_wigner(m),
            Self::Mp(m) => scm(m),
        }
    }
}

/// I.i.d. fair signs for sample `index` of a random kind.
pub fn random_baseline(spec: &EnsembleSpec, index: u64) -> Result<SignSample> {
    let mut rng = stream(spec.seed, index);
    let mut draw = move || sign(rng.random::<bool>());
    match spec.kind {
        EnsembleKind::RandomWigner => Ok(SignSample::Wigner(SignMatrix::from_upper(spec.n, draw))),
        EnsembleKind::RandomMp => {
            let p = spec.p.ok_or_else(|| Error::invalid("MP spec without p"))?;
            Ok(SignSample::Mp(RectSignMatrix {
                rows: spec.n,
                cols: p,
                entries: (0..spec.n * p).map(|_| draw()).collect(),
            }))
        }
        kind => Err(Error::invalid(format!("{kind} is not a random kind"))),
    }
}

/// An ensemble ready to produce samples by index.
#[derive(Clone, Debug)]
pub struct Ensemble {
    spec: EnsembleSpec,
    dual: Option<DualCode>,
}

impl Ensemble {
    /// A pseudo ensemble over `dual`. `spec.r` should carry the code's
    /// guaranteed independence level.
    pub fn pseudo(spec: EnsembleSpec, dual: DualCode) -> Result<Self> {
        if !spec.kind.is_pseudo() {
            return Err(Error::invalid(format!(
                "{} is not a pseudo kind",
                spec.kind
            )));
        }
        if spec.bits_needed() > dual.n() {
            return Err(Error::invalid(format!(
                "{} needs {} bits per matrix, code length is {}",
                spec.kind,
                spec.bits_needed(),
                dual.n()
            )));
        }
        Ok(Self {
            spec,
            dual: Some(dual),
        })
    }

    pub fn random(spec: EnsembleSpec) -> Result<Self> {
        if spec.kind.is_pseudo() {
            return Err(Error::invalid(format!(
                "{} is not a random kind",
                spec.kind
            )));
        }
        Ok(Self { spec, dual: None })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn dual(&self) -> Option<&DualCode> {
        self.dual.as_ref()
    }

    pub fn sample(&self, index: u64) -> Result<SignSample> {
        match &self.dual {
            None => random_baseline(&self.spec, index),
            Some(dual) => {
                let word = dual.sample(self.spec.seed, index);
                match self.spec.p {
                    None => Ok(SignSample::Wigner(pack_symmetric(&word, self.spec.n)?)),
                    Some(p) => Ok(SignSample::Mp(pack_rect(&word, self.spec.n, p)?)),
                }
            }
        }
    }
}

/// Writes a sample as CSV, one matrix row per line.
pub fn write_csv<W: Write>(mut w: W, sample: &SignSample) -> Result<()> {
    let (rows, cols, entries) = match sample {
        SignSample::Wigner(m) => (m.n, m.n, &m.entries),
        SignSample::Mp(m) => (m.rows, m.cols, &m.entries),
    };
    for i in 0..rows {
        let line: Vec<String> = entries[i * cols..(i + 1) * cols]
            .iter()
            .map(i8::to_string)
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Writes a sample in the packed sign format described in the module docs.
pub fn write_packed<W: Write>(mut w: W, spec: &EnsembleSpec, sample: &SignSample) -> Result<()> {
    let (rows, cols, entries) = match sample {
        SignSample::Wigner(m) => (m.n, m.n, &m.entries),
        SignSample::Mp(m) => (m.rows, m.cols, &m.entries),
    };
    w.write_all(b"PSGN")?;
    w.write_all(&[spec.kind.tag(), 0, 0, 0])?;
    w.write_all(&(rows as u32).to_le_bytes())?;
    w.write_all(&(cols as u32).to_le_bytes())?;
    w.write_all(&spec.seed.to_le_bytes())?;
    let mut bytes = vec![0u8; entries.len().div_ceil(8)];
    for (i, _) in entries.iter().enumerate().filter(|(_, &e)| e < 0) {
        bytes[i / 8] |= 1 << (i % 8);
    }
    w.write_all(&bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{bch_generator, dual_code};
    use crate::gf2m::FieldParams;
    use proptest::prelude::*;

    fn word(bits: &[u8]) -> Codeword {
        Codeword::from_bits(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    #[test]
    fn pack_symmetric_examples() {
        let m = pack_symmetric(&word(&[1, 0, 1]), 2).unwrap();
        assert_eq!(m.entries(), &[-1, 1, 1, -1]);
        let z = pack_symmetric(&word(&[0; 6]), 3).unwrap();
        assert!(z.entries().iter().all(|&e| e == 1));
        assert!(pack_symmetric(&word(&[0; 5]), 3).is_err());
        // 180 · 181 / 2 = 16290 ≤ 16383
        assert_eq!(
            EnsembleSpec::wigner(EnsembleKind::PseudoWigner, 180, None, 0)
                .unwrap()
                .bits_needed(),
            16290
        );
    }

    #[test]
    fn pack_rect_examples() {
        let m = pack_rect(&word(&[0, 1, 1, 0]), 2, 2).unwrap();
        assert_eq!(m.entries(), &[1, -1, -1, 1]);
        assert!(pack_rect(&word(&[0; 4]), 1, 2).is_err());
        assert!(pack_rect(&word(&[0; 3]), 2, 2).is_err());
        let spec = EnsembleSpec::mp(EnsembleKind::PseudoMp, 40, 25, None, 0).unwrap();
        assert!(spec.bits_needed() <= 1023);
    }

    #[test]
    fn scaling() {
        let one = pack_symmetric(&word(&[0]), 1).unwrap();
        assert_eq!(scaled_wigner(&one).as_slice(), &[0.5]);
        let m = scaled_wigner(&pack_symmetric(&word(&[1, 0, 1]), 2).unwrap());
        assert!((m[(0, 1)] - 0.353553).abs() < 1e-6);
        assert!((m[(0, 0)] + 0.353553).abs() < 1e-6);
        let g = scm(&pack_rect(&word(&[0, 0]), 2, 1).unwrap());
        assert_eq!(g.as_slice(), &[1.0]);
    }

    #[test]
    fn random_baseline_is_deterministic_and_fair() {
        let spec = EnsembleSpec::wigner(EnsembleKind::RandomWigner, 2000, None, 9).unwrap();
        let a = random_baseline(&spec, 0).unwrap();
        assert_eq!(a, random_baseline(&spec, 0).unwrap());
        assert_ne!(a, random_baseline(&spec, 1).unwrap());
        let SignSample::Wigner(m) = a else { panic!() };
        assert!(m.is_symmetric());
        let n = 2000usize;
        let upper: i64 = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j) as i64)
            .sum();
        let cnt = (n * (n + 1) / 2) as f64;
        assert!((upper as f64 / cnt).abs() < 3.0 / cnt.sqrt());
        assert!(random_baseline(
            &EnsembleSpec::wigner(EnsembleKind::PseudoWigner, 3, None, 0).unwrap(),
            0
        )
        .is_err());
    }

    #[test]
    fn pseudo_ensemble_feasibility() {
        let dual = dual_code(&bch_generator(&FieldParams::new(5).unwrap(), 5).unwrap()).unwrap();
        let spec = EnsembleSpec::wigner(EnsembleKind::PseudoWigner, 8, Some(4), 0).unwrap();
        assert!(Ensemble::pseudo(spec, dual.clone()).is_err());
        let spec = EnsembleSpec::wigner(EnsembleKind::PseudoWigner, 7, Some(4), 0).unwrap();
        let e = Ensemble::pseudo(spec, dual).unwrap();
        assert_eq!(e.sample(3).unwrap(), e.sample(3).unwrap());
    }

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::mp(EnsembleKind::RandomMp, 10, 11, None, 0).is_err());
        assert!(EnsembleSpec::mp(EnsembleKind::RandomWigner, 10, 5, None, 0).is_err());
        let s = EnsembleSpec::mp(EnsembleKind::PseudoMp, 40, 25, Some(20), 0).unwrap();
        assert_eq!(s.gamma, Some(0.625));
        assert_eq!(columns_for_ratio(40, 0.625).unwrap(), 25);
        assert!(columns_for_ratio(40, 1.5).is_err());
    }

    #[test]
    fn csv_and_packed() {
        let spec = EnsembleSpec::wigner(EnsembleKind::PseudoWigner, 2, None, 5).unwrap();
        let s = SignSample::Wigner(pack_symmetric(&word(&[1, 0, 1]), 2).unwrap());
        let mut csv = Vec::new();
        write_csv(&mut csv, &s).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "-1,1\n1,-1\n");
        let mut bin = Vec::new();
        write_packed(&mut bin, &spec, &s).unwrap();
        assert_eq!(&bin[..4], b"PSGN");
        assert_eq!(bin.len(), 25);
        assert_eq!(bin[24], 0b1001);
    }

    proptest! {
        #[test]
        fn packing_invariants(bits in prop::collection::vec(any::<bool>(), 55), other in prop::collection::vec(any::<bool>(), 55)) {
            let n = 10;
            let a = pack_symmetric(&Codeword::from_bits(&bits), n).unwrap();
            prop_assert!(a.is_symmetric());
            let scaled = scaled_wigner(&a);
            let second = scaled.matmul(&scaled).trace() / n as f64;
            prop_assert!((second - 0.25).abs() < 1e-15);
            let b = pack_symmetric(&Codeword::from_bits(&other), n).unwrap();
            prop_assert_eq!(a == b, bits == other);

            let r = pack_rect(&Codeword::from_bits(&bits), 11, 5).unwrap();
            let g = scm(&r);
            prop_assert!((0..5).all(|i| g[(i, i)] == 1.0));
            prop_assert_eq!(g.trace(), 5.0);
        }
    }
}
