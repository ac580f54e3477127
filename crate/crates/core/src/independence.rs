//! Exact and sampled checks that every `r` coordinates of a uniformly drawn
//! dual-code word are jointly uniform.
//!
//! Exact mode computes each projected distribution precisely. For small
//! duals (`k_dual ≤ 12`) it histograms the full codeword list; above that it
//! uses the rank of the matching generator-matrix columns. The image of a
//! linear map is a subspace, so `r` columns of rank `t` give the uniform law
//! on `2^t` patterns and a total variation of `1 − 2^{t−r}` exactly.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{Codeword, DualCode};
use crate::{Error, Result};

/// Largest dual dimension exact mode will enumerate.
pub const EXACT_MAX_DIMENSION: usize = 20;
/// Up to this dimension exact mode histograms the enumerated codewords.
pub const HISTOGRAM_MAX_DIMENSION: usize = 12;
/// Codewords drawn in sampled mode.
pub const SAMPLED_WORDS: usize = 1 << 16;
/// Widest subset sampled mode accepts; the threshold exceeds 1 beyond this.
pub const SAMPLED_MAX_R: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "sampled" => Ok(Mode::Sampled),
            other => Err(Error::invalid(format!(
                "unknown mode {other:?} (expected exact or sampled)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub n: usize,
    pub k_dual: usize,
    pub r_tested: usize,
    pub mode: Mode,
    pub subsets_checked: usize,
    /// True when every `r`-subset was tested.
    pub exhaustive: bool,
    pub max_total_variation: f64,
    /// Sampled mode only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold: Option<f64>,
    pub verdict: Verdict,
    /// Worst subset when the verdict is `fail`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failing_subset: Option<Vec<usize>>,
}

impl IndependenceReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// `C(n, r)`, saturating at `u128::MAX`.
fn choose(n: usize, r: usize) -> u128 {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `r`-subsets in lexicographic order.
fn all_subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..r).rev().find(|&i| cur[i] != i + n - r) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `budget` sorted subsets drawn uniformly (with repetition across draws).
fn random_subsets(n: usize, r: usize, budget: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..budget)
        .map(|_| {
            let mut s = index::sample(&mut rng, n, r).into_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

fn select_subsets(n: usize, r: usize, budget: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    if choose(n, r) <= budget as u128 {
        (all_subsets(n, r), true)
    } else {
        (random_subsets(n, r, budget, seed), false)
    }
}

/// Total variation between pattern counts over `total` draws and uniform.
fn tv_from_counts(counts: &[u64], total: u64) -> f64 {
    let uniform = 1.0 / counts.len() as f64;
    0.5 * counts
        .iter()
        .map(|&c| (c as f64 / total as f64 - uniform).abs())
        .sum::<f64>()
}

fn pattern(word: &Codeword, subset: &[usize]) -> usize {
    subset
        .iter()
        .enumerate()
        .fold(0, |acc, (b, &i)| acc | (usize::from(word.bit(i)) << b))
}

fn histogram_tv(words: &[Codeword], subset: &[usize]) -> f64 {
    let mut counts = vec![0u64; 1 << subset.len()];
    for w in words {
        counts[pattern(w, subset)] += 1;
    }
    tv_from_counts(&counts, words.len() as u64)
}

/// Columns of the generator matrix whose rows are `x^i g⊥`, `i < k_dual`.
fn generator_columns(dual: &DualCode) -> Vec<u32> {
    let g = dual.generator();
    let k = dual.k_dual();
    (0..dual.n())
        .map(|j| {
            (0..k.min(j + 1))
                .filter(|&i| g.coeff(j - i))
                .fold(0u32, |acc, i| acc | (1 << i))
        })
        .collect()
}

fn gf2_rank(vectors: impl IntoIterator<Item = u32>) -> usize {
    // basis[b] holds a vector whose leading bit is b
    let mut basis = [0u32; 32];
    let mut rank = 0;
    for mut v in vectors {
        while v != 0 {
            let lead = 31 - v.leading_zeros() as usize;
            if basis[lead] == 0 {
                basis[lead] = v;
                rank += 1;
                break;
            }
            v ^= basis[lead];
        }
    }
    rank
}

fn rank_tv(columns: &[u32], subset: &[usize]) -> f64 {
    let rank = gf2_rank(subset.iter().map(|&i| columns[i]));
    1.0 - 0.5f64.powi((subset.len() - rank) as i32)
}

/// Exact total variation for each subset, by the chosen path.
enum ExactPath {
    Histogram(Vec<Codeword>),
    Rank(Vec<u32>),
}

impl ExactPath {
    fn new(dual: &DualCode, force_rank: bool) -> Result<Self> {
        if dual.k_dual() <= HISTOGRAM_MAX_DIMENSION && !force_rank {
            Ok(ExactPath::Histogram(dual.code().enumerate()?))
        } else {
            Ok(ExactPath::Rank(generator_columns(dual)))
        }
    }

    fn tv(&self, subset: &[usize]) -> f64 {
        match self {
            ExactPath::Histogram(words) => histogram_tv(words, subset),
            ExactPath::Rank(cols) => rank_tv(cols, subset),
        }
    }
}

/// Largest value, earliest index on ties.
fn worst(tvs: &[f64]) -> (usize, f64) {
    tvs.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, tv)| {
            if tv > best.1 {
                (i, tv)
            } else {
                best
            }
        })
}

fn validate(dual: &DualCode, r: usize, budget: usize) -> Result<()> {
    if r == 0 || r > dual.n() {
        return Err(Error::invalid(format!(
            "r = {r} must lie in 1..={}",
            dual.n()
        )));
    }
    if budget == 0 {
        return Err(Error::invalid("subset budget must be positive"));
    }
    Ok(())
}

/// Checks `r`-wise independence of the uniform measure on `dual`.
///
/// All `C(n, r)` subsets are tested when that count is at most `budget`;
/// otherwise `budget` subsets are drawn from `seed`. Exact mode fails with
/// [`Error::ResourceLimit`] for `k_dual > 20`.
pub fn verify_r_independence(
    dual: &DualCode,
    r: usize,
    mode: Mode,
    budget: usize,
    seed: u64,
) -> Result<IndependenceReport> {
    validate(dual, r, budget)?;
    match mode {
        Mode::Exact => verify_exact(dual, r, budget, seed, false),
        Mode::Sampled => verify_sampled(dual, r, budget, seed),
    }
}

/// Exact mode forced onto the rank path, for cross-checking the histogram.
pub fn verify_exact_by_rank(
    dual: &DualCode,
    r: usize,
    budget: usize,
    seed: u64,
) -> Result<IndependenceReport> {
    validate(dual, r, budget)?;
    verify_exact(dual, r, budget, seed, true)
}

fn verify_exact(
    dual: &DualCode,
    r: usize,
    budget: usize,
    seed: u64,
    force_rank: bool,
) -> Result<IndependenceReport> {
    if dual.k_dual() > EXACT_MAX_DIMENSION {
        return Err(Error::ResourceLimit(format!(
            "exact independence check needs k_dual ≤ {EXACT_MAX_DIMENSION}, got {}",
            dual.k_dual()
        )));
    }
    let path = ExactPath::new(dual, force_rank)?;
    let (subsets, exhaustive) = select_subsets(dual.n(), r, budget, seed);
    let tvs: Vec<f64> = subsets.par_iter().map(|s| path.tv(s)).collect();
    let (at, max_tv) = worst(&tvs);
    let pass = max_tv == 0.0;

    // Marginals of a uniform law are uniform; a pass at r that breaks at
    // r − 1 means the arithmetic is wrong somewhere.
    if pass && r > 1 {
        let bad = subsets.par_iter().find_any(|s| path.tv(&s[..r - 1]) != 0.0);
        if let Some(s) = bad {
            return Err(Error::ArithmeticCorruption(format!(
                "subset {s:?} is uniform but its prefix of length {} is not",
                r - 1
            )));
        }
    }

    Ok(IndependenceReport {
        n: dual.n(),
        k_dual: dual.k_dual(),
        r_tested: r,
        mode: Mode::Exact,
        subsets_checked: subsets.len(),
        exhaustive,
        max_total_variation: max_tv,
        threshold: None,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        failing_subset: (!pass).then(|| subsets[at].clone()),
    })
}

/// Heuristic smoke test: `2^16` seeded codewords, flagged when the
/// empirical total variation exceeds `4·√(2^r / 2^16)`.
fn verify_sampled(
    dual: &DualCode,
    r: usize,
    budget: usize,
    seed: u64,
) -> Result<IndependenceReport> {
    if r > SAMPLED_MAX_R {
        return Err(Error::invalid(format!(
            "sampled mode supports r ≤ {SAMPLED_MAX_R}, got {r}"
        )));
    }
    let (subsets, exhaustive) = select_subsets(dual.n(), r, budget, seed);
    let mut counts = vec![vec![0u64; 1 << r]; subsets.len()];
    const CHUNK: usize = 4096;
    for start in (0..SAMPLED_WORDS).step_by(CHUNK) {
        let words: Vec<Codeword> = (start..start + CHUNK)
            .into_par_iter()
            .map(|i| dual.sample(seed, i as u64))
            .collect();
        counts.par_iter_mut().zip(&subsets).for_each(|(c, s)| {
            for w in &words {
                c[pattern(w, s)] += 1;
            }
        });
    }
    let tvs: Vec<f64> = counts
        .iter()
        .map(|c| tv_from_counts(c, SAMPLED_WORDS as u64))
        .collect();
    let (at, max_tv) = worst(&tvs);
    let threshold = 4.0 * ((1u64 << r) as f64 / SAMPLED_WORDS as f64).sqrt();
    let pass = max_tv <= threshold;
    Ok(IndependenceReport {
        n: dual.n(),
        k_dual: dual.k_dual(),
        r_tested: r,
        mode: Mode::Sampled,
        subsets_checked: subsets.len(),
        exhaustive,
        max_total_variation: max_tv,
        threshold: Some(threshold),
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        failing_subset: (!pass).then(|| subsets[at].clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{bch_generator, dual_code};
    use crate::gf2m::FieldParams;

    fn dual(m: u32, delta: u32) -> DualCode {
        dual_code(&bch_generator(&FieldParams::new(m).unwrap(), delta).unwrap()).unwrap()
    }

    #[test]
    fn simplex_examples() {
        let d = dual(3, 3);
        let pass = verify_r_independence(&d, 2, Mode::Exact, 1000, 0).unwrap();
        assert_eq!(pass.verdict, Verdict::Pass);
        assert_eq!(pass.subsets_checked, 21);
        assert_eq!(pass.max_total_variation, 0.0);
        let fail = verify_r_independence(&d, 3, Mode::Exact, 1000, 0).unwrap();
        assert_eq!(fail.verdict, Verdict::Fail);
        let s = fail.failing_subset.unwrap();
        // three dependent columns: the three bits sum to zero on every word
        let words = d.code().enumerate().unwrap();
        assert!(words
            .iter()
            .all(|w| !(w.bit(s[0]) ^ w.bit(s[1]) ^ w.bit(s[2]))));
        assert_eq!(fail.max_total_variation, 0.5);
    }

    #[test]
    fn bch_15_7_dual_is_4_wise() {
        let rep = verify_r_independence(&dual(4, 5), 4, Mode::Exact, 10_000, 0).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.subsets_checked, 1365);
        assert!(rep.exhaustive);
    }

    #[test]
    fn paths_agree() {
        for (m, delta) in [(3, 3), (4, 3), (4, 5), (4, 7), (5, 5), (5, 7)] {
            let d = dual(m, delta);
            for r in 1..=6.min(d.n()) {
                let a = verify_r_independence(&d, r, Mode::Exact, 400, 3).unwrap();
                let b = verify_exact_by_rank(&d, r, 400, 3).unwrap();
                assert_eq!(
                    a.max_total_variation, b.max_total_variation,
                    "m={m} δ={delta} r={r}"
                );
                assert_eq!(a.failing_subset, b.failing_subset);
            }
        }
    }

    #[test]
    fn designed_distance_guarantee() {
        for (m, delta) in [(4, 3), (4, 5), (4, 7), (5, 3), (5, 5), (6, 5), (6, 7)] {
            let d = dual(m, delta);
            let r = delta as usize - 1;
            let rep = verify_r_independence(&d, r, Mode::Exact, 3000, 9).unwrap();
            assert!(rep.passed(), "m={m} δ={delta}: {rep:?}");
            assert!(verify_r_independence(&d, 1, Mode::Exact, 3000, 9)
                .unwrap()
                .passed());
        }
    }

    #[test]
    fn exact_limit() {
        // m = 6, δ = 11: cosets of 1, 3, 5, 7, 9 give deg g = 27
        let d = dual(6, 11);
        assert!(d.k_dual() > EXACT_MAX_DIMENSION);
        assert!(matches!(
            verify_r_independence(&d, 2, Mode::Exact, 10, 0),
            Err(Error::ResourceLimit(_))
        ));
        assert!(verify_r_independence(&d, 0, Mode::Sampled, 10, 0).is_err());
        assert!(verify_r_independence(&d, 2, Mode::Sampled, 0, 0).is_err());
    }

    #[test]
    fn sampled_mode() {
        let d = dual(6, 7);
        let rep = verify_r_independence(&d, 4, Mode::Sampled, 50, 1).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.subsets_checked, 50);
        assert!(!rep.exhaustive);
        let simplex = dual(3, 3);
        let rep = verify_r_independence(&simplex, 3, Mode::Sampled, 100, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(all_subsets(4, 2).len(), 6);
        assert_eq!(all_subsets(15, 4).len(), 1365);
        assert_eq!(choose(15, 4), 1365);
        assert_eq!(choose(16383, 8), choose(16383, 16375));
        let a = random_subsets(100, 5, 10, 7);
        assert_eq!(a, random_subsets(100, 5, 10, 7));
        assert!(a.iter().all(|s| s.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn report_json() {
        let rep = verify_r_independence(&dual(3, 3), 3, Mode::Exact, 100, 0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["verdict"], "fail");
        assert_eq!(v["mode"], "exact");
        assert!(v["failing_subset"].is_array());
    }
}
