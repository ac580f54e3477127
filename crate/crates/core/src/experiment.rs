//! Monte Carlo drivers over ensembles: spectral norms, ESD distances and
//! trace moments. Sample `i` depends only on `(seed, i)`, and results come
//! back ordered by index whatever the thread count.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{Ensemble, EnsembleSpec, SignSample};
use crate::laws::{self, LimitLaw};
use crate::spectral::{self, SpectralSummary};
use crate::stats::{self, Histogram};
use crate::{Error, Result};

/// Default `ε` in the `log^{1+ε} N` norm band.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// The limit law matching an ensemble: the semicircle on `[−1, 1]` for
/// Wigner kinds, Marchenko–Pastur with ratio `p/N` otherwise.
pub fn law_for(spec: &EnsembleSpec) -> Result<LimitLaw> {
    match spec.gamma {
        None => Ok(LimitLaw::Semicircle),
        Some(g) => LimitLaw::marchenko_pastur(g),
    }
}

/// Spectral norm normalized to converge to 1: `‖A‖` for Wigner samples,
/// `‖YᵀY‖/(1+√γ)²` for Gram samples.
pub fn normalized_norm(spec: &EnsembleSpec, sample: &SignSample) -> Result<f64> {
    let norm = spectral::spectral_norm_bisection(&sample.spectral_matrix())?;
    Ok(match spec.gamma {
        None => norm,
        Some(g) => norm / (1.0 + g.sqrt()).powi(2),
    })
}

/// `(‖·‖ − 1)·N^{min(ρ, 2/3)} / log^{1+ε} N`; random kinds use `ρ = ∞`.
pub fn deviation_statistic(norm: f64, n: usize, rho: Option<f64>, epsilon: f64) -> f64 {
    let exponent = rho.map_or(2.0 / 3.0, |r| r.min(2.0 / 3.0));
    let n = n as f64;
    (norm - 1.0) * n.powf(exponent) / n.ln().powf(1.0 + epsilon)
}

/// Normalized norms for samples `range`, in index order.
pub fn sample_norms(ensemble: &Ensemble, range: Range<u64>) -> Result<Vec<f64>> {
    range
        .into_par_iter()
        .map(|i| normalized_norm(ensemble.spec(), &ensemble.sample(i)?))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSummary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub epsilon: f64,
    /// Per-sample deviation statistic, in index order.
    pub deviation: Vec<f64>,
    pub deviation_mean: f64,
    pub histogram: Histogram,
}

pub fn summarize_norms(spec: &EnsembleSpec, norms: &[f64], epsilon: f64) -> Result<NormSummary> {
    if norms.is_empty() {
        return Err(Error::invalid("no norms to summarize"));
    }
    let deviation: Vec<f64> = norms
        .iter()
        .map(|&x| deviation_statistic(x, spec.n, spec.rho, epsilon))
        .collect();
    Ok(NormSummary {
        count: norms.len(),
        mean: stats::mean(norms),
        std: stats::std_dev(norms),
        min: norms.iter().copied().fold(f64::INFINITY, f64::min),
        max: norms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        epsilon,
        deviation_mean: stats::mean(&deviation),
        deviation,
        histogram: Histogram::freedman_diaconis(norms),
    })
}

/// Half-width `c·log^{1+ε}N / N^{2/3}` of the norm band around 1.
pub fn norm_band(n: usize, c: f64, epsilon: f64) -> f64 {
    let n = n as f64;
    c * n.ln().powf(1.0 + epsilon) / n.powf(2.0 / 3.0)
}

/// Spectra of samples `range`, in index order.
pub fn sample_spectra(ensemble: &Ensemble, range: Range<u64>) -> Result<Vec<SpectralSummary>> {
    range
        .into_par_iter()
        .map(|i| {
            let summary = spectral::eigenvalues(&ensemble.sample(i)?.spectral_matrix())?;
            Ok(summary.with_source(ensemble.spec().clone()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsdReport {
    pub count: usize,
    pub law: laws::LawKind,
    /// Per-sample KS distance to the law, in index order.
    pub ks: Vec<f64>,
    pub ks_mean: f64,
    pub ks_max: f64,
    /// KS distance of the pooled eigenvalues.
    pub pooled_ks: f64,
}

/// KS distances of each spectrum and of their union against `law`.
pub fn esd_report(spectra: &[SpectralSummary], law: &LimitLaw) -> Result<EsdReport> {
    if spectra.is_empty() {
        return Err(Error::invalid("no spectra"));
    }
    let ks: Vec<f64> = spectra
        .par_iter()
        .map(|s| spectral::ks_distance(s, law))
        .collect();
    let pooled: Vec<f64> = spectra
        .iter()
        .flat_map(|s| s.eigenvalues().iter().copied())
        .collect();
    Ok(EsdReport {
        count: spectra.len(),
        law: law.kind(),
        ks_mean: stats::mean(&ks),
        ks_max: ks.iter().copied().fold(0.0, f64::max),
        pooled_ks: spectral::ks_distance_with(&pooled, |x| law.cdf(x)),
        ks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub s: u32,
    /// Mean over samples of `(1/dim)·Tr(A^s)`.
    pub sample_mean: f64,
    pub sample_std: f64,
    pub std_error: f64,
    pub law_moment: f64,
    /// Wigner kinds: `E[Tr(A^s)]·√(πs³/8)/N`.
    pub wigner_ratio: Option<f64>,
}

/// Normalized traces `(1/dim)·Tr(A^s)` for `s = 1..=s_max`. The first two
/// come straight from the entries (trace and sum of squares).
fn normalized_traces(sample: &SignSample, s_max: u32) -> Result<Vec<f64>> {
    let m = sample.spectral_matrix();
    let dim = m.rows() as f64;
    let mut out = vec![m.trace() / dim];
    if s_max >= 2 {
        out.push(m.as_slice().iter().map(|x| x * x).sum::<f64>() / dim);
    }
    if s_max >= 3 {
        let spec = spectral::eigenvalues(&m)?;
        out.extend((3..=s_max).map(|s| spec.moment(s)));
    }
    out.truncate(s_max as usize);
    Ok(out)
}

/// Sample moments for `count` samples alongside the limit-law moments.
pub fn moments_table(ensemble: &Ensemble, count: u64, s_max: u32) -> Result<Vec<MomentRow>> {
    if s_max == 0 || count == 0 {
        return Err(Error::invalid("need count ≥ 1 and s_max ≥ 1"));
    }
    let per_sample: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| normalized_traces(&ensemble.sample(i)?, s_max))
        .collect::<Result<_>>()?;
    let law = law_for(ensemble.spec())?;
    let wigner = ensemble.spec().kind.is_wigner();
    Ok((1..=s_max)
        .map(|s| {
            let column: Vec<f64> = per_sample.iter().map(|v| v[s as usize - 1]).collect();
            let mean = stats::mean(&column);
            let std = stats::std_dev(&column);
            let sf = s as f64;
            MomentRow {
                s,
                sample_mean: mean,
                sample_std: std,
                std_error: std / (column.len() as f64).sqrt(),
                law_moment: law.moment(u64::from(s)),
                wigner_ratio: wigner
                    .then(|| mean * (std::f64::consts::PI * sf.powi(3) / 8.0).sqrt()),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleKind;

    #[test]
    fn deviation_examples() {
        assert_eq!(deviation_statistic(1.0, 100, Some(0.5), 0.1), 0.0);
        let d = deviation_statistic(1.1, 100, None, 0.0);
        assert!((d - 0.1 * 100f64.powf(2.0 / 3.0) / 100f64.ln()).abs() < 1e-12);
        let d = deviation_statistic(1.1, 100, Some(0.5), 0.0);
        assert!((d - 0.1 * 10.0 / 100f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn norms_are_ordered_and_deterministic() {
        let spec = EnsembleSpec::wigner(EnsembleKind::RandomWigner, 20, None, 5).unwrap();
        let ens = Ensemble::random(spec.clone()).unwrap();
        let all = sample_norms(&ens, 0..12).unwrap();
        let tail = sample_norms(&ens, 6..12).unwrap();
        assert_eq!(&all[6..], &tail[..]);
        for (i, &x) in all.iter().enumerate() {
            let m = ens.sample(i as u64).unwrap().spectral_matrix();
            let full = spectral::spectral_norm(&m).unwrap();
            assert!((x - full).abs() < 1e-10);
        }
        let s = summarize_norms(&spec, &all, DEFAULT_EPSILON).unwrap();
        assert_eq!(s.deviation.len(), 12);
        assert!(s.min <= s.mean && s.mean <= s.max);
    }

    #[test]
    fn moment_identities() {
        let spec = EnsembleSpec::mp(EnsembleKind::RandomMp, 30, 12, None, 2).unwrap();
        let rows = moments_table(&Ensemble::random(spec).unwrap(), 8, 3).unwrap();
        assert!((rows[0].sample_mean - 1.0).abs() < 1e-12);
        assert!(rows[0].sample_std < 1e-12);
        assert_eq!(rows[1].law_moment, 1.4);
        assert!(rows[0].wigner_ratio.is_none());

        let spec = EnsembleSpec::wigner(EnsembleKind::RandomWigner, 25, None, 2).unwrap();
        let rows = moments_table(&Ensemble::random(spec).unwrap(), 8, 4).unwrap();
        assert!((rows[1].sample_mean - 0.25).abs() < 1e-14);
        assert_eq!(rows[3].law_moment, 0.125);
    }

    #[test]
    fn esd_report_shapes() {
        let spec = EnsembleSpec::wigner(EnsembleKind::RandomWigner, 2, None, 0).unwrap();
        let ens = Ensemble::random(spec).unwrap();
        let spectra = sample_spectra(&ens, 0..4).unwrap();
        let rep = esd_report(&spectra, &LimitLaw::Semicircle).unwrap();
        assert_eq!(rep.ks.len(), 4);
        // two atoms sit at least 1/4 away from any continuous cdf
        assert!(rep.ks.iter().all(|&k| k >= 0.25));
    }
}
