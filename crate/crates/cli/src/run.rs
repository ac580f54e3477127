//! Subcommand implementations.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::info;
use pseudospec::codes::{self, CodeSummary, CyclicCode};
use pseudospec::ensembles::{self, Ensemble, SignSample};
use pseudospec::experiment;
use pseudospec::gf2m::FieldParams;
use pseudospec::independence::{self, Mode};
use pseudospec::spectral;
use pseudospec::stats::Histogram;
use pseudospec::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CommandKind, ExperimentConfig, SampleFormat, Sidecar, SIDECAR};

/// Samples per checkpoint.
const CHECKPOINT: u64 = 1000;

/// Exhaustive minimum distance is reported up to this dimension.
const AUTO_MIN_DISTANCE_K: usize = 16;

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn small_min_distance(code: &CyclicCode) -> Result<Option<usize>> {
    if code.k() <= AUTO_MIN_DISTANCE_K {
        Ok(Some(codes::min_distance_exact(code)?))
    } else {
        Ok(None)
    }
}

#[derive(Serialize)]
struct TargetReport {
    k_target: usize,
    delta: u32,
    k: usize,
}

#[derive(Serialize)]
struct GenpolyReport {
    #[serde(flatten)]
    summary: CodeSummary,
    requested_delta: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_distance: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dual_min_distance: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<TargetReport>,
}

pub fn genpoly(m: u32, delta: u32, target_k: Option<usize>) -> Result<bool> {
    let field = FieldParams::new(m)?;
    let code = codes::bch_generator(&field, delta)?;
    let dual = codes::dual_code(&code)?;
    let target = match target_k {
        Some(k_target) => {
            let (delta, code) = codes::designed_distance_for_dimension(&field, k_target)?;
            Some(TargetReport {
                k_target,
                delta,
                k: code.k(),
            })
        }
        None => None,
    };
    print_json(&GenpolyReport {
        summary: CodeSummary::from(&dual),
        requested_delta: delta,
        min_distance: small_min_distance(&code)?,
        dual_min_distance: small_min_distance(dual.code())?,
        target,
    })?;
    Ok(true)
}

#[derive(Serialize)]
struct DualReport {
    #[serde(flatten)]
    summary: CodeSummary,
    check_polynomial_hex: pseudospec::gf2m::BinaryPolynomial,
    /// Every `r` coordinates of a uniform dual word are independent.
    guaranteed_r: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    words_written: Option<usize>,
}

pub fn dual(
    m: u32,
    delta: u32,
    count: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    let field = FieldParams::new(m)?;
    let code = codes::bch_generator(&field, delta)?;
    let dual = codes::dual_code(&code)?;
    let words_written = match (count, out) {
        (Some(count), Some(path)) => {
            let words = codes::sample_codewords(&dual, count, seed)?;
            let mut w = BufWriter::new(File::create(path)?);
            codes::write_codeword_batch(&mut w, dual.n(), &words)?;
            w.flush()?;
            Some(count)
        }
        (None, None) => None,
        _ => return Err(Error::InvalidInput("--count and --out go together".into())),
    };
    print_json(&DualReport {
        summary: CodeSummary::from(&dual),
        check_polynomial_hex: dual.check_polynomial().clone(),
        guaranteed_r: code.designed_distance().expect("BCH codes carry δ") - 1,
        words_written,
    })?;
    Ok(true)
}

pub fn verify_indep(
    m: u32,
    delta: u32,
    r: Option<usize>,
    mode: Mode,
    budget: usize,
    seed: u64,
) -> Result<bool> {
    let field = FieldParams::new(m)?;
    let code = codes::bch_generator(&field, delta)?;
    let dual = codes::dual_code(&code)?;
    let r = r.unwrap_or(code.designed_distance().expect("BCH codes carry δ") as usize - 1);
    let report = independence::verify_r_independence(&dual, r, mode, budget, seed)?;
    print_json(&report)?;
    Ok(report.passed())
}

pub fn replay(sidecar: &Path, out: Option<&Path>) -> Result<bool> {
    let side = Sidecar::read(sidecar)?;
    let dir = match out {
        Some(dir) => dir.to_path_buf(),
        None => sidecar
            .parent()
            .map_or_else(|| ".".into(), Path::to_path_buf),
    };
    side.config.validate()?;
    experiment(side.config, &dir, false)
}

pub fn experiment(config: ExperimentConfig, dir: &Path, resume: bool) -> Result<bool> {
    let (ensemble, code) = config.ensemble()?;
    fs::create_dir_all(dir)?;
    let mut sidecar = Sidecar::new(config.clone(), ensemble.spec().clone(), code);
    if resume {
        let previous = Sidecar::read(&dir.join(SIDECAR)).map_err(|e| {
            Error::InvalidInput(format!("cannot resume from {}: {e}", dir.display()))
        })?;
        if previous.config != config {
            return Err(Error::InvalidInput(
                "--resume with a different configuration".into(),
            ));
        }
        sidecar.completed = previous.completed.min(config.count);
    }
    sidecar.write(dir)?;
    match config.command {
        CommandKind::Sample => write_samples(&ensemble, &config, dir)?,
        CommandKind::Norms => norms(&ensemble, &config, dir, &mut sidecar)?,
        CommandKind::Esd => esd(&ensemble, &config, dir)?,
        CommandKind::Moments => moments(&ensemble, &config, dir)?,
    }
    sidecar.completed = config.count;
    sidecar.write(dir)?;
    Ok(true)
}

fn chunks(count: u64) -> impl Iterator<Item = std::ops::Range<u64>> {
    (0..count)
        .step_by(CHECKPOINT as usize)
        .map(move |s| s..(s + CHECKPOINT).min(count))
}

fn write_samples(ensemble: &Ensemble, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let mut packed = match config.format {
        SampleFormat::Packed => Some(BufWriter::new(File::create(dir.join("samples.psgn"))?)),
        SampleFormat::Csv => None,
    };
    for range in chunks(config.count) {
        let samples: Vec<SignSample> = range
            .clone()
            .into_par_iter()
            .map(|i| ensemble.sample(i))
            .collect::<Result<_>>()?;
        for (i, sample) in range.zip(&samples) {
            match packed.as_mut() {
                Some(w) => ensembles::write_packed(w, ensemble.spec(), sample)?,
                None => {
                    let mut w =
                        BufWriter::new(File::create(dir.join(format!("sample-{i:06}.csv")))?);
                    ensembles::write_csv(&mut w, sample)?;
                    w.flush()?;
                }
            }
        }
    }
    if let Some(mut w) = packed {
        w.flush()?;
    }
    Ok(())
}

/// Keeps the header and the first `keep` values of an existing norms file.
fn load_checkpoint(path: &Path, keep: u64) -> Result<Vec<f64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut values = Vec::new();
    for line in reader.lines().skip(1).take(keep as usize) {
        let line = line?;
        values.push(
            line.trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("corrupt checkpoint line {line:?}")))?,
        );
    }
    if values.len() as u64 != keep {
        return Err(Error::InvalidInput(format!(
            "checkpoint lists {} norms, sidecar says {keep}",
            values.len()
        )));
    }
    Ok(values)
}

fn write_lines(path: &Path, header: &str, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

fn write_histogram(path: &Path, h: &Histogram) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "center,density")?;
    for (c, d) in h.centers().zip(&h.density) {
        writeln!(w, "{c},{d}")?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

fn norms(
    ensemble: &Ensemble,
    config: &ExperimentConfig,
    dir: &Path,
    sidecar: &mut Sidecar,
) -> Result<()> {
    let path = dir.join("norms.csv");
    let mut values = if sidecar.completed > 0 {
        load_checkpoint(&path, sidecar.completed)?
    } else {
        Vec::new()
    };
    write_lines(&path, "norm", &values)?;
    let mut file = fs::OpenOptions::new().append(true).open(&path)?;
    let start = sidecar.completed;
    for range in chunks(config.count).filter(|r| r.end > start) {
        let range = range.start.max(start)..range.end;
        let batch = experiment::sample_norms(ensemble, range.clone())?;
        let mut text = String::new();
        for v in &batch {
            text.push_str(&format!("{v}\n"));
        }
        file.write_all(text.as_bytes())?;
        file.sync_data()?;
        values.extend(batch);
        sidecar.completed = range.end;
        sidecar.write(dir)?;
        info!("norms: {}/{} samples", range.end, config.count);
    }
    let summary = experiment::summarize_norms(ensemble.spec(), &values, config.epsilon)?;
    write_json(&dir.join("summary.json"), &summary)?;
    write_histogram(&dir.join("histogram.csv"), &summary.histogram)
}

fn esd(ensemble: &Ensemble, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let law = experiment::law_for(ensemble.spec())?;
    let mut spectra = Vec::with_capacity(config.count as usize);
    let mut w = BufWriter::new(File::create(dir.join("spectra.csv"))?);
    for range in chunks(config.count) {
        for s in experiment::sample_spectra(ensemble, range)? {
            spectral::write_spectrum_row(&mut w, &s)?;
            spectra.push(s);
        }
    }
    w.flush()?;
    let report = experiment::esd_report(&spectra, &law)?;
    write_json(&dir.join("ks.json"), &report)?;
    let pooled: Vec<f64> = spectra
        .iter()
        .flat_map(|s| s.eigenvalues().iter().copied())
        .collect();
    write_histogram(
        &dir.join("esd_histogram.csv"),
        &Histogram::freedman_diaconis(&pooled),
    )?;
    let mut w = BufWriter::new(File::create(dir.join("law.csv"))?);
    writeln!(w, "x,pdf,cdf")?;
    for (x, pdf, cdf) in law.curve(401) {
        writeln!(w, "{x},{pdf},{cdf}")?;
    }
    w.flush()?;
    Ok(())
}

fn moments(ensemble: &Ensemble, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let rows = experiment::moments_table(ensemble, config.count, config.s_max)?;
    let mut w = BufWriter::new(File::create(dir.join("moments.csv"))?);
    writeln!(
        w,
        "s,sample_mean,sample_std,std_error,law_moment,wigner_ratio"
    )?;
    for r in rows {
        let ratio = r.wigner_ratio.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{ratio}",
            r.s, r.sample_mean, r.sample_std, r.std_error, r.law_moment
        )?;
    }
    w.flush()?;
    Ok(())
}
