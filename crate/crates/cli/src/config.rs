//! Experiment configuration and the `run.json` sidecar.

use std::fs;
use std::path::Path;

use pseudospec::codes::{self, CodeSummary, DualCode};
use pseudospec::ensembles::{columns_for_ratio, Ensemble, EnsembleKind, EnsembleSpec};
use pseudospec::gf2m::FieldParams;
use pseudospec::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SIDECAR: &str = "run.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Sample,
    Norms,
    Esd,
    Moments,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SampleFormat {
    /// One CSV file of ±1 entries per matrix.
    Csv,
    /// All matrices in one bit-packed file.
    Packed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub kind: EnsembleKind,
    pub m: Option<u32>,
    pub delta: Option<u32>,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: Option<usize>,
    pub gamma: Option<f64>,
    pub count: u64,
    pub seed: u64,
    pub epsilon: f64,
    pub s_max: u32,
    pub format: SampleFormat,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidInput("--count must be at least 1".into()));
        }
        if self.kind.is_pseudo() && (self.m.is_none() || self.delta.is_none()) {
            return Err(Error::InvalidInput(format!(
                "{} needs --m and --delta",
                self.kind
            )));
        }
        if !self.kind.is_wigner() && self.p.is_none() && self.gamma.is_none() {
            return Err(Error::InvalidInput(format!(
                "{} needs --p or --gamma",
                self.kind
            )));
        }
        if self.kind.is_wigner() && (self.p.is_some() || self.gamma.is_some()) {
            return Err(Error::InvalidInput(format!(
                "{} takes no --p or --gamma",
                self.kind
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput("--epsilon must be positive".into()));
        }
        if self.s_max == 0 {
            return Err(Error::InvalidInput("--s-max must be at least 1".into()));
        }
        Ok(())
    }

    /// The code, when the kind needs one.
    pub fn dual(&self) -> Result<Option<DualCode>> {
        match (self.kind.is_pseudo(), self.m, self.delta) {
            (true, Some(m), Some(delta)) => {
                let field = FieldParams::new(m)?;
                Ok(Some(codes::dual_code(&codes::bch_generator(
                    &field, delta,
                )?)?))
            }
            _ => Ok(None),
        }
    }

    pub fn ensemble(&self) -> Result<(Ensemble, Option<CodeSummary>)> {
        let dual = self.dual()?;
        // Pseudo kinds are (δ − 1)-wise independent; even δ was promoted.
        let r = dual
            .as_ref()
            .and_then(|d| d.base().designed_distance())
            .map(|delta| u64::from(delta) - 1);
        let spec = if self.kind.is_wigner() {
            EnsembleSpec::wigner(self.kind, self.n, r, self.seed)?
        } else {
            let p = match (self.p, self.gamma) {
                (Some(p), _) => p,
                (None, Some(g)) => columns_for_ratio(self.n, g)?,
                (None, None) => unreachable!("validated"),
            };
            EnsembleSpec::mp(self.kind, self.n, p, r, self.seed)?
        };
        match dual {
            Some(d) => {
                let summary = CodeSummary::from(&d);
                Ok((Ensemble::pseudo(spec, d)?, Some(summary)))
            }
            None => Ok((Ensemble::random(spec)?, None)),
        }
    }
}

/// Everything needed to replay a run, plus its checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub spec: EnsembleSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub code: Option<CodeSummary>,
    /// Samples whose results are on disk.
    pub completed: u64,
}

impl Sidecar {
    pub fn new(config: ExperimentConfig, spec: EnsembleSpec, code: Option<CodeSummary>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: pseudospec::VERSION.into(),
            config,
            spec,
            code,
            completed: 0,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    /// Writes through a temporary file so a crash never leaves a torn
    /// sidecar behind.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let tmp = dir.join(format!("{SIDECAR}.tmp"));
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(&tmp, bytes)?;
        fs::rename(tmp, dir.join(SIDECAR))?;
        Ok(())
    }
}
