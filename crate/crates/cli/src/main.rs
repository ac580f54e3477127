//! `pseudospec`: build dual BCH codes, sample pseudo-random matrix
//! ensembles and compare their spectra with the limit laws.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 invalid input,
//! 3 numerical failure.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pseudospec::ensembles::EnsembleKind;
use pseudospec::independence::Mode;
use pseudospec::Error;

use crate::config::SampleFormat;

#[derive(Parser, Debug)]
#[command(
    name = "pseudospec",
    version,
    about = "Pseudo-Wigner and pseudo-MP ensembles from dual BCH codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the BCH generator polynomial and its dual as JSON.
    Genpoly {
        #[command(flatten)]
        code: CodeArgs,
        /// Also report the smallest odd δ whose code has dimension ≤ this.
        #[arg(long)]
        target_k: Option<usize>,
    },
    /// Print the dual code as JSON; optionally write sampled codewords.
    Dual {
        #[command(flatten)]
        code: CodeArgs,
        /// Number of dual codewords to write to `--out` in batch format.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write sampled sign matrices.
    Sample {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, value_enum, default_value_t = SampleFormat::Csv)]
        format: SampleFormat,
    },
    /// Spectral norms of sampled matrices, with summary and histogram.
    Norms {
        #[command(flatten)]
        ens: EnsembleArgs,
        /// Exponent ε in the log^{1+ε} N normalization.
        #[arg(long, default_value_t = pseudospec::experiment::DEFAULT_EPSILON)]
        epsilon: f64,
        /// Continue an interrupted run in `--out` from its last checkpoint.
        #[arg(long)]
        resume: bool,
    },
    /// Eigenvalues of sampled matrices and KS distances to the limit law.
    Esd {
        #[command(flatten)]
        ens: EnsembleArgs,
    },
    /// Sample trace moments next to the limit-law moments.
    Moments {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, default_value_t = 8)]
        s_max: u32,
    },
    /// Check r-wise independence of the dual code; exit 1 on failure.
    VerifyIndep {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(value_name = "R")]
        r_pos: Option<usize>,
        /// Independence level; defaults to δ − 1.
        #[arg(long, conflicts_with = "r_pos")]
        r: Option<usize>,
        #[arg(long, default_value = "exact")]
        mode: Mode,
        /// Maximum number of coordinate subsets to test.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rerun an experiment from its `run.json` sidecar.
    Replay {
        sidecar: PathBuf,
        /// Output directory; defaults to the sidecar's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Code parameters, positional or as flags.
#[derive(Args, Debug)]
struct CodeArgs {
    #[arg(value_name = "M", required_unless_present = "m")]
    m_pos: Option<u32>,
    #[arg(value_name = "DELTA", required_unless_present = "delta")]
    delta_pos: Option<u32>,
    /// Extension degree, n = 2^m − 1.
    #[arg(long, conflicts_with = "m_pos")]
    m: Option<u32>,
    /// Designed distance.
    #[arg(long, conflicts_with = "delta_pos")]
    delta: Option<u32>,
}

impl CodeArgs {
    fn resolve(&self) -> (u32, u32) {
        (
            self.m.or(self.m_pos).expect("clap enforces m"),
            self.delta.or(self.delta_pos).expect("clap enforces delta"),
        )
    }
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    #[arg(long, default_value = "pseudo-wigner")]
    kind: EnsembleKind,
    /// Extension degree (pseudo kinds).
    #[arg(long)]
    m: Option<u32>,
    /// Designed distance (pseudo kinds).
    #[arg(long)]
    delta: Option<u32>,
    /// Matrix order (Wigner) or row count (MP).
    #[arg(long = "N", visible_alias = "n")]
    n: usize,
    /// Column count (MP kinds).
    #[arg(long, conflicts_with = "gamma")]
    p: Option<usize>,
    /// Ratio p/N (MP kinds); p = ⌊γN⌋.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NumericalFailure(_) | Error::ArithmeticCorruption(_) => 3,
        _ => 2,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("PSEUDOSPEC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::InvalidInput(format!(
            "PSEUDOSPEC_THREADS={value:?} is not a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> pseudospec::Result<bool> {
    match cli.command {
        Command::Genpoly { code, target_k } => {
            let (m, delta) = code.resolve();
            run::genpoly(m, delta, target_k)
        }
        Command::Dual {
            code,
            count,
            seed,
            out,
        } => {
            let (m, delta) = code.resolve();
            run::dual(m, delta, count, seed, out.as_deref())
        }
        Command::VerifyIndep {
            code,
            r_pos,
            r,
            mode,
            budget,
            seed,
        } => {
            let (m, delta) = code.resolve();
            run::verify_indep(m, delta, r.or(r_pos), mode, budget, seed)
        }
        Command::Sample { ens, format } => run::experiment(
            ens.to_config(config::CommandKind::Sample, |c| c.format = format)?,
            &ens.out,
            false,
        ),
        Command::Norms {
            ens,
            epsilon,
            resume,
        } => run::experiment(
            ens.to_config(config::CommandKind::Norms, |c| c.epsilon = epsilon)?,
            &ens.out,
            resume,
        ),
        Command::Esd { ens } => run::experiment(
            ens.to_config(config::CommandKind::Esd, |_| {})?,
            &ens.out,
            false,
        ),
        Command::Moments { ens, s_max } => run::experiment(
            ens.to_config(config::CommandKind::Moments, |c| c.s_max = s_max)?,
            &ens.out,
            false,
        ),
        Command::Replay { sidecar, out } => run::replay(&sidecar, out.as_deref()),
    }
}

impl EnsembleArgs {
    fn to_config(
        &self,
        command: config::CommandKind,
        tweak: impl FnOnce(&mut config::ExperimentConfig),
    ) -> pseudospec::Result<config::ExperimentConfig> {
        let mut c = config::ExperimentConfig {
            command,
            kind: self.kind,
            m: self.m,
            delta: self.delta,
            n: self.n,
            p: self.p,
            gamma: self.gamma,
            count: self.count,
            seed: self.seed,
            epsilon: pseudospec::experiment::DEFAULT_EPSILON,
            s_max: 8,
            format: SampleFormat::Csv,
        };
        tweak(&mut c);
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| dispatch(cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
