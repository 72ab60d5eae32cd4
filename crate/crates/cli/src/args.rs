use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hqc_rmrs::params::{self, ErrorProfile, HqcParams};
use hqc_rmrs::{Error, InnerBound, Result};

/// HQC with Reed-Muller/Reed-Solomon codes: scheme operations, failure-rate
/// analysis and Monte Carlo simulation.
#[derive(Debug, Parser)]
#[command(name = "hqc-rmrs", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Output file (JSON) or directory (CSV); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Master seed. Key generation and encryption draw a random seed when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for simulations (0 = one per core).
    #[arg(long, global = true, env = "HQC_RMRS_WORKERS", default_value_t = 0)]
    pub workers: usize,

    /// Treat warnings about insufficient trials as errors.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Simple,
    Improved,
}

impl From<BoundArg> for InnerBound {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Simple => InnerBound::Simple,
            BoundArg::Improved => InnerBound::Improved,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Bsc,
    Hqc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Show a parameter set, or all of them with --list.
    Params {
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        set: SetArgs,
    },
    /// Generate a key pair.
    Keygen {
        #[arg(long, default_value = params::HQC_RMRS_128)]
        set: String,
        #[arg(long, default_value = "pk.bin")]
        pk: PathBuf,
        #[arg(long, default_value = "sk.bin")]
        sk: PathBuf,
    },
    /// Encrypt a raw 32-byte message file.
    Encrypt {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        message: PathBuf,
    },
    /// Decrypt a ciphertext into a raw 32-byte message file.
    Decrypt {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ciphertext: PathBuf,
    },
    /// Analytic error model and failure-rate bounds.
    Analyze {
        #[command(subcommand)]
        what: Analysis,
    },
    /// Monte Carlo experiments.
    Simulate {
        #[command(subcommand)]
        what: Simulation,
    },
}

#[derive(Debug, Subcommand)]
pub enum Analysis {
    /// Exact p~ and p* with binomial tail quantiles.
    Pstar {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Inner-code failure bounds at p (default: p* of the set).
    RmBound {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        p: Option<String>,
    },
    /// Outer-code failure bound for one or more outer lengths.
    ConcatBound {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, value_enum, default_value_t = BoundArg::Improved)]
        bound: BoundArg,
        /// Inner failure probability; default is the inner bound at p.
        #[arg(long)]
        p_i: Option<String>,
        /// Channel probability for the inner bound; default p* of the set.
        #[arg(long)]
        p: Option<String>,
        /// Inclusive range of outer lengths, `a:b`.
        #[arg(long)]
        sweep: Option<Sweep>,
    },
    /// p* through both code layers for a parameter set.
    EndToEnd {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, value_enum, default_value_t = BoundArg::Improved)]
        bound: BoundArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum Simulation {
    /// Weight distribution of the truncated decryption error.
    Weights {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Error weight on a prefix of the code (one inner block by default).
    Restricted {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 256)]
        support_len: usize,
    },
    /// Inner-code decoding failures over a binary symmetric channel.
    RmDfr {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Channel probability; default p* of the set.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Concatenated-code failures over a BSC or real HQC errors.
    ConcatDfr {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = ChannelArg::Bsc)]
        channel: ChannelArg,
        /// BSC probability; default p* of the set.
        #[arg(long)]
        p: Option<f64>,
        /// Inclusive range of outer lengths, `a:b`.
        #[arg(long, default_value = "33:40")]
        sweep: Sweep,
    },
}

/// Inclusive integer range `a:b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sweep {
    pub start: usize,
    pub end: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }
}

impl std::str::FromStr for Sweep {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or("expected a:b")?;
        let start: usize = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
        let end: usize = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
        if start > end {
            return Err(format!("empty range {start}:{end}"));
        }
        Ok(Sweep { start, end })
    }
}

/// A named parameter set with optional inline overrides.
#[derive(Debug, Clone, Args)]
pub struct SetArgs {
    /// Parameter set: hqc-rmrs-128|192|256, sim-set-i, sim-set-ii.
    #[arg(long, default_value = params::HQC_RMRS_128)]
    pub set: String,
    /// Override the ring length n.
    #[arg(long)]
    pub n: Option<usize>,
    /// Override the secret weight w.
    #[arg(long)]
    pub w: Option<usize>,
    /// Override the weight w_r of r1, r2.
    #[arg(long)]
    pub w_r: Option<usize>,
    /// Override the weight w_e of e.
    #[arg(long)]
    pub w_e: Option<usize>,
    /// Override the inner duplication factor.
    #[arg(long)]
    pub multiplicity: Option<usize>,
    /// Override the outer (Reed-Solomon) length.
    #[arg(long)]
    pub outer_length: Option<usize>,
}

impl SetArgs {
    fn has_overrides(&self) -> bool {
        self.n.is_some()
            || self.w.is_some()
            || self.w_r.is_some()
            || self.w_e.is_some()
            || self.multiplicity.is_some()
            || self.outer_length.is_some()
    }

    /// Full scheme parameters; the base set must be a scheme instance.
    pub fn params(&self) -> Result<HqcParams> {
        let base = params::scheme(&self.set)?;
        if !self.has_overrides() {
            return Ok(base);
        }
        HqcParams::new(
            format!("{}+overrides", base.name),
            0,
            base.security_bits,
            self.n.unwrap_or(base.n),
            self.w.unwrap_or(base.w),
            self.w_r.unwrap_or(base.w_r),
            self.w_e.unwrap_or(base.w_e),
            self.multiplicity.unwrap_or(base.inner.multiplicity()),
            self.outer_length.unwrap_or(base.outer.length()),
        )
    }

    /// Error profile; also accepts the simulation-only sets.
    pub fn profile(&self) -> Result<ErrorProfile> {
        if params::scheme(&self.set).is_ok() {
            return self.params().map(|p| p.error_profile());
        }
        let base = params::profile(&self.set)?;
        if self.multiplicity.is_some() || self.outer_length.is_some() {
            return Err(Error::InvalidArgument(format!(
                "{} has no code to override; set n, w, w_r or w_e only",
                self.set
            )));
        }
        ErrorProfile::new(
            self.n.unwrap_or(base.n),
            self.w.unwrap_or(base.w),
            self.w_r.unwrap_or(base.w_r),
            self.w_e.unwrap_or(base.w_e),
            base.code_length,
        )
    }
}
