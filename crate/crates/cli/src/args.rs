use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memzoo_core::tolerance::TOLERANCE_ENV;

#[derive(Debug, Parser)]
#[command(name = "memzoo", version, about = "Build, classify and serialize multi-time quantum processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a named or randomly drawn process as a process file.
    Build(BuildArgs),
    /// Run every membership test on a process file and print the report.
    Classify(ClassifyArgs),
    /// Parse a process file, bring its labels into canonical order and write it back.
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(subcommand)]
    pub name: BuildName,
    /// Destination file (stdout when absent).
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    #[value(name = "M", alias = "m")]
    M,
    #[value(name = "MM", alias = "mm")]
    Mm,
    #[value(name = "CM", alias = "cm")]
    Cm,
    #[value(name = "SEP", alias = "sep")]
    Sep,
    #[value(name = "NS", alias = "ns")]
    Ns,
    #[value(name = "QM", alias = "qm")]
    Qm,
}

impl From<ClassArg> for memzoo_core::ProcessClass {
    fn from(c: ClassArg) -> Self {
        use memzoo_core::ProcessClass::*;
        match c {
            ClassArg::M => Memoryless,
            ClassArg::Mm => MixedMemoryless,
            ClassArg::Cm => ClassicalMemory,
            ClassArg::Sep => Separable,
            ClassArg::Ns => NonSignalling,
            ClassArg::Qm => Quantum,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum BuildName {
    /// Three-time process with classical memory that signals across a
    /// trace-and-prepare break.
    Fig3 {
        /// State of the system qubit, as a single-wire process file (default |0⟩⟨0|).
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Two-time separable process with no classical-memory realisation.
    Guerin,
    /// A state on the input wires with identities on the outputs.
    CommonCause {
        /// State on input wires 1^i … N^i.
        state: PathBuf,
        /// Output wire dimensions, comma separated (default: those of 1^i … N−1^i).
        #[arg(long, value_delimiter = ',')]
        output_dims: Option<Vec<usize>>,
    },
    /// Initial state followed by identity channels between all times.
    TrivialIdentity {
        #[arg(long)]
        times: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Initial state on 1^i (default |0⟩⟨0|).
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// A seed-deterministic random member of a class.
    Random {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long, default_value_t = 3)]
        times: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub file: PathBuf,
    /// Emit the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Base decision tolerance.
    #[arg(long, env = TOLERANCE_ENV)]
    pub tolerance: Option<f64>,
    /// Two probe states fed into the output wire at `--probe-time`.
    #[arg(long, num_args = 1)]
    pub probe: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub probe_time: usize,
    /// States fed into other output wires during the probe; the wire is
    /// chosen by the time of the state's label.
    #[arg(long)]
    pub fixed: Vec<PathBuf>,
    /// Largest accepted matrix side.
    #[arg(long, default_value_t = 512)]
    pub max_dim: usize,
    /// Class the process was built in (defaults to the file's `class_hint`).
    #[arg(long, value_enum, conflicts_with = "no_hint")]
    pub hint: Option<ClassArg>,
    /// Ignore any construction hint in the file.
    #[arg(long)]
    pub no_hint: bool,
    /// Also run the k-copy symmetric extension test across the 1^i cut.
    #[arg(long)]
    pub extension: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    pub file: PathBuf,
    /// Destination file (stdout when absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
