use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "flagcalc", version, about = "Exact flag-algebra calculus with step-kernel evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for sampling and kernel panels.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Largest model size for enumeration and canonical forms.
    #[arg(long, global = true)]
    pub max_size: Option<usize>,
    /// Number of kernels in the verification panel.
    #[arg(long, global = true, default_value_t = 50)]
    pub panel: usize,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true, visible_alias = "report")]
    pub out: Option<PathBuf>,
    /// Run without the thread pool.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate models of a theory up to isomorphism.
    Models(ModelsArgs),
    /// Flag bases and density coefficients.
    #[command(subcommand)]
    Flags(FlagsCommand),
    /// Operations on algebra elements.
    #[command(subcommand)]
    Algebra(AlgebraCommand),
    /// Step-kernel measures.
    #[command(subcommand)]
    Measure(MeasureCommand),
    /// Identity checks and certificates.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Run the built-in acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct TheoryArg {
    /// Theory file, or one of: graphs, digraphs, triangle-free, 3-graphs.
    #[arg(long)]
    pub theory: Option<String>,
}

#[derive(Debug, Args)]
pub struct ModelsArgs {
    #[command(flatten)]
    pub theory: TheoryArg,
    #[arg(long)]
    pub size: usize,
}

#[derive(Debug, Subcommand)]
pub enum FlagsCommand {
    /// List the flags of a type at a level.
    Enumerate {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        level: usize,
        /// Type file (a model); empty type when omitted.
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
    /// Density of one flag in another.
    Density {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        small: PathBuf,
        #[arg(long)]
        big: PathBuf,
    },
    /// Joint density of two disjoint flags in a third.
    Joint {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        f1: PathBuf,
        #[arg(long)]
        f2: PathBuf,
        #[arg(long)]
        big: PathBuf,
    },
    /// Density of a flag in a host model, exactly or by sampling vertex sets.
    Empirical {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        flag: PathBuf,
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AlgebraCommand {
    /// Rewrite an element at a higher level.
    Lift {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        level: usize,
    },
    /// Product of two elements.
    Mul {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Averaging operator down to the first `root` type vertices.
    Avg {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        element: PathBuf,
        #[arg(long, default_value_t = 0)]
        root: usize,
    },
    /// Whether an element is zero.
    Iszero {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        element: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RootArgs {
    /// Comma-separated root type names for a rooted evaluation.
    #[arg(long, value_delimiter = ',')]
    pub root_types: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum MeasureCommand {
    /// Exact value of a flag or element.
    Eval {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long, conflicts_with = "element", required_unless_present = "element")]
        flag: Option<PathBuf>,
        #[arg(long)]
        element: Option<PathBuf>,
        #[command(flatten)]
        root: RootArgs,
    },
    /// Draw a model.
    Sample {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Monte-Carlo flag density over sampled models.
    Mc {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        flag: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        root: RootArgs,
    },
    /// Decompose the kernel conditioned on a type.
    Ensemble {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
    },
    /// Drop trailing root vertices of a rooted kernel.
    Restrict {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[command(flatten)]
        root: RootArgs,
        #[arg(long)]
        keep: usize,
    },
    /// Check sums, equivariance and theory support.
    Validate {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        max_check: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Flags evaluate like their lifts on the kernel panel.
    ChainRule {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        level: usize,
    },
    /// Evaluation is multiplicative.
    Mult {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        root: RootArgs,
    },
    /// Conditional Cauchy-Schwarz inequality.
    Cs {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        f: PathBuf,
    },
    /// Averaging in two steps equals averaging in one.
    Iterated {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        k1: usize,
        #[arg(long)]
        k2: usize,
    },
    /// Products of densities in sampled models approach the flag product.
    Asymptotic {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        f1: PathBuf,
        #[arg(long)]
        f2: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200, 400])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 10.0)]
        constant: f64,
        #[command(flatten)]
        root: RootArgs,
    },
    /// Check a sum-of-squares certificate.
    Cert {
        #[command(flatten)]
        theory: TheoryArg,
        #[arg(long)]
        cert: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Small,
    Full,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, value_enum, default_value_t = ScaleArg::Small)]
    pub scale: ScaleArg,
}
