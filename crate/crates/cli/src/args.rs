use clap::{Args, Parser, Subcommand, ValueEnum};

use ctq_core::state::DEFAULT_ZERO_TOL;

#[derive(Debug, Parser)]
#[command(name = "ctq", version, about = "Optimal controller measurements for controlled teleportation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Polar grid points for the numeric optimizer.
    #[arg(long, global = true, default_value_t = 721)]
    pub grid_theta: usize,
    /// Azimuthal grid points for the numeric optimizer.
    #[arg(long, global = true, default_value_t = 1441)]
    pub grid_phi: usize,
    /// Seed for randomized suites; overrides CTQ_SEED.
    #[arg(long, global = true, env = "CTQ_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Worker threads for grid evaluation (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Rescale amplitudes to unit norm instead of rejecting them.
    #[arg(long, global = true)]
    pub normalize: bool,
    /// Amplitudes at or below this count as zero when classifying.
    #[arg(long, global = true, default_value_t = DEFAULT_ZERO_TOL)]
    pub zero_tol: f64,
    /// Largest accepted |analytic - numeric| before exit code 4.
    #[arg(long, global = true, default_value_t = 1e-5)]
    pub cross_tol: f64,
    /// Output format; `pmax` defaults to json, `sweep` to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Analytic,
    Numeric,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the structural case of a state.
    Classify {
        /// Inline JSON `{"a": [..5..], "mu": x}` or a path to such a file.
        state: String,
    },
    /// Maximal success probability over controller bases.
    Pmax {
        state: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
    },
    /// Tabulate the optimum over a one- or two-parameter family.
    Sweep {
        /// e.g. `A:a0sq=0.1..0.9/9` or `C12:a0sq=0.1..0.4/4,a4sq=0.3`.
        family: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
    },
    /// Run the full protocol in one controller basis.
    Simulate {
        state: String,
        /// `{"theta": x, "phi": y}`; defaults to an optimal basis.
        #[arg(long)]
        basis: Option<String>,
        /// `{"alpha": [re, im], "beta": [re, im]}`; defaults to |+>.
        #[arg(long)]
        message: Option<String>,
    },
    /// Run the invariant battery and report a JSON summary.
    Verify {
        /// Random samples per pointwise suite.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Random states per case for the optimizer agreement suite.
        #[arg(long, default_value_t = 5)]
        states_per_case: usize,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Perturb one coefficient of the expanded polynomial for P.
    PExpanded,
}
