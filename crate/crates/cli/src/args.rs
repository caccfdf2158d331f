use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "bht",
    version,
    about = "Hardy spaces of Dirichlet series: norms, means and bidisc constructions"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "BHT_THREADS")]
    pub threads: Option<usize>,

    /// Drop timestamps and timings so repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub reproducible: bool,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Flow,
    Mc,
    /// Grid ascent for p = inf.
    Grid,
}

/// Polynomial given as a file or inline as `n:re[:im],...`.
#[derive(Args, Debug, Clone, Serialize)]
pub struct PolyArgs {
    /// JSON array of {"n", "re", "im"}.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Inline coefficients, e.g. `1:1,2:0.5:-1`.
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Bohr lift of a Dirichlet polynomial.
    Lift {
        #[command(flatten)]
        #[serde(flatten)]
        poly: PolyArgs,
    },
    /// H^p norm.
    Norm {
        #[command(flatten)]
        #[serde(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Half-length of the averaging window (flow).
        #[arg(long = "T", default_value_t = 1e4)]
        #[serde(rename = "T")]
        t: f64,
        /// Monte Carlo samples.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Starting grid size for p = inf.
        #[arg(long, default_value_t = 4096)]
        grid: usize,
    },
    /// Vertical-line means (1/T) int_0^T |f(sigma + it)|^p dt.
    Means {
        #[command(flatten)]
        #[serde(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long = "T", value_delimiter = ',', required = true)]
        #[serde(rename = "T")]
        t: Vec<f64>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Carlson identity with rigorous cross-term bounds.
    Carlson {
        #[command(flatten)]
        #[serde(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long = "T", value_delimiter = ',', default_value = "100")]
        #[serde(rename = "T")]
        t: Vec<f64>,
    },
    /// Carlson identity on the critical line sigma = 1/2.
    Pmeans {
        #[command(flatten)]
        #[serde(flatten)]
        poly: PolyArgs,
        #[arg(long = "T", value_delimiter = ',', default_value = "100")]
        #[serde(rename = "T")]
        t: Vec<f64>,
    },
    /// Embedding ratio on the critical line, or a search for large ratios.
    Embed {
        #[command(flatten)]
        #[serde(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        search: bool,
        /// Support length for the search.
        #[arg(long, default_value_t = 16)]
        n: u64,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Monte Carlo samples for non-even denominators.
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
    },
    /// Large-values ratio on [0, T].
    Montgomery {
        #[command(flatten)]
        #[serde(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long = "T", default_value_t = 100.0)]
        #[serde(rename = "T")]
        t: f64,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
    },
    /// Adjoint transform A g and the pairing check against f.
    Adjoint {
        #[command(flatten)]
        #[serde(flatten)]
        poly: PolyArgs,
        /// Samples of g on [0, 1] as a JSON array of {"re", "im"}; random if absent.
        #[arg(long)]
        g: Option<PathBuf>,
        /// Number of samples of a random g.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value_t = 32)]
        n: u64,
    },
    /// Small H^2 norm with modulus near 1 along a boundary segment.
    #[command(name = "rudin-demo2")]
    #[serde(rename = "rudin-demo2")]
    RudinDemo2 {
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long = "t-max", default_value_t = 10.0)]
        t_max: f64,
        #[arg(long = "J", default_value_t = 12)]
        pieces: usize,
        #[arg(long = "M", default_value_t = 256)]
        order: usize,
        #[arg(long = "D", default_value_t = 64)]
        degree: usize,
        #[arg(long = "K-init", default_value_t = 1.0)]
        k_init: f64,
        #[arg(long, default_value_t = 20)]
        doublings: u32,
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        #[arg(long = "trace-samples", default_value_t = 4000)]
        trace_samples: usize,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        /// Also write the trace as CSV here.
        #[arg(long = "trace-csv")]
        trace_csv: Option<PathBuf>,
    },
    /// Oscillating vertical-line means from alternating stage sets.
    #[command(name = "rudin-demo1")]
    #[serde(rename = "rudin-demo1")]
    RudinDemo1 {
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        stages: usize,
        #[arg(long = "M", default_value_t = 64)]
        order: usize,
        #[arg(long = "J", default_value_t = 4)]
        pieces: usize,
        #[arg(long = "K", default_value_t = 0.75)]
        k: f64,
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        #[arg(long = "t-limit", default_value_t = 200.0)]
        t_limit: f64,
        #[arg(long = "trace-csv")]
        trace_csv: Option<PathBuf>,
    },
    /// Radial limits along b_theta at points of random Kronecker orbits.
    Fatou {
        #[command(flatten)]
        #[serde(flatten)]
        poly: PolyArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        thetas: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        orbits: usize,
        #[arg(long = "t-samples", default_value_t = 8)]
        t_samples: usize,
        #[arg(long = "t-max", default_value_t = 100.0)]
        t_max: f64,
    },
    /// Box discrepancy of the Kronecker flow in d variables.
    Weyl {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "T", default_value_t = 1000.0)]
        #[serde(rename = "T")]
        t: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}
