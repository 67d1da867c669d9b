use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvqkd::estimation::QuantileConvention;
use cvqkd::{Detection, Reconciliation};

use crate::output::Format;

/// Secret key rates for continuous-variable QKD.
///
/// Any flag of a subcommand can also be given in a TOML file passed with
/// `--config`, using the flag name without the leading dashes as the key
/// (`xi-ch = 0.02`, `trusted = true`, `t = [0.1, 0.5]`). Flags on the
/// command line take precedence over the file.
#[derive(Debug, Parser)]
#[command(name = "cvqkd", version)]
pub struct Cli {
    /// TOML file with default flag values for the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output file; `-` or absent writes to stdout.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Asymptotic key rates.
    #[command(subcommand)]
    Keyrate(Keyrate),
    /// Fit the channel from a CSV of input/output pairs.
    #[command(after_help = "Input columns: x,y or x_q,x_p,y_q,y_p.\n\
        Output columns: t_hat,sigma2_hat,t_min,sigma2_max,epsilon_pe,z,m,v_a,t_worst,xi_worst,mutual_info,holevo,key_rate.\n\
        With --qpsk-alpha: t_hat,xi_hat,c_hat,v_hat.")]
    Estimate(EstimateArgs),
    /// Finite-size key rate.
    #[command(after_help = "Output columns: n_total,m,n,mutual_info,holevo,delta,k_eps,epsilon,abort.")]
    FiniteSize(FiniteSizeArgs),
    /// Draw a seeded dataset.
    #[command(after_help = "Output columns: x,y (Gaussian modulation, homodyne) or x_q,x_p,y_q,y_p.")]
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
pub enum Keyrate {
    /// Gaussian modulation over a distance or transmittance grid.
    #[command(after_help = "Output columns: distance_km,t_ch,mutual_info,holevo,key_rate,abort.")]
    Gm(GmArgs),
    /// Discrete modulation over a pure-loss channel.
    #[command(after_help = "Output columns: t,mutual_info, then chi_direct,k_direct and/or \
        chi_extremality,k_extremality depending on --bound.")]
    Dm(DmArgs),
    /// Symmetric MDI rate in the large-modulation limit.
    #[command(after_help = "Output columns: xi,key_rate.")]
    Mdi(MdiArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Protocol {
    #[arg(long, default_value = "homodyne")]
    pub detection: Detection,
    #[arg(long, default_value = "reverse")]
    pub reconciliation: Reconciliation,
    /// Reconciliation efficiency.
    #[arg(long, default_value_t = 0.95)]
    pub beta: f64,
}

/// Either a transmittance grid or a distance grid, never both.
#[derive(Debug, Clone, Args)]
pub struct Grid {
    /// Transmittance values.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["distance", "d_min", "d_max", "loss_db_per_km"])]
    pub t: Vec<f64>,
    /// Distances in km.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["d_min", "d_max"])]
    pub distance: Vec<f64>,
    #[arg(long)]
    pub d_min: Option<f64>,
    #[arg(long)]
    pub d_max: Option<f64>,
    /// Number of grid points for --d-min/--d-max or --t-min/--t-max.
    #[arg(long)]
    pub points: Option<usize>,
    /// Fibre attenuation.
    #[arg(long)]
    pub loss_db_per_km: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GmArgs {
    #[command(flatten)]
    pub protocol: Protocol,
    /// Modulation variance in shot-noise units.
    #[arg(long, default_value_t = 4.0)]
    pub v_mod: f64,
    #[arg(long, default_value_t = 0.0)]
    pub xi_ch: f64,
    #[arg(long, default_value_t = 0.0)]
    pub xi_el: f64,
    /// Detector efficiency.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Attribute detector noise to the receiver.
    #[arg(long)]
    pub trusted: bool,
    #[command(flatten)]
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundChoice {
    Direct,
    Extremality,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct DmArgs {
    #[command(flatten)]
    pub protocol: Protocol,
    /// `bpsk`, `qpsk`, `qpsk-diagonal`, or a JSON file of points
    /// `{"re", "im", "p", "label"}`.
    #[arg(long, default_value = "bpsk")]
    pub constellation: String,
    /// Amplitude of the built-in constellations; rescales a file so its
    /// largest amplitude equals this value.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "both")]
    pub bound: BoundChoice,
    /// Excess noise; only the mutual information accepts a non-zero value.
    #[arg(long, default_value_t = 0.0)]
    pub xi: f64,
    #[arg(long, conflicts_with_all = ["t", "distance", "d_min", "d_max"])]
    pub t_min: Option<f64>,
    #[arg(long, conflicts_with_all = ["t", "distance", "d_min", "d_max"])]
    pub t_max: Option<f64>,
    #[command(flatten)]
    pub grid: Grid,
}

#[derive(Debug, Clone, Args)]
pub struct MdiArgs {
    /// Excess noise values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// CSV file; `-` reads stdin.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub epsilon_pe: f64,
    #[arg(long, default_value = "paper")]
    pub quantile: QuantileConvention,
    /// Multiplies every input value before fitting.
    #[arg(long, default_value_t = 1.0)]
    pub x_scale: f64,
    /// Use the QPSK moment estimator with this amplitude.
    #[arg(long)]
    pub qpsk_alpha: Option<f64>,
    #[command(flatten)]
    pub protocol: Protocol,
}

#[derive(Debug, Clone, Args)]
pub struct FiniteSizeArgs {
    /// Total symbols; several values give a sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_total: Vec<u64>,
    /// Symbols used for parameter estimation.
    #[arg(long)]
    pub m: u64,
    /// Discretisation bits.
    #[arg(long, default_value_t = 5)]
    pub d: u32,
    #[arg(long, default_value_t = 0.95)]
    pub p_ec: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub eps_bar: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub eps_h: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub eps_cor: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub eps_pe: f64,
    #[arg(long, default_value_t = 0.95)]
    pub beta: f64,
    /// Mutual information; otherwise computed from --t and --xi.
    #[arg(long, requires = "holevo", conflicts_with_all = ["t", "xi"])]
    pub mutual_info: Option<f64>,
    /// Worst-case Holevo information.
    #[arg(long, requires = "mutual_info")]
    pub holevo: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long, default_value_t = 4.0)]
    pub v_mod: f64,
    #[arg(long, default_value = "homodyne")]
    pub detection: Detection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModulationKind {
    Gaussian,
    Qpsk,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub rounds: usize,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub modulation: ModulationKind,
    #[arg(long, default_value_t = 4.0)]
    pub v_mod: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, conflicts_with_all = ["distance", "loss_db_per_km"])]
    pub t: Option<f64>,
    #[arg(long)]
    pub distance: Option<f64>,
    #[arg(long)]
    pub loss_db_per_km: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub xi: f64,
    #[arg(long, default_value = "homodyne")]
    pub detection: Detection,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
