use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "weaklog",
    version,
    about = "Logarithmic vector fields, blowup charts and ε-scaled instability experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Flags shared by every command.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Comma-separated variable names, e.g. `x,y,z`.
    #[arg(long)]
    pub vars: Option<String>,
    /// Potential, e.g. `x^2+y^2`.
    #[arg(long = "U", allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Field components separated by commas, e.g. `x,2*y,1`.
    #[arg(long = "V", allow_hyphen_values = true)]
    pub v: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the report and any CSV artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Potential and kinetic metric for the dynamics commands.
#[derive(Args, Debug, Clone, Serialize)]
pub struct SystemArgs {
    /// Builtin potential instead of `--U`: `wintner` or `laloy`.
    #[arg(long)]
    pub builtin: Option<String>,
    /// `identity`, `diag:1,2,3`, `random[:SEED]`, `const:1,0;0,2` or `poly:1,0;0,1+x^2`.
    #[arg(long, default_value = "identity")]
    pub metric: String,
    /// `verlet` or `rk4`; default picks Verlet for constant metrics.
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact test: is V(U) = P·U with P polynomial?
    CheckLog {
        #[command(flatten)]
        common: Common,
    },
    /// Shell sampling of |V(U)/U| around a zero of U.
    CheckWeaklog {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// |V(U)/U| along a polynomial curve s ↦ γ(s).
    Witness {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        witness: WitnessArgs,
    },
    /// Total and strict transform of U in one blowup chart.
    Blowup {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        chart: ChartArgs,
    },
    /// Lift a field tangent to the center into the chart.
    Pullback {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        chart: ChartArgs,
    },
    /// Push a chart field (given in chart coordinates by `--V`) down.
    Pushout {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        chart: ChartArgs,
    },
    /// Run a blowup schedule and test the final pullback for monomial·unit form.
    Principalize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
    /// Integrate the Euler–Lagrange equations from (x0, v0).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        sim: SimulateArgs,
    },
    /// The ε-rescaled family started at a zero p of U with velocity V(p).
    EpsFamily {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Energy-shell bundles over a long horizon (finite-horizon trapping evidence).
    Stability {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        probe: StabilityArgs,
    },
    /// Run a registry example and compare against its expectations.
    Reproduce {
        #[command(flatten)]
        common: Common,
        /// Example id; see `--list`.
        id: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SamplerArgs {
    /// Base point on the zero locus (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 12)]
    pub scales: usize,
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    #[arg(long, default_value_t = 1.5)]
    pub growth_factor: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WitnessArgs {
    /// Curve components in the parameter, e.g. `s,s`.
    #[arg(long, allow_hyphen_values = true)]
    pub curve: String,
    #[arg(long, default_value = "s")]
    pub param: String,
    /// Required growth over the last five grid values.
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,
    /// Comma-separated parameter values (default 10^{-k/2}, k = 2..12).
    #[arg(long)]
    pub s_grid: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ChartArgs {
    /// Center variables, e.g. `x,y,z`.
    #[arg(long)]
    pub center: String,
    #[arg(long)]
    pub pivot: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScheduleArgs {
    /// Schedule file: one `blowup center=<vars> pivot=<var>` per line.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Box for the unit test, `lo:hi` applied to every chart variable.
    #[arg(long, default_value = "-1:1", allow_hyphen_values = true)]
    pub unit_box: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, allow_hyphen_values = true)]
    pub v0: String,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long = "T", default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Factor in front of U.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FamilyArgs {
    /// Start point, a zero of U (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Explicit ε list; default 2^-n for n = 0..=n-max.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub n_max: u32,
    /// Rescaled horizon τ.
    #[arg(long = "T", default_value_t = 2.0)]
    pub t_rescaled: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt_base: f64,
    #[arg(long, default_value_t = 0.5)]
    pub escape_radius: f64,
    /// Skip the step-halving rerun.
    #[arg(long)]
    pub no_halving: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StabilityArgs {
    /// Bundle start (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    #[arg(long, default_value = "1e-6")]
    pub energies: String,
    #[arg(long = "T", default_value_t = 1000.0)]
    pub t_long: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 8)]
    pub bundle: usize,
}
