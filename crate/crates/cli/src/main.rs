mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "sepmap", version, about = "Separatrix maps of forced homoclinic and heteroclinic systems")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute global-map coefficients and write them as JSON
    BuildMap(BuildMapArgs),
    /// Iterate a separatrix map from a coefficient file
    Iterate(IterateArgs),
    /// Maximal Lyapunov exponents over a grid of initial conditions
    MegnoScan(MegnoArgs),
    /// Fit Gamma, log-normal and normal laws to a CSV column
    Fit(FitArgs),
    /// Simulate the noisy continuous-time system and record section crossings
    SdeRun(SdeArgs),
    /// Travel-time error as a function of the section radius
    CalibrateR(CalibrateArgs),
    /// Compare the variational and Melnikov global maps
    CompareMaps(CompareArgs),
    /// Diophantine constant of the second and third forcing frequencies
    Diophantine(DiophantineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Variational,
    Melnikov,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct BuildMapArgs {
    #[arg(long, value_enum, default_value = "variational")]
    pub route: Route,
    /// Output file name inside the output directory
    #[arg(long, default_value = "coefficients.json")]
    pub file: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HbrForm {
    Reduced,
    Full,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct IterateArgs {
    /// Coefficient file written by build-map
    #[arg(long)]
    pub coeffs: PathBuf,
    /// Initial section coordinate (u, h or x); defaults to 0 (Duffing) or -0.1 (network)
    #[arg(long, allow_hyphen_values = true)]
    pub w0: Option<f64>,
    /// Initial q of the network map
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub q0: f64,
    /// Initial angle shared by all frequencies
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta0: f64,
    /// Initial loop of the Duffing map
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sigma0: f64,
    /// Iterate the Duffing map in normalized variables
    #[arg(long)]
    pub scaled: bool,
    #[arg(long, value_enum, default_value = "reduced")]
    pub hbr_form: HbrForm,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct MegnoArgs {
    #[arg(long)]
    pub coeffs: PathBuf,
    /// Cells along the state axis
    #[arg(long, default_value_t = 200)]
    pub n_w: usize,
    /// Cells along the angle axis
    #[arg(long, default_value_t = 200)]
    pub n_theta: usize,
    #[arg(long, default_value_t = 1000)]
    pub transient: usize,
    #[arg(long, default_value_t = sepmap::chaos::DEFAULT_CHAOS_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "reduced")]
    pub hbr_form: HbrForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Gamma,
    Lognormal,
    Normal,
    All,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct FitArgs {
    /// CSV written by iterate or sde-run
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "t_dom")]
    pub column: String,
    #[arg(long, value_enum, default_value = "all")]
    pub family: FamilyArg,
    /// Histogram bin count; Freedman-Diaconis when absent
    #[arg(long)]
    pub bins: Option<usize>,
    /// Points of the fitted-density overlay
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    /// Leading samples to discard
    #[arg(long, default_value_t = 0)]
    pub skip: usize,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct SdeArgs {
    /// Number of section crossings to record
    #[arg(long)]
    pub crossings: Option<usize>,
    /// Noise strength
    #[arg(long)]
    pub noise: Option<f64>,
    /// Euler-Maruyama step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Random stream index
    #[arg(long, default_value_t = 0)]
    pub path: u64,
    /// Initial point (p, x, y) of the network model
    #[arg(long, value_delimiter = ',', num_args = 3, allow_hyphen_values = true)]
    pub start: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct CalibrateArgs {
    /// Reference radius
    #[arg(long, default_value_t = 0.001)]
    pub r0: f64,
    #[arg(long, default_value_t = 0.01)]
    pub r_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub r_max: f64,
    #[arg(long, default_value_t = 50)]
    pub r_steps: usize,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct CompareArgs {
    /// Duffing damping values
    #[arg(long, value_delimiter = ',', default_value = "0,0.008,0.08")]
    pub gammas: Vec<f64>,
    /// Duffing section radii
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
    pub radii: Vec<f64>,
    /// Network rates I = I_x = I_y
    #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1")]
    pub i_values: Vec<f64>,
    /// Points per angle of the torus grid for the L1 gap
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct DiophantineArgs {
    /// Largest |k1|, |k2|
    #[arg(long = "K", alias = "k", default_value_t = 4096)]
    pub k: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.overrides, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
