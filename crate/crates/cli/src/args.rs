use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vmw::HalfInt;

/// Accepts `7/2`, `3.5` and `3`.
pub fn half_int(s: &str) -> Result<HalfInt, String> {
    s.parse::<HalfInt>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "vmw", version, about = "Vector-model angular momentum toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Clebsch-Gordan coefficients along a j3 sweep, exact and semiclassical.
    Cg(CgArgs),
    /// Wigner small-d elements along a theta or m' sweep.
    Wigd(WigdArgs),
    /// Particle or Q density of a Gaussian wavepacket; optional width report.
    Wavepacket(WavepacketArgs),
    /// Larmor precession trace of the j and particle lobes.
    Precess(PrecessArgs),
    /// Transverse m-state correlation by vector model, closed form and exact operator.
    Correlate(CorrelateArgs),
    /// Run an acceptance suite and print one line per check.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CgSweep {
    J3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CgMethod {
    Exact,
    /// Classical average of the squared coefficient.
    Avg,
    Allowed,
    Forbidden,
    Wkb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum AvgPrefactor {
    /// `2 (j3 + 1)`
    #[default]
    JPlusOne,
    /// `2 j3 + 1`
    TwoJPlusOne,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CgArgs {
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub j1: HalfInt,
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub m1: HalfInt,
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub j2: HalfInt,
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub m2: HalfInt,
    /// Must equal m1 + m2 when given.
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub m3: Option<HalfInt>,
    #[arg(long, value_enum, default_value = "j3")]
    pub sweep: CgSweep,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact,wkb")]
    pub methods: Vec<CgMethod>,
    #[arg(long, value_enum, default_value = "j-plus-one")]
    pub avg_prefactor: AvgPrefactor,
    /// CSV path; a manifest is written beside it. Stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WigdSweep {
    Theta,
    Mp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WigdMethod {
    Exact,
    Wkb,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct WigdArgs {
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub j: HalfInt,
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub m: HalfInt,
    /// Fixed m' for a theta sweep.
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub mp: Option<HalfInt>,
    /// Fixed angle for an m' sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, value_enum, default_value = "theta")]
    pub sweep: WigdSweep,
    /// Interior theta nodes `pi k / (steps + 1)`.
    #[arg(long, default_value_t = 179)]
    pub steps: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact,wkb")]
    pub methods: Vec<WigdMethod>,
    /// Read input angles in degrees.
    #[arg(long)]
    pub degrees: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    Particle,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Widths,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct PacketArgs {
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub j: HalfInt,
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub m: HalfInt,
    #[arg(long, allow_hyphen_values = true)]
    pub dj: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub dm: f64,
    /// Window half-width in units of the widths.
    #[arg(long)]
    pub j_cut: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct WavepacketArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    #[arg(long, value_enum, default_value = "particle")]
    pub distribution: Distribution,
    /// Print a JSON report instead of the density (the density still goes to --out).
    #[arg(long, value_enum)]
    pub report: Option<Report>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct PrecessArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    /// Larmor rate, radians per unit time.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Number of time samples from 0 to t-max inclusive.
    #[arg(long, default_value_t = 13)]
    pub samples: usize,
    /// Last sample time; one Larmor period by default.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Field polar angle; the packet's corrected orientation by default.
    #[arg(long, allow_hyphen_values = true, requires = "field_phi")]
    pub field_theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "field_theta")]
    pub field_phi: Option<f64>,
    #[arg(long)]
    pub degrees: bool,
    /// Trace CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for one particle-density CSV per sample.
    #[arg(long)]
    pub frames_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CorrelateArgs {
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub j1: HalfInt,
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub j2: HalfInt,
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub j3: HalfInt,
    #[arg(long, value_parser = half_int, allow_hyphen_values = true)]
    pub m3: HalfInt,
    /// Nodes of the delocalization-angle quadrature.
    #[arg(long, default_value_t = vmw::correlations::MIN_QUADRATURE)]
    pub quadrature: usize,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct VerifyArgs {
    /// Criterion id (A1..A12), its name (e.g. appendix-a), or `all`.
    pub suite: String,
}
