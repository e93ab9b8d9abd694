use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "thetaquad",
    version,
    about = "θ-family quadrature rules, Peano kernel statistics and certified error bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the rule (optionally composite) and report value, true error and a bound
    #[command(allow_negative_numbers = true)]
    Integrate(IntegrateArgs),
    /// Compute an error certificate without integrating
    #[command(allow_negative_numbers = true)]
    Bound(BoundArgs),
    /// Closed-form Peano kernel statistics
    #[command(allow_negative_numbers = true)]
    Kernel(KernelArgs),
    /// Rule value, true error and every applicable bound over a θ grid
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Check that the sharp bound is attained by the extremal integrand
    #[command(allow_negative_numbers = true)]
    Sharpness(SharpnessArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Order, θ and interval.
#[derive(Debug, Args)]
pub struct RuleArgs {
    /// Remainder order n ≥ 1
    #[arg(long)]
    pub n: usize,
    /// Blend parameter θ ∈ [0, 1]
    #[arg(long, conflicts_with = "rule", required_unless_present = "rule")]
    pub theta: Option<f64>,
    /// Named rule instead of θ: midpoint, trapezoid, simpson, averaged
    #[arg(long)]
    pub rule: Option<String>,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundChoice {
    /// max|G_n| · ‖f^(n)‖₁
    L1,
    /// ‖G_n‖₂ · ‖f^(n)‖₂
    L2,
    /// ∫|G_n| · ‖f^(n)‖∞
    Linf,
    /// Two-sided band; odd n directly, even n via the tighter one-sided perturbed bound
    Band,
    /// Lower band edge plus endpoint rate
    BandLower,
    /// Upper band edge plus endpoint rate
    BandUpper,
    /// Variance functional σ(f^(n))
    Sharp,
}

/// Certificate choice and the norm or band values it consumes. Values not
/// given are taken from the builtin integrand's exact norms when one is named.
#[derive(Debug, Args)]
pub struct CertificateArgs {
    #[arg(long, value_enum)]
    pub bound: Option<BoundChoice>,
    /// ‖f^(n)‖₁
    #[arg(long)]
    pub l1: Option<f64>,
    /// ‖f^(n)‖₂
    #[arg(long)]
    pub l2: Option<f64>,
    /// ‖f^(n)‖∞
    #[arg(long)]
    pub linf: Option<f64>,
    /// Lower band edge γ ≤ f^(n)
    #[arg(long, visible_alias = "gamma")]
    pub lower: Option<f64>,
    /// Upper band edge f^(n) ≤ Γ
    #[arg(long)]
    pub upper: Option<f64>,
    /// (f^(n-1)(b) - f^(n-1)(a))/(b-a)
    #[arg(long)]
    pub rate: Option<f64>,
    /// σ(f^(n)) = ‖f^(n)‖₂² - (∫f^(n))²/(b-a)
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    /// exp, sin, sin:<ω>, runge or poly:<c0>,<c1>,...
    #[arg(long)]
    pub f: String,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, default_value_t = 1)]
    pub panels: usize,
    /// Add the even-order perturbation term to every panel
    #[arg(long)]
    pub perturbed: bool,
    #[command(flatten)]
    pub cert: CertificateArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Builtin integrand supplying exact norms for values not given as flags
    #[arg(long)]
    pub f: Option<String>,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[command(flatten)]
    pub cert: CertificateArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Add brute-force statistics from the piecewise polynomial kernel
    #[arg(long)]
    pub brute_force: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    /// start:step:end, inclusive
    #[arg(long, default_value = "0:0.1:1")]
    pub theta_grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SharpnessArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Also rebuild the extremal integrand and measure its true error (n ≤ 4)
    #[arg(long)]
    pub end_to_end: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}
