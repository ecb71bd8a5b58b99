//! Command-line definitions and value parsers.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwalk_core::lattice::FieldKind;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Two-phase quantum walk experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Position distribution after T steps, optionally rescaled with the weak-limit overlay.
    Evolve(EvolveArgs),
    /// Analytic time-averaged limit measure against empirical averages.
    Timeavg(TimeavgArgs),
    /// Stationary measures of the four eigenvalue branches.
    Stationary(StationaryArgs),
    /// Spectrum of the walk on the finite path.
    Spectrum(SpectrumArgs),
    /// Symmetry residuals, winding numbers and edge-state prediction.
    Topology(TopologyArgs),
    /// Isolated-eigenvalue drift under random symmetry-preserving coins.
    Perturb(PerturbArgs),
    /// Localization length over a grid of sigma.
    Locallength(LocallengthArgs),
    /// Cross-module invariant suite; exits with 3 on any failure.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    TwoPhase,
    OneDefect,
    Homogeneous,
}

impl FieldArg {
    pub fn kind(self) -> FieldKind {
        match self {
            FieldArg::TwoPhase => FieldKind::TwoPhase,
            FieldArg::OneDefect => FieldKind::OneDefect,
            FieldArg::Homogeneous => FieldKind::Homogeneous,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldArg::TwoPhase => "two-phase",
            FieldArg::OneDefect => "one-defect",
            FieldArg::Homogeneous => "homogeneous",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    /// Coin phase for x >= 0; plain radians or multiples of pi ("3/2pi", "pi/2").
    #[arg(long, value_parser = parse_angle, default_value = "3/2pi", allow_hyphen_values = true)]
    pub sigma_plus: f64,
    /// Coin phase for x <= -1.
    #[arg(long, value_parser = parse_angle, default_value = "1/2pi", allow_hyphen_values = true)]
    pub sigma_minus: f64,
}

/// Initial spinor `[a e^{i phi1}, b e^{i phi2}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitSpinor {
    pub a: f64,
    pub b: f64,
    pub phi1: f64,
    pub phi2: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub phases: PhaseArgs,
    /// a,b,phi1,phi2
    #[arg(long, value_parser = parse_init, default_value = "1,0,0,0", allow_hyphen_values = true)]
    pub init: InitSpinor,
    #[arg(long, default_value_t = 100)]
    pub steps: u64,
    #[arg(long, value_enum, default_value_t = FieldArg::TwoPhase)]
    pub field: FieldArg,
    /// Add x/T, T P(x) and the weak-limit density at x/T.
    #[arg(long)]
    pub rescaled: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TimeavgArgs {
    #[command(flatten)]
    pub phases: PhaseArgs,
    #[arg(long, value_parser = parse_init, default_value = "1,0,0,0", allow_hyphen_values = true)]
    pub init: InitSpinor,
    /// Horizons of the empirical averages.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub times: Vec<u64>,
    /// Half-width of the emitted window.
    #[arg(long, default_value_t = 20)]
    pub window: i64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub phases: PhaseArgs,
    /// Restrict to one branch index in 1..=4.
    #[arg(long)]
    pub branch: Option<u8>,
    /// Scale c^2 of the eigenvector.
    #[arg(long, default_value_t = 1.0)]
    pub c_squared: f64,
    #[arg(long, default_value_t = 20)]
    pub window: i64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub phases: PhaseArgs,
    /// Path half-size N; sites -N..N-1.
    #[arg(long, default_value_t = 100)]
    pub path_size: usize,
    #[arg(long, value_enum, default_value_t = FieldArg::TwoPhase)]
    pub field: FieldArg,
    /// Isolation threshold; defaults to ten level spacings.
    #[arg(long)]
    pub band_tol: Option<f64>,
    /// Samples per band arc in the band-curve rows.
    #[arg(long, default_value_t = 64)]
    pub band_samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TopologyArgs {
    #[command(flatten)]
    pub phases: PhaseArgs,
    /// Rotation angle for the reported winding numbers.
    #[arg(long, value_parser = parse_angle, default_value = "1/4pi", allow_hyphen_values = true)]
    pub theta: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub phases: PhaseArgs,
    #[arg(long, default_value_t = 100)]
    pub path_size: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_angle, default_value = "-1/4pi", allow_hyphen_values = true)]
    pub delta_min: f64,
    #[arg(long, value_parser = parse_angle, default_value = "1/4pi", allow_hyphen_values = true)]
    pub delta_max: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LocallengthArgs {
    /// Grid points over [-pi, pi].
    #[arg(long, default_value_t = 361)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Multiplies every tolerance; values below 1 tighten the suite.
    #[arg(long, default_value_t = 1.0)]
    pub tol_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Evolve(a) => &a.output,
            Command::Timeavg(a) => &a.output,
            Command::Stationary(a) => &a.output,
            Command::Spectrum(a) => &a.output,
            Command::Topology(a) => &a.output,
            Command::Perturb(a) => &a.output,
            Command::Locallength(a) => &a.output,
            Command::Validate(a) => &a.output,
        }
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let d: f64 = d.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            n / d
        }
        None => s.parse().map_err(|_| format!("{s:?} is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Radians, or a rational multiple of pi: `3/2pi`, `3pi/2`, `-pi/4`, `0.25pi`, `2*pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s
        .to_lowercase()
        .replace('π', "pi")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    if t.is_empty() {
        return Err("empty angle".into());
    }
    let Some(pos) = t.find("pi") else {
        return parse_number(&t);
    };
    let head = &t[..pos];
    let head = head.strip_suffix('*').unwrap_or(head);
    let tail = &t[pos + 2..];
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => parse_number(h)?,
    };
    let div = match tail {
        "" => 1.0,
        _ => {
            let d = tail
                .strip_prefix('/')
                .ok_or_else(|| format!("unexpected {tail:?} after pi in {s:?}"))?;
            let d = parse_number(d)?;
            if d == 0.0 {
                return Err(format!("zero divisor in {s:?}"));
            }
            d
        }
    };
    Ok(coef * PI / div)
}

pub fn parse_init(s: &str) -> Result<InitSpinor, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!(
            "expected a,b,phi1,phi2 (got {} fields)",
            parts.len()
        ));
    }
    Ok(InitSpinor {
        a: parse_number(parts[0])?,
        b: parse_number(parts[1])?,
        phi1: parse_angle(parts[2])?,
        phi2: parse_angle(parts[3])?,
    })
}
