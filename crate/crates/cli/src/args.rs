use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hlm", version, about = "Numerical experiments with primes, exponential sums, Gowers norms and nilsequences")]
pub struct Cli {
    /// File of `key=value` lines; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output format (acceptance defaults to a text table).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed for every randomized path; echoed in the report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sieve μ, Λ and the primes up to N.
    Sieve(SieveArgs),
    /// Exponential sums E w(n) e(θn) of an arithmetic weight.
    Expsum(ExpsumArgs),
    /// Major/minor arc classification.
    Arcs(ArcsArgs),
    /// Type I and Type II bilinear sums of a twisted weight.
    Typesums(TypesumsArgs),
    /// Singular series of a linear system.
    Singular(SingularArgs),
    /// Prime solution counts: progressions or a general system.
    Count(CountArgs),
    /// Gowers U^k norms on Z/M.
    Gowers(GowersArgs),
    /// Heisenberg nilsequence orbits.
    Nilseq(NilseqArgs),
    /// Correlations of μ with nilsequences and linear phases.
    MobiusCorr(MobiusCorrArgs),
    /// Sets without linear bias but with many 4-term progressions.
    Obstruction(ObstructionArgs),
    /// Run the acceptance suite.
    Acceptance(AcceptanceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Weight {
    Vonmangoldt,
    Mobius,
    Primes,
}

#[derive(Args, Debug)]
pub struct SieveArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct ExpsumArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Weight::Vonmangoldt)]
    pub weights: Weight,
    /// Frequencies, comma separated; `a/q` is accepted.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    /// Report the oversampled-grid supremum instead.
    #[arg(long)]
    pub sup: bool,
    #[arg(long, default_value_t = 8)]
    pub oversample: usize,
}

#[derive(Args, Debug)]
pub struct ArcsArgs {
    #[arg(long)]
    pub n: u64,
    /// Major-arc level is (ln N)^A.
    #[arg(long = "a-exponent", default_value_t = 2.0)]
    pub exponent: f64,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Sweep θ = j/points, j < points.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct TypesumsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub w: usize,
    #[arg(long, value_parser = parse_real, default_value = "0", allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = Weight::Mobius)]
    pub weights: Weight,
}

#[derive(Args, Debug)]
pub struct SingularArgs {
    /// Rows separated by `;`, entries by `,`.
    #[arg(long, allow_hyphen_values = true)]
    pub system: String,
    #[arg(long = "p-max", default_value_t = 10_000)]
    pub p_max: u64,
    /// Include every local factor in the report.
    #[arg(long)]
    pub factors: bool,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long)]
    pub n: usize,
    /// Progression length.
    #[arg(long, conflicts_with = "system")]
    pub k: Option<usize>,
    /// General system instead of a progression.
    #[arg(long, allow_hyphen_values = true)]
    pub system: Option<String>,
    /// Λ-weighted average instead of a prime count.
    #[arg(long, requires = "k")]
    pub weighted: bool,
    /// Monte Carlo samples for a general system.
    #[arg(long, requires = "system")]
    pub samples: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GowersFunction {
    /// Uniform in the unit disc.
    Random,
    /// e(n²/M).
    Quadratic,
    /// μ(r + 1) at residue r.
    Mobius,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GowersMethod {
    Fft,
    Recursive,
    Bruteforce,
    MonteCarlo,
}

#[derive(Args, Debug)]
pub struct GowersArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = GowersMethod::Fft)]
    pub method: GowersMethod,
    #[arg(long, value_enum, default_value_t = GowersFunction::Random)]
    pub function: GowersFunction,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NilFunction {
    Constant,
    Vertical,
    Torus,
}

#[derive(Args, Debug)]
pub struct NilseqArgs {
    #[arg(long)]
    pub n: usize,
    /// Group element `alpha,beta,gamma`.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true, allow_hyphen_values = true)]
    pub g: Vec<f64>,
    #[arg(long, value_enum, default_value_t = NilFunction::Vertical)]
    pub function: NilFunction,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub m: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub m2: i64,
}

#[derive(Args, Debug)]
pub struct MobiusCorrArgs {
    #[arg(long)]
    pub n: usize,
    /// Extra linear phases e(θn).
    #[arg(long, value_delimiter = ',', value_parser = parse_real, allow_hyphen_values = true)]
    pub theta: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObstructionKind {
    A1,
    A2,
}

#[derive(Args, Debug)]
pub struct ObstructionArgs {
    #[arg(long, value_enum, default_value_t = ObstructionKind::A1)]
    pub kind: ObstructionKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Write members as CSV.
    #[arg(long, value_name = "PATH")]
    pub members: Option<PathBuf>,
    /// Write membership as a packed bitset.
    #[arg(long, value_name = "PATH")]
    pub bitset: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AcceptanceArgs {
    /// Groups or criterion numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
}

/// Decimal, `a/q`, or one of `sqrt2`, `sqrt3`, `pi`, `e`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let named = match s {
        "sqrt2" => Some(std::f64::consts::SQRT_2),
        "sqrt3" => Some(3f64.sqrt()),
        "pi" => Some(std::f64::consts::PI),
        "e" => Some(std::f64::consts::E),
        _ => None,
    };
    if let Some(v) = named {
        return Ok(v);
    }
    let v = if let Some((a, q)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if q == 0.0 {
            return Err("zero denominator".into());
        }
        a / q
    } else {
        s.parse().map_err(|_| format!("not a number: {s:?}"))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_real("-0.25").unwrap(), -0.25);
        assert_eq!(parse_real("sqrt2").unwrap(), std::f64::consts::SQRT_2);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("inf").is_err());
        assert!(parse_real("x").is_err());
    }

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["hlm", "count", "--k", "3", "--n", "20", "--seed", "5"]).unwrap();
        assert_eq!(cli.seed, 5);
        assert!(matches!(cli.command, Command::Count(CountArgs { k: Some(3), n: 20, .. })));
        let cli = Cli::try_parse_from(["hlm", "nilseq", "--n", "10", "--g", "0.1,-0.2,sqrt2"]).unwrap();
        match cli.command {
            Command::Nilseq(a) => assert_eq!(a.g, vec![0.1, -0.2, std::f64::consts::SQRT_2]),
            _ => unreachable!(),
        }
        assert!(Cli::try_parse_from(["hlm", "count", "--n", "20", "--k", "3", "--system", "1,-2,1"]).is_err());
        assert!(Cli::try_parse_from(["hlm", "frobnicate"]).is_err());
    }
}
