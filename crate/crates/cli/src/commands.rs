use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use hlm_core::arith::ArithTable;
use hlm_core::counting::{ap_count_report, generic_count, weighted_ap_report, CountMode, CountReport};
use hlm_core::fourier::{arc_sweep, classify_arc, exp_sum, sup_exp_sum, type1_max, type2_max, ArcClassification, ArcVerdict};
use hlm_core::gowers::{uk_report, NormMethod};
use hlm_core::linsys::{singular_series, LinearSystem};
use hlm_core::nilseq::{closed_form_orbit, correlate, iterate_orbit, orbit_csv, standard_battery, HeisenbergElement, HeisenbergPoint, TestFunction};
use hlm_core::numeric::e;
use hlm_core::obstruction::{report as obstruction_report, write_bitset, ObstructionSet, SetKind};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::acceptance::{self, Suite};
use crate::args::*;
use crate::config;
use crate::report::{emit, load_table, render_csv, render_json, Csv, Output};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(hlm_core::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Core(_) | CliError::Io(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<hlm_core::Error> for CliError {
    fn from(e: hlm_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parse `argv` (including the program name), run, return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::inject(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<i32> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Only the first pool of the process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let (name, output) = match &cli.command {
        Command::Acceptance(a) => return run_acceptance(cli, a),
        Command::Sieve(a) => ("sieve", sieve(a)?),
        Command::Expsum(a) => ("expsum", expsum(a)?),
        Command::Arcs(a) => ("arcs", arcs(a)?),
        Command::Typesums(a) => ("typesums", typesums(a)?),
        Command::Singular(a) => ("singular", singular(a)?),
        Command::Count(a) => ("count", count(a, cli.seed)?),
        Command::Gowers(a) => ("gowers", gowers(a, cli.seed)?),
        Command::Nilseq(a) => ("nilseq", nilseq(a)?),
        Command::MobiusCorr(a) => ("mobius-corr", mobius_corr(a)?),
        Command::Obstruction(a) => ("obstruction", obstruction(a)?),
    };
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => render_json(name, cli.seed, &output),
        Format::Csv => render_csv(name, cli.seed, &output),
    };
    emit(&text, cli.out.as_deref())?;
    Ok(EXIT_OK)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn weight_seq(table: &ArithTable, n: usize, w: Weight) -> CliResult<Vec<f64>> {
    Ok(match w {
        Weight::Vonmangoldt => table.vonmangoldt_seq(n)?,
        Weight::Mobius => table.mobius_seq(n)?,
        Weight::Primes => table.prime_indicator(n)?.iter().map(|&b| b as u8 as f64).collect(),
    })
}

fn sieve(a: &SieveArgs) -> CliResult<Output> {
    let table = load_table(a.n)?;
    let mut csv = Csv::new("n,is_prime,mobius,vonmangoldt");
    for n in 1..=a.n {
        csv.push(format!("{n},{},{},{}", table.is_prime(n) as u8, table.mobius(n), table.vonmangoldt(n)));
    }
    let result = json!({
        "prime_count": table.prime_count(a.n),
        "mertens": table.mertens(a.n),
        "chebyshev_mean": table.chebyshev_mean(a.n),
    });
    Ok(Output {
        n: Some(a.n as u64),
        result,
        csv,
    })
}

fn expsum(a: &ExpsumArgs) -> CliResult<Output> {
    let table = load_table(a.n)?;
    let w = weight_seq(&table, a.n, a.weights)?;
    if a.sup {
        let s = sup_exp_sum(&w, a.oversample)?;
        let mut csv = Csv::new("theta,value,grid_len");
        csv.push(format!("{},{},{}", s.theta, s.value, s.grid_len));
        return Ok(Output {
            n: Some(a.n as u64),
            result: to_value(&s),
            csv,
        });
    }
    if a.theta.is_empty() {
        return Err(CliError::Usage("give --theta values or --sup".into()));
    }
    let mut csv = Csv::new("theta,re,im,abs");
    let mut values = Vec::new();
    for &t in &a.theta {
        let s = exp_sum(&w, t);
        csv.push(format!("{t},{},{},{}", s.re, s.im, s.norm()));
        values.push(json!({"theta": t, "re": s.re, "im": s.im, "abs": s.norm()}));
    }
    Ok(Output {
        n: Some(a.n as u64),
        result: Value::Array(values),
        csv,
    })
}

fn arc_row(c: &ArcClassification) -> String {
    match c.verdict {
        ArcVerdict::Major { a, q } => format!("{},major,{a},{q}", c.theta),
        ArcVerdict::Minor => format!("{},minor,,", c.theta),
    }
}

fn arcs(a: &ArcsArgs) -> CliResult<Output> {
    let list = match a.theta {
        Some(t) => vec![classify_arc(t, a.n, a.exponent)?],
        None => arc_sweep(a.n, a.exponent, a.points)?,
    };
    let mut csv = Csv::new("theta,verdict,a,q");
    list.iter().for_each(|c| csv.push(arc_row(c)));
    Ok(Output {
        n: Some(a.n),
        result: to_value(&list),
        csv,
    })
}

fn typesums(a: &TypesumsArgs) -> CliResult<Output> {
    let table = load_table(a.n)?;
    let w = weight_seq(&table, a.n, a.weights)?;
    let f: Vec<Complex64> = w.iter().enumerate().map(|(i, &v)| e(a.theta * (i + 1) as f64) * v).collect();
    let t1 = type1_max(&f, a.d)?;
    let t2 = type2_max(&f, a.d, a.w)?;
    let mut csv = Csv::new("D,W,theta,type1,type2");
    csv.push(format!("{},{},{},{t1},{t2}", a.d, a.w, a.theta));
    Ok(Output {
        n: Some(a.n as u64),
        result: json!({"D": a.d, "W": a.w, "theta": a.theta, "type1": t1, "type2": t2}),
        csv,
    })
}

fn singular(a: &SingularArgs) -> CliResult<Output> {
    let system = LinearSystem::parse(&a.system)?;
    let series = singular_series(&system, a.p_max)?;
    let mut csv = Csv::new("p,alpha_num,alpha_den,alpha");
    for (p, f) in &series.factors {
        let v = num_traits_to_f64(f);
        csv.push(format!("{p},{},{},{v}", f.numer(), f.denom()));
    }
    let mut result = to_value(&series);
    if !a.factors {
        if let Some(list) = result.get_mut("factors").and_then(Value::as_array_mut) {
            list.truncate(10);
        }
    }
    result["system"] = Value::String(system.descriptor());
    Ok(Output { n: None, result, csv })
}

fn num_traits_to_f64(r: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn count_csv(r: &CountReport) -> Csv {
    let mut csv = Csv::new(CountReport::CSV_HEADER);
    csv.push(r.csv_row());
    csv
}

fn count(a: &CountArgs, seed: u64) -> CliResult<Output> {
    let table = load_table(a.n)?;
    let report = match (&a.system, a.k) {
        (Some(s), _) => {
            let system = LinearSystem::parse(s)?;
            let mode = match a.samples {
                Some(samples) => CountMode::MonteCarlo { samples, seed },
                None => CountMode::Exact,
            };
            generic_count(&table, &system, a.n, mode)?
        }
        (None, Some(k)) if a.weighted => weighted_ap_report(&table, a.n, k)?,
        (None, Some(k)) => ap_count_report(&table, a.n, k)?,
        (None, None) => return Err(CliError::Usage("give --k or --system".into())),
    };
    Ok(Output {
        n: Some(a.n as u64),
        result: to_value(&report),
        csv: count_csv(&report),
    })
}

fn gowers_function(a: &GowersArgs, seed: u64) -> CliResult<Vec<Complex64>> {
    Ok(match a.function {
        GowersFunction::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..a.m).map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>())).collect()
        }
        GowersFunction::Quadratic => (0..a.m).map(|r| e(((r * r) % a.m.max(1)) as f64 / a.m as f64)).collect(),
        GowersFunction::Mobius => {
            let table = load_table(a.m.max(2))?;
            (1..=a.m).map(|n| Complex64::new(table.mobius(n) as f64, 0.0)).collect()
        }
    })
}

fn gowers(a: &GowersArgs, seed: u64) -> CliResult<Output> {
    let f = gowers_function(a, seed)?;
    let method = match a.method {
        GowersMethod::Fft => NormMethod::Fft,
        GowersMethod::Recursive => NormMethod::Recursive,
        GowersMethod::Bruteforce => NormMethod::Bruteforce,
        GowersMethod::MonteCarlo => NormMethod::MonteCarlo,
    };
    let r = uk_report(&f, a.k, method, a.samples, seed)?;
    let mut csv = Csv::new("k,M,value,method,stderr");
    let m = to_value(&r.method);
    csv.push(format!(
        "{},{},{},{},{}",
        r.k,
        r.modulus,
        r.value,
        m.as_str().unwrap_or(""),
        r.stderr.map(|s| s.to_string()).unwrap_or_default()
    ));
    Ok(Output {
        n: Some(a.m as u64),
        result: to_value(&r),
        csv,
    })
}

fn nil_function(a: &NilseqArgs) -> TestFunction {
    match a.function {
        NilFunction::Constant => TestFunction::Constant,
        NilFunction::Vertical => TestFunction::VerticalCharacter { m: a.m },
        NilFunction::Torus => TestFunction::TorusCharacter {
            m1: a.m,
            m2: a.m2,
            cutoff: false,
        },
    }
}

fn nilseq(a: &NilseqArgs) -> CliResult<Output> {
    if a.g.len() != 3 {
        return Err(CliError::Usage("--g takes alpha,beta,gamma".into()));
    }
    if a.n == 0 {
        return Err(hlm_core::Error::InvalidInput("N must be positive".into()).into());
    }
    let g = HeisenbergElement::new(a.g[0], a.g[1], a.g[2]);
    let f = nil_function(a);
    let orbit = iterate_orbit(&g, &HeisenbergPoint::ORIGIN, a.n);
    let last = orbit[a.n - 1];
    let cf = closed_form_orbit(&g, a.n as u64);
    let mean: Complex64 = orbit.iter().map(|p| f.eval(p)).sum::<Complex64>() / a.n as f64;
    let csv_text = orbit_csv(&f, &g, &HeisenbergPoint::ORIGIN, a.n);
    let mut lines = csv_text.lines();
    let mut csv = Csv::new(lines.next().unwrap_or_default());
    lines.for_each(|l| csv.push(l.to_string()));
    Ok(Output {
        n: Some(a.n as u64),
        result: json!({
            "g": g,
            "function": f,
            "iterated": last,
            "closed_form": cf,
            "distance": last.coord_distance(&cf.point),
            "mean": {"re": mean.re, "im": mean.im},
        }),
        csv,
    })
}

fn mobius_corr(a: &MobiusCorrArgs) -> CliResult<Output> {
    let table = load_table(a.n)?;
    let mu = table.mobius_seq(a.n)?;
    let mut csv = Csv::new("name,re,im,abs");
    let mut entries = Vec::new();
    let mut record = |name: String, c: Complex64| {
        csv.push(format!("\"{name}\",{},{},{}", c.re, c.im, c.norm()));
        entries.push(json!({"name": name, "re": c.re, "im": c.im, "abs": c.norm()}));
    };
    for entry in standard_battery() {
        record(entry.name.clone(), correlate(&mu, &entry.sequence(a.n))?);
    }
    for &t in &a.theta {
        let phase: Vec<Complex64> = (1..=a.n).map(|n| e(hlm_core::numeric::signed_frac_mul(t, n as f64))).collect();
        record(format!("linear theta={t}"), correlate(&mu, &phase)?);
    }
    Ok(Output {
        n: Some(a.n as u64),
        result: Value::Array(entries),
        csv,
    })
}

fn obstruction(a: &ObstructionArgs) -> CliResult<Output> {
    let kind = match a.kind {
        ObstructionKind::A1 => SetKind::Quadratic,
        ObstructionKind::A2 => SetKind::GeneralizedQuadratic,
    };
    let set = ObstructionSet::build(kind, a.n, a.alpha)?;
    if let Some(p) = &a.members {
        std::fs::write(p, set.members_csv())?;
    }
    if let Some(p) = &a.bitset {
        write_bitset(&set.membership, std::io::BufWriter::new(std::fs::File::create(p)?))?;
    }
    let r = obstruction_report(&set)?;
    let mut csv = Csv::new("kind,N,alpha,density,bias,ap3,ap4,ratio3,ratio4,completion_prob");
    csv.push(format!(
        "{},{},{},{},{},{},{},{},{},{}",
        kind.label(),
        r.n,
        r.alpha,
        r.density,
        r.bias,
        r.ap3,
        r.ap4,
        r.ratios[0],
        r.ratios[1],
        r.completion_prob.map(|v| v.to_string()).unwrap_or_default()
    ));
    Ok(Output {
        n: Some(a.n as u64),
        result: to_value(&r),
        csv,
    })
}

fn run_acceptance(cli: &Cli, a: &AcceptanceArgs) -> CliResult<i32> {
    let ids = acceptance::select(&a.only).map_err(CliError::Usage)?;
    let suite = Suite::new();
    let outcomes: Vec<_> = ids.iter().map(|&id| suite.run(id)).collect();
    let failed = outcomes.iter().any(|o| !o.passed);
    let text = match cli.format {
        Some(Format::Json) => {
            let out = Output {
                n: None,
                result: to_value(&outcomes),
                csv: Csv::default(),
            };
            render_json("acceptance", cli.seed, &out)
        }
        Some(Format::Csv) => {
            let mut csv = Csv::new("id,group,passed,seconds,budget_seconds,summary");
            for o in &outcomes {
                csv.push(format!("{},{},{},{:.3},{},\"{}\"", o.id, o.group, o.passed, o.seconds, o.budget_seconds, o.summary().replace('"', "'")));
            }
            render_csv("acceptance", cli.seed, &Output { n: None, result: Value::Null, csv })
        }
        None => acceptance::table(&outcomes),
    };
    emit(&text, cli.out.as_deref())?;
    Ok(if failed { EXIT_ACCEPTANCE } else { EXIT_OK })
}
