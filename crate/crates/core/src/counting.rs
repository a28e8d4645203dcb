//! Counting prime solutions of linear systems: exact progression counts,
//! von Mangoldt weighted averages over the solution box, generic exact and
//! Monte Carlo counters, and the matching Hardy-Littlewood predictions.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::ArithTable;
use crate::error::{Error, Result};
use crate::fourier::Transform;
use crate::linsys::{closed_form_s3, closed_form_s4, increasing_ap_area, singular_series, LinearSystem};

/// Truncation used for the constants in [`prediction`].
pub const PREDICTION_P0: u64 = 1_000_000;
/// Truncation used for generic systems.
pub const GENERIC_P0: u64 = 10_000;
pub const MIN_SAMPLES: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Fft,
    Enumerate,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub descriptor: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub observed: f64,
    pub predicted: f64,
    pub ratio: Option<f64>,
    pub method: Method,
    pub seed: Option<u64>,
    /// Solutions with two equal coordinates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<f64>,
    /// Order of the coordinate-permutation group fixing the solution space.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<u64>,
    /// `(observed − diagonal) / symmetry`: solutions up to symmetry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl CountReport {
    pub(crate) fn new(descriptor: String, n: usize, observed: f64, predicted: f64, method: Method) -> Self {
        CountReport {
            descriptor,
            n: n as u64,
            observed,
            predicted,
            ratio: (predicted != 0.0).then(|| observed / predicted),
            method,
            seed: None,
            diagonal: None,
            symmetry: None,
            classes: None,
            stderr: None,
        }
    }

    pub const CSV_HEADER: &'static str = "descriptor,N,observed,predicted,ratio,method";

    pub fn csv_row(&self) -> String {
        let method = serde_json::to_value(self.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        format!(
            "\"{}\",{},{},{},{},{}",
            self.descriptor,
            self.n,
            self.observed,
            self.predicted,
            self.ratio.map_or(String::new(), |r| r.to_string()),
            method
        )
    }
}

fn check_table(table: &ArithTable, n: usize) -> Result<()> {
    if n > table.limit() {
        return Err(Error::TableTooSmall {
            needed: n as u64,
            limit: table.limit() as u64,
        });
    }
    Ok(())
}

/// Number of prime progressions `p₁ < ⋯ < p_k <= N`.
pub fn count_ap_primes(table: &ArithTable, n: usize, k: usize) -> Result<u64> {
    if k < 3 {
        return Err(Error::invalid("progressions need k >= 3"));
    }
    check_table(table, n)?;
    if n < 2 {
        return Ok(0);
    }
    let primes = table.primes(n)?;
    if k == 3 {
        // Midpoint test over pairs of odd primes.
        return Ok(primes
            .par_iter()
            .enumerate()
            .map(|(i, &p1)| {
                primes[i + 1..]
                    .iter()
                    .filter(|&&p3| (p1 + p3) % 2 == 0 && table.is_prime((p1 + p3) / 2))
                    .count() as u64
            })
            .sum());
    }
    Ok(primes
        .par_iter()
        .map(|&p1| {
            (1..)
                .take_while(|d| p1 + (k - 1) * d <= n)
                .filter(|d| (1..k).all(|j| table.is_prime(p1 + j * d)))
                .count() as u64
        })
        .sum())
}

/// `#{(x, d) ∈ Z² : x, x + (k−1)d ∈ [1, N]}`, the size of the box the
/// weighted averages run over (constant progressions included).
pub fn ap_box_count(n: usize, k: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    let step = (k - 1) as u64;
    let n = n as u64;
    let dmax = (n - 1) / step;
    n + 2 * (1..=dmax).map(|d| n - d * step).sum::<u64>()
}

/// `E_{x₁−2x₂+x₃=0, x_i ∈ [1,N]} w(x₁)w(x₂)w(x₃)` through an FFT
/// autoconvolution; `weights[i]` is `w(i + 1)`.
pub fn ap3_weighted_average(weights: &[f64]) -> Result<f64> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::invalid("empty weight sequence"));
    }
    let len = (2 * n + 1).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (i, &w) in weights.iter().enumerate() {
        buf[i + 1] = Complex64::new(w, 0.0);
    }
    let fft = Transform::new(len);
    fft.analyze(&mut buf);
    for z in buf.iter_mut() {
        *z = *z * *z * len as f64;
    }
    fft.synthesize(&mut buf);
    // buf[j] = Σ_{a+b=j} w(a) w(b).
    let total: f64 = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| w * buf[2 * (i + 1)].re)
        .sum();
    Ok(total / ap_box_count(n, 3) as f64)
}

/// `E_{(x,d)} w(x)w(x+d)w(x+2d)w(x+3d)` over the box, by direct loop.
pub fn ap4_weighted_average(weights: &[f64]) -> Result<f64> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::invalid("empty weight sequence"));
    }
    let w = |m: i64| weights[(m - 1) as usize];
    let total: f64 = (1..=n as i64)
        .into_par_iter()
        .filter(|&x| w(x) != 0.0)
        .map(|x| {
            let lo = -((x - 1) / 3);
            let hi = (n as i64 - x) / 3;
            let wx = w(x);
            (lo..=hi)
                .map(|d| {
                    let a = w(x + d);
                    if a == 0.0 {
                        return 0.0;
                    }
                    wx * a * w(x + 2 * d) * w(x + 3 * d)
                })
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    Ok(total / ap_box_count(n, 4) as f64)
}

/// `Λ`-weighted average over `k`-term progressions in `[1, N]`.
pub fn weighted_ap_average(table: &ArithTable, n: usize, k: usize) -> Result<f64> {
    check_table(table, n)?;
    let lam = table.vonmangoldt_seq(n)?;
    match k {
        3 => ap3_weighted_average(&lam),
        4 => ap4_weighted_average(&lam),
        _ => Err(Error::invalid("weighted averages are implemented for k = 3, 4")),
    }
}

/// Weighted average with the conjectured constant `𝔖(A_k)` as prediction.
pub fn weighted_ap_report(table: &ArithTable, n: usize, k: usize) -> Result<CountReport> {
    let observed = weighted_ap_average(table, n, k)?;
    let predicted = prediction(&PredictionKind::System(&LinearSystem::arithmetic_progression(k)?), n)?;
    let method = if k == 3 { Method::Fft } else { Method::Direct };
    Ok(CountReport::new(format!("weighted {k}-AP"), n, observed, predicted, method))
}

/// Prime progression count against `𝔖_k N²/log^k N`.
pub fn ap_count_report(table: &ArithTable, n: usize, k: usize) -> Result<CountReport> {
    let observed = count_ap_primes(table, n, k)? as f64;
    let predicted = if k <= 4 && n >= 100 { prediction(&PredictionKind::Ap(k), n)? } else { 0.0 };
    Ok(CountReport::new(format!("{k}-AP"), n, observed, predicted, Method::Direct))
}

pub enum PredictionKind<'a> {
    /// Increasing prime `k`-term progressions up to `N`.
    Ap(usize),
    /// The weighted average over the solution box.
    System(&'a LinearSystem),
}

fn singular_constant(k: usize) -> Result<f64> {
    static S3: OnceLock<f64> = OnceLock::new();
    static S4: OnceLock<f64> = OnceLock::new();
    match k {
        3 => Ok(*S3.get_or_init(|| closed_form_s3(PREDICTION_P0).expect("P0 is large enough"))),
        4 => Ok(*S4.get_or_init(|| closed_form_s4(PREDICTION_P0).expect("P0 is large enough"))),
        _ => Err(Error::invalid("progression predictions are implemented for k = 3, 4")),
    }
}

/// Hardy-Littlewood main terms.
pub fn prediction(kind: &PredictionKind<'_>, n: usize) -> Result<f64> {
    if n < 100 {
        return Err(Error::invalid("predictions need N >= 100"));
    }
    match kind {
        PredictionKind::Ap(k) => {
            let nf = n as f64;
            Ok(singular_constant(*k)? * nf * nf / nf.ln().powi(*k as i32))
        }
        PredictionKind::System(system) => {
            let p0 = if let Some(k) = ap_length(system) { return ap_singular_series(k) } else { GENERIC_P0 };
            Ok(singular_series(system, p0)?.product)
        }
    }
}

/// `𝔖(A_k)` recovered from the closed form and the box geometry.
fn ap_singular_series(k: usize) -> Result<f64> {
    Ok(singular_constant(k)? / increasing_ap_area(k))
}

fn ap_length(system: &LinearSystem) -> Option<usize> {
    let k = system.t();
    (k <= 4 && LinearSystem::arithmetic_progression(k).ok()?.rows() == system.rows()).then_some(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Solves `A_B x_B = −A_F x_F` exactly: `x_B = −adj(A_B)·A_F·x_F / det`.
struct Parametrization {
    free: Vec<usize>,
    pivots: Vec<usize>,
    /// `−adj(A_B)·A_F`, `s × f`.
    coeff: Vec<Vec<i128>>,
    det: i128,
}

impl Parametrization {
    fn new(system: &LinearSystem) -> Result<Self> {
        let pivots = system.pivot_columns();
        let free: Vec<usize> = (0..system.t()).filter(|c| !pivots.contains(c)).collect();
        let s = system.s();
        let rat = |v: i64| BigRational::from_integer(BigInt::from(v));
        // Invert A_B over Q by Gauss-Jordan and scale by the determinant.
        let mut aug: Vec<Vec<BigRational>> = (0..s)
            .map(|r| {
                let mut row: Vec<BigRational> = pivots.iter().map(|&c| rat(system.rows()[r][c])).collect();
                row.extend((0..s).map(|j| rat((j == r) as i64)));
                row
            })
            .collect();
        let mut det = BigRational::from_integer(BigInt::from(1));
        for col in 0..s {
            let pr = (col..s).find(|&r| !aug[r][col].is_zero()).expect("pivot columns are independent");
            if pr != col {
                aug.swap(pr, col);
                det = -det;
            }
            let pv = aug[col][col].clone();
            det *= &pv;
            for c in 0..2 * s {
                aug[col][c] = &aug[col][c] / &pv;
            }
            for r in 0..s {
                if r != col && !aug[r][col].is_zero() {
                    let f = aug[r][col].clone();
                    for c in 0..2 * s {
                        let sub = &f * &aug[col][c];
                        aug[r][c] -= sub;
                    }
                }
            }
        }
        let big = |x: BigRational| {
            x.to_integer()
                .to_i128()
                .ok_or_else(|| Error::invalid("system entries too large for exact parametrization"))
        };
        let adj: Vec<Vec<BigRational>> = (0..s).map(|r| (0..s).map(|c| &aug[r][s + c] * &det).collect()).collect();
        let mut coeff = vec![vec![0i128; free.len()]; s];
        for r in 0..s {
            for (j, &fc) in free.iter().enumerate() {
                let v = (0..s).fold(BigRational::zero(), |acc, m| acc + &adj[r][m] * rat(system.rows()[m][fc]));
                coeff[r][j] = -big(v)?;
            }
        }
        Ok(Parametrization {
            free,
            pivots,
            coeff,
            det: big(det)?,
        })
    }

    /// Fill `x` from the free values, or `None` when a pivot coordinate is
    /// not an integer in `[1, N]`.
    fn solve(&self, xf: &[i64], n: i64, x: &mut [i64]) -> Option<()> {
        for (j, &c) in self.free.iter().enumerate() {
            x[c] = xf[j];
        }
        for (r, &c) in self.pivots.iter().enumerate() {
            let num: i128 = self.coeff[r].iter().zip(xf).map(|(a, &b)| a * b as i128).sum();
            if num % self.det != 0 {
                return None;
            }
            let v = num / self.det;
            if v < 1 || v > n as i128 {
                return None;
            }
            x[c] = v as i64;
        }
        Some(())
    }
}

fn has_repeat(x: &[i64]) -> bool {
    x.iter().enumerate().any(|(i, a)| x[i + 1..].contains(a))
}

/// Number of prime solutions `x ∈ [1, N]^t` of `Ax = 0`, exactly
/// (two free coordinates) or by sampling the free coordinates uniformly from
/// the primes.
pub fn generic_count(table: &ArithTable, system: &LinearSystem, n: usize, mode: CountMode) -> Result<CountReport> {
    check_table(table, n)?;
    let par = Parametrization::new(system)?;
    let f = par.free.len();
    let t = system.t();
    let primes: Vec<i64> = table.primes(n)?.into_iter().map(|p| p as i64).collect();
    let ni = n as i64;
    let prime = |v: i64| table.is_prime(v as usize);
    let symmetry = system.symmetry_order()?;
    let sing = prediction(&PredictionKind::System(system), n.max(100))?;
    let box_count = box_solutions(&par, t, n, mode)?;
    let predicted = sing * box_count / (n as f64).ln().powi(t as i32);

    let (observed, diagonal, stderr, method, seed) = match mode {
        CountMode::Exact => {
            if f > 2 {
                return Err(Error::FreeRankTooLarge { free: f });
            }
            let (all, diag) = primes
                .par_iter()
                .map(|&a| {
                    let mut x = vec![0i64; t];
                    let mut acc = (0u64, 0u64);
                    for &b in &primes {
                        if par.solve(&[a, b], ni, &mut x).is_some() && par.pivots.iter().all(|&c| prime(x[c])) {
                            acc.0 += 1;
                            acc.1 += has_repeat(&x) as u64;
                        }
                    }
                    acc
                })
                .reduce(|| (0, 0), |p, q| (p.0 + q.0, p.1 + q.1));
            (all as f64, diag as f64, None, Method::Enumerate, None)
        }
        CountMode::MonteCarlo { samples, seed } => {
            if samples < MIN_SAMPLES {
                return Err(Error::InsufficientSample {
                    count: samples,
                    needed: MIN_SAMPLES,
                });
            }
            if primes.is_empty() {
                (0.0, 0.0, Some(0.0), Method::MonteCarlo, Some(seed))
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut xf = vec![0i64; f];
                let mut x = vec![0i64; t];
                let (mut hits, mut diag) = (0u64, 0u64);
                for _ in 0..samples {
                    for v in xf.iter_mut() {
                        *v = primes[rng.gen_range(0..primes.len())];
                    }
                    if par.solve(&xf, ni, &mut x).is_some() && par.pivots.iter().all(|&c| prime(x[c])) {
                        hits += 1;
                        diag += has_repeat(&x) as u64;
                    }
                }
                let space = (primes.len() as f64).powi(f as i32);
                let rate = hits as f64 / samples as f64;
                let se = space * (rate * (1.0 - rate) / samples as f64).sqrt();
                (space * rate, space * diag as f64 / samples as f64, Some(se), Method::MonteCarlo, Some(seed))
            }
        }
    };
    let mut report = CountReport::new(system.descriptor(), n, observed, predicted, method);
    report.seed = seed;
    report.diagonal = Some(diagonal);
    report.symmetry = Some(symmetry);
    report.classes = Some((observed - diagonal) / symmetry as f64);
    report.stderr = stderr;
    Ok(report)
}

/// Integer solutions in `[1, N]^t`, enumerated when affordable and sampled
/// otherwise.
fn box_solutions(par: &Parametrization, t: usize, n: usize, mode: CountMode) -> Result<f64> {
    const ENUMERATE_LIMIT: f64 = 4e8;
    let f = par.free.len();
    let ni = n as i64;
    let space = (n as f64).powi(f as i32);
    if f == 2 && space <= ENUMERATE_LIMIT {
        let count: u64 = (1..=ni)
            .into_par_iter()
            .map(|a| {
                let mut x = vec![0i64; t];
                (1..=ni).filter(|&b| par.solve(&[a, b], ni, &mut x).is_some()).count() as u64
            })
            .sum();
        return Ok(count as f64);
    }
    let seed = match mode {
        CountMode::MonteCarlo { seed, .. } => seed,
        CountMode::Exact => 0,
    };
    let samples = 1_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut xf = vec![0i64; f];
    let mut x = vec![0i64; t];
    let mut hits = 0u64;
    for _ in 0..samples {
        for v in xf.iter_mut() {
            *v = rng.gen_range(1..=ni);
        }
        hits += par.solve(&xf, ni, &mut x).is_some() as u64;
    }
    Ok(space * hits as f64 / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize) -> ArithTable {
        ArithTable::build(n).unwrap()
    }

    /// Exhaustive triple/quadruple loop.
    fn count_brute(t: &ArithTable, n: usize, k: usize) -> u64 {
        let mut c = 0;
        for a in 1..=n {
            for d in 1..=n {
                if a + (k - 1) * d > n {
                    break;
                }
                if (0..k).all(|j| t.is_prime(a + j * d)) {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn small_counts() {
        let t = table(100);
        assert_eq!(count_ap_primes(&t, 20, 3).unwrap(), 5);
        assert_eq!(count_ap_primes(&t, 10, 3).unwrap(), 1);
        assert_eq!(count_ap_primes(&t, 23, 4).unwrap(), 1);
        assert_eq!(count_ap_primes(&t, 20, 4).unwrap(), 0);
        assert!(count_ap_primes(&t, 101, 3).is_err());
        assert!(count_ap_primes(&t, 20, 2).is_err());
    }

    #[test]
    fn counts_match_brute_force() {
        let t = table(600);
        for n in [50, 199, 600] {
            for k in 3..=5 {
                assert_eq!(count_ap_primes(&t, n, k).unwrap(), count_brute(&t, n, k), "N={n} k={k}");
            }
        }
    }

    #[test]
    fn three_ap_count_is_monotone_with_prime_jumps() {
        let t = table(400);
        let mut prev = 0;
        for n in 3..=400 {
            let c = count_ap_primes(&t, n, 3).unwrap();
            assert!(c >= prev);
            if c > prev {
                assert!(t.is_prime(n));
            }
            prev = c;
        }
    }

    fn ap3_brute(w: &[f64]) -> f64 {
        let n = w.len();
        let mut s = 0.0;
        let mut count = 0u64;
        for x2 in 1..=n {
            for x1 in 1..=n {
                let x3 = 2 * x2 as i64 - x1 as i64;
                if x3 >= 1 && x3 <= n as i64 {
                    s += w[x1 - 1] * w[x2 - 1] * w[x3 as usize - 1];
                    count += 1;
                }
            }
        }
        assert_eq!(count, ap_box_count(n, 3));
        s / count as f64
    }

    #[test]
    fn fft_average_matches_brute_force() {
        let t = table(2000);
        for n in [1, 2, 3, 100, 777, 2000] {
            let lam = t.vonmangoldt_seq(n).unwrap();
            let fast = ap3_weighted_average(&lam).unwrap();
            let slow = ap3_brute(&lam);
            assert!((fast - slow).abs() <= 1e-9 * slow.abs().max(1e-300), "N={n}: {fast} vs {slow}");
        }
        assert_eq!(ap3_weighted_average(&vec![0.0; 100]).unwrap().abs(), 0.0);
    }

    #[test]
    fn four_term_average_matches_brute_force() {
        let t = table(300);
        let lam = t.vonmangoldt_seq(300).unwrap();
        let mut s = 0.0;
        let mut count = 0;
        for x in 1..=300i64 {
            for d in -100..=100i64 {
                if (0..4).all(|j| (1..=300).contains(&(x + j * d))) {
                    s += (0..4).map(|j| lam[(x + j * d - 1) as usize]).product::<f64>();
                    count += 1;
                }
            }
        }
        assert_eq!(count, ap_box_count(300, 4));
        let fast = ap4_weighted_average(&lam).unwrap();
        assert!((fast - s / count as f64).abs() < 1e-12);
    }

    #[test]
    fn predictions() {
        let n = 100_000f64;
        let p3 = prediction(&PredictionKind::Ap(3), 100_000).unwrap();
        assert!((p3 / (0.3301 * n * n / n.ln().powi(3)) - 1.0).abs() < 1e-3);
        let p4 = prediction(&PredictionKind::Ap(4), 100_000).unwrap();
        assert!((p4 / (0.4764 * n * n / n.ln().powi(4)) - 1.0).abs() < 1e-3);
        let zero = LinearSystem::parse("1,9,-27").unwrap();
        assert_eq!(prediction(&PredictionKind::System(&zero), 1000).unwrap(), 0.0);
        let ap3 = LinearSystem::arithmetic_progression(3).unwrap();
        let s = prediction(&PredictionKind::System(&ap3), 1000).unwrap();
        assert!((s - 1.3203).abs() < 5e-4);
        assert!(prediction(&PredictionKind::Ap(3), 99).is_err());
    }

    #[test]
    fn generic_exact_matches_progression_counts() {
        let t = table(10_000);
        let ap3 = LinearSystem::arithmetic_progression(3).unwrap();
        let ap4 = LinearSystem::arithmetic_progression(4).unwrap();
        let r = generic_count(&t, &ap3, 20, CountMode::Exact).unwrap();
        assert_eq!(r.symmetry, Some(2));
        assert_eq!(r.classes, Some(5.0));
        // Constant progressions (p, p, p) for the 8 primes up to 20.
        assert_eq!(r.diagonal, Some(8.0));
        assert_eq!(r.observed, 18.0);
        for n in [100, 2000, 10_000] {
            let r = generic_count(&t, &ap4, n, CountMode::Exact).unwrap();
            assert_eq!(r.classes.unwrap(), count_ap_primes(&t, n, 4).unwrap() as f64, "N={n}");
        }
    }

    #[test]
    fn balog_relation_equals_three_ap_count() {
        let t = table(1000);
        let balog = LinearSystem::parse("1,1,-2").unwrap();
        let ap3 = LinearSystem::arithmetic_progression(3).unwrap();
        for n in [20, 500, 1000] {
            let a = generic_count(&t, &balog, n, CountMode::Exact).unwrap();
            let b = generic_count(&t, &ap3, n, CountMode::Exact).unwrap();
            assert_eq!(a.observed, b.observed);
            assert_eq!(a.classes, b.classes);
        }
    }

    #[test]
    fn monte_carlo_tracks_exact() {
        let t = table(10_000);
        let ap3 = LinearSystem::arithmetic_progression(3).unwrap();
        let exact = generic_count(&t, &ap3, 10_000, CountMode::Exact).unwrap();
        let mc = generic_count(
            &t,
            &ap3,
            10_000,
            CountMode::MonteCarlo {
                samples: 1_000_000,
                seed: 7,
            },
        )
        .unwrap();
        assert!((mc.observed / exact.observed - 1.0).abs() <= 0.05);
        assert_eq!(mc.seed, Some(7));
        let again = generic_count(&t, &ap3, 10_000, CountMode::MonteCarlo { samples: 1_000_000, seed: 7 }).unwrap();
        assert_eq!(mc, again);
        assert!(generic_count(&t, &ap3, 100, CountMode::MonteCarlo { samples: 10, seed: 1 }).is_err());
    }

    #[test]
    fn exact_mode_rejects_many_free_coordinates() {
        let t = table(100);
        let s = LinearSystem::parse("1,1,1,-3").unwrap();
        assert!(matches!(
            generic_count(&t, &s, 100, CountMode::Exact),
            Err(Error::FreeRankTooLarge { free: 3 })
        ));
        let mc = generic_count(&t, &s, 100, CountMode::MonteCarlo { samples: 10_000, seed: 3 }).unwrap();
        assert!(mc.observed > 0.0);
    }

    #[test]
    fn report_serialization() {
        let t = table(1000);
        let r = ap_count_report(&t, 1000, 3).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["method"], "direct");
        assert_eq!(v["N"], 1000);
        assert!(v.get("diagonal").is_none());
        assert!((r.ratio.unwrap() - r.observed / r.predicted).abs() < 1e-15);
        assert_eq!(r.csv_row().split(',').count(), CountReport::CSV_HEADER.split(',').count());
    }
}
