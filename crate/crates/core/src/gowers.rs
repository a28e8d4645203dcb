//! Gowers uniformity norms on `Z/M`, the multilinear progression averages
//! they control, and inverse-U² witnesses.
//!
//! Complex inputs use the conjugated definition
//! `‖f‖_{U^k}^{2^k} = E_{x,h} Π_ω C^{|ω|} f(x + ω·h)`; real inputs are the
//! special case with no conjugation.

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{dft, Transform};
use crate::numeric::next_prime;

pub const MAX_M_K3: usize = 4096;
pub const MAX_M_K4: usize = 256;
pub const BRUTEFORCE_CAP: u128 = 100_000_000;
const RECURSIVE_CAP: u128 = 5_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    Fft,
    Recursive,
    Bruteforce,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GowersReport {
    pub k: usize,
    #[serde(rename = "M")]
    pub modulus: usize,
    pub value: f64,
    pub method: NormMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

pub fn to_complex(f: &[f64]) -> Vec<Complex64> {
    f.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// `Δ_h f(x) = f(x)·conj(f(x + h))`.
pub fn multiplicative_derivative(f: &[Complex64], h: usize) -> Vec<Complex64> {
    let m = f.len();
    (0..m).map(|x| f[x] * f[(x + h) % m].conj()).collect()
}

fn check_modulus(f: &[Complex64]) -> Result<usize> {
    if f.len() < 2 {
        return Err(Error::invalid("Gowers norms need M >= 2"));
    }
    Ok(f.len())
}

/// `‖f‖_{U²} = (Σ_ξ |f̂(ξ)|⁴)^{1/4}`.
pub fn u2_norm(f: &[Complex64]) -> Result<f64> {
    check_modulus(f)?;
    Ok(u2_fourth(dft(f)?.coeffs()).powf(0.25))
}

fn u2_fourth(coeffs: &[Complex64]) -> f64 {
    coeffs.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum()
}

fn check_caps(m: usize, k: usize) -> Result<()> {
    if !(2..=4).contains(&k) {
        return Err(Error::invalid(format!("k = {k} outside 2..=4")));
    }
    let cap = match k {
        3 => MAX_M_K3,
        4 => MAX_M_K4,
        _ => usize::MAX,
    };
    if m > cap {
        return Err(Error::Capacity {
            what: "Gowers norm modulus",
            requested: m as u64,
            cap: cap as u64,
        });
    }
    Ok(())
}

/// `‖f‖_{U^k}^{2^k}` through `E_h ‖Δ_h f‖_{U^{k−1}}^{2^{k−1}}`, bottoming out
/// at `k = 2` with the Fourier identity.
fn power_fft(f: &[Complex64], k: usize, fft: &Transform) -> f64 {
    let m = f.len();
    if k == 2 {
        let mut buf = f.to_vec();
        fft.analyze(&mut buf);
        return u2_fourth(&buf);
    }
    let terms: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|h| power_fft(&multiplicative_derivative(f, h), k - 1, fft))
        .collect();
    terms.iter().sum::<f64>() / m as f64
}

/// Same recursion down to `‖g‖_{U¹}² = |E g|²`.
fn power_recursive(f: &[Complex64], k: usize) -> f64 {
    let m = f.len();
    if k == 1 {
        return (f.iter().sum::<Complex64>() / m as f64).norm_sqr();
    }
    let terms: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|h| power_recursive(&multiplicative_derivative(f, h), k - 1))
        .collect();
    terms.iter().sum::<f64>() / m as f64
}

fn root(power: f64, k: usize) -> f64 {
    power.max(0.0).powf(1.0 / (1u32 << k) as f64)
}

/// `‖f‖_{U^k}` for `2 <= k <= 4` by the FFT-terminated recursion.
pub fn uk_norm(f: &[Complex64], k: usize) -> Result<f64> {
    let m = check_modulus(f)?;
    check_caps(m, k)?;
    Ok(root(power_fft(f, k, &Transform::new(m)), k))
}

/// `‖f‖_{U^k}` by the derivative recursion alone (no FFT).
pub fn uk_norm_recursive(f: &[Complex64], k: usize) -> Result<f64> {
    let m = check_modulus(f)?;
    check_caps(m, k)?;
    let work = (m as u128).pow(k as u32);
    if work > RECURSIVE_CAP {
        return Err(Error::Capacity {
            what: "recursive Gowers work M^k",
            requested: work.min(u64::MAX as u128) as u64,
            cap: RECURSIVE_CAP as u64,
        });
    }
    Ok(root(power_recursive(f, k), k))
}

/// Direct average over all `(x, h₁, …, h_k)`.
pub fn uk_norm_bruteforce(f: &[Complex64], k: usize) -> Result<f64> {
    let m = check_modulus(f)?;
    if !(1..=6).contains(&k) {
        return Err(Error::invalid(format!("k = {k} outside 1..=6")));
    }
    let work = (m as u128).pow(k as u32 + 1);
    if work > BRUTEFORCE_CAP {
        return Err(Error::Capacity {
            what: "brute-force Gowers work M^(k+1)",
            requested: work.min(u64::MAX as u128) as u64,
            cap: BRUTEFORCE_CAP as u64,
        });
    }
    // Two periods of f and of its conjugate, so shifted reads need no reduction.
    let doubled = |g: &dyn Fn(&Complex64) -> Complex64| -> Vec<Complex64> { f.iter().chain(f).map(g).collect() };
    let plain = doubled(&|z| *z);
    let conj = doubled(&|z| z.conj());
    let verts = 1usize << k;
    let h_tuples = m.pow(k as u32);
    let partial: Vec<Complex64> = (0..h_tuples)
        .into_par_iter()
        .map_init(
            || (vec![0usize; k], vec![0usize; verts], vec![Complex64::new(0.0, 0.0); m]),
            |(h, offset, prod), code| {
                let mut c = code;
                for hj in h.iter_mut() {
                    *hj = c % m;
                    c /= m;
                }
                offset[0] = 0;
                // offset[ω] = ω·h mod M, built one bit at a time.
                for (j, &hj) in h.iter().enumerate() {
                    let bit = 1 << j;
                    for w in 0..bit {
                        offset[w | bit] = (offset[w] + hj) % m;
                    }
                }
                prod.copy_from_slice(&plain[..m]);
                for (w, &off) in offset.iter().enumerate().skip(1) {
                    let src = if w.count_ones() % 2 == 1 {
                        &conj[off..off + m]
                    } else {
                        &plain[off..off + m]
                    };
                    for (p, v) in prod.iter_mut().zip(src) {
                        *p *= v;
                    }
                }
                prod.iter().sum::<Complex64>()
            },
        )
        .collect();
    let total: Complex64 = partial.iter().sum();
    Ok(root(total.re / (m as f64 * h_tuples as f64), k))
}

pub fn uk_report(f: &[Complex64], k: usize, method: NormMethod, samples: u64, seed: u64) -> Result<GowersReport> {
    let (value, stderr) = match method {
        NormMethod::Fft => (uk_norm(f, k)?, None),
        NormMethod::Recursive => (uk_norm_recursive(f, k)?, None),
        NormMethod::Bruteforce => (uk_norm_bruteforce(f, k)?, None),
        NormMethod::MonteCarlo => {
            if k != 3 {
                return Err(Error::invalid("the sampled estimator is for k = 3"));
            }
            let est = u3_monte_carlo(f, samples, seed)?;
            (est.value, Some(est.stderr))
        }
    };
    Ok(GowersReport {
        k,
        modulus: f.len(),
        value,
        method,
        stderr,
        delta: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// `‖f‖_{U³}` from the exact `h = 0` term plus the mean of
/// `‖Δ_h f‖_{U²}⁴` over `samples` uniform `h ≠ 0`; the error is propagated
/// through the eighth root.
pub fn u3_monte_carlo(f: &[Complex64], samples: u64, seed: u64) -> Result<Estimate> {
    let m = check_modulus(f)?;
    if samples < 2 {
        return Err(Error::InsufficientSample { count: samples, needed: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hs: Vec<usize> = (0..samples).map(|_| rng.gen_range(1..m)).collect();
    let fft = Transform::new(m);
    let diag = power_fft(&multiplicative_derivative(f, 0), 2, &fft);
    let vals: Vec<f64> = hs
        .par_iter()
        .map(|&h| power_fft(&multiplicative_derivative(f, h), 2, &fft))
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let w = (m - 1) as f64 / m as f64;
    let power = diag / m as f64 + w * mean;
    let se_power = w * (var / n).sqrt();
    let value = root(power, 3);
    let stderr = if power > 0.0 { value / 8.0 * se_power / power } else { 0.0 };
    Ok(Estimate { value, stderr, samples })
}

/// `E_{x,d ∈ Z/M} Π_i f_i(x + (i−1)d)` for `k ∈ {3, 4}` functions.
pub fn ap_average(fs: &[Vec<Complex64>]) -> Result<Complex64> {
    let k = fs.len();
    if !(3..=4).contains(&k) {
        return Err(Error::invalid("progression averages take 3 or 4 functions"));
    }
    let m = fs[0].len();
    if let Some(bad) = fs.iter().find(|g| g.len() != m) {
        return Err(Error::LengthMismatch { left: m, right: bad.len() });
    }
    let fact: usize = (1..k).product();
    if m == 0 || m.gcd(&fact) != 1 {
        return Err(Error::invalid(format!("M = {m} must be coprime to {fact}")));
    }
    let rows: Vec<Complex64> = (0..m)
        .into_par_iter()
        .map(|d| {
            (0..m)
                .map(|x| (0..k).map(|i| fs[i][(x + i * d) % m]).product::<Complex64>())
                .sum::<Complex64>()
        })
        .collect();
    Ok(rows.iter().sum::<Complex64>() / (m * m) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct U2Witness {
    pub xi: usize,
    pub magnitude: f64,
    pub u2: f64,
}

/// The largest Fourier coefficient of `f`, which for `|f| <= 1` is at least
/// `‖f‖²_{U²}`.
pub fn inverse_u2_witness(f: &[Complex64]) -> Result<U2Witness> {
    check_modulus(f)?;
    if f.iter().any(|z| z.norm() > 1.0 + 1e-12) {
        return Err(Error::invalid("witness search needs |f| <= 1"));
    }
    let s = dft(f)?;
    let (xi, magnitude) = s.argmax();
    Ok(U2Witness {
        xi,
        magnitude,
        u2: u2_fourth(s.coeffs()).powf(0.25),
    })
}

/// Zero-pad data on `[1, N]` into `Z/M'` with `M'` the least prime `>= 4N`.
pub fn embed(values: &[Complex64]) -> Vec<Complex64> {
    let m = next_prime(4 * values.len().max(1) as u64) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    out[..values.len()].copy_from_slice(values);
    out
}
