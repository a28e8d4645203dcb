//! Discrete Fourier analysis on `Z/M` and on `[1, N]`: normalized spectra,
//! exponential sums, grid suprema, major/minor arc classification and the
//! Type I / Type II maximal bilinear sums.
//!
//! Normalization: `f̂(ξ) = (1/M) Σ_n f(n) e(−ξn/M)`, so Parseval reads
//! `Σ_ξ |f̂(ξ)|² = E_n |f(n)|²` and `f(n) = Σ_ξ f̂(ξ) e(ξn/M)`.

use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{circle_dist, signed_frac_mul};

/// Planned forward/inverse transforms of one length, reusable across calls.
pub(crate) struct Transform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transform {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transform {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    /// In place: `x[ξ] <- (1/M) Σ_n x[n] e(−ξn/M)`.
    pub(crate) fn analyze(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.forward.process(buf);
        let scale = 1.0 / self.len as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    /// In place, unnormalized: `x[k] <- Σ_j x[j] e(jk/M)`.
    pub(crate) fn synthesize(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.inverse.process(buf);
    }
}

/// Fourier coefficients of a function on `Z/M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    modulus: usize,
    #[serde(serialize_with = "serialize_pairs")]
    coeffs: Vec<Complex64>,
}

fn serialize_pairs<S: serde::Serializer>(c: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(c.len()))?;
    for z in c {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl Spectrum {
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `f̂(ξ)` with `ξ` taken mod `M`.
    pub fn at(&self, xi: i64) -> Complex64 {
        self.coeffs[xi.rem_euclid(self.modulus as i64) as usize]
    }

    /// `Σ_ξ |f̂(ξ)|²`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Recover `f` from its coefficients.
    pub fn inverse(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        Transform::new(self.modulus).synthesize(&mut buf);
        buf
    }

    /// Frequency of the largest coefficient (first one on ties).
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = (0usize, -1.0f64);
        for (xi, z) in self.coeffs.iter().enumerate() {
            let m = z.norm();
            if m > best.1 {
                best = (xi, m);
            }
        }
        best
    }

    /// CSV with header `xi,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,re,im\n");
        for (xi, z) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{xi},{:e},{:e}\n", z.re, z.im));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Normalized DFT of `values` viewed as a function on `Z/M`, `M = values.len()`.
pub fn dft(values: &[Complex64]) -> Result<Spectrum> {
    if values.is_empty() {
        return Err(Error::invalid("DFT of an empty sequence"));
    }
    let mut buf = values.to_vec();
    Transform::new(values.len()).analyze(&mut buf);
    Ok(Spectrum {
        modulus: values.len(),
        coeffs: buf,
    })
}

/// [`dft`] of a real sequence.
pub fn dft_real(values: &[f64]) -> Result<Spectrum> {
    let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft(&c)
}

/// `E_{n<=N} w(n) e(θn)` by direct summation; `weights[i]` is `w(i + 1)`.
pub fn exp_sum(weights: &[f64], theta: f64) -> Complex64 {
    if weights.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let mut re = crate::numeric::KahanSum::default();
    let mut im = crate::numeric::KahanSum::default();
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let z = crate::numeric::e(signed_frac_mul(theta, (i + 1) as f64));
        re.add(w * z.re);
        im.add(w * z.im);
    }
    Complex64::new(re.value(), im.value()) / weights.len() as f64
}

/// Complex-weighted variant of [`exp_sum`].
pub fn exp_sum_complex(weights: &[Complex64], theta: f64) -> Complex64 {
    if weights.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let s: Complex64 = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| w * crate::numeric::e(signed_frac_mul(theta, (i + 1) as f64)))
        .sum();
    s / weights.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSup {
    pub theta: f64,
    pub value: f64,
    pub grid_len: usize,
}

/// `max_θ |E_{n<=N} w(n) e(θn)|` over the grid `θ = ξ/L`, where `L` is the
/// least power of two `>= oversample·N`.
pub fn sup_exp_sum(weights: &[f64], oversample: usize) -> Result<GridSup> {
    if oversample < 4 {
        return Err(Error::invalid("oversample must be at least 4"));
    }
    let n = weights.len();
    if n == 0 {
        return Err(Error::invalid("empty weight sequence"));
    }
    let len = (oversample * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (i, &w) in weights.iter().enumerate() {
        buf[i + 1] = Complex64::new(w, 0.0);
    }
    Transform::new(len).synthesize(&mut buf);
    let mut best = (0usize, -1.0f64);
    for (xi, z) in buf.iter().enumerate() {
        let m = z.norm();
        if m > best.1 {
            best = (xi, m);
        }
    }
    Ok(GridSup {
        theta: best.0 as f64 / len as f64,
        value: best.1 / n as f64,
        grid_len: len,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ArcVerdict {
    Major { a: u64, q: u64 },
    Minor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArcClassification {
    pub theta: f64,
    #[serde(flatten)]
    pub verdict: ArcVerdict,
    pub n: u64,
    pub exponent: f64,
}

impl ArcClassification {
    pub fn is_major(&self) -> bool {
        matches!(self.verdict, ArcVerdict::Major { .. })
    }
}

/// Convergents `a/q` of the continued fraction of `theta` with `q <= q_max`.
pub fn convergents(theta: f64, q_max: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    let (mut h_prev, mut h) = (1i64, theta.floor() as i64);
    let (mut k_prev, mut k) = (0u64, 1u64);
    out.push((h, k));
    let mut x = theta - theta.floor();
    for _ in 0..64 {
        if x < 1e-15 {
            break;
        }
        let inv = 1.0 / x;
        let a = inv.floor();
        if a > 1e15 {
            break;
        }
        let a_int = a as u64;
        let k_next = match a_int.checked_mul(k).and_then(|v| v.checked_add(k_prev)) {
            Some(v) if v <= q_max => v,
            _ => break,
        };
        let h_next = a as i64 * h + h_prev;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        out.push((h, k));
        x = inv - a;
    }
    out
}

/// Major iff some `a/q` with `q <= log^A N` has `|θ − a/q| <= log^A N/(qN)`;
/// the smallest such `q` is reported.
pub fn classify_arc(theta: f64, n: u64, exponent: f64) -> Result<ArcClassification> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::invalid("theta must lie in [0, 1)"));
    }
    if n < 10 || exponent <= 0.0 {
        return Err(Error::invalid("need N >= 10 and A > 0"));
    }
    let level = (n as f64).ln().powf(exponent);
    let q_max = level.floor() as u64;
    let fits = |a: i64, q: u64| circle_dist(theta, a as f64 / q as f64) <= level / (q as f64 * n as f64);
    let normalize = |a: i64, q: u64| {
        let g = a.unsigned_abs().gcd(&q).max(1);
        let (a, q) = (a / g as i64, q / g);
        (a.rem_euclid(q as i64) as u64, q)
    };
    // Below this threshold every qualifying fraction is a convergent (Legendre).
    let verdict = if 2.0 * level * level < n as f64 {
        convergents(theta, q_max)
            .into_iter()
            .find(|&(a, q)| fits(a, q))
            .map(|(a, q)| normalize(a, q))
    } else {
        (1..=q_max).find_map(|q| {
            let a = (theta * q as f64).round() as i64;
            fits(a, q).then(|| normalize(a, q))
        })
    };
    Ok(ArcClassification {
        theta,
        verdict: match verdict {
            Some((a, q)) => ArcVerdict::Major { a, q },
            None => ArcVerdict::Minor,
        },
        n,
        exponent,
    })
}

/// Classify `points` evenly spaced values `θ = j/points`.
pub fn arc_sweep(n: u64, exponent: f64, points: usize) -> Result<Vec<ArcClassification>> {
    (0..points)
        .map(|j| classify_arc(j as f64 / points as f64, n, exponent))
        .collect()
}

/// Ranges `d ∈ [D, 2D)`, `w ∈ [W, 2W)` for a Type II sum over `[1, N]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TypeSumSpec {
    pub d: usize,
    pub w: usize,
    pub n: usize,
}

impl TypeSumSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.n as f64;
        let lo = n.powf(1.0 / 3.0) - 1e-9;
        let hi = n.powf(2.0 / 3.0) + 1e-9;
        let (d, w) = (self.d as f64, self.w as f64);
        if !(lo <= d && d <= hi) {
            return Err(Error::invalid(format!("D = {} outside [N^(1/3), N^(2/3)]", self.d)));
        }
        if !(lo <= w && w <= n / d + 1e-9) {
            return Err(Error::invalid(format!("W = {} outside [N^(1/3), N/D]", self.w)));
        }
        Ok(())
    }
}

/// `max_{‖a‖₂=1} |Σ_{d∈[D,2D)} a_d Σ_{1<=w<N/d} f(wd)|`, attained at the
/// normalized conjugate of the inner sums.
pub fn type1_max(f: &[Complex64], d: usize) -> Result<f64> {
    let n = f.len();
    if d == 0 || d as f64 > (n as f64).powf(2.0 / 3.0) + 1e-9 {
        return Err(Error::invalid(format!("D = {d} outside [1, N^(2/3)]")));
    }
    let total: f64 = (d..2 * d)
        .map(|dd| {
            let inner: Complex64 = (1..).map(|w| w * dd).take_while(|&m| m < n).map(|m| f[m - 1]).sum();
            inner.norm_sqr()
        })
        .sum();
    Ok(total.sqrt())
}

/// Largest singular value of `m(d, w) = f(wd)` for `d ∈ [D, 2D)`,
/// `w ∈ [W, 2W)`; values of `f` beyond `N` count as zero.
pub fn type2_max(f: &[Complex64], d: usize, w: usize) -> Result<f64> {
    TypeSumSpec { d, w, n: f.len() }.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let entry = |i: usize, j: usize| {
        let m = (d + i) * (w + j);
        if m <= f.len() {
            f[m - 1]
        } else {
            zero
        }
    };
    top_singular_value_with(d, w, entry, POWER_TOLERANCE, POWER_MAX_ITERATIONS)
}

pub const POWER_TOLERANCE: f64 = 1e-6;
pub const POWER_MAX_ITERATIONS: usize = 10_000;

/// Largest singular value of a dense row-major matrix.
pub fn top_singular_value(rows: &[Vec<Complex64>]) -> Result<f64> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::invalid("ragged matrix"));
    }
    top_singular_value_with(r, c, |i, j| rows[i][j], POWER_TOLERANCE, POWER_MAX_ITERATIONS)
}

/// Power iteration on `MᴴM` for a matrix given entrywise.
///
/// Stops once the estimated distance to the limit, extrapolated from the last
/// two increments, falls below `tol` relative to the estimate.
pub fn top_singular_value_with<F>(rows: usize, cols: usize, entry: F, tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(usize, usize) -> Complex64,
{
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    if (0..rows).all(|i| (0..cols).all(|j| entry(i, j).norm_sqr() == 0.0)) {
        return Ok(0.0);
    }
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut v: Vec<Complex64> = (0..cols)
        .map(|j| Complex64::new(1.0 + 0.5 * ((j as f64) * 0.618_033_988_7).sin(), 0.25 * (j as f64 * 1.3).cos()))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut u = vec![Complex64::new(0.0, 0.0); rows];
    let mut estimate = 0.0f64;
    let mut last_step = f64::INFINITY;
    for iter in 1..=max_iter {
        for (i, ui) in u.iter_mut().enumerate() {
            *ui = v.iter().enumerate().map(|(j, b)| entry(i, j) * b).sum();
        }
        let nu = norm(&u);
        if nu == 0.0 {
            // Start vector in the kernel; restart from a basis vector.
            v.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            v[iter % cols] = Complex64::new(1.0, 0.0);
            continue;
        }
        u.iter_mut().for_each(|z| *z /= nu);
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = u.iter().enumerate().map(|(i, a)| entry(i, j).conj() * a).sum();
        }
        let lambda = norm(&v);
        v.iter_mut().for_each(|z| *z /= lambda);
        let step = (lambda - estimate).abs();
        let ratio = if last_step.is_finite() && last_step > 0.0 { (step / last_step).min(0.999) } else { 0.999 };
        let remaining = step * ratio / (1.0 - ratio);
        estimate = lambda;
        if iter > 2 && step <= tol * lambda && remaining <= tol * lambda {
            return Ok(lambda);
        }
        last_step = step;
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        estimate,
    })
}

/// Spectral side of the 3-AP identity on odd `Z/M`:
/// `Σ_ξ f̂₁(ξ) f̂₂(−2ξ) f̂₃(ξ)`.
pub fn ap3_fourier_side(f1: &[Complex64], f2: &[Complex64], f3: &[Complex64]) -> Result<Complex64> {
    let m = f1.len();
    if f2.len() != m || f3.len() != m {
        return Err(Error::LengthMismatch {
            left: m,
            right: if f2.len() != m { f2.len() } else { f3.len() },
        });
    }
    if m % 2 == 0 {
        return Err(Error::invalid("the 3-AP identity needs odd M"));
    }
    let (s1, s2, s3) = (dft(f1)?, dft(f2)?, dft(f3)?);
    Ok((0..m as i64).map(|xi| s1.at(xi) * s2.at(-2 * xi) * s3.at(xi)).sum())
}
