//! Sets with no linear bias but many 4-term progressions.
//!
//! `A₁ = {x : {x²√2} ∈ [−α/2, α/2]}` and
//! `A₂ = {x : {x√2·{x√3}} ∈ [−α/2, α/2]}` on `[1, N]`. Fractional parts are
//! signed, in `(−1/2, 1/2]`, and every product is formed in double-double.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::balanced_function;
use crate::counting::{CountReport, Method};
use crate::error::{Error, Result};
use crate::fourier::sup_exp_sum;
use crate::numeric::DoubleDouble;

/// Conditioning events needed before a completion probability is reported.
pub const MIN_CONDITIONING: u64 = 100;
const BITSET_MAGIC: &[u8; 8] = b"HLMSET01";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Quadratic,
    GeneralizedQuadratic,
}

impl SetKind {
    pub fn label(self) -> &'static str {
        match self {
            SetKind::Quadratic => "A1",
            SetKind::GeneralizedQuadratic => "A2",
        }
    }

    /// The quantity whose signed fractional part decides membership of `x`.
    pub fn phase(self, x: u64) -> f64 {
        let xf = x as f64;
        match self {
            SetKind::Quadratic => DoubleDouble::SQRT2.mul_f64(xf * xf).signed_frac(),
            SetKind::GeneralizedQuadratic => {
                let inner = DoubleDouble::SQRT3.mul_f64(xf).signed_frac();
                DoubleDouble::SQRT2.mul_f64(xf).mul_f64(inner).signed_frac()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionSet {
    pub kind: SetKind,
    pub n: usize,
    pub alpha: f64,
    /// Index `i` holds membership of `x = i + 1`.
    pub membership: Vec<bool>,
    pub density: f64,
}

impl ObstructionSet {
    pub fn build(kind: SetKind, n: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 0.25) {
            return Err(Error::invalid("alpha must lie in (0, 0.25]"));
        }
        if n < 1000 {
            return Err(Error::invalid("obstruction sets need N >= 1000"));
        }
        let half = alpha / 2.0;
        let membership: Vec<bool> = (1..=n as u64).into_par_iter().map(|x| kind.phase(x).abs() <= half).collect();
        let density = membership.iter().filter(|&&b| b).count() as f64 / n as f64;
        Ok(ObstructionSet {
            kind,
            n,
            alpha,
            membership,
            density,
        })
    }

    pub fn contains(&self, x: u64) -> bool {
        x >= 1 && x as usize <= self.n && self.membership[x as usize - 1]
    }

    pub fn size(&self) -> usize {
        self.membership.iter().filter(|&&b| b).count()
    }

    pub fn members_csv(&self) -> String {
        let mut out = String::from("x\n");
        for (i, _) in self.membership.iter().enumerate().filter(|(_, &b)| b) {
            out.push_str(&format!("{}\n", i + 1));
        }
        out
    }
}

/// Sup over the oversampled grid of `|E f_A(n) e(nθ)|`, `f_A = 1_A − δ`.
pub fn linear_bias(membership: &[bool]) -> Result<f64> {
    Ok(sup_exp_sum(&balanced_function(membership)?, 8)?.value)
}

struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn new(membership: &[bool]) -> Self {
        let mut words = vec![0u64; membership.len() / 64 + 2];
        for (i, _) in membership.iter().enumerate().filter(|(_, &b)| b) {
            words[i / 64] |= 1 << (i % 64);
        }
        Bits { words }
    }

    /// 64 bits starting at bit `offset + 64·i`.
    fn word_at(&self, offset: usize, i: usize) -> u64 {
        let q = offset / 64 + i;
        let r = offset % 64;
        let lo = self.words.get(q).copied().unwrap_or(0);
        if r == 0 {
            lo
        } else {
            let hi = self.words.get(q + 1).copied().unwrap_or(0);
            (lo >> r) | (hi << (64 - r))
        }
    }
}

/// Number of `(x, d)` with `d >= 1` and `x, x+d, …, x+(k−1)d` all in the set.
pub fn count_progressions(membership: &[bool], k: usize) -> u64 {
    if k == 1 {
        return membership.iter().filter(|&&b| b).count() as u64;
    }
    count_with_span(membership, k, k)
}

/// `k`-term progressions in the set whose `span`-term extension stays in `[1, N]`.
fn count_with_span(membership: &[bool], k: usize, span: usize) -> u64 {
    let n = membership.len();
    if k == 0 || n == 0 || span < 2 {
        return 0;
    }
    let bits = Bits::new(membership);
    let d_max = (n - 1) / (span - 1);
    (1..=d_max)
        .into_par_iter()
        .map(|d| {
            // bit indices x in 0..len, so that x + (span−1)d < n
            let len = n - (span - 1) * d;
            let full = len / 64;
            let mut total = 0u64;
            for i in 0..=full {
                let mut w = u64::MAX;
                for j in 0..k {
                    w &= bits.word_at(j * d, i);
                }
                if i == full {
                    let rem = len % 64;
                    w &= if rem == 0 { 0 } else { (1u64 << rem) - 1 };
                }
                total += w.count_ones() as u64;
            }
            total
        })
        .sum()
}

/// Number of `(x, d)`, `d >= 1`, with the whole progression in `[1, N]`.
pub fn progression_slots(n: usize, k: usize) -> u64 {
    if k < 2 {
        return n as u64;
    }
    (1..=((n.max(1) - 1) / (k - 1))).map(|d| (n - (k - 1) * d) as u64).sum()
}

/// Exact `k`-AP count inside the set, against `δᵏ` times the number of slots.
pub fn ap_stats(membership: &[bool], k: usize, label: &str) -> Result<CountReport> {
    if !(3..=4).contains(&k) {
        return Err(Error::invalid("ap_stats supports k = 3 and 4"));
    }
    if membership.is_empty() {
        return Err(Error::invalid("empty set"));
    }
    let n = membership.len();
    let density = membership.iter().filter(|&&b| b).count() as f64 / n as f64;
    let observed = count_progressions(membership, k) as f64;
    let predicted = density.powi(k as i32) * progression_slots(n, k) as f64;
    Ok(CountReport::new(format!("{label} k={k}"), n, observed, predicted, Method::Direct))
}

/// Empirical `P(x+3d ∈ A | x, x+d, x+2d ∈ A)` over progressions inside `[1, N]`.
pub fn completion_probability(membership: &[bool]) -> Result<f64> {
    let n = membership.len();
    if n < 4 {
        return Err(Error::invalid("need N >= 4"));
    }
    // Conditioning triples must leave room for the fourth term.
    let cond = count_with_span(membership, 3, 4);
    if cond < MIN_CONDITIONING {
        return Err(Error::InsufficientSample {
            count: cond,
            needed: MIN_CONDITIONING,
        });
    }
    Ok(count_progressions(membership, 4) as f64 / cond as f64)
}

/// Independent Bernoulli(α) membership on `[1, N]`.
pub fn bernoulli_set(n: usize, alpha: f64, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>() < alpha).collect()
}

/// `x² − 3(x+d)² + 3(x+2d)² − (x+3d)² = 0` over `0 <= x <= x_max`, `0 <= d <= d_max`.
pub fn check_constraint_identity(x_max: i64, d_max: i64) -> bool {
    (0..=x_max).into_par_iter().all(|x| {
        (0..=d_max).all(|d| {
            let sq = |v: i64| (v as i128) * (v as i128);
            sq(x) - 3 * sq(x + d) + 3 * sq(x + 2 * d) - sq(x + 3 * d) == 0
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub kind: SetKind,
    #[serde(rename = "N")]
    pub n: u64,
    pub alpha: f64,
    pub density: f64,
    pub bias: f64,
    pub ap3: u64,
    pub ap4: u64,
    pub ratios: [f64; 2],
    /// Absent for `A₂`, which has no completion statistic.
    pub completion_prob: Option<f64>,
}

pub fn report(set: &ObstructionSet) -> Result<ObstructionReport> {
    let s3 = ap_stats(&set.membership, 3, set.kind.label())?;
    let s4 = ap_stats(&set.membership, 4, set.kind.label())?;
    let completion = match set.kind {
        SetKind::Quadratic => Some(completion_probability(&set.membership)?),
        SetKind::GeneralizedQuadratic => None,
    };
    Ok(ObstructionReport {
        kind: set.kind,
        n: set.n as u64,
        alpha: set.alpha,
        density: set.density,
        bias: linear_bias(&set.membership)?,
        ap3: s3.observed as u64,
        ap4: s4.observed as u64,
        ratios: [s3.ratio.unwrap_or(f64::NAN), s4.ratio.unwrap_or(f64::NAN)],
        completion_prob: completion,
    })
}

/// Magic, `N` as little-endian `u64`, then packed little-endian words.
pub fn write_bitset<W: Write>(membership: &[bool], mut w: W) -> Result<()> {
    w.write_all(BITSET_MAGIC)?;
    w.write_all(&(membership.len() as u64).to_le_bytes())?;
    let bits = Bits::new(membership);
    for word in &bits.words[..membership.len().div_ceil(64)] {
        w.write_all(&word.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_bitset<R: Read>(mut r: R) -> Result<Vec<bool>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BITSET_MAGIC {
        return Err(Error::Format("not a bitset file".into()));
    }
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let n = u64::from_le_bytes(buf) as usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n.div_ceil(64) {
        r.read_exact(&mut buf)?;
        let word = u64::from_le_bytes(buf);
        for b in 0..64 {
            if out.len() < n {
                out.push(word >> b & 1 == 1);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_count(m: &[bool], k: usize) -> u64 {
        let n = m.len();
        let mut c = 0;
        for d in 1..n {
            for x in 0..n {
                if x + (k - 1) * d >= n {
                    break;
                }
                if (0..k).all(|j| m[x + j * d]) {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn bitset_counts_match_naive() {
        for (seed, n) in [(1u64, 1usize), (2, 63), (3, 64), (4, 65), (5, 300), (6, 1000)] {
            let m = bernoulli_set(n, 0.4, seed);
            for k in 2..=5 {
                assert_eq!(count_progressions(&m, k), naive_count(&m, k), "n={n} k={k}");
            }
        }
        assert_eq!(progression_slots(10, 3), naive_count(&[true; 10], 3));
        let m = bernoulli_set(500, 0.5, 9);
        let direct: u64 = (1..500)
            .flat_map(|d| (0..500).map(move |x| (x, d)))
            .filter(|&(x, d)| x + 3 * d < 500 && (0..3).all(|j| m[x + j * d]))
            .count() as u64;
        assert_eq!(count_with_span(&m, 3, 4), direct);
    }

    #[test]
    fn membership_matches_inequality() {
        let set = ObstructionSet::build(SetKind::Quadratic, 10_000, 0.1).unwrap();
        for x in [1u64, 2, 5, 77, 1234, 9999, 10_000] {
            let direct = {
                let v = (x as f64).powi(2) * std::f64::consts::SQRT_2;
                (v - v.round()).abs() <= 0.05
            };
            let phase = SetKind::Quadratic.phase(x).abs();
            if (phase - 0.05).abs() > 1e-9 {
                assert_eq!(set.contains(x), direct, "x={x}");
            }
        }
        assert!(ObstructionSet::build(SetKind::Quadratic, 10_000, 0.0).is_err());
        assert!(ObstructionSet::build(SetKind::Quadratic, 10_000, 0.3).is_err());
        assert!(ObstructionSet::build(SetKind::Quadratic, 999, 0.1).is_err());
    }

    #[test]
    fn densities() {
        let a1 = ObstructionSet::build(SetKind::Quadratic, 100_000, 0.1).unwrap();
        assert!((a1.density - 0.1).abs() <= 0.01, "{}", a1.density);
        let a2 = ObstructionSet::build(SetKind::GeneralizedQuadratic, 100_000, 0.1).unwrap();
        assert!((a2.density - 0.1).abs() <= 0.02, "{}", a2.density);
        for s in [&a1, &a2] {
            assert!(s.density >= s.alpha / 2.0 && s.density <= 2.0 * s.alpha);
        }
    }

    #[test]
    fn bias_controls() {
        let evens: Vec<bool> = (1..=10_000).map(|x| x % 2 == 0).collect();
        assert!((linear_bias(&evens).unwrap() - 0.5).abs() < 1e-9);
        let a2 = ObstructionSet::build(SetKind::GeneralizedQuadratic, 100_000, 0.1).unwrap();
        assert!(linear_bias(&a2.membership).unwrap() <= 0.02);
    }

    #[test]
    fn saturated_and_empty_sets() {
        let full = vec![true; 2000];
        for k in [3, 4] {
            assert_eq!(ap_stats(&full, k, "full").unwrap().ratio, Some(1.0));
        }
        assert!(ap_stats(&full, 5, "full").is_err());
        let sparse: Vec<bool> = (1..=2000).map(|x| x % 500 == 0).collect();
        assert!(matches!(completion_probability(&sparse), Err(Error::InsufficientSample { .. })));
    }

    #[test]
    fn completion_is_stable_and_enhanced() {
        let big = ObstructionSet::build(SetKind::Quadratic, 100_000, 0.1).unwrap();
        let small = ObstructionSet::build(SetKind::Quadratic, 10_000, 0.1).unwrap();
        let (pb, ps) = (completion_probability(&big.membership).unwrap(), completion_probability(&small.membership).unwrap());
        assert!((0.2..=0.4).contains(&pb), "{pb}");
        assert!((pb - ps).abs() <= 0.05, "{pb} vs {ps}");
        let thin = ObstructionSet::build(SetKind::Quadratic, 100_000, 0.05).unwrap();
        let pt = completion_probability(&thin.membership).unwrap();
        assert!((0.2..=0.4).contains(&pt), "{pt}");
        let control = bernoulli_set(100_000, 0.1, 7);
        let pc = completion_probability(&control).unwrap();
        assert!((pc - 0.1).abs() < 0.02, "{pc}");
    }

    #[test]
    fn second_set_is_enhanced() {
        let a2 = ObstructionSet::build(SetKind::GeneralizedQuadratic, 100_000, 0.1).unwrap();
        let r = ap_stats(&a2.membership, 4, "A2").unwrap().ratio.unwrap();
        assert!(r >= 1.5, "{r}");
        let thin = ObstructionSet::build(SetKind::GeneralizedQuadratic, 100_000, 0.05).unwrap();
        let rt = ap_stats(&thin.membership, 4, "A2").unwrap().ratio.unwrap();
        assert!(rt >= 2.0 && rt > r, "{rt} vs {r}");
    }

    #[test]
    fn constraint_identity() {
        assert_eq!(1 - 12 + 27 - 16, 0);
        assert_eq!(0 - 75 + 300 - 225, 0);
        assert!(check_constraint_identity(1000, 1000));
    }

    #[test]
    fn bitset_round_trip() {
        let m = bernoulli_set(1000, 0.3, 11);
        let mut buf = Vec::new();
        write_bitset(&m, &mut buf).unwrap();
        assert_eq!(read_bitset(&buf[..]).unwrap(), m);
        assert!(read_bitset(&b"nonsense0000000000"[..]).is_err());
        let set = ObstructionSet::build(SetKind::Quadratic, 1000, 0.1).unwrap();
        assert_eq!(set.members_csv().lines().count(), set.size() + 1);
    }
}
