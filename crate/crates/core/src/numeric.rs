//! Small numeric helpers shared by every module: the signed fractional part,
//! the additive character `e(t)`, and a minimal double-double type used where
//! products like `x²·√2` must be reduced mod 1 without losing the low bits.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// `{t}` in `(-1/2, 1/2]`.
#[inline]
pub fn signed_frac(t: f64) -> f64 {
    let r = t - t.round();
    // `round` sends half-integers away from zero; pin them to +1/2.
    if r <= -0.5 {
        r + 1.0
    } else if r > 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// `[t] = t - {t}`: nearest integer, half-integers rounding down.
#[inline]
pub fn nearest_int(t: f64) -> f64 {
    t - signed_frac(t)
}

/// `t mod 1` in `[0, 1)`.
#[inline]
pub fn frac01(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance from `t` to the nearest integer.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    signed_frac(a - b).abs()
}

/// `e(t) = exp(2πi t)`, reducing `t` mod 1 first.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (TAU * signed_frac(t)).sin_cos();
    Complex64::new(c, s)
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const SQRT2: DoubleDouble = DoubleDouble {
        hi: std::f64::consts::SQRT_2,
        lo: -9.667_293_313_452_913e-17,
    };
    pub const SQRT3: DoubleDouble = DoubleDouble {
        hi: 1.732_050_807_568_877_2,
        lo: 1.003_508_422_180_690_3e-16,
    };

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        DoubleDouble { hi: s, lo: err }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        DoubleDouble {
            hi: s,
            lo: b - (s - a),
        }
    }

    /// Product with an `f64`, exact up to double-double rounding.
    pub fn mul_f64(self, b: f64) -> Self {
        let p = self.hi * b;
        let err = self.hi.mul_add(b, -p);
        Self::quick_two_sum(p, err + self.lo * b)
    }

    pub fn add(self, other: Self) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        Self::quick_two_sum(s.hi, s.lo + self.lo + other.lo)
    }

    /// Signed fractional part `{self}` in `(-1/2, 1/2]`, accurate to ~1e-16
    /// absolute even when `hi` is large.
    pub fn signed_frac(self) -> f64 {
        let n = self.hi.round();
        // `hi - n` is exact (Sterbenz), so only `lo` can carry the residual.
        signed_frac((self.hi - n) + self.lo)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `{theta * m}` with the product formed exactly; `m` should be an integer
/// representable in `f64` (|m| < 2⁵³).
#[inline]
pub fn signed_frac_mul(theta: f64, m: f64) -> f64 {
    DoubleDouble::from_f64(theta).mul_f64(m).signed_frac()
}

/// Kahan-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        for x in iter {
            k.add(x);
        }
        k
    }
}

/// Deterministic trial-division primality, for parameters (not tables).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Least prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut m = n.max(2);
    while !is_prime_u64(m) {
        m += 1;
    }
    m
}

/// Primes `<= limit` by a plain Eratosthenes sieve.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_frac_convention() {
        assert_eq!(signed_frac(0.5), 0.5);
        assert_eq!(signed_frac(-0.5), 0.5);
        assert_eq!(signed_frac(1.5), 0.5);
        assert!((signed_frac(0.75) + 0.25).abs() < 1e-15);
        assert_eq!(nearest_int(0.5), 0.0);
        assert_eq!(nearest_int(1.5), 1.0);
        assert_eq!(nearest_int(-0.5), -1.0);
        assert_eq!(nearest_int(0.7), 1.0);
    }

    #[test]
    fn sqrt_constants_are_double_double_accurate() {
        // (hi + lo)^2 - 2 should vanish to ~1e-32; check through the error-free square.
        for (c, target) in [(DoubleDouble::SQRT2, 2.0), (DoubleDouble::SQRT3, 3.0)] {
            let sq = c.mul_f64(c.hi).add(DoubleDouble::from_f64(c.hi * c.lo));
            assert!((sq.hi - target).abs() < 1e-15);
            assert!(((sq.hi - target) + sq.lo).abs() < 1e-30);
        }
    }

    #[test]
    fn compensated_frac_matches_exact_product() {
        // The f64 nearest 1/3 is mant / 2^54; reduce mant·m mod 2^54 exactly.
        let theta = 1.0f64 / 3.0;
        let mant = (theta * 2f64.powi(54)) as u128;
        assert_eq!(mant as f64 / 2f64.powi(54), theta);
        for m in [1e6f64, 12_345_677.0, 999_999_999.0, 4_503_599_627_370_495.0] {
            let r = (mant * m as u128) % (1u128 << 54);
            let exact = signed_frac(r as f64 / 2f64.powi(54));
            let got = signed_frac_mul(theta, m);
            assert!((got - exact).abs() < 1e-15, "m={m}: {got} vs {exact}");
        }
    }

    #[test]
    fn small_primes() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(next_prime(400), 401);
        assert!(is_prime_u64(101) && !is_prime_u64(91));
    }
}
