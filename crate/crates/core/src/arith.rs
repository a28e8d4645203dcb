//! Sieved arithmetic tables: primality, Möbius `μ` and von Mangoldt `Λ` on
//! `[1, N]`, the W-tricked von Mangoldt function, and balanced functions.
//!
//! Sequences on `[1, N]` are passed around as slices of length `N` where index
//! `i` holds the value at `n = i + 1`. The table itself is indexed by `n`.

use std::io::{Read, Write};

use num_integer::Integer;

use crate::error::{Error, Result};

/// Default ceiling on `N` for [`ArithTable::build`].
pub const DEFAULT_MAX_LIMIT: usize = 100_000_000;

const MAGIC: &[u8; 4] = b"HLM1";

#[derive(Clone, Debug, PartialEq)]
pub struct ArithTable {
    limit: usize,
    // All three arrays have length limit + 1; slot 0 is unused.
    is_prime: Vec<bool>,
    mobius: Vec<i8>,
    vonmangoldt: Vec<f64>,
}

impl ArithTable {
    /// Sieve `[1, n]` with the default memory cap.
    pub fn build(n: usize) -> Result<Self> {
        Self::build_capped(n, DEFAULT_MAX_LIMIT)
    }

    /// Linear sieve: every composite is struck exactly once, by its least
    /// prime factor, which also yields `μ` multiplicatively.
    pub fn build_capped(n: usize, max_limit: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("table limit must be at least 1"));
        }
        if n > max_limit {
            return Err(Error::Capacity {
                what: "arithmetic table",
                requested: n as u64,
                cap: max_limit as u64,
            });
        }
        let mut is_prime = vec![true; n + 1];
        let mut mobius = vec![0i8; n + 1];
        let mut primes: Vec<usize> = Vec::new();
        is_prime[0] = false;
        is_prime[1] = false;
        mobius[1] = 1;
        for i in 2..=n {
            if is_prime[i] {
                primes.push(i);
                mobius[i] = -1;
            }
            for &p in &primes {
                let m = i * p;
                if m > n {
                    break;
                }
                is_prime[m] = false;
                if i % p == 0 {
                    mobius[m] = 0;
                    break;
                }
                mobius[m] = -mobius[i];
            }
        }
        let mut vonmangoldt = vec![0.0f64; n + 1];
        for &p in &primes {
            let lp = (p as f64).ln();
            let mut pk = p;
            loop {
                vonmangoldt[pk] = lp;
                match pk.checked_mul(p) {
                    Some(next) if next <= n => pk = next,
                    _ => break,
                }
            }
        }
        Ok(ArithTable {
            limit: n,
            is_prime,
            mobius,
            vonmangoldt,
        })
    }

    /// Assemble a table from raw arrays indexed by `n` (slot 0 ignored). No
    /// consistency check is made; intended for loaders and fault injection.
    pub fn from_parts(is_prime: Vec<bool>, mobius: Vec<i8>, vonmangoldt: Vec<f64>) -> Result<Self> {
        let len = is_prime.len();
        if len < 2 || mobius.len() != len || vonmangoldt.len() != len {
            return Err(Error::invalid("table arrays must share a length of at least 2"));
        }
        Ok(ArithTable {
            limit: len - 1,
            is_prime,
            mobius,
            vonmangoldt,
        })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n <= self.limit && self.is_prime[n]
    }

    pub fn mobius(&self, n: usize) -> i8 {
        self.mobius[n]
    }

    pub fn vonmangoldt(&self, n: usize) -> f64 {
        self.vonmangoldt[n]
    }

    /// Raw `Λ` array indexed by `n` (slot 0 is 0).
    pub fn vonmangoldt_raw(&self) -> &[f64] {
        &self.vonmangoldt
    }

    /// Raw primality array indexed by `n`.
    pub fn is_prime_raw(&self) -> &[bool] {
        &self.is_prime
    }

    fn check_range(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.limit {
            return Err(Error::TableTooSmall {
                needed: n as u64,
                limit: self.limit as u64,
            });
        }
        Ok(())
    }

    /// `μ(1), …, μ(n)` as reals.
    pub fn mobius_seq(&self, n: usize) -> Result<Vec<f64>> {
        self.check_range(n)?;
        Ok(self.mobius[1..=n].iter().map(|&m| m as f64).collect())
    }

    /// `Λ(1), …, Λ(n)`.
    pub fn vonmangoldt_seq(&self, n: usize) -> Result<Vec<f64>> {
        self.check_range(n)?;
        Ok(self.vonmangoldt[1..=n].to_vec())
    }

    /// Indicator of the primes in `[1, n]`.
    pub fn prime_indicator(&self, n: usize) -> Result<Vec<bool>> {
        self.check_range(n)?;
        Ok(self.is_prime[1..=n].to_vec())
    }

    /// Primes `<= n` in increasing order.
    pub fn primes(&self, n: usize) -> Result<Vec<usize>> {
        self.check_range(n)?;
        Ok((2..=n).filter(|&k| self.is_prime[k]).collect())
    }

    pub fn prime_count(&self, n: usize) -> usize {
        self.is_prime[..=n.min(self.limit)].iter().filter(|&&b| b).count()
    }

    /// `Σ_{n<=x} μ(n)`.
    pub fn mertens(&self, x: usize) -> i64 {
        self.mobius[1..=x.min(self.limit)].iter().map(|&m| m as i64).sum()
    }

    /// `E_{n<=x} Λ(n)`, i.e. `ψ(x)/x`.
    pub fn chebyshev_mean(&self, x: usize) -> f64 {
        let x = x.min(self.limit);
        let s: crate::numeric::KahanSum = self.vonmangoldt[1..=x].iter().copied().collect();
        s.value() / x as f64
    }

    /// Little-endian dump: `"HLM1"`, `N` as `u64`, then `is_prime` as `N`
    /// bytes, `μ` as `N` signed bytes and `Λ` as `N` `f64`s, all for `n = 1..=N`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.limit as u64).to_le_bytes())?;
        let primes: Vec<u8> = self.is_prime[1..].iter().map(|&b| b as u8).collect();
        w.write_all(&primes)?;
        let mob: Vec<u8> = self.mobius[1..].iter().map(|&m| m as u8).collect();
        w.write_all(&mob)?;
        let mut buf = Vec::with_capacity(self.limit * 8);
        for &v in &self.vonmangoldt[1..] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad table magic".into()));
        }
        let mut n_bytes = [0u8; 8];
        r.read_exact(&mut n_bytes)?;
        let n = u64::from_le_bytes(n_bytes) as usize;
        if n == 0 || n > DEFAULT_MAX_LIMIT {
            return Err(Error::Format(format!("table limit {n} out of range")));
        }
        let mut primes = vec![0u8; n];
        r.read_exact(&mut primes)?;
        let mut mob = vec![0u8; n];
        r.read_exact(&mut mob)?;
        let mut lam = vec![0u8; n * 8];
        r.read_exact(&mut lam)?;

        let mut is_prime = vec![false; n + 1];
        let mut mobius = vec![0i8; n + 1];
        let mut vonmangoldt = vec![0.0; n + 1];
        for i in 0..n {
            is_prime[i + 1] = match primes[i] {
                0 => false,
                1 => true,
                b => return Err(Error::Format(format!("bad primality byte {b}"))),
            };
            mobius[i + 1] = mob[i] as i8;
            let mut chunk = [0u8; 8];
            chunk.copy_from_slice(&lam[i * 8..i * 8 + 8]);
            vonmangoldt[i + 1] = f64::from_le_bytes(chunk);
        }
        Ok(ArithTable {
            limit: n,
            is_prime,
            mobius,
            vonmangoldt,
        })
    }
}

/// Parameters of the W-trick `n ↦ Wn + b`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct WTrickParams {
    modulus: u64,
    residue: u64,
    scale: f64,
}

impl WTrickParams {
    /// `W = ∏_{p <= w} p`.
    pub fn primorial(w: u64, residue: u64) -> Result<Self> {
        let modulus = crate::numeric::primes_up_to(w)
            .into_iter()
            .try_fold(1u64, |acc, p| acc.checked_mul(p))
            .ok_or_else(|| Error::invalid("primorial overflows u64"))?;
        Self::new(modulus, residue)
    }

    pub fn new(modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::invalid("W must be positive"));
        }
        if modulus.gcd(&residue) != 1 {
            return Err(Error::invalid(format!(
                "residue {residue} is not coprime to W = {modulus}"
            )));
        }
        let mut m = modulus;
        let mut phi = modulus;
        let mut d = 2u64;
        while d * d <= m {
            if m % d == 0 {
                m /= d;
                if m % d == 0 {
                    return Err(Error::invalid(format!("W = {modulus} is not squarefree")));
                }
                phi = phi / d * (d - 1);
            }
            d += 1;
        }
        if m > 1 {
            phi = phi / m * (m - 1);
        }
        Ok(WTrickParams {
            modulus,
            residue,
            scale: phi as f64 / modulus as f64,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    /// `φ(W)/W`.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl Default for WTrickParams {
    fn default() -> Self {
        WTrickParams::new(30, 1).expect("30 is squarefree and coprime to 1")
    }
}

/// `Λ_{b,W}(n) = (φ(W)/W)·Λ(Wn + b)` for `n = 1..=n_max`.
pub fn w_trick(table: &ArithTable, params: &WTrickParams, n_max: usize) -> Result<Vec<f64>> {
    let w = params.modulus as usize;
    let b = params.residue as usize;
    let needed = w
        .checked_mul(n_max)
        .and_then(|x| x.checked_add(b))
        .ok_or_else(|| Error::invalid("W·N + b overflows"))?;
    if needed > table.limit() {
        return Err(Error::TableTooSmall {
            needed: needed as u64,
            limit: table.limit() as u64,
        });
    }
    Ok((1..=n_max)
        .map(|n| params.scale * table.vonmangoldt(w * n + b))
        .collect())
}

/// `f_A = 1_A − α` with `α = |A|/N`.
pub fn balanced_function(indicator: &[bool]) -> Result<Vec<f64>> {
    if indicator.is_empty() {
        return Err(Error::invalid("balanced function of an empty range"));
    }
    let alpha = indicator.iter().filter(|&&b| b).count() as f64 / indicator.len() as f64;
    Ok(indicator
        .iter()
        .map(|&b| if b { 1.0 - alpha } else { -alpha })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn divisors(n: usize) -> impl Iterator<Item = usize> {
        (1..=n).filter(move |d| n % d == 0)
    }

    #[test]
    fn mobius_prefix_at_ten() {
        let t = ArithTable::build(10).unwrap();
        let mu: Vec<i8> = (1..=10).map(|n| t.mobius(n)).collect();
        assert_eq!(mu, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
        assert_eq!(t.mertens(10), -1);
    }

    #[test]
    fn vonmangoldt_at_prime_powers() {
        let t = ArithTable::build(8).unwrap();
        assert_eq!(t.vonmangoldt(8), 2f64.ln());
        assert_eq!(t.vonmangoldt(6), 0.0);
        assert_eq!(t.vonmangoldt(1), 0.0);
    }

    #[test]
    fn divisor_sum_identities() {
        let n_max = 10_000;
        let t = ArithTable::build(n_max).unwrap();
        for n in 2..=n_max {
            let mu_sum: i64 = divisors(n).map(|d| t.mobius(d) as i64).sum();
            assert_eq!(mu_sum, 0, "Σμ(d) for n={n}");
            let lam_sum: f64 = divisors(n).map(|d| t.vonmangoldt(d)).sum();
            assert!((lam_sum - (n as f64).ln()).abs() < 1e-9, "ΣΛ(d) for n={n}");
        }
    }

    #[test]
    fn mobius_zero_exactly_on_non_squarefree() {
        let t = ArithTable::build(5000).unwrap();
        for n in 1..=5000usize {
            let squareful = (2..=n).take_while(|d| d * d <= n).any(|d| n % (d * d) == 0);
            assert_eq!(t.mobius(n) == 0, squareful, "n={n}");
        }
    }

    #[test]
    fn prime_powers_share_log_p() {
        let t = ArithTable::build(100_000).unwrap();
        for p in t.primes(100_000).unwrap() {
            let mut pk = p * p;
            while pk <= 100_000 {
                assert_eq!(t.vonmangoldt(pk), t.vonmangoldt(p));
                pk *= p;
            }
        }
        let positive = (1..=100_000).filter(|&n| t.vonmangoldt(n) > 0.0).count();
        let prime_powers = (2..=100_000usize)
            .filter(|&n| {
                let p = (2..=n).find(|d| n % d == 0).unwrap();
                let mut m = n;
                while m % p == 0 {
                    m /= p;
                }
                m == 1
            })
            .count();
        assert_eq!(positive, prime_powers);
    }

    #[test]
    fn mertens_and_chebyshev_sanity() {
        let t = ArithTable::build(1_000_000).unwrap();
        let mut running = 0i64;
        for n in 1..=1_000_000usize {
            running += t.mobius(n) as i64;
            if n >= 10 {
                assert!(running.unsigned_abs() as usize <= n / 2, "Mertens at {n}");
            }
        }
        for n in [100_000, 300_000, 1_000_000] {
            let m = t.chebyshev_mean(n);
            assert!((0.9..=1.1).contains(&m), "ψ({n})/{n} = {m}");
        }
        assert!((t.chebyshev_mean(1_000_000) - 1.0).abs() < 0.01);
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let a = ArithTable::build(50_000).unwrap();
        let b = ArithTable::build(50_000).unwrap();
        assert_eq!(a.is_prime, b.is_prime);
        assert_eq!(a.mobius, b.mobius);
        let bits = |t: &ArithTable| t.vonmangoldt.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn capacity_and_zero_rejected() {
        assert!(matches!(ArithTable::build_capped(1000, 999), Err(Error::Capacity { .. })));
        assert!(ArithTable::build(0).is_err());
    }

    #[test]
    fn dump_and_load() {
        let t = ArithTable::build(1000).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"HLM1");
        assert_eq!(u64::from_le_bytes(buf[4..12].try_into().unwrap()), 1000);
        assert_eq!(buf.len(), 12 + 1000 * 10);
        assert_eq!(ArithTable::read_from(&buf[..]).unwrap(), t);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(ArithTable::read_from(&bad[..]).is_err());
        assert!(ArithTable::read_from(&buf[..100]).is_err());
    }

    #[test]
    fn w_trick_values() {
        let t = ArithTable::build(100).unwrap();
        let p = WTrickParams::new(2, 1).unwrap();
        assert_eq!(p.scale(), 0.5);
        let seq = w_trick(&t, &p, 10).unwrap();
        assert!((seq[0] - 3f64.ln() / 2.0).abs() < 1e-15);
        assert!(w_trick(&t, &p, 50).is_err());
    }

    #[test]
    fn w_trick_mean_near_one() {
        let n = 100_000;
        let t = ArithTable::build(6 * n + 1).unwrap();
        let seq = w_trick(&t, &WTrickParams::new(6, 1).unwrap(), n).unwrap();
        let mean = seq.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn w_trick_rejects_bad_params() {
        assert!(WTrickParams::new(6, 4).is_err());
        assert!(WTrickParams::new(12, 1).is_err());
        let d = WTrickParams::default();
        assert_eq!(d.modulus(), 30);
        assert!((d.scale() - 8.0 / 30.0).abs() < 1e-15);
        assert_eq!(WTrickParams::primorial(7, 1).unwrap().modulus(), 210);
    }

    #[test]
    fn balanced_function_cases() {
        assert!(balanced_function(&[true; 7]).unwrap().iter().all(|&v| v == 0.0));
        assert!(balanced_function(&[false; 7]).unwrap().iter().all(|&v| v == 0.0));
        let evens: Vec<bool> = (1..=10).map(|n| n % 2 == 0).collect();
        let f = balanced_function(&evens).unwrap();
        for (i, v) in f.iter().enumerate() {
            let expect = if (i + 1) % 2 == 0 { 0.5 } else { -0.5 };
            assert_eq!(*v, expect);
        }
        assert!(balanced_function(&[]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn balanced_sums_to_zero(bits in proptest::collection::vec(proptest::bool::ANY, 1..500)) {
            let f = balanced_function(&bits).unwrap();
            let s: f64 = f.iter().sum();
            proptest::prop_assert!(s.abs() <= 1e-9 * bits.len() as f64);
        }
    }
}
