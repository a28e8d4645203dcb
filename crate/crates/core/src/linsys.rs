//! Homogeneous integer linear systems `Ax = 0`: validation of the
//! non-degeneracy condition, exact local densities `α_p`, and truncated
//! singular series.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DegeneracyReason, Error, Result};
use crate::numeric::{is_prime_u64, primes_up_to};

/// Largest null space `local_factor` will enumerate point by point.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// A validated non-degenerate `s × t` integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    rows: Vec<Vec<i64>>,
    cols: usize,
}

impl LinearSystem {
    /// Validate `matrix`: `t >= s + 2`, rank `s`, and no row-span vector with
    /// at most two nonzero entries.
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let s = matrix.len();
        if s == 0 || matrix[0].is_empty() {
            return Err(Error::DegenerateSystem(DegeneracyReason::Empty));
        }
        let t = matrix[0].len();
        if matrix.iter().any(|r| r.len() != t) {
            return Err(Error::DegenerateSystem(DegeneracyReason::RaggedRows));
        }
        let rank = rank_exact(&matrix, &[]);
        if rank < s {
            return Err(Error::DegenerateSystem(DegeneracyReason::RankDeficient { rank, rows: s }));
        }
        if t < s + 2 {
            return Err(Error::DegenerateSystem(DegeneracyReason::TooFewColumns { rows: s, cols: t }));
        }
        // A row-span vector vanishing off {i, j} exists iff deleting those
        // columns drops the rank.
        for i in 0..t {
            for j in i + 1..t {
                if rank_exact(&matrix, &[i, j]) < s {
                    let witness = pair_witness(&matrix, i, j);
                    return Err(Error::DegenerateSystem(DegeneracyReason::BinarySubsystem {
                        i,
                        j,
                        witness: witness.iter().map(|v| v.to_string()).collect(),
                    }));
                }
            }
        }
        Ok(LinearSystem { rows: matrix, cols: t })
    }

    /// Parse `"1,-2,1,0;0,1,-2,1"` and validate.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_matrix(text)?)
    }

    /// The `(k − 2) × k` system `x_i − 2x_{i+1} + x_{i+2} = 0` cutting out
    /// `k`-term progressions.
    pub fn arithmetic_progression(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::invalid("progressions need k >= 3"));
        }
        let rows = (0..k - 2)
            .map(|i| {
                let mut r = vec![0i64; k];
                r[i] = 1;
                r[i + 1] = -2;
                r[i + 2] = 1;
                r
            })
            .collect();
        Self::new(rows)
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn s(&self) -> usize {
        self.rows.len()
    }

    pub fn t(&self) -> usize {
        self.cols
    }

    /// `"r1;r2;..."` with comma-separated entries.
    pub fn descriptor(&self) -> String {
        self.rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Does the column permutation `perm` (new column `c` is old column
    /// `perm[c]`) map the solution space to itself?
    pub fn is_symmetric_under(&self, perm: &[usize]) -> bool {
        let permuted: Vec<Vec<i64>> = self.rows.iter().map(|r| perm.iter().map(|&c| r[c]).collect()).collect();
        let mut stacked = self.rows.clone();
        stacked.extend(permuted);
        rank_exact(&stacked, &[]) == self.s()
    }

    /// Number of coordinate permutations preserving the solution space.
    pub fn symmetry_order(&self) -> Result<u64> {
        let t = self.t();
        if t > 8 {
            return Err(Error::Capacity {
                what: "symmetry search columns",
                requested: t as u64,
                cap: 8,
            });
        }
        let mut perm: Vec<usize> = (0..t).collect();
        let mut count = 0u64;
        permute(&mut perm, 0, &mut |p| {
            if self.is_symmetric_under(p) {
                count += 1;
            }
        });
        Ok(count)
    }

    /// Pivot columns of the rational row echelon form (one per row).
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut m: Vec<Vec<BigRational>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == m.len() {
                break;
            }
            let Some(pr) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(row, pr);
            for r in row + 1..m.len() {
                if !m[r][col].is_zero() {
                    let factor = &m[r][col] / &m[row][col];
                    for c in col..self.cols {
                        let sub = &factor * &m[row][c];
                        m[r][c] -= sub;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

/// Rows separated by `;`, entries by `,`; whitespace ignored.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<i64>>> {
    let rows: Vec<Vec<i64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| {
                    e.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::invalid(format!("bad matrix entry {:?}", e.trim())))
                })
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<_>>()?;
    if rows.iter().any(|r| r.is_empty()) {
        return Err(Error::invalid("empty matrix row"));
    }
    Ok(rows)
}

/// Rank over `Q` of `matrix` with the columns in `skip` removed, by
/// fraction-free (Bareiss) elimination.
pub fn rank_exact(matrix: &[Vec<i64>], skip: &[usize]) -> usize {
    let mut m: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(c, _)| !skip.contains(c))
                .map(|(_, &v)| BigInt::from(v))
                .collect()
        })
        .collect();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pr) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Integer row-span vector supported on columns `{i, j}`, assuming deleting
/// them drops the rank.
fn pair_witness(matrix: &[Vec<i64>], i: usize, j: usize) -> Vec<BigInt> {
    let s = matrix.len();
    let t = matrix[0].len();
    // Find y ≠ 0 with yᵀA vanishing off {i, j}: kernel of the transposed
    // column-deleted matrix.
    let reduced: Vec<Vec<i64>> = (0..t)
        .filter(|&c| c != i && c != j)
        .map(|c| (0..s).map(|r| matrix[r][c]).collect())
        .collect();
    let y = rational_kernel_vector(&reduced, s).expect("rank drop guarantees a kernel vector");
    let v: Vec<BigRational> = (0..t)
        .map(|c| {
            (0..s).fold(BigRational::zero(), |acc, r| {
                acc + &y[r] * BigRational::from_integer(BigInt::from(matrix[r][c]))
            })
        })
        .collect();
    primitive_integer_vector(&v)
}

/// Some nonzero rational `y` with `M y = 0`, `M` having `n` columns.
fn rational_kernel_vector(m: &[Vec<i64>], n: usize) -> Option<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect();
    let mut pivot_of_col = vec![None; n];
    let mut row = 0;
    for col in 0..n {
        let Some(pr) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, pr);
        let inv = a[row][col].recip();
        for c in 0..n {
            a[row][c] = &a[row][c] * &inv;
        }
        for r in 0..a.len() {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..n {
                    let sub = &f * &a[row][c];
                    a[r][c] -= sub;
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    let free = (0..n).find(|&c| pivot_of_col[c].is_none())?;
    let mut y = vec![BigRational::zero(); n];
    y[free] = BigRational::one();
    for c in 0..n {
        if let Some(r) = pivot_of_col[c] {
            y[c] = -a[r][free].clone();
        }
    }
    Some(y)
}

fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = ints.iter().find(|x| !x.is_zero()).map_or(BigInt::one(), |x| x.signum());
    ints.into_iter().map(|x| x / &g * &sign).collect()
}

fn inv_mod(a: i64, p: i64) -> i64 {
    let e = num_integer::Integer::extended_gcd(&a.rem_euclid(p), &p);
    e.x.rem_euclid(p)
}

/// Reduced row echelon form over `F_p` of `matrix` without the columns in
/// `skip`; returns (rows, pivot column per row).
fn rref_mod(matrix: &[Vec<i64>], skip: &[usize], p: u64) -> (Vec<Vec<i64>>, Vec<usize>) {
    let p = p as i64;
    let mut m: Vec<Vec<i64>> = matrix
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(c, _)| !skip.contains(c))
                .map(|(_, &v)| v.rem_euclid(p))
                .collect()
        })
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == m.len() {
            break;
        }
        let Some(pr) = (row..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, pr);
        let inv = inv_mod(m[row][col], p);
        for c in 0..cols {
            m[row][c] = m[row][c] * inv % p;
        }
        for r in 0..m.len() {
            if r != row && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..cols {
                    m[r][c] = (m[r][c] - f * m[row][c]).rem_euclid(p);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    m.truncate(row);
    (m, pivots)
}

/// Rank over `F_p`.
pub fn rank_mod(matrix: &[Vec<i64>], p: u64) -> usize {
    rref_mod(matrix, &[], p).1.len()
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime_u64(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if p > 3_037_000_499 {
        return Err(Error::invalid("prime too large for exact modular arithmetic"));
    }
    Ok(())
}

/// `α_p` from the nonzero-point count `z` in a null space of rank `r`:
/// `(z / p^{t−r}) / ((p−1)/p)^t = z·p^r/(p−1)^t`.
fn density(z: BigInt, p: u64, r: usize, t: usize) -> BigRational {
    let num = z * BigInt::from(p).pow(r as u32);
    let den = BigInt::from(p - 1).pow(t as u32);
    BigRational::new(num, den)
}

/// `α_p` by enumerating the `F_p` null space of `A` point by point.
pub fn local_factor(system: &LinearSystem, p: u64) -> Result<BigRational> {
    check_prime(p)?;
    let t = system.t();
    let (rref, pivots) = rref_mod(system.rows(), &[], p);
    let r = pivots.len();
    let free: Vec<usize> = (0..t).filter(|c| !pivots.contains(c)).collect();
    let points = (p as u128).checked_pow(free.len() as u32).unwrap_or(u128::MAX);
    if points > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            p,
            points,
            cap: ENUMERATION_CAP,
        });
    }
    let pi = p as i64;
    // Only free coordinates in F_p^× can contribute.
    let mut x = vec![1i64; free.len()];
    let mut nonzero = 0u64;
    loop {
        let ok = rref.iter().zip(&pivots).all(|(row, _)| {
            let v: i64 = free.iter().zip(&x).map(|(&c, &xc)| row[c] * xc).sum::<i64>();
            (-v).rem_euclid(pi) != 0
        });
        if ok {
            nonzero += 1;
        }
        let mut k = 0;
        loop {
            if k == x.len() {
                return Ok(density(BigInt::from(nonzero), p, r, t));
            }
            x[k] += 1;
            if x[k] < pi {
                break;
            }
            x[k] = 1;
            k += 1;
        }
    }
}

/// `α_p` by inclusion-exclusion over the coordinates forced to vanish:
/// `#{x ∈ V : all x_i ≠ 0} = Σ_S (−1)^{|S|} p^{t − |S| − rank_p(A without S)}`.
pub fn local_factor_exact(system: &LinearSystem, p: u64) -> Result<BigRational> {
    check_prime(p)?;
    let t = system.t();
    if t > 20 {
        return Err(Error::Capacity {
            what: "inclusion-exclusion columns",
            requested: t as u64,
            cap: 20,
        });
    }
    let r = rank_mod(system.rows(), p);
    let mut total = BigInt::zero();
    for mask in 0u32..(1 << t) {
        let skip: Vec<usize> = (0..t).filter(|&c| mask >> c & 1 == 1).collect();
        let rank = rref_mod(system.rows(), &skip, p).1.len();
        let term = BigInt::from(p).pow((t - skip.len() - rank) as u32);
        if skip.len() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(density(total, p, r, t))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularSeries {
    #[serde(serialize_with = "serialize_factors")]
    pub factors: Vec<(u64, BigRational)>,
    pub product: f64,
    #[serde(rename = "P0")]
    pub p0: u64,
    pub tail: f64,
}

fn serialize_factors<S: serde::Serializer>(
    f: &[(u64, BigRational)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(f.len()))?;
    for (p, a) in f {
        seq.serialize_element(&(p, a.numer().to_string(), a.denom().to_string()))?;
    }
    seq.end()
}

impl SingularSeries {
    pub fn factor(&self, p: u64) -> Option<&BigRational> {
        self.factors.iter().find(|(q, _)| *q == p).map(|(_, a)| a)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn to_f64(a: &BigRational) -> f64 {
    a.to_f64().unwrap_or(f64::NAN)
}

/// `∏_{p <= P₀} α_p` with exact factors multiplied in ascending order, plus
/// an estimate of `Σ_{P₀ < p <= 10P₀} |log α_p|`.
pub fn singular_series(system: &LinearSystem, p0: u64) -> Result<SingularSeries> {
    if p0 < 2 {
        return Err(Error::invalid("truncation prime must be at least 2"));
    }
    let primes = primes_up_to(p0);
    let factors: Vec<(u64, BigRational)> = primes
        .par_iter()
        .map(|&p| local_factor_exact(system, p).map(|a| (p, a)))
        .collect::<Result<_>>()?;
    let mut product = 1.0f64;
    for (_, a) in &factors {
        product *= to_f64(a);
    }
    let tail = if product == 0.0 { 0.0 } else { tail_estimate(&factors, p0) };
    Ok(SingularSeries {
        factors,
        product,
        p0,
        tail,
    })
}

/// Fit `p²·|log α_p| ≈ C + C'/p` on primes in `(P₀/2, P₀]` and sum the model
/// over the primes in `(P₀, 10·P₀]`.
fn tail_estimate(factors: &[(u64, BigRational)], p0: u64) -> f64 {
    let pts: Vec<(f64, f64)> = factors
        .iter()
        .filter(|(p, _)| 2 * p > p0)
        .map(|(p, a)| {
            let p = *p as f64;
            (1.0 / p, p * p * to_f64(a).ln().abs())
        })
        .collect();
    let (c0, c1) = match pts.len() {
        0 => return 0.0,
        1 => (pts[0].1, 0.0),
        n => {
            let n = n as f64;
            let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
            let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
            let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
            let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            (my - slope * mx, slope)
        }
    };
    primes_up_to(10 * p0)
        .into_iter()
        .filter(|&p| p > p0)
        .map(|p| {
            let p = p as f64;
            ((c0 + c1 / p) / (p * p)).max(0.0)
        })
        .sum()
}

fn closed_form(p0: u64, start: u64, prefactor: f64, factor: impl Fn(f64) -> f64) -> Result<f64> {
    if p0 < 1000 {
        return Err(Error::invalid("closed forms need P0 >= 1000"));
    }
    Ok(primes_up_to(p0)
        .into_iter()
        .filter(|&p| p >= start)
        .fold(prefactor, |acc, p| acc * factor(p as f64)))
}

/// `½ ∏_{3 <= p <= P₀} (1 − 1/(p−1)²)`.
pub fn closed_form_s3(p0: u64) -> Result<f64> {
    closed_form(p0, 3, 0.5, |p| 1.0 - 1.0 / ((p - 1.0) * (p - 1.0)))
}

/// `¾ ∏_{5 <= p <= P₀} (1 − (3p−1)/(p−1)³)`.
pub fn closed_form_s4(p0: u64) -> Result<f64> {
    closed_form(p0, 5, 0.75, |p| 1.0 - (3.0 * p - 1.0) / (p - 1.0).powi(3))
}

/// Box density of increasing `k`-term progressions: the area of
/// `{(x, d) : 0 <= x, 0 < d, x + (k−1)d <= 1}`.
pub fn increasing_ap_area(k: usize) -> f64 {
    1.0 / (2.0 * (k as f64 - 1.0))
}
