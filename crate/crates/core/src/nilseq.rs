//! Nilsequences on the circle and on the Heisenberg nilmanifold `G/Γ`,
//! generalized quadratic phases, local quadratics, and correlations.
//!
//! Points of `G/Γ` are stored as `(x, y, z)` with `x, y ∈ [0, 1)` and
//! `z ∈ (−1/2, 1/2]`, standing for the coset of the unitriangular matrix with
//! entries `x` (1,2), `y` (1,3) and `z` (2,3). Right multiplication by `Γ`
//! gives `(x, y, z) ~ (x + a, y + b + c·x, z + c)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{circle_dist, e, frac01, nearest_int, signed_frac, signed_frac_mul, DoubleDouble};

/// Orbit index beyond which the closed form loses its accuracy guarantee.
pub const CLOSED_FORM_LIMIT: u64 = 1_000_000;
pub const MAX_QUADRATIC_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeisenbergElement {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl HeisenbergElement {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        HeisenbergElement { alpha, beta, gamma }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeisenbergPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HeisenbergPoint {
    pub const ORIGIN: HeisenbergPoint = HeisenbergPoint { x: 0.0, y: 0.0, z: 0.0 };

    /// Largest per-coordinate circle distance, after moving `other` across
    /// the `z = ±1/2` seam when the two points sit on opposite sides of it.
    pub fn coord_distance(&self, other: &HeisenbergPoint) -> f64 {
        let mut o = *other;
        if (self.z - o.z).abs() > 0.5 {
            // (x, y, z) ~ (x, y ± x, z ± 1)
            let c = (self.z - o.z).signum();
            o = HeisenbergPoint {
                x: o.x,
                y: o.y + c * o.x,
                z: o.z + c,
            };
        }
        circle_dist(self.x, o.x).max(circle_dist(self.y, o.y)).max((self.z - o.z).abs())
    }
}

/// Canonical representative: `c = −[z]` is applied with the unshifted `x`,
/// then `x` and `y` are taken mod 1.
pub fn reduce(x: f64, y: f64, z: f64) -> HeisenbergPoint {
    let c = -nearest_int(z);
    HeisenbergPoint {
        x: frac01(x),
        y: frac01(y + c * x),
        z: signed_frac(z),
    }
}

/// `g · p` for the coset `p`: `(x + α, y + β + α·z, z + γ)`.
///
/// Left translation is the action that is well defined on `G/Γ`.
pub fn shift(g: &HeisenbergElement, p: &HeisenbergPoint) -> HeisenbergPoint {
    reduce(p.x + g.alpha, p.y + g.beta + g.alpha * p.z, p.z + g.gamma)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedFormPoint {
    pub point: HeisenbergPoint,
    /// Set when `n` exceeds [`CLOSED_FORM_LIMIT`].
    pub precision_warning: bool,
}

/// `gⁿ·Γ` from `gⁿ = (nα, nβ + ½n(n−1)αγ, nγ)`, reduced through
/// `(nα, nβ + ½n(n−1)αγ − [nγ]·nα, {nγ})` with every product formed in
/// double-double.
pub fn closed_form_orbit(g: &HeisenbergElement, n: u64) -> ClosedFormPoint {
    let nf = n as f64;
    let x = frac01(signed_frac_mul(g.alpha, nf));
    let zdd = DoubleDouble::from_f64(g.gamma).mul_f64(nf);
    let r = zdd.hi.round();
    let rem = (zdd.hi - r) + zdd.lo;
    let z = signed_frac(rem);
    let bracket = r + (rem - z);
    let tri = nf * (nf - 1.0) / 2.0;
    let quad = DoubleDouble::from_f64(g.alpha).mul_f64(g.gamma).mul_f64(tri).signed_frac();
    let y = signed_frac_mul(g.beta, nf) + quad - signed_frac_mul(g.alpha, bracket * nf);
    ClosedFormPoint {
        point: HeisenbergPoint { x, y: frac01(y), z },
        precision_warning: n > CLOSED_FORM_LIMIT,
    }
}

/// `gⁿ · p₀` for `n = 1..=n_max` by repeated [`shift`].
pub fn iterate_orbit(g: &HeisenbergElement, start: &HeisenbergPoint, n_max: usize) -> Vec<HeisenbergPoint> {
    let mut out = Vec::with_capacity(n_max);
    let mut p = reduce(start.x, start.y, start.z);
    for _ in 0..n_max {
        p = shift(g, &p);
        out.push(p);
    }
    out
}

/// `exp(1 − 1/(1 − 4z²))` on `|z| < 1/2`, zero outside.
pub fn bump(z: f64) -> f64 {
    let s = 1.0 - 4.0 * z * z;
    if s <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / s).exp()
    }
}

/// Values on a regular `nx × ny × nz` grid over `[0,1)² × [−1/2, 1/2]`,
/// interpolated trilinearly (periodically in `x`, `y`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridFunction {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    #[serde(skip)]
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(nx: usize, ny: usize, nz: usize, values: Vec<Complex64>) -> Result<Self> {
        if nx == 0 || ny == 0 || nz < 2 || values.len() != nx * ny * nz {
            return Err(Error::invalid("grid needs nx, ny >= 1, nz >= 2 and nx·ny·nz values"));
        }
        if values.iter().any(|v| !(v.norm() <= 1.0 + 1e-12)) {
            return Err(Error::invalid("grid values must have modulus <= 1"));
        }
        Ok(GridFunction { nx, ny, nz, values })
    }

    /// Sample `f` on the grid.
    pub fn sample(nx: usize, ny: usize, nz: usize, f: impl Fn(f64, f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny * nz);
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let z = -0.5 + k as f64 / (nz - 1) as f64;
                    values.push(f(i as f64 / nx as f64, j as f64 / ny as f64, z));
                }
            }
        }
        Self::new(nx, ny, nz, values)
    }

    fn at(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[(i % self.nx * self.ny + j % self.ny) * self.nz + k]
    }

    fn eval(&self, p: &HeisenbergPoint) -> Complex64 {
        let gx = p.x * self.nx as f64;
        let gy = p.y * self.ny as f64;
        let gz = ((p.z + 0.5) * (self.nz - 1) as f64).clamp(0.0, (self.nz - 1) as f64);
        let (i, j) = (gx.floor() as usize, gy.floor() as usize);
        let k = (gz.floor() as usize).min(self.nz - 2);
        let (u, v, w) = (gx - i as f64, gy - j as f64, gz - k as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for (di, a) in [(0, 1.0 - u), (1, u)] {
            for (dj, b) in [(0, 1.0 - v), (1, v)] {
                for (dk, c) in [(0, 1.0 - w), (1, w)] {
                    acc += self.at(i + di, j + dj, k + dk) * (a * b * c);
                }
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Constant,
    /// `e(m·y)·χ(z)` with `χ` = [`bump`].
    VerticalCharacter { m: i64 },
    /// `e(m₁x + m₂z)`, optionally times `χ(z)`.
    TorusCharacter { m1: i64, m2: i64, cutoff: bool },
    Grid(GridFunction),
}

impl TestFunction {
    pub fn eval(&self, p: &HeisenbergPoint) -> Complex64 {
        match self {
            TestFunction::Constant => Complex64::new(1.0, 0.0),
            TestFunction::VerticalCharacter { m } => e(signed_frac_mul(p.y, *m as f64)) * bump(p.z),
            TestFunction::TorusCharacter { m1, m2, cutoff } => {
                let v = e(signed_frac_mul(p.x, *m1 as f64) + signed_frac_mul(p.z, *m2 as f64));
                if *cutoff {
                    v * bump(p.z)
                } else {
                    v
                }
            }
            TestFunction::Grid(g) => g.eval(p),
        }
    }

    /// Largest finite-difference slope over a coarse grid, in the
    /// coordinate sup-metric. An estimate, not a certified bound.
    pub fn lipschitz_estimate(&self) -> f64 {
        let step = 1e-4;
        let pts = 16;
        let mut best = 0.0f64;
        for i in 0..pts {
            for j in 0..pts {
                for k in 0..pts {
                    let p = HeisenbergPoint {
                        x: i as f64 / pts as f64,
                        y: j as f64 / pts as f64,
                        z: -0.5 + (k as f64 + 0.5) / pts as f64 * (1.0 - 2.0 * step),
                    };
                    let f0 = self.eval(&p);
                    for q in [
                        HeisenbergPoint { x: p.x + step, ..p },
                        HeisenbergPoint { y: p.y + step, ..p },
                        HeisenbergPoint { z: p.z + step, ..p },
                    ] {
                        best = best.max((self.eval(&q) - f0).norm() / step);
                    }
                }
            }
        }
        best
    }

    /// `max |F(x, y, −1/2) − F(x, x + y, 1/2)|` over a `res × res` grid.
    pub fn gluing_defect(&self, res: usize) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..res {
            for j in 0..res {
                let (x, y) = (i as f64 / res as f64, j as f64 / res as f64);
                let lo = self.eval(&HeisenbergPoint { x, y, z: -0.5 });
                let hi = self.eval(&HeisenbergPoint { x, y: frac01(x + y), z: 0.5 });
                worst = worst.max((lo - hi).norm());
            }
        }
        worst
    }
}

/// `F(gⁿ·p₀)` for `n = 1..=n_max`.
pub fn eval_nilsequence(f: &TestFunction, g: &HeisenbergElement, start: &HeisenbergPoint, n_max: usize) -> Vec<Complex64> {
    iterate_orbit(g, start, n_max).iter().map(|p| f.eval(p)).collect()
}

/// CSV with header `n,x,y,z,re,im`.
pub fn orbit_csv(f: &TestFunction, g: &HeisenbergElement, start: &HeisenbergPoint, n_max: usize) -> String {
    let mut out = String::from("n,x,y,z,re,im\n");
    for (i, p) in iterate_orbit(g, start, n_max).iter().enumerate() {
        let v = f.eval(p);
        out.push_str(&format!("{},{},{},{},{},{}\n", i + 1, p.x, p.y, p.z, v.re, v.im));
    }
    out
}

/// `φ(n) = Σ β_rs {θ_r n}{θ_s n} + Σ γ_r {θ_r n}` with `{·} ∈ (−1/2, 1/2]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralizedQuadratic {
    pub beta: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub thetas: Vec<f64>,
}

impl GeneralizedQuadratic {
    pub fn new(beta: Vec<Vec<f64>>, gamma: Vec<f64>, thetas: Vec<f64>) -> Result<Self> {
        let c = thetas.len();
        if c == 0 || c > MAX_QUADRATIC_DIM {
            return Err(Error::invalid(format!("dimension must be in 1..={MAX_QUADRATIC_DIM}")));
        }
        if gamma.len() != c || beta.len() != c || beta.iter().any(|r| r.len() != c) {
            return Err(Error::invalid("beta must be C×C and gamma of length C"));
        }
        let finite = beta.iter().flatten().chain(&gamma).chain(&thetas).all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("parameters must be finite"));
        }
        Ok(GeneralizedQuadratic { beta, gamma, thetas })
    }

    pub fn dimension(&self) -> usize {
        self.thetas.len()
    }

    /// `θn² = 100θN²·{n/(10N)}²`, valid for `1 <= n <= N`.
    pub fn pure_quadratic(theta: f64, n: usize) -> Result<Self> {
        let nf = n as f64;
        Self::new(vec![vec![100.0 * theta * nf * nf]], vec![0.0], vec![1.0 / (10.0 * nf)])
    }

    /// `θ₁n{θ₂n} = 10θ₁N·{n/(10N)}{θ₂n}`, valid for `1 <= n <= N`.
    pub fn bracket(theta1: f64, theta2: f64, n: usize) -> Result<Self> {
        let nf = n as f64;
        Self::new(
            vec![vec![0.0, 10.0 * theta1 * nf], vec![0.0, 0.0]],
            vec![0.0, 0.0],
            vec![1.0 / (10.0 * nf), theta2],
        )
    }

    pub fn phase(&self, n: u64) -> f64 {
        let fr: Vec<f64> = self.thetas.iter().map(|&t| signed_frac_mul(t, n as f64)).collect();
        let mut acc = 0.0;
        for (r, row) in self.beta.iter().enumerate() {
            for (s, &b) in row.iter().enumerate() {
                if b != 0.0 {
                    acc += b * fr[r] * fr[s];
                }
            }
        }
        acc + self.gamma.iter().zip(&fr).map(|(g, f)| g * f).sum::<f64>()
    }

    pub fn character(&self, n: u64) -> Complex64 {
        e(self.phase(n))
    }
}

/// A phase on an explicit subset `B_N ⊆ [N/2, N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalQuadratic {
    start: i64,
    support: Vec<bool>,
    /// Phases mod 1, in `(−1/2, 1/2]`.
    phase: Vec<f64>,
}

impl LocalQuadratic {
    /// `support(n)` and `phase(n)` (already reduced mod 1 if large) for
    /// `n ∈ [N/2, N)`.
    pub fn new(n: usize, support: impl Fn(u64) -> bool, phase: impl Fn(u64) -> f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::invalid("local quadratics need N >= 4"));
        }
        let start = n / 2;
        let sup: Vec<bool> = (start..n).map(|m| support(m as u64)).collect();
        let ph: Vec<f64> = (start..n).map(|m| if sup[m - start] { signed_frac(phase(m as u64)) } else { 0.0 }).collect();
        Ok(LocalQuadratic {
            start: start as i64,
            support: sup,
            phase: ph,
        })
    }

    /// Support `{n : F₁(n) ≠ 0}` for `F₁(n) = χ({nα}/(2·width))`, a 1-step
    /// nilsequence cut off to the Bohr set `‖nα‖ < width`.
    pub fn bohr(n: usize, alpha: f64, width: f64, phase: impl Fn(u64) -> f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&width) {
            return Err(Error::invalid("Bohr width must lie in [0, 1/2]"));
        }
        Self::new(n, |m| bump(signed_frac_mul(alpha, m as f64) / (2.0 * width)) != 0.0, phase)
    }

    pub fn contains(&self, m: i64) -> bool {
        m >= self.start && ((m - self.start) as usize) < self.support.len() && self.support[(m - self.start) as usize]
    }

    pub fn support_size(&self) -> usize {
        self.support.iter().filter(|&&b| b).count()
    }

    fn phi(&self, m: i64) -> Result<f64> {
        if !self.contains(m) {
            return Err(Error::OutsideSupport { point: m });
        }
        Ok(self.phase[(m - self.start) as usize])
    }

    /// `φ(x+h₁+h₂) − φ(x+h₁) − φ(x+h₂) + φ(x)` reduced to `(−1/2, 1/2]`.
    pub fn second_difference(&self, x: i64, h1: i64, h2: i64) -> Result<f64> {
        let v = self.phi(x + h1 + h2)? - self.phi(x + h1)? - self.phi(x + h2)? + self.phi(x)?;
        Ok(signed_frac(v))
    }
}

/// `E_{n<=N} w(n)·s(n)`.
pub fn correlate(weights: &[f64], seq: &[Complex64]) -> Result<Complex64> {
    if weights.len() != seq.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: seq.len(),
        });
    }
    if weights.is_empty() {
        return Err(Error::invalid("empty sequences"));
    }
    let mut re = crate::numeric::KahanSum::default();
    let mut im = crate::numeric::KahanSum::default();
    for (w, s) in weights.iter().zip(seq) {
        re.add(w * s.re);
        im.add(w * s.im);
    }
    Ok(Complex64::new(re.value(), im.value()) / weights.len() as f64)
}

/// A named nilsequence: test function, group element, start point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NilSpec {
    pub name: String,
    pub function: TestFunction,
    pub g: HeisenbergElement,
    pub start: HeisenbergPoint,
}

impl NilSpec {
    pub fn sequence(&self, n_max: usize) -> Vec<Complex64> {
        eval_nilsequence(&self.function, &self.g, &self.start, n_max)
    }
}

/// Two torus and three Heisenberg nilsequences with irrational parameters.
pub fn standard_battery() -> Vec<NilSpec> {
    let s2 = std::f64::consts::SQRT_2;
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let s7 = 7f64.sqrt();
    let golden = (s5 - 1.0) / 2.0;
    let o = HeisenbergPoint::ORIGIN;
    let entry = |name: &str, function: TestFunction, g: HeisenbergElement| NilSpec {
        name: name.to_string(),
        function,
        g,
        start: o,
    };
    vec![
        entry(
            "torus e(x), alpha=sqrt2",
            TestFunction::TorusCharacter { m1: 1, m2: 0, cutoff: false },
            HeisenbergElement::new(s2, 0.0, 0.0),
        ),
        entry(
            "torus e(x+z), (golden, sqrt3-1)",
            TestFunction::TorusCharacter { m1: 1, m2: 1, cutoff: false },
            HeisenbergElement::new(golden, 0.0, s3 - 1.0),
        ),
        entry(
            "heisenberg e(y) bump, (sqrt2, sqrt3, sqrt5)",
            TestFunction::VerticalCharacter { m: 1 },
            HeisenbergElement::new(s2, s3, s5),
        ),
        entry(
            "heisenberg e(2y) bump, (pi-3, e-2, sqrt7-2)",
            TestFunction::VerticalCharacter { m: 2 },
            HeisenbergElement::new(std::f64::consts::PI - 3.0, std::f64::consts::E - 2.0, s7 - 2.0),
        ),
        entry(
            "heisenberg e(y) bump, (golden, 0, sqrt2-1)",
            TestFunction::VerticalCharacter { m: 1 },
            HeisenbergElement::new(golden, 0.0, s2 - 1.0),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &HeisenbergPoint, b: &HeisenbergPoint, tol: f64) -> bool {
        a.coord_distance(b) <= tol
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(0.2, 0.3, 0.1), HeisenbergPoint { x: 0.2, y: 0.3, z: 0.1 });
        let p = reduce(0.5, 0.0, 1.0);
        assert_eq!((p.x, p.y, p.z), (0.5, 0.5, 0.0));
        let p = reduce(1.5, 0.25, -0.5);
        assert_eq!(p.z, 0.5);
        assert!((p.y - frac01(0.25 + 1.5)).abs() < 1e-15);
    }

    #[test]
    fn reduce_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10_000 {
            let raw: (f64, f64, f64) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let p = reduce(raw.0, raw.1, raw.2);
            assert!((0.0..1.0).contains(&p.x) && (0.0..1.0).contains(&p.y));
            assert!(p.z > -0.5 && p.z <= 0.5);
            assert_eq!(reduce(p.x, p.y, p.z), p);
        }
    }

    #[test]
    fn shift_is_well_defined_on_cosets() {
        // Different representatives of one coset must map to one coset.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..1000 {
            let g = HeisenbergElement::new(rng.gen(), rng.gen(), rng.gen());
            let (x, y, z): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen_range(-0.5..0.5));
            let (a, b, c) = (rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64);
            let p = HeisenbergPoint { x, y, z };
            let q = HeisenbergPoint { x: x + a, y: y + b + c * x, z: z + c };
            let lhs = shift(&g, &p);
            let rhs = shift(&g, &q);
            assert!(close(&lhs, &rhs, 1e-12), "{lhs:?} vs {rhs:?}");
        }
    }

    #[test]
    fn shift_examples() {
        let p = HeisenbergPoint { x: 0.3, y: 0.6, z: -0.2 };
        assert_eq!(shift(&HeisenbergElement::new(0.0, 0.0, 0.0), &p), p);
        let q = shift(&HeisenbergElement::new(0.7, 0.0, 0.0), &HeisenbergPoint::ORIGIN);
        assert_eq!((q.x, q.y, q.z), (0.7, 0.0, 0.0));
    }

    #[test]
    fn closed_form_matches_iteration() {
        let g = HeisenbergElement::new(std::f64::consts::SQRT_2, 0.0, 3f64.sqrt());
        let orbit = iterate_orbit(&g, &HeisenbergPoint::ORIGIN, 100);
        assert!(close(&orbit[99], &closed_form_orbit(&g, 100).point, 1e-9));
        let c0 = closed_form_orbit(&g, 0);
        assert_eq!(c0.point, HeisenbergPoint::ORIGIN);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let g = HeisenbergElement::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let orbit = iterate_orbit(&g, &HeisenbergPoint::ORIGIN, 2000);
            for n in [1usize, 2, 3, 17, 500, 2000] {
                let cf = closed_form_orbit(&g, n as u64);
                assert!(!cf.precision_warning);
                assert!(close(&orbit[n - 1], &cf.point, 1e-8), "n={n} {g:?}");
            }
        }
        assert!(closed_form_orbit(&g, 2_000_000).precision_warning);
    }

    #[test]
    fn abelian_orbits_skip_the_bracket() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for case in 0..20 {
            let (a, b, c) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            let g = if case % 2 == 0 { HeisenbergElement::new(a, b, 0.0) } else { HeisenbergElement::new(0.0, b, c) };
            for (i, p) in iterate_orbit(&g, &HeisenbergPoint::ORIGIN, 1000).iter().enumerate() {
                let expect = frac01(signed_frac_mul(b, (i + 1) as f64));
                assert!(circle_dist(p.y, expect) < 1e-10);
            }
        }
    }

    #[test]
    fn test_functions_are_bounded_and_glued() {
        let grid = GridFunction::sample(8, 8, 9, |x, y, z| e(x + 2.0 * y) * bump(z)).unwrap();
        let fs = [
            TestFunction::Constant,
            TestFunction::VerticalCharacter { m: 3 },
            TestFunction::TorusCharacter { m1: 1, m2: 2, cutoff: false },
            TestFunction::TorusCharacter { m1: -2, m2: 1, cutoff: true },
            TestFunction::Grid(grid),
        ];
        let g = HeisenbergElement::new(std::f64::consts::SQRT_2, 3f64.sqrt(), 5f64.sqrt());
        for f in &fs {
            assert!(f.gluing_defect(100) <= 1e-9, "{f:?}");
            assert!(eval_nilsequence(f, &g, &HeisenbergPoint::ORIGIN, 5000).iter().all(|v| v.norm() <= 1.0 + 1e-12));
            assert!(f.lipschitz_estimate().is_finite());
        }
        assert!(TestFunction::VerticalCharacter { m: 1 }.lipschitz_estimate() >= std::f64::consts::TAU * 0.9);
    }

    #[test]
    fn nilsequence_examples() {
        let ones = eval_nilsequence(&TestFunction::Constant, &HeisenbergElement::new(0.3, 0.1, 0.7), &HeisenbergPoint::ORIGIN, 50);
        assert!(ones.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        let theta = 0.123_456_789;
        let f = TestFunction::TorusCharacter { m1: 1, m2: 0, cutoff: false };
        let s = eval_nilsequence(&f, &HeisenbergElement::new(theta, 0.0, 0.0), &HeisenbergPoint::ORIGIN, 1000);
        for (i, v) in s.iter().enumerate() {
            assert!((v - e(theta * (i + 1) as f64)).norm() < 1e-9);
        }
        // The vertical character reads off the bracket-corrected y coordinate.
        let g = HeisenbergElement::new(std::f64::consts::SQRT_2, 0.0, 3f64.sqrt());
        let v = TestFunction::VerticalCharacter { m: 1 };
        let s = eval_nilsequence(&v, &g, &HeisenbergPoint::ORIGIN, 300);
        for n in [1u64, 50, 300] {
            let cf = closed_form_orbit(&g, n).point;
            assert!((s[n as usize - 1] - v.eval(&cf)).norm() < 1e-8);
        }
    }

    #[test]
    fn orbit_csv_shape() {
        let csv = orbit_csv(&TestFunction::Constant, &HeisenbergElement::new(0.1, 0.2, 0.3), &HeisenbergPoint::ORIGIN, 3);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,x,y,z,re,im");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,"));
    }

    #[test]
    fn generalized_quadratic_identities() {
        let zero = GeneralizedQuadratic::new(vec![vec![0.0]], vec![0.0], vec![0.3]).unwrap();
        assert_eq!(zero.phase(17), 0.0);
        let n = 1000usize;
        for theta in [1e-7, std::f64::consts::SQRT_2 * 1e-5, 0.37] {
            let q = GeneralizedQuadratic::pure_quadratic(theta, n).unwrap();
            for m in [1u64, 10, 999, 1000] {
                let direct = theta * (m * m) as f64;
                assert!((q.phase(m) - direct).abs() <= 1e-9 * (1.0 + theta * (n * n) as f64));
            }
        }
        let (t1, t2) = (0.013, 3f64.sqrt());
        let b = GeneralizedQuadratic::bracket(t1, t2, n).unwrap();
        for m in [1u64, 7, 500, 1000] {
            let direct = t1 * m as f64 * signed_frac(t2 * m as f64);
            assert!((b.phase(m) - direct).abs() < 1e-9);
        }
        assert!(GeneralizedQuadratic::new(vec![vec![1.0]], vec![0.0, 1.0], vec![0.1]).is_err());
        assert!(GeneralizedQuadratic::new(vec![vec![f64::NAN]], vec![0.0], vec![0.1]).is_err());
    }

    #[test]
    fn local_quadratic_second_difference() {
        let n = 100_000usize;
        let theta = std::f64::consts::SQRT_2 / 1000.0;
        let lq = LocalQuadratic::new(n, |_| true, |m| signed_frac_mul(theta, (m * m) as f64)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..20 {
            let (h1, h2) = (rng.gen_range(-500..500i64), rng.gen_range(-500..500i64));
            let expect = signed_frac_mul(2.0 * theta, (h1 * h2) as f64);
            let vals: Vec<f64> = (0..1000)
                .map(|_| lq.second_difference(rng.gen_range(51_000..98_000), h1, h2).unwrap())
                .collect();
            let spread = vals.iter().map(|v| circle_dist(*v, vals[0])).fold(0.0, f64::max);
            assert!(spread <= 1e-9);
            assert!(circle_dist(vals[0], expect) <= 1e-9);
        }
        assert_eq!(lq.second_difference(60_000, 0, 123).unwrap(), 0.0);
        assert!(matches!(lq.second_difference(49_999, 1, 1), Err(Error::OutsideSupport { point: 49_999 })));
    }

    #[test]
    fn bohr_support() {
        let n = 10_000;
        let lq = LocalQuadratic::bohr(n, std::f64::consts::SQRT_2, 0.1, |m| 0.01 * m as f64).unwrap();
        let frac = lq.support_size() as f64 / (n / 2) as f64;
        assert!((frac - 0.2).abs() < 0.02, "{frac}");
        let inside = (n as i64 / 2..n as i64).find(|&m| lq.contains(m)).unwrap();
        assert!(lq.second_difference(inside, 0, 0).is_ok());
        let outside = (n as i64 / 2..n as i64).find(|&m| !lq.contains(m)).unwrap();
        assert!(lq.second_difference(outside, 0, 0).is_err());
    }

    #[test]
    fn correlation_examples() {
        let n = 1001;
        let alt: Vec<Complex64> = (1..=n).map(|m| e(m as f64 / 2.0)).collect();
        assert!(correlate(&vec![1.0; n], &alt).unwrap().norm() <= 1.0 / n as f64 + 1e-15);
        assert!(correlate(&[1.0], &[]).is_err());
        // f_A for A = {n ≡ 1 mod 3}, against e(n/3).
        let n = 999;
        let ind: Vec<bool> = (1..=n).map(|m| m % 3 == 1).collect();
        let fa = crate::arith::balanced_function(&ind).unwrap();
        let ch: Vec<Complex64> = (1..=n).map(|m| e(m as f64 / 3.0)).collect();
        let direct: Complex64 = (1..=n)
            .map(|m| (if m % 3 == 1 { 2.0 / 3.0 } else { -1.0 / 3.0 }) * e(m as f64 / 3.0))
            .sum::<Complex64>()
            / n as f64;
        let got = correlate(&fa, &ch).unwrap();
        assert!((got - direct).norm() < 1e-12);
        assert!((got.norm() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn battery_shape() {
        let b = standard_battery();
        assert_eq!(b.len(), 5);
        assert_eq!(b.iter().filter(|s| matches!(s.function, TestFunction::TorusCharacter { .. })).count(), 2);
        assert!(b.iter().all(|s| s.function.gluing_defect(50) <= 1e-9));
    }
}
