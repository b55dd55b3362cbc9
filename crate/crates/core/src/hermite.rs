//! Exact construction of the Hermite polynomials H_n (physicists'
//! convention) and the even overlap polynomials P_n.
//!
//! P_n(z) is the normalized overlap integral
//!
//! ```text
//! P_n(z) = e^{-z²/2} / (√(2π) (2ⁿ n!)²) ∫ dξ e^{-2ξ²} H_n(ξ)²
//!          [ e^{2zξ} H_n(ξ - z)² + e^{-2zξ} H_n(ξ + z)² ].
//! ```
//!
//! Completing the square turns each exponential into a Gaussian of variance
//! 1/4 centred at ±z/2; its e^{z²/2} factor cancels the prefactor and the
//! √(π/2) Gaussian normalization cancels against √(2π) up to a factor 1/2.
//! Both terms are equal after ξ → -ξ, so with ξ = z/2 + y
//!
//! ```text
//! P_n(z) = E_y[ H_n(y + z/2)² H_n(y - z/2)² ] / (2ⁿ n!)²,   y ~ N(0, 1/4),
//! ```
//!
//! which is evaluated with the exact even moments E[y^{2k}] = (2k-1)!!/4^k.
//! All construction is done in integers/rationals; floating point only
//! enters when a polynomial is evaluated.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dd::{self, Dd};
use crate::error::{Error, Result};

/// Default ceiling on n for P_n construction; above it construction is
/// slow enough to be worth a warning.
pub const DEFAULT_P_CEILING: u32 = 14;

/// A univariate polynomial with exact rational coefficients, lowest power
/// first. Trailing zeros are never stored, so the zero polynomial has no
/// coefficients.
#[derive(Clone)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
    float_coeffs: OnceLock<Vec<Dd>>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial {
            coeffs,
            float_coeffs: OnceLock::new(),
        }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn one() -> Self {
        Self::from_integers(&[1])
    }

    /// The monomial x.
    pub fn x() -> Self {
        Self::from_integers(&[0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of x^k (zero beyond the degree).
    pub fn coefficient(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// p(s·x)
    pub fn scale_argument(&self, s: &BigRational) -> Self {
        let mut power = BigRational::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c * &power);
            power *= s;
        }
        Self::new(out)
    }

    /// p(x + s), by binomial expansion.
    pub fn shift_argument(&self, s: &BigRational) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![BigRational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            let mut s_pow = BigRational::one();
            for j in (0..=k).rev() {
                let b = BigRational::from_integer(binomial(BigInt::from(k), BigInt::from(j)));
                out[j] += c * &b * &s_pow;
                s_pow *= s;
            }
        }
        Self::new(out)
    }

    fn dd_coeffs(&self) -> &[Dd] {
        self.float_coeffs
            .get_or_init(|| self.coeffs.iter().map(Dd::from_rational).collect())
    }

    /// Horner evaluation. Coefficients are rounded to double-double once
    /// and the recurrence runs in double-double, so the result is accurate
    /// to f64 precision unless the cancellation exceeds ~10¹⁶.
    pub fn eval(&self, x: f64) -> f64 {
        dd::horner(self.dd_coeffs(), Dd::from_f64(x))
    }
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}
impl Eq for Polynomial {}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Polynomial")
            .field(&self.coeffs.iter().map(ToString::to_string).collect::<Vec<_>>())
            .finish()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (k, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (_, true) => {}
                (_, false) => write!(f, "{a}*")?,
            }
            match k {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coefficient(k) + rhs.coefficient(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// Physicists' Hermite polynomial from H_{k+1} = 2x H_k − 2k H_{k−1}.
pub fn hermite(n: u32) -> Polynomial {
    Polynomial::from_integers_big(hermite_integer_coeffs(n))
}

impl Polynomial {
    fn from_integers_big(coeffs: Vec<BigInt>) -> Self {
        Self::new(coeffs.into_iter().map(BigRational::from_integer).collect())
    }
}

fn hermite_integer_coeffs(n: u32) -> Vec<BigInt> {
    let mut prev: Vec<BigInt> = vec![BigInt::one()];
    if n == 0 {
        return prev;
    }
    let mut cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::from(2)];
    for k in 1..n {
        let mut next = vec![BigInt::zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c * 2;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c * (2 * k);
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// A polynomial whose odd coefficients are all exactly zero.
#[derive(Clone)]
pub struct EvenPolynomial {
    poly: Polynomial,
    // coefficients of w = x², lowest first
    even_dd: Vec<Dd>,
}

impl EvenPolynomial {
    pub fn new(poly: Polynomial) -> Result<Self> {
        if let Some(k) = poly
            .coeffs
            .iter()
            .enumerate()
            .find(|(k, c)| k % 2 == 1 && !c.is_zero())
            .map(|(k, _)| k)
        {
            return Err(Error::domain(format!(
                "polynomial has a nonzero coefficient at odd power {k}"
            )));
        }
        let even_dd = poly.coeffs.iter().step_by(2).map(Dd::from_rational).collect();
        Ok(EvenPolynomial { poly, even_dd })
    }

    pub fn as_polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn degree(&self) -> Option<usize> {
        self.poly.degree()
    }

    /// Evaluated as a polynomial in z², so p(z) and p(−z) are bitwise equal.
    pub fn eval(&self, z: f64) -> f64 {
        dd::horner(&self.even_dd, Dd::square_f64(z))
    }

    /// Σ|c_k| |z|^k, an upper bound on |p(z)|.
    pub fn abs_bound(&self, z: f64) -> f64 {
        let w = z * z;
        self.even_dd
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * w + c.to_f64().abs())
    }
}

impl PartialEq for EvenPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.poly == other.poly
    }
}
impl Eq for EvenPolynomial {}

impl fmt::Debug for EvenPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("EvenPolynomial").field(&self.poly).finish()
    }
}

// Bivariate integer polynomial indexed [power of y][power of z].
type Bivariate = Vec<Vec<BigInt>>;

fn bivariate_mul(a: &Bivariate, b: &Bivariate) -> Bivariate {
    let zdeg = |p: &Bivariate| p.iter().map(Vec::len).max().unwrap_or(0);
    let (za, zb) = (zdeg(a), zdeg(b));
    let mut out = vec![vec![BigInt::zero(); za + zb - 1]; a.len() + b.len() - 1];
    for (i, row_a) in a.iter().enumerate() {
        for (j, row_b) in b.iter().enumerate() {
            let dst = &mut out[i + j];
            for (p, ca) in row_a.iter().enumerate() {
                if ca.is_zero() {
                    continue;
                }
                for (q, cb) in row_b.iter().enumerate() {
                    if !cb.is_zero() {
                        dst[p + q] += ca * cb;
                    }
                }
            }
        }
    }
    out
}

/// 2ⁿ·H_n(y + s·z/2) with s = ±1, as an integer bivariate polynomial.
fn shifted_hermite(h: &[BigInt], n: usize, sign: i32) -> Bivariate {
    let mut out = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for (k, c) in h.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        // c·(y + s z/2)^k = c Σ_j C(k,j) y^j (s z/2)^{k-j}
        for j in 0..=k {
            let i = k - j;
            let mut term = (c * binomial(BigInt::from(k), BigInt::from(j))) << (n - i);
            if sign < 0 && i % 2 == 1 {
                term = -term;
            }
            out[j][i] += term;
        }
    }
    out
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// The overlap polynomial P_n of degree 4n, built in closed form.
///
/// Construction has no hard limit on `n`; past [`DEFAULT_P_CEILING`] a cost
/// warning is logged. Use [`PCache`] for a refusing ceiling.
pub fn p_poly(n: u32) -> EvenPolynomial {
    if n > DEFAULT_P_CEILING {
        log::warn!(
            "constructing P_{n} above the default ceiling {DEFAULT_P_CEILING}; cost grows quickly with n"
        );
    }
    build_p(n)
}

fn build_p(n: u32) -> EvenPolynomial {
    let nu = n as usize;
    let h = hermite_integer_coeffs(n);
    let plus = shifted_hermite(&h, nu, 1);
    let minus = shifted_hermite(&h, nu, -1);
    let plus2 = bivariate_mul(&plus, &plus);
    let minus2 = bivariate_mul(&minus, &minus);
    // scaled by 2^{4n}
    let product = bivariate_mul(&plus2, &minus2);

    // E[y^{2k}] = (2k-1)!!/4^k; put everything over 4^{2n}
    let max_k = 2 * nu;
    let zlen = 4 * nu + 1;
    let mut numer = vec![BigInt::zero(); zlen];
    let mut double_fact = BigInt::one();
    for k in 0..=max_k {
        if k > 0 {
            double_fact *= 2 * k - 1;
        }
        let Some(row) = product.get(2 * k) else { break };
        let weight = &double_fact << (2 * (max_k - k));
        for (i, c) in row.iter().enumerate() {
            if !c.is_zero() {
                numer[i] += c * &weight;
            }
        }
    }
    let norm = (BigInt::one() << nu) * factorial(n);
    let denom: BigInt = (BigInt::one() << (2 * max_k + 4 * nu)) * &norm * &norm;
    let coeffs = numer
        .into_iter()
        .map(|c| BigRational::new(c, denom.clone()))
        .collect();
    let poly = Polynomial::new(coeffs);
    debug_assert_eq!(poly.degree(), Some(4 * nu));
    EvenPolynomial::new(poly).expect("P_n is even by construction")
}

/// Write the coefficients as `power numerator denominator` lines.
pub fn write_coefficients<W: std::io::Write>(p: &Polynomial, mut out: W) -> std::io::Result<()> {
    for (k, c) in p.coefficients().iter().enumerate() {
        writeln!(out, "{k} {} {}", c.numer(), c.denom())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CeilingPolicy {
    /// Build anyway and log a warning.
    Warn,
    /// Refuse with [`Error::Capability`].
    Refuse,
}

/// Thread-safe memo of constructed P_n.
#[derive(Debug)]
pub struct PCache {
    ceiling: u32,
    policy: CeilingPolicy,
    entries: RwLock<HashMap<u32, Arc<EvenPolynomial>>>,
}

impl PCache {
    pub fn new(ceiling: u32, policy: CeilingPolicy) -> Self {
        PCache {
            ceiling,
            policy,
            entries: RwLock::new(HashMap::new()),
        }
    }

    /// The process-wide cache used by the spectral engine.
    pub fn global() -> &'static PCache {
        static GLOBAL: OnceLock<PCache> = OnceLock::new();
        GLOBAL.get_or_init(|| PCache::new(DEFAULT_P_CEILING, CeilingPolicy::Warn))
    }

    pub fn ceiling(&self) -> u32 {
        self.ceiling
    }

    pub fn get(&self, n: u32) -> Result<Arc<EvenPolynomial>> {
        if let Some(p) = self.entries.read().expect("cache lock").get(&n) {
            return Ok(Arc::clone(p));
        }
        if n > self.ceiling {
            match self.policy {
                CeilingPolicy::Refuse => {
                    return Err(Error::Capability(format!(
                        "P_{n} exceeds the configured ceiling n <= {}",
                        self.ceiling
                    )))
                }
                CeilingPolicy::Warn => log::warn!(
                    "constructing P_{n} above the configured ceiling {}; cost grows quickly with n",
                    self.ceiling
                ),
            }
        }
        let built = Arc::new(build_p(n));
        let mut map = self.entries.write().expect("cache lock");
        Ok(Arc::clone(map.entry(n).or_insert(built)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_hermite;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite(0), Polynomial::from_integers(&[1]));
        assert_eq!(hermite(1), Polynomial::from_integers(&[0, 2]));
        assert_eq!(hermite(2), Polynomial::from_integers(&[-2, 0, 4]));
    }

    #[test]
    fn hermite_five_matches_hand_expansion() {
        // 32x⁵ − 160x³ + 120x
        assert_eq!(hermite(5), Polynomial::from_integers(&[0, 120, 0, -160, 0, 32]));
    }

    #[test]
    fn hermite_recurrence_via_polynomial_ops() {
        let two_x = Polynomial::from_integers(&[0, 2]);
        for n in 1..12u32 {
            let lhs = hermite(n + 1);
            let rhs = &(&two_x * &hermite(n)) - &hermite(n - 1).scale(&rat(2 * n as i64, 1));
            assert_eq!(lhs, rhs, "n = {n}");
        }
    }

    #[test]
    fn hermite_orthogonality() {
        let (x, w) = gauss_hermite(24);
        for m in 0..=6u32 {
            for n in 0..=6u32 {
                let (hm, hn) = (hermite(m), hermite(n));
                let v: f64 = x.iter().zip(&w).map(|(x, w)| w * hm.eval(*x) * hn.eval(*x)).sum();
                let norm = PI.sqrt() * 2f64.powi(n as i32) * (1..=n).product::<u32>() as f64;
                if m == n {
                    assert!((v - norm).abs() / norm < 1e-10, "m=n={n}: {v} vs {norm}");
                } else {
                    assert!(v.abs() / norm < 1e-10, "m={m} n={n}: {v}");
                }
            }
        }
    }

    #[test]
    fn eval_simple() {
        assert_eq!(hermite(2).eval(1.0), 2.0);
        assert_eq!(Polynomial::zero().eval(3.0), 0.0);
    }

    #[test]
    fn argument_transforms() {
        let p = Polynomial::from_integers(&[1, 2, 3]); // 3x² + 2x + 1
        // p(x + 1) = 3x² + 8x + 6
        assert_eq!(p.shift_argument(&rat(1, 1)), Polynomial::from_integers(&[6, 8, 3]));
        // p(x/2) = 3/4 x² + x + 1
        assert_eq!(
            p.scale_argument(&rat(1, 2)),
            Polynomial::new(vec![rat(1, 1), rat(1, 1), rat(3, 4)])
        );
        assert_eq!((&p - &p).degree(), None);
        assert_eq!(format!("{p}"), "3*x^2 + 2*x + 1");
    }

    #[test]
    fn p0_is_one() {
        let p0 = p_poly(0);
        assert_eq!(p0.as_polynomial(), &Polynomial::one());
        assert_eq!(p0.eval(7.3), 1.0);
    }

    #[test]
    fn p1_closed_form() {
        let expect = Polynomial::new(vec![
            rat(3, 4),
            rat(0, 1),
            rat(-1, 2),
            rat(0, 1),
            rat(1, 4),
        ]);
        let p1 = p_poly(1);
        assert_eq!(p1.as_polynomial(), &expect);
        assert_eq!(p1.eval(0.0), 0.75);
        assert_eq!(p1.eval(2.0), 2.75);
    }

    #[test]
    fn p_at_zero_matches_fourth_moment() {
        // P_n(0) = 2 (2ⁿn!)⁻² (2π)^{-1/2} ∫ e^{-2ξ²} H_n(ξ)⁴ dξ, via Gauss–Hermite in ξ√2
        let (x, w) = gauss_hermite(60);
        for n in 0..=8u32 {
            let h = hermite(n);
            let s = std::f64::consts::SQRT_2;
            let integral: f64 =
                x.iter().zip(&w).map(|(x, w)| w * h.eval(x / s).powi(4)).sum::<f64>() / s;
            let norm = 2f64.powi(n as i32) * (1..=n).product::<u32>() as f64;
            let expect = 2.0 * integral / (norm * norm * (2.0 * PI).sqrt());
            let got = p_poly(n).eval(0.0);
            assert!(got > 0.0);
            assert!((got - expect).abs() / expect < 1e-12, "n={n}: {got} vs {expect}");
        }
    }

    #[test]
    fn degree_is_four_n() {
        for n in 0..=14u32 {
            let p = PCache::global().get(n).unwrap();
            assert_eq!(p.degree(), Some(4 * n as usize));
            assert!(p.eval(0.0) > 0.0);
        }
    }

    #[test]
    fn even_polynomial_rejects_odd_terms() {
        assert!(EvenPolynomial::new(Polynomial::from_integers(&[1, 1])).is_err());
        assert!(EvenPolynomial::new(Polynomial::from_integers(&[1, 0, 1])).is_ok());
    }

    #[test]
    fn cache_ceiling_policies() {
        let strict = PCache::new(2, CeilingPolicy::Refuse);
        assert!(strict.get(2).is_ok());
        assert!(matches!(strict.get(3), Err(Error::Capability(_))));
        let lax = PCache::new(1, CeilingPolicy::Warn);
        assert_eq!(lax.get(2).unwrap().degree(), Some(8));
        assert_eq!(lax.get(2).unwrap().eval(1.5), p_poly(2).eval(1.5));
    }

    #[test]
    fn cache_is_shareable_across_threads() {
        let cache = Arc::new(PCache::new(14, CeilingPolicy::Refuse));
        let handles: Vec<_> = (0..8u32)
            .map(|i| {
                let cache = Arc::clone(&cache);
                std::thread::spawn(move || cache.get(i % 4).unwrap().eval(1.0))
            })
            .collect();
        let vals: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert_eq!(vals[0], vals[4]);
    }

    #[test]
    fn coefficient_dump_format() {
        let mut buf = Vec::new();
        write_coefficients(p_poly(1).as_polynomial(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 3 4\n1 0 1\n2 -1 2\n3 0 1\n4 1 4\n");
    }

    proptest! {
        #[test]
        fn p_is_symmetric(n in 0u32..=14, z in -20.0f64..20.0) {
            let p = PCache::global().get(n).unwrap();
            prop_assert_eq!(p.eval(z).to_bits(), p.eval(-z).to_bits());
        }
    }
}
