//! Brute-force cross-checks of the analytic shortcuts.
//!
//! Nothing here touches the exact polynomial algebra or the adaptive
//! integrator: Hermite values come from the float three-term recurrence,
//! integrals use fixed composite Gauss–Legendre rules, and the kernel is
//! computed from an integral representation instead of `erf`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, QuadratureConfig};
use crate::spectrum::{f_tilde, g_coefficient};

/// Largest n accepted by [`p_eval_quadrature`].
pub const P_ORACLE_MAX_N: u32 = 10;
/// Largest n accepted by [`f_diff_bruteforce`].
pub const F_ORACLE_MAX_N: u32 = 6;

pub const P_THRESHOLD: f64 = 1e-9;
pub const F_DIFF_THRESHOLD: f64 = 1e-6;
pub const NARROW_THRESHOLD: f64 = 0.05;

/// Outer (ζ) convergence tolerance of the nested rule.
pub const OUTER_TOLERANCE: f64 = 1e-8;

const RULE_ORDER: usize = 20;
const INNER_PANEL_WIDTH: f64 = 0.5;
// e^{-z²/2}·P_n(z) is below 1e-60 of its peak beyond this for n <= 6
const OUTER_Z_MAX: f64 = 24.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub analytic_value: f64,
    pub oracle_value: f64,
    /// |analytic − oracle| / (1 + |oracle|)
    pub relative_discrepancy: f64,
    pub threshold: f64,
    pub settings: String,
}

impl OracleReport {
    pub fn new(
        quantity: impl Into<String>,
        analytic_value: f64,
        oracle_value: f64,
        threshold: f64,
        settings: impl Into<String>,
    ) -> Self {
        OracleReport {
            quantity: quantity.into(),
            analytic_value,
            oracle_value,
            relative_discrepancy: discrepancy(analytic_value, oracle_value),
            threshold,
            settings: settings.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.relative_discrepancy < self.threshold
    }
}

pub fn discrepancy(analytic: f64, oracle: f64) -> f64 {
    let d = (analytic - oracle).abs() / (1.0 + oracle.abs());
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

fn rule() -> &'static GaussLegendre {
    static RULE: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(RULE_ORDER))
}

/// H_n(x) by the three-term recurrence in f64.
fn hermite_value(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// P_n(z) straight from its defining ξ-integral.
///
/// Each of the two terms e^{-z²/2}e^{-2ξ²}e^{±2zξ}H_n(ξ)²H_n(ξ∓z)² is
/// integrated on its own window around ξ = ±z/2, widened until the
/// integrand at the window edges is below 1e-16 of the estimate.
pub fn p_eval_quadrature(n: u32, z: f64) -> Result<f64> {
    if n > P_ORACLE_MAX_N {
        return Err(Error::Capability(format!(
            "quadrature oracle for P_n is limited to n <= {P_ORACLE_MAX_N}, got {n}"
        )));
    }
    if !z.is_finite() {
        return Err(Error::domain(format!("z must be finite, got {z}")));
    }
    let norm = 2f64.powi(n as i32) * (1..=n).map(f64::from).product::<f64>();
    let prefactor = 1.0 / ((2.0 * PI).sqrt() * norm * norm);

    let term = |sign: f64| -> Result<f64> {
        let center = sign * z / 2.0;
        // -z²/2 - 2ξ² + 2 sign z ξ, combined to avoid overflow at large z
        let integrand = |xi: f64| {
            let d = xi - center;
            let h1 = hermite_value(n, xi);
            let h2 = hermite_value(n, xi - sign * z);
            (-2.0 * d * d).exp() * h1 * h1 * h2 * h2
        };
        let mut half_width = 4.0;
        loop {
            let panels = (2.0 * half_width / INNER_PANEL_WIDTH).ceil() as usize;
            let est = rule().integrate_composite(
                integrand,
                center - half_width,
                center + half_width,
                panels,
            );
            let edge = integrand(center - half_width).abs() + integrand(center + half_width).abs();
            if edge <= 1e-16 * est.abs() {
                return Ok(est);
            }
            half_width += 2.0;
            if half_width > 64.0 {
                return Err(Error::Numerical {
                    message: format!("P_{n}({z}) oracle window did not converge"),
                    partial: est * prefactor,
                    error_estimate: edge,
                });
            }
        }
    };
    Ok(prefactor * (term(1.0)? + term(-1.0)?))
}

/// erf(√2ζ)/(2ζ) − √(2/π) without erf:
/// √(2/π)(ζ⁻¹∫₀^ζ e^{−2u²}du − 1), or √(2/π)∫₀¹ expm1(−2ζ²t²)dt near zero.
pub fn kernel_oracle(zeta: f64) -> f64 {
    let s = (2.0 / PI).sqrt();
    if zeta <= 0.5 {
        s * rule().integrate_composite(|t| (-2.0 * zeta * zeta * t * t).exp_m1(), 0.0, 1.0, 2)
    } else {
        let upper = zeta.min(7.0);
        let panels = (upper / 0.5).ceil() as usize;
        let mut integral = rule().integrate_composite(|u| (-2.0 * u * u).exp(), 0.0, upper, panels);
        if zeta > 7.0 {
            // remainder beyond 7 is below e^{-98}; use the complete integral
            integral = (PI / 8.0).sqrt();
        }
        s * (integral / zeta - 1.0)
    }
}

/// Composite Gauss–Legendre over ζ ∈ [0, z_max/α] of the f integrand,
/// with `panels` equal panels, for each requested level.
fn f_oracle_values(levels: &[u32], alpha: f64, panels: usize) -> Result<Vec<f64>> {
    let upper = OUTER_Z_MAX / alpha;
    let width = upper / panels as f64;
    let scale = alpha.powi(3) * (2.0 / PI).sqrt();
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|k| {
            let lo = width * k as f64;
            let hi = lo + width;
            let c = 0.5 * (lo + hi);
            let h = 0.5 * width;
            rule()
                .nodes()
                .iter()
                .zip(rule().weights())
                .map(move |(x, w)| (c + h * x, h * w))
        })
        .collect();
    let mut out = Vec::with_capacity(levels.len());
    for &n in levels {
        let mut sum = 0.0;
        for &(zeta, w) in &nodes {
            let z = alpha * zeta;
            sum += w * (-0.5 * z * z).exp() * p_eval_quadrature(n, z)? * kernel_oracle(zeta);
        }
        out.push(scale * sum);
    }
    Ok(out)
}

/// f_{n1}(α) − f_{n2}(α) by nested quadrature: the outer ζ rule is refined
/// by panel doubling until the difference changes by less than
/// [`OUTER_TOLERANCE`] (relative to 1 + |value|), and every outer node
/// evaluates P_n by [`p_eval_quadrature`].
pub fn f_diff_bruteforce(n1: u32, n2: u32, alpha: f64) -> Result<f64> {
    if n1 > F_ORACLE_MAX_N || n2 > F_ORACLE_MAX_N {
        return Err(Error::Capability(format!(
            "nested oracle is limited to n <= {F_ORACLE_MAX_N}, got ({n1}, {n2})"
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    if n1 == n2 {
        return Ok(0.0);
    }
    let mut panels = 8;
    let mut prev = {
        let v = f_oracle_values(&[n1, n2], alpha, panels)?;
        v[0] - v[1]
    };
    while panels < 1024 {
        panels *= 2;
        let v = f_oracle_values(&[n1, n2], alpha, panels)?;
        let cur = v[0] - v[1];
        if (cur - prev).abs() <= OUTER_TOLERANCE * (1.0 + cur.abs()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numerical {
        message: format!("nested oracle f_{n1} - f_{n2} at alpha={alpha} did not converge"),
        partial: prev,
        error_estimate: f64::NAN,
    })
}

/// A number q·√(r·π^k) with rational q, r; multiplication is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Surd {
    pub coefficient: BigRational,
    pub radicand: BigRational,
    pub pi_power: i32,
}

impl Surd {
    pub fn rational(q: BigRational) -> Self {
        Surd {
            coefficient: q,
            radicand: BigRational::one(),
            pi_power: 0,
        }
    }

    pub fn sqrt_of(r: BigRational, pi_power: i32) -> Self {
        Surd {
            coefficient: BigRational::one(),
            radicand: r,
            pi_power,
        }
    }

    pub fn mul(&self, o: &Surd) -> Surd {
        Surd {
            coefficient: &self.coefficient * &o.coefficient,
            radicand: &self.radicand * &o.radicand,
            pi_power: self.pi_power + o.pi_power,
        }
    }

    /// The exact rational value, when π cancels and the radicand is a
    /// perfect square.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.pi_power != 0 || self.radicand.is_negative() {
            return None;
        }
        let sqrt_int = |i: &BigInt| {
            let s = i.sqrt();
            (&s * &s == *i).then_some(s)
        };
        let num = sqrt_int(self.radicand.numer())?;
        let den = sqrt_int(self.radicand.denom())?;
        Some(&self.coefficient * BigRational::new(num, den))
    }
}

/// (3/8)√(2π) · (4/3)√(2/π), evaluated exactly.
pub fn narrow_limit_identity() -> Option<BigRational> {
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let g_prefactor = Surd::rational(r(3, 8)).mul(&Surd::sqrt_of(r(2, 1), 1));
    let narrow_slope = Surd::rational(r(4, 3)).mul(&Surd::sqrt_of(r(2, 1), -1));
    g_prefactor.mul(&narrow_slope).to_rational()
}

/// |g(n, n+1, α) − 1| for n < n_max; in the narrow limit every adjacent
/// coefficient tends to Δn = 1.
pub fn narrow_limit_check(
    n_max: u32,
    alpha_large: f64,
    config: &QuadratureConfig,
) -> Result<Vec<OracleReport>> {
    if !(alpha_large >= 20.0 && alpha_large.is_finite()) {
        return Err(Error::domain(format!(
            "narrow-limit check needs alpha >= 20, got {alpha_large}"
        )));
    }
    (0..n_max)
        .into_par_iter()
        .map(|n| {
            let g = g_coefficient(n, n + 1, alpha_large, config)?;
            Ok(OracleReport::new(
                format!("narrow_limit g({n},{}) alpha={alpha_large}", n + 1),
                g.g,
                1.0,
                NARROW_THRESHOLD,
                format!("adaptive rel_tol={:e}", config.rel_tol),
            ))
        })
        .collect()
}

fn oracle_settings() -> String {
    format!(
        "gauss-legendre-{RULE_ORDER} composite, inner panel {INNER_PANEL_WIDTH}, outer tol {OUTER_TOLERANCE:e}"
    )
}

/// The default verification suite: P_n against the quadrature oracle,
/// f differences against the nested oracle, and the narrow limit.
pub fn verification_suite(config: &QuadratureConfig) -> Result<Vec<OracleReport>> {
    let p_cases: Vec<(u32, f64)> = (0..=P_ORACLE_MAX_N)
        .flat_map(|n| [0.0, 0.5, 1.0, 2.0, 5.0, 10.0].map(move |z| (n, z)))
        .collect();
    let mut reports: Vec<OracleReport> = p_cases
        .par_iter()
        .map(|&(n, z)| {
            let analytic = crate::hermite::PCache::global().get(n)?.eval(z);
            let oracle = p_eval_quadrature(n, z)?;
            Ok(OracleReport::new(
                format!("P_{n}({z})"),
                analytic,
                oracle,
                P_THRESHOLD,
                oracle_settings(),
            ))
        })
        .collect::<Result<_>>()?;

    let f_cases: Vec<(u32, f64)> = [1.0, 3.0, 5.0, 10.0]
        .into_iter()
        .flat_map(|a| (0..F_ORACLE_MAX_N).map(move |n| (n, a)))
        .collect();
    let f_reports: Vec<OracleReport> = f_cases
        .par_iter()
        .map(|&(n, alpha)| {
            let analytic = f_tilde(n, alpha, config)?.value - f_tilde(n + 1, alpha, config)?.value;
            let oracle = f_diff_bruteforce(n, n + 1, alpha)?;
            Ok(OracleReport::new(
                format!("f_{n} - f_{} alpha={alpha}", n + 1),
                analytic,
                oracle,
                F_DIFF_THRESHOLD,
                oracle_settings(),
            ))
        })
        .collect::<Result<_>>()?;
    reports.extend(f_reports);

    let identity = narrow_limit_identity();
    let identity_value = identity
        .as_ref()
        .and_then(num_traits::ToPrimitive::to_f64)
        .unwrap_or(f64::NAN);
    let mut id_report = OracleReport::new(
        "narrow_identity (3/8)sqrt(2pi)(4/3)sqrt(2/pi)",
        identity_value,
        1.0,
        NARROW_THRESHOLD,
        "exact surd arithmetic",
    );
    if identity != Some(BigRational::one()) {
        id_report.relative_discrepancy = f64::INFINITY;
    } else {
        id_report.relative_discrepancy = 0.0;
    }
    reports.push(id_report);
    reports.extend(narrow_limit_check(3, 50.0, config)?);
    Ok(reports)
}
