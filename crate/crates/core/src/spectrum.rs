//! Spectral engine: the self-gravity kernel, the n-dependent part of f_n(α),
//! splitting coefficients g and absolute transition-frequency shifts.
//!
//! Only n-dependent quantities and differences are exposed. The additive
//! n-independent part of f_n drops out of every transition frequency, so it
//! is never computed.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hermite::PCache;
use crate::materials::Material;
use crate::quadrature::{integrate_adaptive, QuadratureConfig};
use crate::units::PhysicalConstants;

/// √(2/π)
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Below this separation the kernel is evaluated from its Taylor series.
pub const KERNEL_SERIES_SWITCH: f64 = 1e-3;

/// (3/8)·√(2π), the prefactor turning f differences into g.
pub fn g_prefactor() -> f64 {
    3.0 / 8.0 * (2.0 * PI).sqrt()
}

/// erf(√2 ζ)/(2ζ) − √(2/π).
///
/// Near zero the difference cancels catastrophically, so for
/// ζ < [`KERNEL_SERIES_SWITCH`] the series
/// √(2/π) Σ_{k≥1} (−2ζ²)^k / (k! (2k+1)) is summed to six terms.
pub fn kernel_k(zeta: f64) -> Result<f64> {
    if zeta.is_nan() || zeta < 0.0 {
        return Err(Error::domain(format!("kernel argument must be >= 0, got {zeta}")));
    }
    if zeta.is_infinite() {
        return Ok(-SQRT_2_OVER_PI);
    }
    Ok(kernel_unchecked(zeta))
}

#[inline]
fn kernel_unchecked(zeta: f64) -> f64 {
    if zeta < KERNEL_SERIES_SWITCH {
        let u = -2.0 * zeta * zeta;
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..=6 {
            term *= u / k as f64;
            sum += term / (2 * k + 1) as f64;
        }
        SQRT_2_OVER_PI * sum
    } else {
        libm::erf(std::f64::consts::SQRT_2 * zeta) / (2.0 * zeta) - SQRT_2_OVER_PI
    }
}

/// Quadrature value of the n-dependent part of f_n(α).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTilde {
    pub value: f64,
    pub error_estimate: f64,
    /// Upper limit of the ζ integration.
    pub zeta_cutoff: f64,
    /// Bound on the discarded tail beyond `zeta_cutoff`.
    pub tail_bound: f64,
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// α³√(2/π) ∫₀^∞ dζ e^{−α²ζ²/2} P_n(αζ) K(ζ), the n-dependent part of f_n(α).
pub fn f_tilde(n: u32, alpha: f64, config: &QuadratureConfig) -> Result<FTilde> {
    validate_alpha(alpha)?;
    config.validate()?;
    let p = PCache::global().get(n)?;

    // Envelope e^{-z²/2}·Σ|c_k|z^k in z = αζ; cut where it has dropped far
    // below its peak (with a z² margin for the kernel's small-ζ behaviour).
    let envelope = |z: f64| (-0.5 * z * z).exp() * p.abs_bound(z);
    let mut peak = envelope(0.0);
    let mut z_cut = 0.0;
    let step = 0.25;
    let target = 1e-6 * config.rel_tol;
    loop {
        z_cut += step;
        let e = envelope(z_cut);
        peak = peak.max(e);
        if z_cut > 2.0 && e * (1.0 + z_cut * z_cut) < target * peak {
            break;
        }
        if z_cut > 400.0 {
            return Err(Error::Numerical {
                message: format!("could not bound the P_{n} integrand tail"),
                partial: f64::NAN,
                error_estimate: f64::INFINITY,
            });
        }
    }
    let scale = alpha.powi(3) * SQRT_2_OVER_PI;
    let integrand = |zeta: f64| {
        let z = alpha * zeta;
        (-0.5 * z * z).exp() * p.eval(z) * kernel_unchecked(zeta)
    };
    let integrate = |lo: f64, hi: f64| {
        integrate_adaptive(integrand, lo, hi, config).map_err(|e| match e {
            Error::Numerical {
                message,
                partial,
                error_estimate,
            } => Error::Numerical {
                message: format!("f_tilde(n={n}, alpha={alpha}): {message}"),
                partial: partial * scale,
                error_estimate: error_estimate * scale,
            },
            other => other,
        })
    };

    // ∫_{z_c}^∞ e^{-z²/2} B(z) dz ≤ e(z_c)/(z_c − deg/z_c) once z_c² > deg;
    // in ζ units the tail of f is at most α²(2/π) times that.
    let deg = p.degree().unwrap_or(0) as f64;
    let tail_bound_at = |z: f64| {
        if z * z > deg + 1.0 {
            alpha * alpha * SQRT_2_OVER_PI * SQRT_2_OVER_PI * envelope(z) / (z - deg / z)
        } else {
            f64::INFINITY
        }
    };

    let first = integrate(0.0, z_cut / alpha)?;
    let mut value = first.value;
    let mut error = first.error_estimate;
    // extend the cutoff until the discarded tail is well inside tolerance
    let mut tail_bound = tail_bound_at(z_cut);
    while tail_bound > 1e-2 * config.rel_tol * (scale * value).abs() && z_cut < 400.0 {
        let next = z_cut + 1.0;
        let piece = integrate(z_cut / alpha, next / alpha)?;
        value += piece.value;
        error += piece.error_estimate;
        z_cut = next;
        tail_bound = tail_bound_at(z_cut);
    }

    Ok(FTilde {
        value: scale * value,
        error_estimate: scale * error,
        zeta_cutoff: z_cut / alpha,
        tail_bound,
    })
}

/// Splitting coefficient with its propagated quadrature error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GCoefficient {
    pub g: f64,
    pub f_tilde_n1: f64,
    pub f_tilde_n2: f64,
    pub error_estimate: f64,
}

fn validate_levels(n1: u32, n2: u32) -> Result<()> {
    if n2 <= n1 {
        return Err(Error::domain(format!(
            "transition requires n2 > n1, got n1={n1}, n2={n2}"
        )));
    }
    Ok(())
}

/// g_{n1 n2}(α) = (3/8)√(2π)(f_{n1}(α) − f_{n2}(α)) for n2 > n1.
pub fn g_coefficient(n1: u32, n2: u32, alpha: f64, config: &QuadratureConfig) -> Result<GCoefficient> {
    validate_levels(n1, n2)?;
    let f1 = f_tilde(n1, alpha, config)?;
    let f2 = f_tilde(n2, alpha, config)?;
    Ok(g_from_parts(&f1, &f2))
}

fn g_from_parts(f1: &FTilde, f2: &FTilde) -> GCoefficient {
    let pre = g_prefactor();
    GCoefficient {
        g: pre * (f1.value - f2.value),
        f_tilde_n1: f1.value,
        f_tilde_n2: f2.value,
        error_estimate: pre * (f1.error_estimate + f2.error_estimate + f1.tail_bound + f2.tail_bound),
    }
}

/// All adjacent coefficients g(n, n+1, α) for n < `n_max`, sharing the
/// f evaluations.
pub fn adjacent_g(n_max: u32, alpha: f64, config: &QuadratureConfig) -> Result<Vec<GCoefficient>> {
    let f: Vec<FTilde> = (0..=n_max)
        .map(|n| f_tilde(n, alpha, config))
        .collect::<Result<_>>()?;
    Ok(f.windows(2).map(|w| g_from_parts(&w[0], &w[1])).collect())
}

/// A harmonically trapped particle; α is derived at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapState {
    mass: f64,
    omega0: f64,
    sigma: f64,
    alpha: f64,
}

impl TrapState {
    /// Total mass (kg), trap angular frequency (rad/s), nuclear localization (m).
    pub fn new(mass: f64, omega0: f64, sigma: f64, constants: &PhysicalConstants) -> Result<Self> {
        for (what, v) in [("mass", mass), ("omega0", omega0), ("sigma", sigma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{what} must be positive, got {v}")));
            }
        }
        let alpha = 2.0 * sigma * (mass * omega0 / constants.hbar).sqrt();
        Ok(TrapState {
            mass,
            omega0,
            sigma,
            alpha,
        })
    }

    pub fn for_material(
        material: &Material,
        mass: f64,
        omega0: f64,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        Self::new(mass, omega0, material.sigma(), constants)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// 2σ√(Mω₀/ħ)
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Frequency shift of one transition n1 → n2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftResult {
    pub n1: u32,
    pub n2: u32,
    pub alpha: f64,
    pub f_tilde_n1: f64,
    pub f_tilde_n2: f64,
    pub g: f64,
    /// Δω_SN for the material and trap frequency, rad/s.
    pub delta_omega_sn: f64,
    /// Δω_SN·g, rad/s.
    pub delta_omega: f64,
    /// Absolute error estimate on g.
    pub quadrature_error_estimate: f64,
}

/// √(2/π)·G·m/(3ω₀σ³): the narrow-wavefunction transition shift.
pub fn delta_omega_sn(material: &Material, omega0: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::domain(format!("omega0 must be positive, got {omega0}")));
    }
    let sigma = material.sigma();
    Ok(SQRT_2_OVER_PI * constants.g * material.atomic_mass() / (3.0 * omega0 * sigma.powi(3)))
}

/// Physical constants plus quadrature settings: everything needed to turn
/// a material and a trap into frequency shifts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectrumEngine {
    pub constants: PhysicalConstants,
    pub quadrature: QuadratureConfig,
}

impl SpectrumEngine {
    pub fn new(constants: PhysicalConstants, quadrature: QuadratureConfig) -> Self {
        SpectrumEngine {
            constants,
            quadrature,
        }
    }

    pub fn delta_omega_sn(&self, material: &Material, omega0: f64) -> Result<f64> {
        delta_omega_sn(material, omega0, &self.constants)
    }

    pub fn trap(&self, material: &Material, mass: f64, omega0: f64) -> Result<TrapState> {
        TrapState::for_material(material, mass, omega0, &self.constants)
    }

    pub fn g_coefficient(&self, n1: u32, n2: u32, alpha: f64) -> Result<GCoefficient> {
        g_coefficient(n1, n2, alpha, &self.quadrature)
    }

    pub fn transition_shift(
        &self,
        material: &Material,
        trap: &TrapState,
        n1: u32,
        n2: u32,
    ) -> Result<ShiftResult> {
        validate_levels(n1, n2)?;
        if (trap.sigma() - material.sigma()).abs() > 1e-12 * material.sigma() {
            return Err(Error::Consistency(format!(
                "trap sigma {:e} m does not match {} sigma {:e} m",
                trap.sigma(),
                material.name(),
                material.sigma()
            )));
        }
        let dw_sn = self.delta_omega_sn(material, trap.omega0())?;
        let g = self.g_coefficient(n1, n2, trap.alpha())?;
        Ok(ShiftResult {
            n1,
            n2,
            alpha: trap.alpha(),
            f_tilde_n1: g.f_tilde_n1,
            f_tilde_n2: g.f_tilde_n2,
            g: g.g,
            delta_omega_sn: dw_sn,
            delta_omega: dw_sn * g.g,
            quadrature_error_estimate: g.error_estimate,
        })
    }

    /// n-dependent part of the narrow-regime level shift ΔE_n/ħ, rad/s:
    /// Δω_SN·(n + ½). Adjacent levels differ by exactly Δω_SN; the
    /// mass-dependent n-independent offset is not included.
    pub fn narrow_level_shift(&self, material: &Material, omega0: f64, n: u32) -> Result<f64> {
        Ok(self.delta_omega_sn(material, omega0)? * (n as f64 + 0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialDatabase;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn kernel_limits() {
        assert_eq!(kernel_k(0.0).unwrap(), 0.0);
        assert_eq!(kernel_k(f64::INFINITY).unwrap(), -SQRT_2_OVER_PI);
        assert!(rel(kernel_k(1e6).unwrap(), -SQRT_2_OVER_PI) < 1e-6);
        assert!(kernel_k(-1e-9).is_err());
        assert!(kernel_k(f64::NAN).is_err());
        assert!(rel(SQRT_2_OVER_PI, (2.0 / PI).sqrt()) < 1e-15);
    }

    #[test]
    fn kernel_leading_series_term() {
        let zeta = 0.01;
        let leading = -SQRT_2_OVER_PI * (2.0 / 3.0) * zeta * zeta;
        let k = kernel_k(zeta).unwrap();
        // next term is +√(2/π)·(2/5)ζ⁴
        assert!((k - leading).abs() < SQRT_2_OVER_PI * 0.5 * zeta.powi(4));
        // direct erf evaluation at 0.02 is comfortably away from cancellation
        let direct = libm::erf(std::f64::consts::SQRT_2 * 0.02) / 0.04 - SQRT_2_OVER_PI;
        assert!(rel(kernel_k(0.02).unwrap(), direct) < 1e-15);
    }

    #[test]
    fn kernel_continuous_at_switch() {
        let below = kernel_k(KERNEL_SERIES_SWITCH * (1.0 - 1e-12)).unwrap();
        let above = kernel_k(KERNEL_SERIES_SWITCH).unwrap();
        assert!((below - above).abs() < 1e-13, "{below} vs {above}");
    }

    #[test]
    fn kernel_is_nonpositive_and_decreasing() {
        let mut prev = 0.0;
        for i in 1..2000 {
            let k = kernel_k(i as f64 * 0.005).unwrap();
            assert!(k < 0.0);
            assert!(k <= prev + 1e-16);
            prev = k;
        }
    }

    #[test]
    fn f_tilde_is_negative_and_finite() {
        let cfg = QuadratureConfig::default();
        for n in [0, 1, 5, 12] {
            for alpha in [0.1, 1.0, 5.0, 50.0] {
                let f = f_tilde(n, alpha, &cfg).unwrap();
                assert!(f.value.is_finite() && f.value < 0.0, "n={n} a={alpha}: {f:?}");
                assert!(f.tail_bound <= 1e-2 * cfg.rel_tol * f.value.abs());
            }
        }
    }

    #[test]
    fn f_tilde_vanishes_for_wide_wavefunctions() {
        let cfg = QuadratureConfig::default();
        let small = f_tilde(0, 1e-3, &cfg).unwrap().value.abs();
        let smaller = f_tilde(0, 1e-4, &cfg).unwrap().value.abs();
        assert!(small < 1e-5);
        assert!(smaller < small / 50.0);
    }

    #[test]
    fn narrow_limit_f_difference() {
        let cfg = QuadratureConfig::default();
        let d = f_tilde(0, 50.0, &cfg).unwrap().value - f_tilde(1, 50.0, &cfg).unwrap().value;
        let target = 4.0 / 3.0 * SQRT_2_OVER_PI;
        assert!((d - target).abs() < 0.05 * target, "{d} vs {target}");
    }

    #[test]
    fn f_tilde_rejects_bad_alpha() {
        let cfg = QuadratureConfig::default();
        assert!(f_tilde(0, 0.0, &cfg).is_err());
        assert!(f_tilde(0, -1.0, &cfg).is_err());
        assert!(f_tilde(0, f64::NAN, &cfg).is_err());
    }

    #[test]
    fn g_reference_values() {
        // reference values from an independent 30-digit evaluation
        let cfg = QuadratureConfig::default();
        let cases = [
            (0, 1, 0.1, 0.000_345_657_488_9),
            (0, 1, 1.0, 0.118_570_316),
            (0, 1, 5.0, 0.818_800_120_4),
            (2, 3, 3.0, 0.295_604_741_9),
            (12, 13, 5.0, 0.197_890_684_5),
            (0, 1, 50.0, 0.997_844_106_8),
        ];
        for (n1, n2, alpha, expect) in cases {
            let g = g_coefficient(n1, n2, alpha, &cfg).unwrap();
            assert!(rel(g.g, expect) < 1e-8, "g({n1},{n2},{alpha}) = {} vs {expect}", g.g);
        }
        let g02 = g_coefficient(0, 2, 50.0, &cfg).unwrap().g;
        assert!(rel(g02, 1.993_538_465_870_867) < 1e-9);
    }

    #[test]
    fn g_requires_ordered_levels() {
        let cfg = QuadratureConfig::default();
        assert!(g_coefficient(1, 1, 1.0, &cfg).is_err());
        assert!(g_coefficient(2, 1, 1.0, &cfg).is_err());
    }

    #[test]
    fn adjacent_g_matches_pairwise() {
        let cfg = QuadratureConfig::default();
        let all = adjacent_g(4, 3.0, &cfg).unwrap();
        assert_eq!(all.len(), 4);
        for (n, g) in all.iter().enumerate() {
            let single = g_coefficient(n as u32, n as u32 + 1, 3.0, &cfg).unwrap();
            assert_eq!(g.g, single.g);
        }
    }

    #[test]
    fn trap_alpha() {
        let c = PhysicalConstants::CODATA_2018;
        let t = TrapState::new(1e15 * c.amu, 2.0 * PI * 10.0, 2.77e-12, &c).unwrap();
        let expect = 2.0 * 2.77e-12 * (1e15 * c.amu * 2.0 * PI * 10.0 / c.hbar).sqrt();
        assert!(rel(t.alpha(), expect) < 1e-12);
        assert!((t.alpha() - 5.5).abs() < 0.1);
        assert!(TrapState::new(0.0, 1.0, 1.0, &c).is_err());
        assert!(TrapState::new(1.0, -1.0, 1.0, &c).is_err());
    }

    #[test]
    fn table_values() {
        let db = MaterialDatabase::builtin();
        let c = PhysicalConstants::CODATA_2018;
        for (name, expect) in [
            ("silicon", 0.00246),
            ("tungsten", 0.128),
            ("osmium", 0.264),
            ("gold", 0.0574),
        ] {
            let v = delta_omega_sn(db.lookup(name).unwrap(), 1.0, &c).unwrap();
            assert!(rel(v, expect) < 0.01, "{name}: {v}");
        }
        let os = db.lookup("osmium").unwrap();
        let w = 2.0 * PI * 10.0;
        assert!(rel(delta_omega_sn(os, w, &c).unwrap(), 0.264 / w) < 0.01);
        assert!(delta_omega_sn(os, 0.0, &c).is_err());
    }

    #[test]
    fn narrow_level_shifts() {
        let db = MaterialDatabase::builtin();
        let engine = SpectrumEngine::default();
        let si = db.lookup("silicon").unwrap();
        let dw = engine.delta_omega_sn(si, 1.0).unwrap();
        assert!(rel(engine.narrow_level_shift(si, 1.0, 0).unwrap(), dw / 2.0) < 1e-15);
        assert!(rel(engine.narrow_level_shift(si, 1.0, 1).unwrap(), 1.5 * 0.00246) < 0.01);
        for n in 0..20 {
            let d = engine.narrow_level_shift(si, 1.0, n + 1).unwrap()
                - engine.narrow_level_shift(si, 1.0, n).unwrap();
            assert!(rel(d, dw) < 1e-12);
        }
    }

    #[test]
    fn transition_shift_assembly() {
        let db = MaterialDatabase::builtin();
        let engine = SpectrumEngine::default();
        let os = db.lookup("osmium").unwrap();
        let trap = engine
            .trap(os, 1e15 * engine.constants.amu, 2.0 * PI * 10.0)
            .unwrap();
        let s = engine.transition_shift(os, &trap, 0, 1).unwrap();
        assert!(rel(s.delta_omega, s.delta_omega_sn * s.g) < 1e-12);
        assert!(s.delta_omega > 1e-4 && s.delta_omega < 1e-2, "{s:?}");
        assert!(s.quadrature_error_estimate < 1e-8);

        let si = db.lookup("silicon").unwrap();
        assert!(matches!(
            engine.transition_shift(si, &trap, 0, 1),
            Err(Error::Consistency(_))
        ));
        assert!(engine.transition_shift(os, &trap, 1, 0).is_err());
    }

    #[test]
    fn zero_gravity_gives_zero_shift() {
        let db = MaterialDatabase::builtin();
        let engine = SpectrumEngine {
            constants: PhysicalConstants {
                g: 0.0,
                ..PhysicalConstants::CODATA_2018
            },
            ..Default::default()
        };
        let os = db.lookup("osmium").unwrap();
        let trap = engine.trap(os, 1e15 * engine.constants.amu, 10.0).unwrap();
        assert_eq!(engine.transition_shift(os, &trap, 0, 1).unwrap().delta_omega, 0.0);
    }
}
