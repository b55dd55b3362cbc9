//! Experiment sizing: α ↔ mass ↔ geometry, mass and α scans of the
//! spectrum, and the blackbody Rayleigh scattering background.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::materials::Material;
use crate::quadrature::QuadratureConfig;
use crate::spectrum::{adjacent_g, SpectrumEngine};
use crate::units::PhysicalConstants;

/// Riemann ζ(7).
pub const ZETA_7: f64 = 1.008_349_277_381_922_8;

/// Regime thresholds: a point is "wide" when every |g| is below this, and
/// "narrow" when the spread of g across levels is below this fraction of
/// their mean.
pub const WIDE_G_THRESHOLD: f64 = 0.05;
pub const NARROW_SPREAD_THRESHOLD: f64 = 0.05;

fn positive(what: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::domain(format!("{what} must be positive, got {v}")));
    }
    Ok(())
}

/// α = 2σ√(Mω₀/ħ)
pub fn alpha_of(mass: f64, omega0: f64, sigma: f64, constants: &PhysicalConstants) -> Result<f64> {
    positive("mass", mass)?;
    positive("omega0", omega0)?;
    positive("sigma", sigma)?;
    Ok(2.0 * sigma * (mass * omega0 / constants.hbar).sqrt())
}

/// Total mass giving width parameter α: ħα²/(4σ²ω₀).
pub fn mass_for_alpha(alpha: f64, omega0: f64, sigma: f64, constants: &PhysicalConstants) -> Result<f64> {
    positive("alpha", alpha)?;
    positive("omega0", omega0)?;
    positive("sigma", sigma)?;
    Ok(constants.hbar * alpha * alpha / (4.0 * sigma * sigma * omega0))
}

/// Diameter of a homogeneous sphere of mass M and density ρ.
pub fn sphere_diameter(mass: f64, density: f64) -> Result<f64> {
    positive("mass", mass)?;
    positive("density", density)?;
    Ok(2.0 * (3.0 * mass / (4.0 * PI * density)).cbrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParticleGeometry {
    Sphere { radius: f64 },
    /// A flat cylinder.
    Disc { diameter: f64, thickness: f64 },
}

impl ParticleGeometry {
    pub fn sphere(radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(ParticleGeometry::Sphere { radius })
    }

    pub fn disc(diameter: f64, thickness: f64) -> Result<Self> {
        positive("diameter", diameter)?;
        positive("thickness", thickness)?;
        Ok(ParticleGeometry::Disc {
            diameter,
            thickness,
        })
    }

    pub fn volume(&self) -> f64 {
        match *self {
            ParticleGeometry::Sphere { radius } => 4.0 * PI * radius.powi(3) / 3.0,
            ParticleGeometry::Disc {
                diameter,
                thickness,
            } => PI * thickness * diameter * diameter / 4.0,
        }
    }

    pub fn mass(&self, density: f64) -> f64 {
        self.volume() * density
    }
}

/// Blackbody Rayleigh scattering of a sub-wavelength superconducting particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighEstimate {
    pub temperature: f64,
    pub volume: f64,
    /// Polarizability volume 3V, m³.
    pub chi: f64,
    /// Thermal wavelength hc/(k_B T), m.
    pub lambda_t: f64,
    /// 30720 π⁵ ζ(7) c χ²/λ_T⁷, s⁻¹.
    pub gamma_r: f64,
    /// The same with the prefactor rounded to 10⁷.
    pub gamma_r_rounded: f64,
}

pub fn rayleigh_prefactor() -> f64 {
    30_720.0 * PI.powi(5) * ZETA_7
}

pub fn rayleigh_rate(
    temperature: f64,
    geometry: &ParticleGeometry,
    constants: &PhysicalConstants,
) -> Result<RayleighEstimate> {
    positive("temperature", temperature)?;
    let volume = geometry.volume();
    positive("particle volume", volume)?;
    let chi = 3.0 * volume;
    let lambda_t = constants.h * constants.c / (constants.k_b * temperature);
    let base = constants.c * chi * chi / lambda_t.powi(7);
    Ok(RayleighEstimate {
        temperature,
        volume,
        chi,
        lambda_t,
        gamma_r: rayleigh_prefactor() * base,
        gamma_r_rounded: 1e7 * base,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// Self-gravity negligible, all lines at ω₀.
    Wide,
    /// Lines split: g depends on n.
    Intermediate,
    /// Lines degenerate again at ω₀ + Δω_SN.
    Narrow,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Wide => "wide",
            Regime::Intermediate => "intermediate",
            Regime::Narrow => "narrow",
        }
    }

    /// Classify from the adjacent-level coefficients at one mass.
    pub fn classify(gs: &[f64]) -> Regime {
        let max_abs = gs.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if max_abs < WIDE_G_THRESHOLD {
            return Regime::Wide;
        }
        let (lo, hi) = gs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &g| (lo.min(g), hi.max(g)));
        let mean = gs.iter().sum::<f64>() / gs.len() as f64;
        if hi - lo < NARROW_SPREAD_THRESHOLD * mean.abs() {
            Regime::Narrow
        } else {
            Regime::Intermediate
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `points` log-spaced values from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    positive("grid minimum", min)?;
    positive("grid maximum", max)?;
    if max <= min {
        return Err(Error::domain(format!("grid range must increase: {min} .. {max}")));
    }
    if points < 2 {
        return Err(Error::domain(format!("grid needs at least 2 points, got {points}")));
    }
    let (lmin, lmax) = (min.ln(), max.ln());
    let step = (lmax - lmin) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| (lmin + step * i as f64).exp()).collect();
    grid[0] = min;
    grid[points - 1] = max;
    Ok(grid)
}

/// One adjacent-level spectral line n → n+1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumLine {
    pub n1: u32,
    pub n2: u32,
    pub g: f64,
    pub g_error: f64,
    /// Δω_SN·g, rad/s.
    pub delta_omega: f64,
    /// ω₀ + Δω_SN·g, rad/s.
    pub line_frequency: f64,
}

impl SpectrumLine {
    pub fn line_frequency_hz(&self) -> f64 {
        self.line_frequency / (2.0 * PI)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub index: usize,
    pub mass: f64,
    pub alpha: f64,
    /// Ok with one line per level, or the reason this point failed.
    pub outcome: std::result::Result<(Regime, Vec<SpectrumLine>), String>,
}

impl ScanPoint {
    pub fn regime(&self) -> Option<Regime> {
        self.outcome.as_ref().ok().map(|(r, _)| *r)
    }

    pub fn lines(&self) -> &[SpectrumLine] {
        self.outcome.as_ref().map(|(_, l)| l.as_slice()).unwrap_or(&[])
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumScan {
    pub material: Material,
    pub omega0: f64,
    pub delta_omega_sn: f64,
    pub n_max: u32,
    pub points: Vec<ScanPoint>,
}

impl SpectrumScan {
    pub fn mass_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mass).collect()
    }

    /// Width in decades of mass of the intermediate band, measured between
    /// the geometric midpoints of the grid cells where the label changes.
    /// `None` if no point is intermediate or the band touches the grid edge.
    pub fn intermediate_band_decades(&self) -> Option<f64> {
        let labels: Vec<Option<Regime>> = self.points.iter().map(ScanPoint::regime).collect();
        let first = labels.iter().position(|r| *r == Some(Regime::Intermediate))?;
        let last = labels.iter().rposition(|r| *r == Some(Regime::Intermediate))?;
        if first == 0 || last + 1 == labels.len() {
            return None;
        }
        let lo = (self.points[first - 1].mass * self.points[first].mass).sqrt();
        let hi = (self.points[last].mass * self.points[last + 1].mass).sqrt();
        Some((hi / lo).log10())
    }

    /// True when the labels run wide → intermediate → narrow without
    /// interleaving (failed points are ignored).
    pub fn regimes_monotone(&self) -> bool {
        let labels: Vec<Regime> = self.points.iter().filter_map(ScanPoint::regime).collect();
        labels.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Spectrum of adjacent-level lines over a log-spaced mass grid.
///
/// Points are computed in parallel; a quadrature failure at one mass is
/// recorded on that point and the scan continues.
pub fn scan_spectrum(
    engine: &SpectrumEngine,
    material: &Material,
    omega0: f64,
    mass_min: f64,
    mass_max: f64,
    points: usize,
    n_max: u32,
) -> Result<SpectrumScan> {
    if n_max < 1 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let grid = log_grid(mass_min, mass_max, points)?;
    let dw_sn = engine.delta_omega_sn(material, omega0)?;
    let computed: Vec<ScanPoint> = grid
        .par_iter()
        .enumerate()
        .map(|(index, &mass)| {
            let alpha = engine.trap(material, mass, omega0).map(|t| t.alpha());
            let outcome = alpha
                .and_then(|alpha| adjacent_g(n_max, alpha, &engine.quadrature))
                .map(|gs| {
                    let regime = Regime::classify(&gs.iter().map(|g| g.g).collect::<Vec<_>>());
                    let lines = gs
                        .iter()
                        .enumerate()
                        .map(|(n, g)| {
                            let delta_omega = dw_sn * g.g;
                            SpectrumLine {
                                n1: n as u32,
                                n2: n as u32 + 1,
                                g: g.g,
                                g_error: g.error_estimate,
                                delta_omega,
                                line_frequency: omega0 + delta_omega,
                            }
                        })
                        .collect();
                    (regime, lines)
                })
                .map_err(|e| e.to_string());
            ScanPoint {
                index,
                mass,
                alpha: alpha_of(mass, omega0, material.sigma(), &engine.constants)
                    .unwrap_or(f64::NAN),
                outcome,
            }
        })
        .collect();
    Ok(SpectrumScan {
        material: material.clone(),
        omega0,
        delta_omega_sn: dw_sn,
        n_max,
        points: computed,
    })
}

/// g(n, n+1, α) for n < n_max at one α.
#[derive(Debug, Clone, PartialEq)]
pub struct GCurvePoint {
    pub index: usize,
    pub alpha: f64,
    /// g values indexed by n1, or the failure message.
    pub outcome: std::result::Result<Vec<f64>, String>,
}

/// The family of adjacent-transition curves g(α) on a log-spaced α grid.
pub fn g_curves(
    alpha_min: f64,
    alpha_max: f64,
    points: usize,
    n_max: u32,
    config: &QuadratureConfig,
) -> Result<Vec<GCurvePoint>> {
    if n_max < 1 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let grid = if points == 1 && alpha_min == alpha_max {
        positive("alpha", alpha_min)?;
        vec![alpha_min]
    } else {
        log_grid(alpha_min, alpha_max, points)?
    };
    Ok(grid
        .par_iter()
        .enumerate()
        .map(|(index, &alpha)| GCurvePoint {
            index,
            alpha,
            outcome: adjacent_g(n_max, alpha, config)
                .map(|gs| gs.into_iter().map(|g| g.g).collect())
                .map_err(|e| e.to_string()),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialDatabase;

    const C: PhysicalConstants = PhysicalConstants::CODATA_2018;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn alpha_reference_point() {
        let a = alpha_of(1e15 * C.amu, 2.0 * PI * 10.0, 2.77e-12, &C).unwrap();
        assert!((a - 5.5104).abs() < 1e-3, "{a}");
    }

    #[test]
    fn alpha_square_root_scaling() {
        let base = alpha_of(1e-10, 3.0, 4e-12, &C).unwrap();
        assert!(rel(alpha_of(4e-10, 3.0, 4e-12, &C).unwrap(), 2.0 * base) < 1e-14);
        assert!(rel(alpha_of(1e-10, 12.0, 4e-12, &C).unwrap(), 2.0 * base) < 1e-14);
        assert!(alpha_of(0.0, 1.0, 1.0, &C).is_err());
    }

    #[test]
    fn mass_for_alpha_inverse() {
        let sigma = 2.77e-12;
        let m = mass_for_alpha(5.0, 2.0 * PI, sigma, &C).unwrap() / C.amu;
        assert!(m > 0.5e16 && m < 2e16, "{m}");
        let m10 = mass_for_alpha(5.0, 2.0 * PI * 10.0, sigma, &C).unwrap() / C.amu;
        assert!(rel(m10, m / 10.0) < 1e-14);
        for alpha in [0.01, 1.0, 5.0, 123.0] {
            let mass = mass_for_alpha(alpha, 7.0, sigma, &C).unwrap();
            assert!(rel(alpha_of(mass, 7.0, sigma, &C).unwrap(), alpha) < 1e-12);
        }
    }

    #[test]
    fn sphere_diameter_cases() {
        let os = 22_570.0;
        let d = sphere_diameter(1e15 * C.amu, os).unwrap();
        assert!(rel(d, 5.2e-6) < 0.02, "{d}");
        let d8 = sphere_diameter(8e15 * C.amu, os).unwrap();
        assert!(rel(d8, 2.0 * d) < 1e-14);
        assert!(rel(sphere_diameter(4.0 * PI * 3.0 / 3.0, 3.0).unwrap(), 2.0) < 1e-15);
        assert!(sphere_diameter(-1.0, 1.0).is_err());
    }

    #[test]
    fn geometry_volumes() {
        let s = ParticleGeometry::sphere(1e-6).unwrap();
        assert!(rel(s.volume(), 4.0 / 3.0 * PI * 1e-18) < 1e-12);
        let d = ParticleGeometry::disc(3e-6, 1e-6).unwrap();
        assert!(rel(d.volume(), PI / 4.0 * 9e-18) < 1e-12);
        assert!(rel(d.mass(2.0), 2.0 * d.volume()) < 1e-15);
        assert!(ParticleGeometry::disc(0.0, 1.0).is_err());
        assert!(ParticleGeometry::sphere(-1.0).is_err());
    }

    #[test]
    fn rayleigh_supplement_numbers() {
        let disc = ParticleGeometry::disc(3e-6, 1e-6).unwrap();
        let r = rayleigh_rate(0.1, &disc, &C).unwrap();
        assert!(rel(r.lambda_t, 0.144) < 0.02, "{}", r.lambda_t);
        assert_eq!(r.chi, 3.0 * r.volume);
        assert!(r.gamma_r > 1e-12 / 3.0 && r.gamma_r < 3e-12, "{}", r.gamma_r);
        assert!(rel(r.gamma_r_rounded, r.gamma_r) < 0.1);
        let sphere = ParticleGeometry::sphere(1e-6).unwrap();
        let rs = rayleigh_rate(0.1, &sphere, &C).unwrap();
        assert!(rs.gamma_r > 1e-13 && rs.gamma_r < 1e-11);
        assert!(rayleigh_rate(0.0, &disc, &C).is_err());
    }

    #[test]
    fn rayleigh_scaling_laws() {
        let disc = ParticleGeometry::disc(3e-6, 1e-6).unwrap();
        let a = rayleigh_rate(0.1, &disc, &C).unwrap();
        let b = rayleigh_rate(0.2, &disc, &C).unwrap();
        assert!(rel(b.gamma_r / a.gamma_r, 128.0) < 1e-12);
        let thick = ParticleGeometry::disc(3e-6, 2e-6).unwrap();
        let c = rayleigh_rate(0.1, &thick, &C).unwrap();
        assert!(rel(c.gamma_r / a.gamma_r, 4.0) < 1e-12);
    }

    #[test]
    fn zeta7_value() {
        let direct: f64 = (1..200_000).rev().map(|k| (k as f64).powi(-7)).sum();
        assert!(rel(ZETA_7, direct) < 1e-15);
    }

    #[test]
    fn regime_classification() {
        assert_eq!(Regime::classify(&[0.01, 0.004, 0.001]), Regime::Wide);
        assert_eq!(Regime::classify(&[0.99, 0.98, 0.975]), Regime::Narrow);
        assert_eq!(Regime::classify(&[0.8, 0.6, 0.4]), Regime::Intermediate);
        assert!(Regime::Wide < Regime::Intermediate && Regime::Intermediate < Regime::Narrow);
    }

    #[test]
    fn log_grid_properties() {
        let g = log_grid(1e13, 1e18, 11).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 1e13);
        assert_eq!(g[10], 1e18);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(rel(g[2], 1e14) < 1e-12);
        assert!(log_grid(1.0, 1.0, 3).is_err());
        assert!(log_grid(1.0, 2.0, 1).is_err());
        assert!(log_grid(0.0, 2.0, 3).is_err());
    }

    #[test]
    fn scan_is_consistent_and_deterministic() {
        let db = MaterialDatabase::builtin();
        let os = db.lookup("osmium").unwrap();
        let engine = SpectrumEngine::default();
        let w = 2.0 * PI * 10.0;
        let scan = scan_spectrum(&engine, os, w, 1e13 * C.amu, 1e18 * C.amu, 6, 4).unwrap();
        assert_eq!(scan.points.len(), 6);
        for p in &scan.points {
            assert_eq!(p.lines().len(), 4);
            for line in p.lines() {
                assert!(rel(line.delta_omega, scan.delta_omega_sn * line.g) < 1e-12);
                assert!(rel(line.line_frequency, w + scan.delta_omega_sn * line.g) < 1e-12);
            }
        }
        assert!(scan.regimes_monotone());
        assert_eq!(scan.points[0].regime(), Some(Regime::Wide));
        assert_eq!(scan.points[5].regime(), Some(Regime::Narrow));
        let again = scan_spectrum(&engine, os, w, 1e13 * C.amu, 1e18 * C.amu, 6, 4).unwrap();
        assert_eq!(scan.points, again.points);
    }

    #[test]
    fn scan_without_gravity_has_no_shift() {
        let db = MaterialDatabase::builtin();
        let gold = db.lookup("gold").unwrap();
        let engine = SpectrumEngine {
            constants: PhysicalConstants { g: 0.0, ..C },
            ..Default::default()
        };
        let scan = scan_spectrum(&engine, gold, 10.0, 1e-12, 1e-9, 3, 2).unwrap();
        for p in &scan.points {
            for l in p.lines() {
                assert_eq!(l.delta_omega, 0.0);
                assert_eq!(l.line_frequency, 10.0);
            }
        }
    }

    #[test]
    fn same_atomic_ratio_same_scale() {
        let a = Material::new("a", 1e-25, 1000.0, 3e-12, 0.1).unwrap();
        let b = Material::new("b", 1e-25, 5000.0, 3e-12, 0.1).unwrap();
        let e = SpectrumEngine::default();
        assert_eq!(e.delta_omega_sn(&a, 3.0).unwrap(), e.delta_omega_sn(&b, 3.0).unwrap());
    }

    #[test]
    fn scan_flags_failed_points() {
        let db = MaterialDatabase::builtin();
        let os = db.lookup("osmium").unwrap();
        let engine = SpectrumEngine {
            quadrature: QuadratureConfig {
                max_intervals: 1,
                rel_tol: 1e-14,
                abs_tol: 0.0,
            },
            ..Default::default()
        };
        let scan = scan_spectrum(&engine, os, 10.0, 1e-12, 1e-10, 3, 3).unwrap();
        assert!(scan.points.iter().all(|p| p.outcome.is_err()));
        assert!(scan.points.iter().all(|p| p.lines().is_empty()));
    }

    #[test]
    fn g_curves_single_point() {
        let cfg = QuadratureConfig::default();
        let pts = g_curves(50.0, 50.0, 1, 13, &cfg).unwrap();
        let gs = pts[0].outcome.as_ref().unwrap();
        assert_eq!(gs.len(), 13);
        assert!(gs.iter().all(|g| (g - 1.0).abs() < 0.05));
        let pts = g_curves(0.1, 0.1, 1, 13, &cfg).unwrap();
        assert!(pts[0].outcome.as_ref().unwrap().iter().all(|g| *g < 0.01 && *g > 0.0));
    }
}
