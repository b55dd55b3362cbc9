//! Command-line front end: argument parsing, dispatch, and record emission.
//! `main.rs` only wires this to the process.

pub mod records;

use std::ffi::OsString;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use selfgrav::experiment::{
    g_curves, mass_for_alpha, rayleigh_rate, scan_spectrum, sphere_diameter, ParticleGeometry,
};
use selfgrav::hermite::{write_coefficients, PCache};
use selfgrav::materials::MaterialDatabase;
use selfgrav::oracle::verification_suite;
use selfgrav::quadrature::QuadratureConfig;
use selfgrav::spectrum::SpectrumEngine;
use selfgrav::units::{Dimension, PhysicalConstants, Quantity};

use records::{Emitter, Field, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_DATA: i32 = 3;

const CONSTANTS: PhysicalConstants = PhysicalConstants::CODATA_2018;

#[derive(Debug, Parser)]
#[command(
    name = "selfgrav",
    version,
    about = "Self-gravitational frequency shifts of a trapped microparticle"
)]
struct Cli {
    #[command(flatten)]
    output: OutputArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: Format,
    /// Write records to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long, value_parser = positive_number, global = true)]
    rel_tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the material table with Δω_SN at ω₀ = 1 rad/s.
    Materials,
    /// Frequency shift of a single transition n1 → n2.
    Shift {
        #[arg(long)]
        material: String,
        /// Trap frequency with unit, e.g. 10Hz or 62.83rad/s.
        #[arg(long, value_parser = frequency)]
        omega0: f64,
        /// Particle mass with unit, e.g. 1e15amu or 1.7e-12kg.
        #[arg(long, value_parser = mass)]
        mass: f64,
        #[arg(long, default_value_t = 0)]
        n1: u32,
        #[arg(long, default_value_t = 1)]
        n2: u32,
    },
    /// Adjacent-level line spectrum over a log-spaced mass range.
    Spectrum {
        #[arg(long, default_value = "osmium")]
        material: String,
        #[arg(long, value_parser = frequency, default_value = "10Hz")]
        omega0: f64,
        #[arg(long, value_parser = mass, default_value = "1e13amu")]
        mass_min: f64,
        #[arg(long, value_parser = mass, default_value = "1e18amu")]
        mass_max: f64,
        #[arg(long, default_value_t = 51)]
        points: usize,
        /// Number of adjacent transitions (n, n+1), n < n_max.
        #[arg(long, default_value_t = 13)]
        n_max: u32,
    },
    /// The g(n, n+1) curves over a log-spaced α range.
    Scan {
        #[arg(long, value_parser = positive_number, default_value = "0.1")]
        alpha_min: f64,
        #[arg(long, value_parser = positive_number, default_value = "100")]
        alpha_max: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
        /// Evaluate at this single α instead of a range.
        #[arg(long, value_parser = positive_number, conflicts_with_all = ["alpha_min", "alpha_max", "points"])]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 13)]
        n_max: u32,
    },
    /// Mass and sphere diameter for a target α, or α for a given mass.
    Size {
        #[arg(long)]
        material: String,
        #[arg(long, value_parser = frequency)]
        omega0: f64,
        #[arg(long, value_parser = positive_number, required_unless_present = "mass", conflicts_with = "mass")]
        alpha: Option<f64>,
        #[arg(long, value_parser = mass)]
        mass: Option<f64>,
    },
    /// Blackbody Rayleigh scattering rate at a temperature.
    Rayleigh {
        /// Temperature with unit, e.g. 0.1K or 100mK.
        #[arg(long, value_parser = temperature)]
        temp: f64,
        /// Disc as DIAMETER,THICKNESS, e.g. 3e-6m,1e-6m.
        #[arg(long, value_parser = disc, required_unless_present = "sphere", conflicts_with = "sphere")]
        disc: Option<(f64, f64)>,
        /// Sphere diameter, e.g. 5.2um.
        #[arg(long, value_parser = length)]
        sphere: Option<f64>,
    },
    /// Cross-check the analytic pipeline against brute-force oracles.
    Verify,
    /// Dump the exact coefficients of P_n as `power numerator denominator`.
    #[command(hide = true)]
    Poly {
        #[arg(long)]
        n: u32,
    },
}

fn quantity(s: &str, dim: Dimension) -> Result<f64, String> {
    let q: Quantity = s.parse().map_err(|e: selfgrav::Error| e.to_string())?;
    let v = q.si_as(dim).map_err(|e| e.to_string())?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

fn frequency(s: &str) -> Result<f64, String> {
    quantity(s, Dimension::Frequency)
}

fn mass(s: &str) -> Result<f64, String> {
    quantity(s, Dimension::Mass)
}

fn length(s: &str) -> Result<f64, String> {
    quantity(s, Dimension::Length)
}

fn temperature(s: &str) -> Result<f64, String> {
    quantity(s, Dimension::Temperature)
}

fn disc(s: &str) -> Result<(f64, f64), String> {
    let (d, t) = s
        .split_once(',')
        .ok_or_else(|| format!("`{s}` should be DIAMETER,THICKNESS"))?;
    Ok((length(d)?, length(t)?))
}

fn positive_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

/// A failure with its exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<selfgrav::Error> for Failure {
    fn from(e: selfgrav::Error) -> Self {
        use selfgrav::Error as E;
        let code = match &e {
            E::Domain(_) | E::MaterialNotFound { .. } | E::Capability(_) => EXIT_USAGE,
            E::Numerical { .. } | E::Consistency(_) => EXIT_NUMERICAL,
            E::DataFile { .. } | E::Io { .. } => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_DATA,
            message: format!("write failed: {e}"),
        }
    }
}

/// Parse `args` (including the program name), run the subcommand, and
/// return the exit status. Records go to `out` unless `--output` is given;
/// diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let (code, sink): (i32, &mut dyn Write) = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (EXIT_OK, out),
                _ => (EXIT_USAGE, err),
            };
            let _ = write!(sink, "{e}");
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let quadrature = match cli.output.rel_tol {
        Some(tol) => QuadratureConfig::with_rel_tol(tol),
        None => QuadratureConfig::default(),
    };
    quadrature
        .validate()
        .map_err(|e| Failure::usage(format!("--rel-tol: {e}")))?;
    let engine = SpectrumEngine::new(CONSTANTS, quadrature);
    let sink: Box<dyn Write + '_> = match &cli.output.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| Failure {
            code: EXIT_DATA,
            message: format!("cannot create {}: {e}", path.display()),
        })?)),
        None => Box::new(out),
    };
    let ctx = Ctx {
        engine,
        format: cli.output.format,
    };
    match cli.command {
        Command::Materials => ctx.materials(sink),
        Command::Shift {
            material,
            omega0,
            mass,
            n1,
            n2,
        } => ctx.shift(sink, &material, omega0, mass, n1, n2),
        Command::Spectrum {
            material,
            omega0,
            mass_min,
            mass_max,
            points,
            n_max,
        } => ctx.spectrum(sink, err, &material, omega0, (mass_min, mass_max), points, n_max),
        Command::Scan {
            alpha_min,
            alpha_max,
            points,
            alpha,
            n_max,
        } => match alpha {
            Some(a) => ctx.scan(sink, (a, a), 1, n_max),
            None => ctx.scan(sink, (alpha_min, alpha_max), points, n_max),
        },
        Command::Size {
            material,
            omega0,
            alpha,
            mass,
        } => ctx.size(sink, &material, omega0, alpha, mass),
        Command::Rayleigh { temp, disc, sphere } => ctx.rayleigh(sink, temp, disc, sphere),
        Command::Verify => ctx.verify(sink),
        Command::Poly { n } => {
            let p = PCache::global().get(n)?;
            let mut sink = sink;
            write_coefficients(p.as_polynomial(), &mut sink)?;
            sink.flush()?;
            Ok(())
        }
    }
}

fn database() -> Result<MaterialDatabase, Failure> {
    Ok(MaterialDatabase::from_env()?)
}

fn amu(kg: f64) -> f64 {
    kg / CONSTANTS.amu
}

fn hz(rad_s: f64) -> f64 {
    rad_s / (2.0 * PI)
}

struct Ctx {
    engine: SpectrumEngine,
    format: Format,
}

impl Ctx {
    fn emitter<'a>(
        &self,
        columns: &'static [&'static str],
        sink: Box<dyn Write + 'a>,
    ) -> Result<Emitter<'a>, Failure> {
        Ok(Emitter::new(self.format, columns, sink)?)
    }

    fn rel_tol(&self) -> Field {
        self.engine.quadrature.rel_tol.into()
    }

    fn materials(&self, sink: Box<dyn Write + '_>) -> Result<(), Failure> {
        let db = database()?;
        let mut e = self.emitter(
            &[
                "name",
                "atomic_mass_amu",
                "density_g_cm3",
                "sigma_pm",
                "debye_waller_b_a2",
                "reference_temperature_mk",
                "omega0_rad_s",
                "delta_omega_sn_rad_s",
            ],
            sink,
        )?;
        for m in db.iter() {
            e.emit(vec![
                m.name().into(),
                m.atomic_mass_amu().into(),
                (m.density() * 1e-3).into(),
                (m.sigma() * 1e12).into(),
                m.debye_waller_b().map(|b| b * 1e20).into(),
                (m.reference_temperature() * 1e3).into(),
                1.0.into(),
                self.engine.delta_omega_sn(m, 1.0)?.into(),
            ])?;
        }
        Ok(e.finish()?)
    }

    fn shift(
        &self,
        sink: Box<dyn Write + '_>,
        material: &str,
        omega0: f64,
        mass: f64,
        n1: u32,
        n2: u32,
    ) -> Result<(), Failure> {
        let db = database()?;
        let m = db.lookup(material)?;
        let trap = self.engine.trap(m, mass, omega0)?;
        let s = self.engine.transition_shift(m, &trap, n1, n2)?;
        let mut e = self.emitter(
            &[
                "material",
                "mass_amu",
                "mass_kg",
                "omega0_rad_s",
                "omega0_hz",
                "n1",
                "n2",
                "rel_tol",
                "sigma_m",
                "alpha",
                "f_tilde_n1",
                "f_tilde_n2",
                "g",
                "g_error",
                "delta_omega_sn_rad_s",
                "delta_omega_rad_s",
                "delta_f_hz",
            ],
            sink,
        )?;
        e.emit(vec![
            m.name().into(),
            amu(mass).into(),
            mass.into(),
            omega0.into(),
            hz(omega0).into(),
            n1.into(),
            n2.into(),
            self.rel_tol(),
            m.sigma().into(),
            s.alpha.into(),
            s.f_tilde_n1.into(),
            s.f_tilde_n2.into(),
            s.g.into(),
            s.quadrature_error_estimate.into(),
            s.delta_omega_sn.into(),
            s.delta_omega.into(),
            hz(s.delta_omega).into(),
        ])?;
        Ok(e.finish()?)
    }

    #[allow(clippy::too_many_arguments)]
    fn spectrum(
        &self,
        sink: Box<dyn Write + '_>,
        err: &mut dyn Write,
        material: &str,
        omega0: f64,
        (mass_min, mass_max): (f64, f64),
        points: usize,
        n_max: u32,
    ) -> Result<(), Failure> {
        let db = database()?;
        let m = db.lookup(material)?;
        let scan = scan_spectrum(&self.engine, m, omega0, mass_min, mass_max, points, n_max)?;
        let mut e = self.emitter(
            &[
                "material",
                "omega0_rad_s",
                "omega0_hz",
                "n_max",
                "rel_tol",
                "index",
                "mass_amu",
                "mass_kg",
                "alpha",
                "regime",
                "n1",
                "n2",
                "g",
                "g_error",
                "delta_omega_rad_s",
                "delta_f_hz",
                "line_frequency_rad_s",
                "line_frequency_hz",
                "error",
            ],
            sink,
        )?;
        let mut failed = Vec::new();
        for p in &scan.points {
            let head = || -> Vec<Field> {
                vec![
                    m.name().into(),
                    omega0.into(),
                    hz(omega0).into(),
                    n_max.into(),
                    self.rel_tol(),
                    p.index.into(),
                    amu(p.mass).into(),
                    p.mass.into(),
                    p.alpha.into(),
                ]
            };
            match &p.outcome {
                Ok((regime, lines)) => {
                    for l in lines {
                        let mut r = head();
                        r.extend([
                            regime.label().into(),
                            l.n1.into(),
                            l.n2.into(),
                            l.g.into(),
                            l.g_error.into(),
                            l.delta_omega.into(),
                            hz(l.delta_omega).into(),
                            l.line_frequency.into(),
                            l.line_frequency_hz().into(),
                            Field::Empty,
                        ]);
                        e.emit(r)?;
                    }
                }
                Err(msg) => {
                    let mut r = head();
                    r.extend([
                        "failed".into(),
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        msg.as_str().into(),
                    ]);
                    e.emit(r)?;
                    failed.push(format!("point {} (mass {:e} amu): {msg}", p.index, amu(p.mass)));
                }
            }
        }
        e.finish()?;
        match scan.intermediate_band_decades() {
            Some(b) => writeln!(err, "intermediate band: {b:.2} decades in mass")?,
            None => writeln!(err, "intermediate band: not enclosed by the mass range")?,
        }
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Failure::numerical(format!(
                "{} grid point(s) failed: {}",
                failed.len(),
                failed.join("; ")
            )))
        }
    }

    fn scan(
        &self,
        sink: Box<dyn Write + '_>,
        (alpha_min, alpha_max): (f64, f64),
        points: usize,
        n_max: u32,
    ) -> Result<(), Failure> {
        let curves = g_curves(alpha_min, alpha_max, points, n_max, &self.engine.quadrature)?;
        let mut e = self.emitter(
            &["n_max", "rel_tol", "index", "alpha", "n1", "n2", "g", "error"],
            sink,
        )?;
        let mut failed = Vec::new();
        for p in &curves {
            match &p.outcome {
                Ok(gs) => {
                    for (n, g) in gs.iter().enumerate() {
                        e.emit(vec![
                            n_max.into(),
                            self.rel_tol(),
                            p.index.into(),
                            p.alpha.into(),
                            n.into(),
                            (n + 1).into(),
                            (*g).into(),
                            Field::Empty,
                        ])?;
                    }
                }
                Err(msg) => {
                    e.emit(vec![
                        n_max.into(),
                        self.rel_tol(),
                        p.index.into(),
                        p.alpha.into(),
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        msg.as_str().into(),
                    ])?;
                    failed.push(format!("point {} (alpha {:e}): {msg}", p.index, p.alpha));
                }
            }
        }
        e.finish()?;
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Failure::numerical(failed.join("; ")))
        }
    }

    fn size(
        &self,
        sink: Box<dyn Write + '_>,
        material: &str,
        omega0: f64,
        alpha: Option<f64>,
        mass: Option<f64>,
    ) -> Result<(), Failure> {
        let db = database()?;
        let m = db.lookup(material)?;
        let (alpha, mass) = match (alpha, mass) {
            (Some(a), _) => (a, mass_for_alpha(a, omega0, m.sigma(), &CONSTANTS)?),
            (None, Some(mass)) => (self.engine.trap(m, mass, omega0)?.alpha(), mass),
            (None, None) => return Err(Failure::usage("one of --alpha or --mass is required")),
        };
        let d = sphere_diameter(mass, m.density())?;
        let mut e = self.emitter(
            &[
                "material",
                "omega0_rad_s",
                "omega0_hz",
                "alpha",
                "mass_kg",
                "mass_amu",
                "sphere_diameter_m",
                "delta_omega_sn_rad_s",
                "delta_f_sn_hz",
            ],
            sink,
        )?;
        let dw = self.engine.delta_omega_sn(m, omega0)?;
        e.emit(vec![
            m.name().into(),
            omega0.into(),
            hz(omega0).into(),
            alpha.into(),
            mass.into(),
            amu(mass).into(),
            d.into(),
            dw.into(),
            hz(dw).into(),
        ])?;
        Ok(e.finish()?)
    }

    fn rayleigh(
        &self,
        sink: Box<dyn Write + '_>,
        temp: f64,
        disc: Option<(f64, f64)>,
        sphere: Option<f64>,
    ) -> Result<(), Failure> {
        let (shape, geometry, dims) = match (disc, sphere) {
            (Some((d, t)), _) => ("disc", ParticleGeometry::disc(d, t)?, (Some(d), Some(t))),
            (None, Some(d)) => ("sphere", ParticleGeometry::sphere(d / 2.0)?, (Some(d), None)),
            (None, None) => return Err(Failure::usage("one of --disc or --sphere is required")),
        };
        let est = rayleigh_rate(temp, &geometry, &CONSTANTS)?;
        let mut e = self.emitter(
            &[
                "temperature_k",
                "shape",
                "diameter_m",
                "thickness_m",
                "volume_m3",
                "chi_m3",
                "lambda_t_m",
                "gamma_r_per_s",
                "gamma_r_rounded_per_s",
            ],
            sink,
        )?;
        e.emit(vec![
            temp.into(),
            shape.into(),
            dims.0.into(),
            dims.1.into(),
            est.volume.into(),
            est.chi.into(),
            est.lambda_t.into(),
            est.gamma_r.into(),
            est.gamma_r_rounded.into(),
        ])?;
        Ok(e.finish()?)
    }

    fn verify(&self, sink: Box<dyn Write + '_>) -> Result<(), Failure> {
        let reports = verification_suite(&self.engine.quadrature)?;
        let mut e = self.emitter(
            &[
                "quantity",
                "analytic_value",
                "oracle_value",
                "relative_discrepancy",
                "threshold",
                "passed",
                "rel_tol",
                "settings",
            ],
            sink,
        )?;
        for r in &reports {
            e.emit(vec![
                r.quantity.as_str().into(),
                r.analytic_value.into(),
                r.oracle_value.into(),
                r.relative_discrepancy.into(),
                r.threshold.into(),
                r.passed().into(),
                self.rel_tol(),
                r.settings.as_str().into(),
            ])?;
        }
        e.finish()?;
        let failed: Vec<&str> = reports
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.quantity.as_str())
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Failure::numerical(format!(
                "{} check(s) above threshold: {}",
                failed.len(),
                failed.join(", ")
            )))
        }
    }
}
