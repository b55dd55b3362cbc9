//! Material properties: atomic mass, bulk density and nuclear localization.
//!
//! The built-in table is compiled in from `data/materials.txt`; users can add
//! or override entries with a file in the same format.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::units::{convert_units, Unit};

/// Environment variable naming an additional material data file.
pub const MATERIALS_ENV: &str = "SELFGRAV_MATERIALS";

const BUILTIN_DATA: &str = include_str!("../data/materials.txt");

/// Nuclear localization length from a Debye–Waller B-factor (both SI).
pub fn sigma_from_b(b: f64) -> Result<f64> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::domain(format!("Debye-Waller B must be positive, got {b}")));
    }
    Ok(2.0 * PI * b.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    name: String,
    atomic_mass: f64,
    density: f64,
    sigma: f64,
    debye_waller_b: Option<f64>,
    reference_temperature: f64,
}

impl Material {
    /// All arguments in SI: kg, kg/m³, m, K.
    pub fn new(
        name: impl Into<String>,
        atomic_mass: f64,
        density: f64,
        sigma: f64,
        reference_temperature: f64,
    ) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(Error::domain("material name is empty"));
        }
        for (what, v) in [
            ("atomic mass", atomic_mass),
            ("density", density),
            ("sigma", sigma),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name}: {what} must be positive, got {v}")));
            }
        }
        if !(reference_temperature.is_finite() && reference_temperature >= 0.0) {
            return Err(Error::domain(format!(
                "{name}: temperature must be non-negative, got {reference_temperature}"
            )));
        }
        Ok(Material {
            name,
            atomic_mass,
            density,
            sigma,
            debye_waller_b: None,
            reference_temperature,
        })
    }

    /// Like [`Material::new`] but with σ derived from the B-factor (m²).
    pub fn from_debye_waller(
        name: impl Into<String>,
        atomic_mass: f64,
        density: f64,
        b: f64,
        reference_temperature: f64,
    ) -> Result<Self> {
        let sigma = sigma_from_b(b)?;
        let mut m = Material::new(name, atomic_mass, density, sigma, reference_temperature)?;
        m.debye_waller_b = Some(b);
        Ok(m)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Mass of one atom, kg.
    pub fn atomic_mass(&self) -> f64 {
        self.atomic_mass
    }

    pub fn atomic_mass_amu(&self) -> f64 {
        convert_units(self.atomic_mass, Unit::Kilogram, Unit::Amu).expect("same dimension")
    }

    /// Bulk density, kg/m³.
    pub fn density(&self) -> f64 {
        self.density
    }

    /// Nuclear localization length, m.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Debye–Waller B-factor, m², when the entry was specified that way.
    pub fn debye_waller_b(&self) -> Option<f64> {
        self.debye_waller_b
    }

    /// Temperature the localization refers to, K.
    pub fn reference_temperature(&self) -> f64 {
        self.reference_temperature
    }
}

#[derive(Debug)]
struct MaterialRecord {
    name: String,
    atomic_mass_amu: f64,
    density_g_cm3: f64,
    sigma_pm: Option<f64>,
    debye_waller_b_a2: Option<f64>,
    temperature_mk: f64,
}

impl MaterialRecord {
    fn parse(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(Error::domain(format!("expected 6 fields, found {}", fields.len())));
        }
        let number = |i: usize, what: &str| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| Error::domain(format!("{what}: `{}` is not a number", fields[i])))
        };
        let optional = |i: usize, what: &str| -> Result<Option<f64>> {
            if fields[i].is_empty() {
                Ok(None)
            } else {
                number(i, what).map(Some)
            }
        };
        Ok(MaterialRecord {
            name: fields[0].to_owned(),
            atomic_mass_amu: number(1, "atomic_mass_amu")?,
            density_g_cm3: number(2, "density_g_cm3")?,
            sigma_pm: optional(3, "sigma_pm")?,
            debye_waller_b_a2: optional(4, "debye_waller_B_A2")?,
            temperature_mk: number(5, "temperature_mK")?,
        })
    }

    fn into_material(self) -> Result<Material> {
        let mass = convert_units(self.atomic_mass_amu, Unit::Amu, Unit::Kilogram)?;
        let density = convert_units(
            self.density_g_cm3,
            Unit::GramPerCubicCentimeter,
            Unit::KilogramPerCubicMeter,
        )?;
        let temperature = convert_units(self.temperature_mk, Unit::Millikelvin, Unit::Kelvin)?;
        let sigma = self
            .sigma_pm
            .map(|s| convert_units(s, Unit::Picometer, Unit::Meter))
            .transpose()?;
        let b = self
            .debye_waller_b_a2
            .map(|b| convert_units(b, Unit::SquareAngstrom, Unit::SquareMeter))
            .transpose()?;
        match (sigma, b) {
            (Some(s), None) => Material::new(self.name, mass, density, s, temperature),
            (None, Some(b)) => Material::from_debye_waller(self.name, mass, density, b, temperature),
            (Some(s), Some(b)) => {
                let m = Material::from_debye_waller(self.name, mass, density, b, temperature)?;
                if (m.sigma - s).abs() > 1e-12 * s {
                    return Err(Error::domain(format!(
                        "sigma {s:e} m disagrees with 2*pi*sqrt(B) = {:e} m",
                        m.sigma
                    )));
                }
                Ok(m)
            }
            (None, None) => Err(Error::domain("one of sigma_pm or debye_waller_B_A2 is required")),
        }
    }
}

/// Materials keyed by case-insensitive name, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct MaterialDatabase {
    entries: Vec<Material>,
}

impl MaterialDatabase {
    /// The compiled-in table (silicon, tungsten, osmium, gold at 100 mK).
    pub fn builtin() -> Self {
        let mut db = MaterialDatabase::default();
        db.extend_from_str(BUILTIN_DATA, "<builtin>")
            .expect("built-in material table is valid");
        db
    }

    /// Built-in table plus the file named by [`MATERIALS_ENV`], if set.
    pub fn from_env() -> Result<Self> {
        let mut db = Self::builtin();
        if let Some(path) = std::env::var_os(MATERIALS_ENV) {
            db.extend_from_file(Path::new(&path))?;
        }
        Ok(db)
    }

    pub fn extend_from_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.extend_from_str(&text, &path.display().to_string())
    }

    /// Parse records and insert them; later entries replace earlier ones of
    /// the same name.
    pub fn extend_from_str(&mut self, text: &str, source_name: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let record = MaterialRecord::parse(content)
                .and_then(MaterialRecord::into_material)
                .map_err(|e| Error::DataFile {
                    source_name: source_name.to_owned(),
                    line,
                    message: match e {
                        Error::Domain(m) => m,
                        other => other.to_string(),
                    },
                })?;
            self.insert(record);
        }
        Ok(())
    }

    pub fn insert(&mut self, material: Material) {
        match self
            .entries
            .iter_mut()
            .find(|m| m.name.eq_ignore_ascii_case(&material.name))
        {
            Some(slot) => *slot = material,
            None => self.entries.push(material),
        }
    }

    pub fn lookup(&self, name: &str) -> Result<&Material> {
        let name = name.trim();
        self.entries
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MaterialNotFound {
                name: name.to_owned(),
                available: self.entries.iter().map(|m| m.name.clone()).collect(),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
