//! Self-gravitational corrections to the spectrum of a harmonically trapped
//! microparticle under the Schrödinger–Newton equation.

mod dd;
pub mod error;
pub mod experiment;
pub mod hermite;
pub mod materials;
pub mod oracle;
pub mod quadrature;
pub mod spectrum;
pub mod units;

pub use error::{Error, Result};
