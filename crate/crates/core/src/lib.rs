//! Separatrix maps for weakly quasi-periodically forced homoclinic and
//! heteroclinic networks: construction from variational equations and
//! Melnikov integrals, iteration, chaos indicators, distribution fits and
//! stochastic reference simulations.

pub mod chaos;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod mapbuild;
pub mod oracle;
pub mod sepmap;
pub mod stats;
pub mod trig;

pub use error::{Error, Result};
