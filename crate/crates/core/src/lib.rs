pub mod discrepancy;
pub mod error;
pub mod interval;
pub mod lattice;
pub mod numeric;
pub mod ps;
pub mod systems;
pub mod weyl;

pub use error::{Error, Result};
