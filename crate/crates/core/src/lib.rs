pub mod coevent;
pub mod colouring;
pub mod error;
pub mod geometry;
pub mod ks;
pub mod path_measure;
pub mod spin;
pub mod zero_explorer;

pub use error::{Error, Result};
