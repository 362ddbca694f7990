pub mod cli;
pub mod dual;
pub mod entire;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod spectral;
pub mod spike;

pub use error::{Error, Result};
pub use grid::{Grid, GridField};
