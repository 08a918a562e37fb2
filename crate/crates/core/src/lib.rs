pub mod error;
pub mod geometry;
mod grid;
pub mod raster;
pub mod render;
pub mod segment;
pub mod vectorize;

pub use error::{Error, Result};
pub use grid::Grid;
