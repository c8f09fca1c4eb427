//! Orlicz bumps, dyadic sparse domination and two-weight testing on
//! spaces of homogeneous type.

pub mod bump;
pub mod cells;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod orlicz;
pub mod space;
pub mod sparse;
pub mod step;
pub mod young;

pub use error::{Error, Result};
pub use young::{BpReport, Growth, YoungFunction};
