//! No-slip billiards and nonholonomic rolling in generalized cylinders.
//!
//! The cylinder axis `e` is always the last coordinate axis; the first
//! `n - 1` coordinates span the cross-section.

pub mod algebra;
pub mod analysis;
pub mod collision;
pub mod error;
pub mod flight;
pub mod geometry;
pub mod rolling;

pub use error::{Error, Result};
