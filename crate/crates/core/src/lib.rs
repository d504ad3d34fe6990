//! Gaussian free field on regular trees and random regular graphs, with
//! extreme-value diagnostics.

pub mod comparison;
pub mod error;
pub mod experiment;
pub mod extremes;
pub mod gff;
pub mod graphgen;
pub mod green;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use error::{Error, Result, Stage};
