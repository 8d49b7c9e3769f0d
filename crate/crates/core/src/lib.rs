pub mod atoms;
pub mod config;
pub mod corpus;
pub mod divcurl;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod paraproduct;
pub mod selfcheck;
pub mod spaces;
pub mod tolerance;
pub mod wavelet;

pub use error::{Error, Result};
