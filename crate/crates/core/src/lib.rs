//! Sparse Bernoulli random digraphs, the secular coefficients of their
//! reverse characteristic polynomial, and the random analytic functions
//! those polynomials converge to.

pub mod charpoly;
pub mod error;
pub mod graph;
pub mod harness;
pub mod limit;
pub mod moments;
pub mod rng;
pub mod series;
pub mod spectra;

pub use error::{Error, Result};
