//! Numerical tools for hyperelliptic Riemann surfaces: periods, Abel-Jacobi
//! jets, Schiffer variations of the period matrix, theta nulls, and the
//! infinitesimal variation of Hodge structure along Schiffer directions.
//!
//! The pipeline runs bottom-up:
//! [`curve`] → [`homology`] → [`abel_jacobi`] → [`schiffer`] / [`theta`] →
//! [`ivhs`] and [`soliton`].

#![allow(clippy::needless_range_loop)]

pub mod abel_jacobi;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod curve;
pub mod error;
pub mod homology;
pub mod ivhs;
pub mod lattice;
pub mod quadrature;
pub mod schiffer;
pub mod serialize;
pub mod series;
pub mod soliton;
pub mod theta;

pub use error::{Error, Result};
