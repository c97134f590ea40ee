//! Numerical laboratory for the Dirichlet-reversible diffusion on the simplex.
//!
//! The crate is organised around the objects the diffusion is built from:
//!
//! - [`simplex`]: parameter vectors, simplex points, exact Dirichlet moments
//!   and the stick-breaking / Polya urn samplers.
//! - [`polynomial`]: sparse multivariate polynomials, the carrier for
//!   generator applications and energies.
//! - [`spectrum`]: the spectrum of the generator computed from the degree
//!   matrices, the degree recursion and the closed-form key parametrization,
//!   plus Dirichlet-form energies and Poincare ratios.
//! - [`diffusion`]: Euler-Maruyama simulation of the SDE and decay-rate fits.
//! - [`chain`]: the discrete population chain on the lattice simplex.
//! - [`infinite`]: finite truncations of the infinite-dimensional model.
//!
//! [`eigen`] holds the dense nonsymmetric eigensolver used for the degree
//! matrices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod diffusion;
pub mod eigen;
mod error;
pub mod infinite;
pub mod polynomial;
pub mod rng;
pub mod simplex;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
pub use polynomial::{MultiIndex, Polynomial};
pub use simplex::{AlphaParams, SimplexPoint};
