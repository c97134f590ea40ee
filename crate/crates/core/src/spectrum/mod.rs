//! Spectrum of the generator `-L` on polynomials.
//!
//! Three independent routes give the same multiset of eigenvalues:
//! eigensolving the degree matrices `M_d` ([`build_md`],
//! [`eigen_multiset`]), the degree recursion ([`spectrum_recursion`]) and
//! the closed-form key parametrization ([`spectrum_parametrized`]).
//! [`generator`] applies `L` to polynomials symbolically and evaluates
//! energies and Poincare ratios with exact moments.

pub mod generator;
pub mod matrix;
pub mod multiset;
pub mod recursion;

pub use generator::{
    apply_generator, degree_one_basis, degree_one_theta, dirichlet_energy, integrate,
    poincare_ratio, variance,
};
pub use matrix::{build_md, eigen_multiset, enumerate_kd, SpectralMatrix};
pub use multiset::{Cluster, ClusterTol, EigenMultiset};
pub use recursion::{
    keys_of_degree, spectral_gap, spectral_gap_eigen, spectrum_parametrized,
    spectrum_parametrized_degree, spectrum_recursion, GapCertificate, SpectrumByDegree,
    SpectrumKey, DEFAULT_D_MAX,
};
