//! Dense complex matrices and the Hermitian spectral calculus.

pub mod eig;
pub mod linalg;
pub mod matrix;
pub mod random;

pub use eig::{herm_eig, herm_eig_with, herm_fn, EigConfig, SpectralDecomp};
pub use linalg::{
    inverse, max_principal_angle, min_singular_value, orth_complement, orthonormalize, projector,
    resolvent, singular_values,
};
pub use matrix::{inner, norm, CMatrix, C64, I, ONE, ZERO};
