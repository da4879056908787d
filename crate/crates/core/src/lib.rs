//! Finite-dimensional laboratory for conjugation-structured operators.
//!
//! Every linear operator is a dense [`CMatrix`]; a conjugation `J` is stored
//! as the symmetric unitary `C` with `Jx = C·conj(x)`. On top of the kernel
//! sit the J-class classifier, the refined polar decomposition of J-unitary
//! matrices, and the Cayley-transform construction of J-imaginary
//! self-adjoint extensions of partially defined symmetric operators.

pub mod conjugation;
pub mod error;
pub mod examples;
pub mod extension;
pub mod io;
pub mod jclass;
pub mod numkernel;
pub mod polar;
pub mod report;
pub mod suite;

pub use conjugation::{fixed_basis, random_conjugation, Conjugation};
pub use error::{Error, Result};
pub use numkernel::{CMatrix, C64};
