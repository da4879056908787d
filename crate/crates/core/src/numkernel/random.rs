//! Seeded random matrices for generators and property trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numkernel::linalg::orthonormalize;
use crate::numkernel::matrix::{CMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn gaussian_real(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.sample(StandardNormal), 0.0))
}

/// Orthonormalized complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    loop {
        // a Gaussian draw is rank deficient with probability zero
        if let Ok(q) = orthonormalize(&gaussian_complex(rng, n, n)) {
            return q;
        }
    }
}

/// Orthonormalized real Gaussian matrix.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> CMatrix {
    loop {
        if let Ok(q) = orthonormalize(&gaussian_real(rng, n, n)) {
            return q;
        }
    }
}

/// Random Hermitian matrix `(G + G*)/2`.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    gaussian_complex(rng, n, n).hermitian_part()
}
