use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::numkernel::eig::herm_eig;
use crate::numkernel::matrix::{inner, norm, CMatrix, C64, ONE, ZERO};

/// Pivots below `SINGULAR_PIVOT·‖M‖_F` make a matrix singular.
pub const SINGULAR_PIVOT: f64 = 1e-13;
/// Relative residual below which a column counts as dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Gauss–Jordan elimination with partial pivoting.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "inverse needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let threshold = SINGULAR_PIVOT * m.frob_norm();
    let mut a = m.clone();
    let mut inv = CMatrix::identity(n);

    for col in 0..n {
        let (pivot_row, pivot_mag) =
            (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_mag <= threshold {
            return Err(Error::Singular {
                pivot: pivot_mag,
                threshold,
            });
        }
        if pivot_row != col {
            for j in 0..n {
                let t = a[(col, j)];
                a[(col, j)] = a[(pivot_row, j)];
                a[(pivot_row, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(pivot_row, j)];
                inv[(pivot_row, j)] = t;
            }
        }
        let p = ONE / a[(col, col)];
        for j in 0..n {
            a[(col, j)] *= p;
            inv[(col, j)] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[(r, col)];
            if factor == ZERO {
                continue;
            }
            for j in 0..n {
                let ac = a[(col, j)];
                let ic = inv[(col, j)];
                a[(r, j)] -= factor * ac;
                inv[(r, j)] -= factor * ic;
            }
        }
    }
    Ok(inv)
}

/// `(M − z·I)⁻¹`.
pub fn resolvent(m: &CMatrix, z: C64) -> Result<CMatrix> {
    inverse(&m.shift(-z))
}

/// Orthonormal basis of the column span (modified Gram–Schmidt, two passes).
/// Fails when a column is dependent on its predecessors.
pub fn orthonormalize(basis: &CMatrix) -> Result<CMatrix> {
    let k = basis.cols();
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = basis.col(j);
        let original = norm(&v);
        for _ in 0..2 {
            for q in &out {
                let c = inner(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let r = norm(&v);
        if original == 0.0 || r <= RANK_TOL * original {
            return Err(Error::RankDeficient {
                rank: out.len(),
                expected: k,
            });
        }
        v.iter_mut().for_each(|z| *z /= r);
        out.push(v);
    }
    Ok(CMatrix::from_columns(basis.rows(), &out))
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `basis` in `C^ambient`. A full basis yields an `ambient × 0` matrix.
pub fn orth_complement(basis: &CMatrix, ambient: usize) -> Result<CMatrix> {
    if basis.rows() != ambient {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, ambient dimension is {ambient}",
            basis.rows()
        )));
    }
    let q = orthonormalize(basis)?;
    let mut frame = q.columns();
    let target = ambient - frame.len();
    let mut complement: Vec<Vec<C64>> = Vec::with_capacity(target);

    // Greedy: extend by the standard basis vector with the largest residual.
    while complement.len() < target {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for i in 0..ambient {
            let mut v = vec![ZERO; ambient];
            v[i] = ONE;
            for _ in 0..2 {
                for f in &frame {
                    let c = inner(&v, f);
                    for (vi, fi) in v.iter_mut().zip(f) {
                        *vi -= c * fi;
                    }
                }
            }
            let r = norm(&v);
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                best = Some((r, v));
            }
        }
        let (r, mut v) = best.expect("ambient dimension is positive");
        v.iter_mut().for_each(|z| *z /= r);
        frame.push(v.clone());
        complement.push(v);
    }
    Ok(CMatrix::from_columns(ambient, &complement))
}

/// `Q·Q*` for a matrix with orthonormal columns.
pub fn projector(q: &CMatrix) -> CMatrix {
    q * &q.adjoint()
}

/// Largest principal angle (radians) between the spans of two orthonormal
/// frames. Frames of different width are at angle π/2.
pub fn max_principal_angle(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.rows(), b.rows());
    if a.cols() != b.cols() {
        return FRAC_PI_2;
    }
    if a.cols() == 0 {
        return 0.0;
    }
    // sines of the principal angles are the singular values of (I − P_a)·b
    let r = b - &(a * &(&a.adjoint() * b));
    let gram = (&r.adjoint() * &r).hermitian_part();
    let top = herm_eig(&gram).map(|d| d.max()).unwrap_or(1.0);
    top.max(0.0).sqrt().min(1.0).asin()
}

/// Smallest singular value as `1/‖M⁻¹‖₂`; zero when elimination flags the
/// matrix as singular.
pub fn min_singular_value(m: &CMatrix) -> f64 {
    match inverse(m) {
        Ok(inv) => {
            let g = (&inv.adjoint() * &inv).hermitian_part();
            match herm_eig(&g) {
                Ok(d) if d.max() > 0.0 => 1.0 / d.max().sqrt(),
                _ => 0.0,
            }
        }
        Err(_) => 0.0,
    }
}

/// Singular values, ascending, from the eigenvalues of `M*M`. Accurate only
/// to about `sqrt(ε)·‖M‖` for the small ones.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let g = (&m.adjoint() * m).hermitian_part();
    herm_eig(&g)
        .map(|d| d.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect())
        .unwrap_or_default()
}
