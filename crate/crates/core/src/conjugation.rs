//! Antilinear conjugations `Jx = C·conj(x)` with `C` symmetric unitary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkernel::random::{random_unitary, rng};
use crate::numkernel::{norm, orthonormalize, projector, CMatrix, C64, I};

/// Threshold for [`Conjugation::verify`].
pub const VERIFY_TOL: f64 = 1e-10;
/// Admissible projector-invariance residual for a J-invariant subspace.
pub const INVARIANCE_TOL: f64 = 1e-8;
/// Candidates with a smaller residual norm are discarded by [`fixed_basis`].
pub const FIXED_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Conjugation {
    coeff: CMatrix,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConjugationReport {
    /// `‖C·conj(C) − I‖_F`, zero iff `J² = id`.
    pub involution: f64,
    /// `‖C*C − I‖_F`, zero iff `(Jx, Jy) = (y, x)`.
    pub antiunitarity: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Conjugation {
    /// Wrap a coefficient matrix. Only the shape is checked here; the axioms
    /// are reported by [`Conjugation::verify`].
    pub fn new(coeff: CMatrix) -> Result<Self> {
        if !coeff.is_square() || coeff.rows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "conjugation coefficient must be square and non-empty, got {}x{}",
                coeff.rows(),
                coeff.cols()
            )));
        }
        if !coeff.is_finite() {
            return Err(Error::InvalidMatrix(
                "non-finite conjugation coefficient".into(),
            ));
        }
        Ok(Conjugation { coeff })
    }

    /// Entrywise complex conjugation.
    pub fn canonical(dim: usize) -> Self {
        Conjugation {
            coeff: CMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.coeff.rows()
    }

    pub fn coeff(&self) -> &CMatrix {
        &self.coeff
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a conjugation on C^{}",
                x.len(),
                self.dim()
            )));
        }
        let xc: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        Ok(self.coeff.mat_vec(&xc))
    }

    /// `J` applied to every column.
    pub fn apply_columns(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_rows(x)?;
        Ok(&self.coeff * &x.conj())
    }

    /// The linear map `x ↦ J(M(Jx))`, i.e. `C·conj(M)·C*`.
    pub fn sandwich(&self, m: &CMatrix) -> Result<CMatrix> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "sandwich needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        self.check_rows(m)?;
        Ok(&(&self.coeff * &m.conj()) * &self.coeff.adjoint())
    }

    pub fn verify(&self) -> ConjugationReport {
        let c = &self.coeff;
        let involution = (c * &c.conj()).dist_identity();
        let antiunitarity = (&c.adjoint() * c).dist_identity();
        ConjugationReport {
            involution,
            antiunitarity,
            threshold: VERIFY_TOL,
            passed: involution <= VERIFY_TOL && antiunitarity <= VERIFY_TOL,
        }
    }

    pub fn direct_sum(&self, other: &Conjugation) -> Conjugation {
        Conjugation {
            coeff: self.coeff.block_diag(&other.coeff),
        }
    }

    /// `‖P_N − J∘P_N∘J‖_F` for the span `N` of the columns.
    pub fn invariance_residual(&self, basis: &CMatrix) -> Result<f64> {
        self.check_rows(basis)?;
        if basis.cols() == 0 {
            return Ok(0.0);
        }
        let p = projector(&orthonormalize(basis)?);
        Ok(p.dist(&self.sandwich(&p)?))
    }

    fn check_rows(&self, m: &CMatrix) -> Result<()> {
        if m.rows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix with {} rows for a conjugation on C^{}",
                m.rows(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `C = QQᵀ` for a seeded random unitary `Q`.
pub fn random_conjugation(dim: usize, seed: u64) -> Conjugation {
    assert!(dim >= 1, "conjugation dimension must be positive");
    let mut r = rng(seed);
    let q = random_unitary(&mut r, dim);
    Conjugation {
        coeff: &q * &q.transpose(),
    }
}

/// Orthonormal basis of J-fixed vectors (`Jg = g`) spanning the same
/// J-invariant subspace as the columns of `basis`.
///
/// Candidates are `v + Jv` for every orthonormalized input column, then
/// `i(v − Jv)`; they are orthogonalized with real coefficients only, always
/// taking the remaining candidate with the largest residual (first wins ties).
pub fn fixed_basis(j: &Conjugation, basis: &CMatrix) -> Result<CMatrix> {
    let n = j.dim();
    if basis.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, conjugation acts on C^{n}",
            basis.rows()
        )));
    }
    let k = basis.cols();
    if k == 0 {
        return Ok(CMatrix::zeros(n, 0));
    }
    let q = orthonormalize(basis)?;
    let residual = j.invariance_residual(&q)?;
    if residual > INVARIANCE_TOL {
        return Err(Error::NotInvariant { residual });
    }

    let cols = q.columns();
    let jcols = j.apply_columns(&q)?.columns();
    let mut candidates: Vec<Vec<C64>> = Vec::with_capacity(2 * k);
    for (v, jv) in cols.iter().zip(&jcols) {
        candidates.push(v.iter().zip(jv).map(|(a, b)| a + b).collect());
    }
    for (v, jv) in cols.iter().zip(&jcols) {
        candidates.push(v.iter().zip(jv).map(|(a, b)| I * (a - b)).collect());
    }

    let mut accepted: Vec<Vec<C64>> = Vec::with_capacity(k);
    while accepted.len() < k {
        let (best, best_norm) = candidates
            .iter()
            .enumerate()
            .map(|(idx, c)| (idx, norm(c)))
            .fold(
                (usize::MAX, -1.0),
                |b, cur| if cur.1 > b.1 { cur } else { b },
            );
        if best == usize::MAX || best_norm <= FIXED_RANK_TOL {
            return Err(Error::RankLoss {
                found: accepted.len(),
                expected: k,
            });
        }
        let mut g = candidates.remove(best);
        g.iter_mut().for_each(|z| *z /= best_norm);
        for c in candidates.iter_mut() {
            for _ in 0..2 {
                let coeff: f64 = g.iter().zip(c.iter()).map(|(a, b)| (b * a.conj()).re).sum();
                for (ci, gi) in c.iter_mut().zip(&g) {
                    *ci -= gi * coeff;
                }
            }
        }
        accepted.push(g);
    }
    Ok(CMatrix::from_columns(n, &accepted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{max_principal_angle, ONE, ZERO};

    #[test]
    fn canonical_apply_conjugates() {
        let j = Conjugation::canonical(2);
        assert_eq!(j.apply(&[ONE, I]).unwrap(), vec![ONE, -I]);
        assert!(j.apply(&[ONE]).is_err());
    }

    #[test]
    fn verify_canonical_is_exact() {
        let r = Conjugation::canonical(3).verify();
        assert_eq!(r.involution, 0.0);
        assert_eq!(r.antiunitarity, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn verify_rejects_non_unitary_coefficient() {
        let j = Conjugation::new(CMatrix::diag_real(&[1.0, 2.0])).unwrap();
        let r = j.verify();
        assert!(r.antiunitarity > 1.0);
        assert!(!r.passed);
    }

    #[test]
    fn random_conjugations_verify() {
        for (dim, seed) in [(1, 0), (1, 9), (5, 42), (12, 7)] {
            let j = random_conjugation(dim, seed);
            let r = j.verify();
            assert!(r.involution <= 1e-12 && r.antiunitarity <= 1e-12, "{r:?}");
        }
        let j = random_conjugation(1, 3);
        assert!((j.coeff()[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert_eq!(random_conjugation(2, 5), random_conjugation(2, 5));
    }

    #[test]
    fn direct_sum_of_canonicals_is_canonical() {
        let j = Conjugation::canonical(2).direct_sum(&Conjugation::canonical(3));
        assert_eq!(j, Conjugation::canonical(5));
    }

    #[test]
    fn direct_sum_acts_blockwise() {
        let a = random_conjugation(2, 1);
        let b = random_conjugation(3, 2);
        let s = a.direct_sum(&b);
        assert!(s.verify().passed);
        let x = vec![ONE, I, C64::new(0.5, -1.0), ZERO, C64::new(2.0, 1.0)];
        let whole = s.apply(&x).unwrap();
        let mut parts = a.apply(&x[..2]).unwrap();
        parts.extend(b.apply(&x[2..]).unwrap());
        for (u, v) in whole.iter().zip(&parts) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn fixed_basis_of_full_canonical_space() {
        let j = Conjugation::canonical(2);
        let g = fixed_basis(&j, &CMatrix::identity(2)).unwrap();
        assert!(g.dist_identity() < 1e-15);
    }

    #[test]
    fn fixed_basis_removes_phase() {
        let j = Conjugation::canonical(2);
        let basis = CMatrix::from_columns(2, &[vec![I, ZERO]]);
        let g = fixed_basis(&j, &basis).unwrap();
        assert!((g[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert_eq!(g[(0, 0)].im, 0.0);
        assert_eq!(g[(1, 0)], ZERO);
    }

    #[test]
    fn fixed_basis_rejects_non_invariant_span() {
        let j = Conjugation::canonical(2);
        let basis = CMatrix::from_columns(2, &[vec![ONE, I]]);
        assert!(matches!(
            fixed_basis(&j, &basis),
            Err(Error::NotInvariant { .. })
        ));
    }

    #[test]
    fn fixed_basis_of_span_w_jw() {
        let mut r = rng(11);
        for seed in 0..20 {
            let j = random_conjugation(6, seed);
            let w = crate::numkernel::random::gaussian_complex(&mut r, 6, 1);
            let jw = j.apply_columns(&w).unwrap();
            let basis = w.hstack(&jw);
            let g = fixed_basis(&j, &basis).unwrap();
            assert_eq!(g.cols(), 2);
            assert!((&g.adjoint() * &g).dist_identity() < 1e-12);
            assert!(j.apply_columns(&g).unwrap().dist(&g) < 1e-12);
            let span = orthonormalize(&basis).unwrap();
            assert!(max_principal_angle(&g, &span) < 1e-8);
        }
    }

    #[test]
    fn sandwich_is_conjugation_for_canonical() {
        let j = Conjugation::canonical(2);
        let m = CMatrix::from_rows(&[vec![I, ZERO], vec![ZERO, -I]]);
        let expect = CMatrix::from_rows(&[vec![-I, ZERO], vec![ZERO, I]]);
        assert_eq!(j.sandwich(&m).unwrap(), expect);
    }
}
