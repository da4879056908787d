//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, and the
//! finite spectral calculus built on it.

use crate::error::{Error, Result};
use crate::numkernel::matrix::{CMatrix, C64};

#[derive(Debug, Clone, Copy)]
pub struct EigConfig {
    pub max_sweeps: usize,
    /// Converged when the off-diagonal Frobenius mass is at most `off_tol·‖M‖_F`.
    pub off_tol: f64,
    /// `|λᵢ − λⱼ| ≤ cluster_tol·(1 + |λᵢ|)` merges neighbours into one cluster.
    pub cluster_tol: f64,
    /// Admissible `‖M − M*‖_F / (1 + ‖M‖_F)`.
    pub hermitian_tol: f64,
}

impl Default for EigConfig {
    fn default() -> Self {
        EigConfig {
            max_sweeps: 60,
            off_tol: 1e-13,
            cluster_tol: 1e-8,
            hermitian_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` belongs to `eigenvalues[i]`.
    pub vectors: CMatrix,
    /// Index groups of (numerically) coinciding eigenvalues, in ascending order.
    pub clusters: Vec<Vec<usize>>,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Mean eigenvalue of a cluster.
    pub fn cluster_value(&self, c: usize) -> f64 {
        let idx = &self.clusters[c];
        idx.iter().map(|&i| self.eigenvalues[i]).sum::<f64>() / idx.len() as f64
    }

    /// Orthonormal basis of the eigenspace of cluster `c`.
    pub fn cluster_basis(&self, c: usize) -> CMatrix {
        let idx = &self.clusters[c];
        CMatrix::from_fn(self.vectors.rows(), idx.len(), |i, j| {
            self.vectors[(i, idx[j])]
        })
    }

    /// Orthogonal projector onto the eigenspace of cluster `c`.
    pub fn projector(&self, c: usize) -> CMatrix {
        let q = self.cluster_basis(c);
        &q * &q.adjoint()
    }

    /// `Σ f(λᵢ) vᵢvᵢ*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
        let n = self.dim();
        let mut weights = Vec::with_capacity(n);
        for &lambda in &self.eigenvalues {
            let w = f(lambda);
            if !w.is_finite() {
                return Err(Error::DomainError { eigenvalue: lambda });
            }
            weights.push(w);
        }
        let v = &self.vectors;
        let out = CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * weights[k])
                .sum()
        });
        Ok(out.hermitian_part())
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|x| x)
            .expect("identity is finite on finite eigenvalues")
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }
}

pub fn herm_eig(m: &CMatrix) -> Result<SpectralDecomp> {
    herm_eig_with(m, &EigConfig::default())
}

pub fn herm_eig_with(m: &CMatrix, cfg: &EigConfig) -> Result<SpectralDecomp> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.frob_norm();
    let residual = m.hermitian_residual();
    if residual > cfg.hermitian_tol * (1.0 + scale) {
        return Err(Error::NotHermitian { residual });
    }

    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let tol = cfg.off_tol * scale;

    let mut converged = off_diagonal_norm(&a) <= tol;
    let mut sweeps = 0;
    while !converged && sweeps < cfg.max_sweeps {
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= tol;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps,
            off: off_diagonal_norm(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    let clusters = cluster(&eigenvalues, cfg.cluster_tol);
    Ok(SpectralDecomp {
        eigenvalues,
        vectors,
        clusters,
    })
}

/// `f(M)` for Hermitian `M` through the eigendecomposition.
pub fn herm_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    herm_eig(m)?.apply_fn(f)
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilate `a[p,q]` with the unitary `G = diag-phase · real rotation`,
/// `A ← G*AG`, `V ← VG`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= 1e-300 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ph_c = phase.conj();
    let n = a.rows();

    // A ← A·G ; G_pp = c, G_pq = s, G_qp = −s·conj(φ), G_qq = c·conj(φ)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * ph_c * s;
        a[(k, q)] = akp * s + akq * ph_c * c;
    }
    // A ← G*·A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * ph_c * s;
        v[(k, q)] = vkp * s + vkq * ph_c * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

fn cluster(sorted: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &lambda) in sorted.iter().enumerate() {
        match out.last_mut() {
            Some(group) => {
                let prev = sorted[*group.last().unwrap()];
                if (lambda - prev).abs() <= tol * (1.0 + prev.abs()) {
                    group.push(i);
                } else {
                    out.push(vec![i]);
                }
            }
            None => out.push(vec![i]),
        }
    }
    out
}
