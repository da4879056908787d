//! Refined polar decomposition of J-unitary matrices.
//!
//! A J-unitary `A` factors as `A = UB` with `U` unitary and J-real and
//! `B = |A| = √(A*A)` positive definite and J-unitary; conversely every such
//! product is J-unitary. The checks below make the supporting identities
//! (inverse, adjoint and Gram matrix stay J-unitary, `J|A|J = |A|⁻¹`, `J`
//! exchanges the λ and 1/λ eigenspaces of `A*A`) executable.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::Serialize;

use crate::conjugation::{fixed_basis, Conjugation};
use crate::error::{Error, Result};
use crate::jclass::{classify_with, OperatorClass, DEFAULT_TOL};
use crate::numkernel::random::{random_orthogonal, rng};
use crate::numkernel::{herm_eig, herm_fn, inverse, max_principal_angle, CMatrix, C64, I};
use crate::report::CheckReport;

/// Principal-angle tolerance for eigenspace comparisons.
pub const ANGLE_TOL: f64 = 1e-8;
/// Relative mismatch allowed when pairing an eigenvalue with its reciprocal.
pub const PAIRING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct PolarResiduals {
    /// `‖A − UB‖_F / ‖A‖_F`
    pub reconstruction: f64,
    /// `‖U*U − I‖_F`
    pub unitarity: f64,
    /// `‖U − JUJ‖_F`
    pub j_realness: f64,
    /// Smallest eigenvalue of `B`.
    pub positivity_floor: f64,
    /// `‖B − B*‖_F / (1 + ‖B‖_F)`
    pub hermiticity: f64,
    /// `‖JBJ − B⁻¹‖_F / (1 + ‖B‖_F + ‖B⁻¹‖_F)`
    pub j_unitarity: f64,
}

#[derive(Debug, Clone)]
pub struct PolarParts {
    pub u: CMatrix,
    pub b: CMatrix,
    pub residuals: PolarResiduals,
}

fn j_unitary_gate(j: &Conjugation, a: &CMatrix, tol: f64) -> Result<()> {
    let profile = classify_with(j, a, tol)?;
    if !profile.passes(OperatorClass::JUnitary) {
        return Err(Error::NotJUnitary {
            residual: profile
                .residual(OperatorClass::JUnitary)
                .unwrap_or(f64::INFINITY),
            threshold: tol,
        });
    }
    Ok(())
}

fn relative_j_unitarity(j: &Conjugation, b: &CMatrix) -> Result<f64> {
    let inv = inverse(b)?;
    Ok(j.sandwich(b)?.dist(&inv) / (1.0 + b.frob_norm() + inv.frob_norm()))
}

pub fn refined_polar(j: &Conjugation, a: &CMatrix) -> Result<PolarParts> {
    refined_polar_with(j, a, DEFAULT_TOL)
}

/// `B = √(A*A)` and `U = A·B⁻¹`, both from one eigendecomposition of `A*A`.
pub fn refined_polar_with(j: &Conjugation, a: &CMatrix, tol: f64) -> Result<PolarParts> {
    j_unitary_gate(j, a, tol)?;
    let gram = (&a.adjoint() * a).hermitian_part();
    let spectrum = herm_eig(&gram)?;
    if spectrum.min() <= 0.0 {
        return Err(Error::Singular {
            pivot: spectrum.min(),
            threshold: 0.0,
        });
    }
    let b = spectrum.apply_fn(f64::sqrt)?;
    let b_inv = spectrum.apply_fn(|x| 1.0 / x.sqrt())?;
    let u = a * &b_inv;

    let residuals = PolarResiduals {
        reconstruction: a.dist(&(&u * &b)) / a.frob_norm(),
        unitarity: (&u.adjoint() * &u).dist_identity(),
        j_realness: u.dist(&j.sandwich(&u)?),
        positivity_floor: spectrum.min().sqrt(),
        hermiticity: b.hermitian_residual() / (1.0 + b.frob_norm()),
        j_unitarity: relative_j_unitarity(j, &b)?,
    };
    Ok(PolarParts { u, b, residuals })
}

pub fn synthesize(j: &Conjugation, u: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    synthesize_with(j, u, b, DEFAULT_TOL)
}

/// `A = U·B` after checking both factors.
pub fn synthesize_with(j: &Conjugation, u: &CMatrix, b: &CMatrix, tol: f64) -> Result<CMatrix> {
    let n = j.dim();
    for (name, m) in [("U", u), ("B", b)] {
        if m.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "factor {name} is {}x{}, conjugation acts on C^{n}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let bad = |factor: &str, residual: f64| Error::BadFactor {
        factor: factor.to_string(),
        residual,
        threshold: tol,
    };
    let unitarity = (&u.adjoint() * u).dist_identity();
    if unitarity.is_nan() || unitarity > tol {
        return Err(bad("U unitary", unitarity));
    }
    let j_real = u.dist(&j.sandwich(u)?);
    if j_real.is_nan() || j_real > tol {
        return Err(bad("U J-real", j_real));
    }
    let herm = b.hermitian_residual() / (1.0 + b.frob_norm());
    if herm.is_nan() || herm > tol {
        return Err(bad("B Hermitian", herm));
    }
    let floor = herm_eig(&b.hermitian_part())?.min();
    if floor.is_nan() || floor <= 0.0 {
        return Err(Error::BadFactor {
            factor: "B positive definite".into(),
            residual: floor,
            threshold: 0.0,
        });
    }
    let ju = relative_j_unitarity(j, b)?;
    if ju.is_nan() || ju > tol {
        return Err(bad("B J-unitary", ju));
    }
    Ok(u * b)
}

fn check_dim(j: &Conjugation, dim: usize) -> Result<()> {
    if dim != j.dim() {
        return Err(Error::DimensionMismatch(format!(
            "requested dimension {dim}, conjugation acts on C^{}",
            j.dim()
        )));
    }
    Ok(())
}

/// `Q·O·Q*` with `Q` a J-fixed orthonormal basis and `O` random real orthogonal.
pub fn random_j_real_unitary(j: &Conjugation, dim: usize, seed: u64) -> Result<CMatrix> {
    check_dim(j, dim)?;
    let q = fixed_basis(j, &CMatrix::identity(dim))?;
    let o = random_orthogonal(&mut rng(seed), dim);
    Ok(&(&q * &o) * &q.adjoint())
}

/// `Q·exp(iK)·Q*` for a real skew-symmetric generator `K` and a J-fixed
/// orthonormal basis `Q`. Hermitian, positive definite and J-unitary.
pub fn positive_j_unitary_from_generator(j: &Conjugation, k: &CMatrix) -> Result<CMatrix> {
    check_dim(j, k.rows())?;
    if !k.is_square() {
        return Err(Error::DimensionMismatch("generator must be square".into()));
    }
    let skew = (k + &k.transpose()).frob_norm();
    let imag = k.as_slice().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if skew > 1e-12 * (1.0 + k.frob_norm()) || imag > 0.0 {
        return Err(Error::BadFactor {
            factor: "generator real skew-symmetric".into(),
            residual: skew.max(imag),
            threshold: 1e-12,
        });
    }
    let q = fixed_basis(j, &CMatrix::identity(k.rows()))?;
    let e = herm_fn(&k.scale(I), f64::exp)?;
    Ok((&(&q * &e) * &q.adjoint()).hermitian_part())
}

/// Random positive J-unitary matrix. The generator has uniform entries,
/// rescaled so that its spectral norm is uniform on `[0, 2]`.
pub fn random_positive_j_unitary(j: &Conjugation, dim: usize, seed: u64) -> Result<CMatrix> {
    check_dim(j, dim)?;
    let mut r = rng(seed);
    let mut k = CMatrix::zeros(dim, dim);
    for p in 0..dim {
        for q in p + 1..dim {
            let v: f64 = r.random_range(-1.0..1.0);
            k[(p, q)] = C64::new(v, 0.0);
            k[(q, p)] = C64::new(-v, 0.0);
        }
    }
    let radius: f64 = r.random_range(0.0..2.0);
    let spectral = herm_eig(&k.scale(I))?
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if spectral > 0.0 {
        k = k.scale_real(radius / spectral);
    }
    positive_j_unitary_from_generator(j, &k)
}

pub fn check_derived_j_unitary(j: &Conjugation, a: &CMatrix) -> Result<CheckReport> {
    check_derived_j_unitary_with(j, a, DEFAULT_TOL)
}

/// J-unitarity of `A⁻¹`, `A*` and `A*A`, plus the full-domain-and-range
/// surrogate (invertibility) for a J-unitary `A`.
pub fn check_derived_j_unitary_with(j: &Conjugation, a: &CMatrix, tol: f64) -> Result<CheckReport> {
    j_unitary_gate(j, a, tol)?;
    let ju = |m: &CMatrix| -> Result<f64> {
        Ok(classify_with(j, m, tol)?
            .residual(OperatorClass::JUnitary)
            .unwrap_or(f64::INFINITY))
    };
    let inv = inverse(a)?;
    let mut report = CheckReport::default();
    report.push("inverse-j-unitary", ju(&inv)?, tol);
    report.push("adjoint-j-unitary", ju(&a.adjoint())?, tol);
    report.push("gram-j-unitary", ju(&(&a.adjoint() * a))?, tol);
    // D(A) = R(A) = H: A maps onto the whole space, i.e. A·A⁻¹ = I
    report.push(
        "full-domain-and-range",
        (a * &inv).dist_identity() / (1.0 + a.frob_norm() * inv.frob_norm()),
        tol,
    );
    Ok(report)
}

pub fn check_unitary_equiv(j: &Conjugation, a: &CMatrix) -> Result<CheckReport> {
    check_unitary_equiv_with(j, a, DEFAULT_TOL)
}

/// `AA* = U(A*A)U⁻¹` with `U` the polar factor, and equal Gram spectra.
pub fn check_unitary_equiv_with(j: &Conjugation, a: &CMatrix, tol: f64) -> Result<CheckReport> {
    let parts = refined_polar_with(j, a, tol)?;
    let gram = &a.adjoint() * a;
    let cogram = a * &a.adjoint();
    let conj = &(&parts.u * &gram) * &inverse(&parts.u)?;
    let norm_a = a.frob_norm();
    let mut report = CheckReport::default();
    report.push(
        "unitary-equivalence",
        cogram.dist(&conj) / (1.0 + norm_a * norm_a),
        tol,
    );
    let s1 = herm_eig(&gram.hermitian_part())?.eigenvalues;
    let s2 = herm_eig(&cogram.hermitian_part())?.eigenvalues;
    let gap = s1
        .iter()
        .zip(&s2)
        .map(|(x, y)| (x - y).abs() / (1.0 + x.abs()))
        .fold(0.0, f64::max);
    report.push("gram-spectra", gap, tol);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterPairing {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    /// Eigenvalue of the cluster the J-image was matched with.
    pub partner: f64,
    /// Largest principal angle between `J(E_λ)` and `E_partner`.
    pub angle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReciprocityReport {
    pub pairings: Vec<ClusterPairing>,
    pub checks: CheckReport,
}

pub fn check_reciprocity(j: &Conjugation, a: &CMatrix) -> Result<ReciprocityReport> {
    check_reciprocity_with(j, a, DEFAULT_TOL)
}

/// For `G = A*A`: `J` maps each λ-eigenspace onto the 1/λ-eigenspace,
/// `J|A|J = √(G⁻¹)` equals `|A|⁻¹`, and `√(G⁻¹) = (√G)⁻¹`.
pub fn check_reciprocity_with(j: &Conjugation, a: &CMatrix, tol: f64) -> Result<ReciprocityReport> {
    j_unitary_gate(j, a, tol)?;
    let g = (&a.adjoint() * a).hermitian_part();
    let spectrum = herm_eig(&g)?;
    let values: Vec<f64> = (0..spectrum.clusters.len())
        .map(|c| spectrum.cluster_value(c))
        .collect();

    let mut pairings = Vec::with_capacity(values.len());
    for (c, &lambda) in values.iter().enumerate() {
        let target = 1.0 / lambda;
        let (partner, mismatch) = values
            .iter()
            .enumerate()
            .map(|(idx, v)| (idx, (v - target).abs() / target.abs()))
            .fold(
                (0, f64::INFINITY),
                |b, cur| if cur.1 < b.1 { cur } else { b },
            );
        let image = j.apply_columns(&spectrum.cluster_basis(c))?;
        let angle = if mismatch <= PAIRING_TOL {
            max_principal_angle(&image, &spectrum.cluster_basis(partner))
        } else {
            FRAC_PI_2
        };
        pairings.push(ClusterPairing {
            eigenvalue: lambda,
            multiplicity: spectrum.clusters[c].len(),
            partner: values[partner],
            angle,
        });
    }

    let modulus = spectrum.apply_fn(f64::sqrt)?;
    let modulus_inv = inverse(&modulus)?;
    let scale = 1.0 + modulus.frob_norm() + modulus_inv.frob_norm();
    let sqrt_of_inverse = herm_fn(&inverse(&g)?.hermitian_part(), f64::sqrt)?;

    let mut checks = CheckReport::default();
    checks.push(
        "eigenspace-pairing",
        pairings.iter().map(|p| p.angle).fold(0.0, f64::max),
        ANGLE_TOL,
    );
    checks.push(
        "j-modulus-j-equals-inverse",
        j.sandwich(&modulus)?.dist(&modulus_inv) / scale,
        tol,
    );
    checks.push(
        "sqrt-inverse-commute",
        sqrt_of_inverse.dist(&modulus_inv) / scale,
        tol,
    );
    Ok(ReciprocityReport { pairings, checks })
}
