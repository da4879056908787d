//! J-imaginary self-adjoint extensions of partially defined symmetric
//! operators through the Cayley transform.
//!
//! A symmetric `A` defined on a J-invariant subspace `D` has ranges
//! `M_{±i} = (A ∓ i)D` and defect spaces `N_{±i} = H ⊖ M_{±i}`. The Cayley
//! isometry `(A − i)x ↦ (A + i)x` maps `M_i` onto `M_{−i}`; pairing J-fixed
//! orthonormal bases of the defect spaces gives a J-real isometry `W` from
//! `N_i` onto `N_{−i}`. Then `V = U_i ⊕ W` is unitary and J-real, and
//! `Ã = i + 2i(V − I)⁻¹` is a self-adjoint J-imaginary extension of `A`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::conjugation::{fixed_basis, Conjugation};
use crate::error::{Error, Result};
use crate::jclass::DEFAULT_TOL;
use crate::numkernel::random::{random_orthogonal, rng};
use crate::numkernel::{
    inverse, min_singular_value, orth_complement, orthonormalize, projector, singular_values,
    CMatrix, C64, I,
};
use crate::report::CheckReport;
use serde::Serialize;

/// Unitarity and J-realness threshold for the assembled `V`.
pub const V_TOL: f64 = 1e-9;
/// `V − I` counts as singular at or below this smallest singular value.
pub const SINGULAR_TOL: f64 = 1e-10;
/// Singular values of `V − I` below this count toward the reported kernel.
const KERNEL_TOL: f64 = 1e-6;
const ORTHONORMAL_TOL: f64 = 1e-10;

/// A linear operator known only on the span of `domain_basis`: column `j` of
/// `action` is the image of column `j` of `domain_basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSymmetricOperator {
    domain_basis: CMatrix,
    action: CMatrix,
}

impl PartialSymmetricOperator {
    /// Checks shapes and orthonormality of the domain frame. Symmetry is
    /// reported by [`verify_symmetric_jimaginary`], not enforced here.
    pub fn new(domain_basis: CMatrix, action: CMatrix) -> Result<Self> {
        let (n, d) = domain_basis.shape();
        if action.shape() != (n, d) {
            return Err(Error::BadShape(format!(
                "domain basis is {n}x{d} but action is {}x{}",
                action.rows(),
                action.cols()
            )));
        }
        if n == 0 || d == 0 || d > n {
            return Err(Error::BadShape(format!(
                "domain dimension {d} must lie in 1..={n}"
            )));
        }
        let gram_dev = (&domain_basis.adjoint() * &domain_basis).dist_identity();
        if gram_dev > ORTHONORMAL_TOL {
            return Err(Error::InvalidMatrix(format!(
                "domain basis columns are not orthonormal (residual {gram_dev:.3e})"
            )));
        }
        Ok(PartialSymmetricOperator {
            domain_basis,
            action,
        })
    }

    /// Everywhere-defined operator, domain frame = identity.
    pub fn full(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::BadShape(
                "full-domain operator must be square".into(),
            ));
        }
        Self::new(CMatrix::identity(a.rows()), a.clone())
    }

    pub fn ambient(&self) -> usize {
        self.domain_basis.rows()
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_basis.cols()
    }

    pub fn domain_basis(&self) -> &CMatrix {
        &self.domain_basis
    }

    pub fn action(&self) -> &CMatrix {
        &self.action
    }

    /// `D*·A·D`, Hermitian iff the operator is symmetric.
    pub fn compressed(&self) -> CMatrix {
        &self.domain_basis.adjoint() * &self.action
    }
}

fn check_ambient(j: &Conjugation, t: &PartialSymmetricOperator) -> Result<()> {
    if j.dim() != t.ambient() {
        return Err(Error::DimensionMismatch(format!(
            "operator lives in C^{}, conjugation acts on C^{}",
            t.ambient(),
            j.dim()
        )));
    }
    Ok(())
}

pub fn verify_symmetric_jimaginary(
    j: &Conjugation,
    t: &PartialSymmetricOperator,
) -> Result<CheckReport> {
    verify_symmetric_jimaginary_with(j, t, DEFAULT_TOL)
}

/// Symmetry, J-invariance of the domain and `A(Jf) = −J(Af)` on the domain.
/// A domain that `J` does not preserve is an error, since the remaining
/// identity is then meaningless.
pub fn verify_symmetric_jimaginary_with(
    j: &Conjugation,
    t: &PartialSymmetricOperator,
    tol: f64,
) -> Result<CheckReport> {
    check_ambient(j, t)?;
    let d = t.domain_basis();
    let invariance = j.invariance_residual(d)?;
    if invariance > tol {
        return Err(Error::DomainNotJInvariant {
            residual: invariance,
        });
    }
    let scale = 1.0 + t.action().frob_norm();
    let s = t.compressed();
    // J f_k expanded in the domain frame: coordinates D*·J(D)
    let jd_coords = &d.adjoint() * &j.apply_columns(d)?;
    let a_of_jf = t.action() * &jd_coords;
    let j_of_af = j.apply_columns(t.action())?;

    let mut report = CheckReport::default();
    report.push("symmetry", s.hermitian_residual() / scale, tol);
    report.push("domain-j-invariance", invariance, tol);
    report.push(
        "j-anticommutation",
        (&a_of_jf + &j_of_af).frob_norm() / scale,
        tol,
    );
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct DefectData {
    /// `(A − i)D`, column-wise images of the domain frame.
    pub m_plus: CMatrix,
    /// `(A + i)D`.
    pub m_minus: CMatrix,
    /// Orthonormal basis of `N_i = H ⊖ M_i`.
    pub n_plus: CMatrix,
    /// Orthonormal basis of `N_{−i}`.
    pub n_minus: CMatrix,
    pub defect_numbers: (usize, usize),
}

pub fn ranges_defects(t: &PartialSymmetricOperator) -> Result<DefectData> {
    let shift = t.domain_basis().scale(I);
    let m_plus = t.action() - &shift;
    let m_minus = t.action() + &shift;
    let n_plus = orth_complement(&m_plus, t.ambient())?;
    let n_minus = orth_complement(&m_minus, t.ambient())?;
    let defect_numbers = (n_plus.cols(), n_minus.cols());
    Ok(DefectData {
        m_plus,
        m_minus,
        n_plus,
        n_minus,
        defect_numbers,
    })
}

/// Projector-invariance residuals of `N_{+i}` and `N_{−i}` under `J`.
pub fn check_defect_j_invariance(
    j: &Conjugation,
    t: &PartialSymmetricOperator,
) -> Result<CheckReport> {
    check_ambient(j, t)?;
    let defect = ranges_defects(t)?;
    let mut report = CheckReport::default();
    for (name, basis) in [
        ("defect-plus-j-invariance", &defect.n_plus),
        ("defect-minus-j-invariance", &defect.n_minus),
    ] {
        let residual = if basis.cols() == 0 {
            0.0
        } else {
            let p = projector(basis);
            p.dist(&j.sandwich(&p)?)
        };
        report.push(name, residual, DEFAULT_TOL);
    }
    Ok(report)
}

/// The Cayley isometry `(A − i)x ↦ (A + i)x` as an `n × n` matrix that acts
/// on `M_i` and vanishes on `N_i`.
pub fn cayley_isometry(t: &PartialSymmetricOperator) -> Result<CMatrix> {
    let defect = ranges_defects(t)?;
    cayley_from_ranges(&defect)
}

fn cayley_from_ranges(defect: &DefectData) -> Result<CMatrix> {
    let mp = &defect.m_plus;
    let gram = &mp.adjoint() * mp;
    // pseudo-inverse of the full-rank frame m_plus on its range
    Ok(&(&defect.m_minus * &inverse(&gram)?) * &mp.adjoint())
}

/// `‖(A − i)D‖ = ‖(A + i)D‖` column-wise, as a Gram difference.
pub fn cayley_isometry_residual(defect: &DefectData) -> f64 {
    let gp = &defect.m_plus.adjoint() * &defect.m_plus;
    let gm = &defect.m_minus.adjoint() * &defect.m_minus;
    gp.dist(&gm) / (1.0 + gp.frob_norm())
}

#[derive(Debug, Clone)]
pub struct WPairing {
    /// `Σ f_k^− (f_k^+)*`, vanishing on `M_i`.
    pub w: CMatrix,
    /// J-fixed orthonormal basis of `N_i`.
    pub f_plus: CMatrix,
    /// J-fixed orthonormal basis of `N_{−i}`, paired with `f_plus` by index.
    pub f_minus: CMatrix,
}

pub fn build_w(j: &Conjugation, defect: &DefectData) -> Result<WPairing> {
    if defect.n_plus.cols() != defect.n_minus.cols() {
        return Err(Error::BadShape(format!(
            "unequal defect numbers {:?}",
            defect.defect_numbers
        )));
    }
    let f_plus = fixed_basis(j, &defect.n_plus)?;
    let f_minus = fixed_basis(j, &defect.n_minus)?;
    Ok(WPairing {
        w: &f_minus * &f_plus.adjoint(),
        f_plus,
        f_minus,
    })
}

/// Extra pairings tried after the sign flips, each mixing the `f_minus`
/// frame with a seeded real orthogonal matrix.
pub const MIXING_ATTEMPTS: usize = 4;

/// How the defect frames were paired in `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum PairingAdjustment {
    None,
    /// `f_minus` column negated.
    FlippedColumn(usize),
    /// `f_minus` right-multiplied by the real orthogonal matrix of this seed.
    Mixed(u64),
}

#[derive(Debug, Clone)]
pub struct ExtensionResult {
    /// `U_i ⊕ W`.
    pub v: CMatrix,
    pub a_tilde: CMatrix,
    pub w_used: WPairing,
    pub adjustment: PairingAdjustment,
    pub attempts: usize,
    pub defect_numbers: (usize, usize),
    pub diagnostics: CheckReport,
}

pub fn extend(
    j: &Conjugation,
    t: &PartialSymmetricOperator,
    retry_budget: Option<usize>,
) -> Result<ExtensionResult> {
    extend_with(j, t, retry_budget, DEFAULT_TOL)
}

/// `k`-th pairing in the retry order: the plain pairing, then `f_minus`
/// column 0, 1, ... negated, then [`MIXING_ATTEMPTS`] seeded mixings.
fn adjustment(k: usize, defect: usize) -> Option<PairingAdjustment> {
    match k {
        0 => Some(PairingAdjustment::None),
        k if k <= defect => Some(PairingAdjustment::FlippedColumn(k - 1)),
        k if k <= defect + MIXING_ATTEMPTS && defect > 0 => {
            Some(PairingAdjustment::Mixed((k - defect) as u64))
        }
        _ => None,
    }
}

fn adjusted(base: &WPairing, adj: PairingAdjustment) -> WPairing {
    let mut pairing = base.clone();
    match adj {
        PairingAdjustment::None => return pairing,
        PairingAdjustment::FlippedColumn(col) => {
            let negated: Vec<C64> = pairing.f_minus.col(col).iter().map(|z| -z).collect();
            pairing.f_minus.set_col(col, &negated);
        }
        PairingAdjustment::Mixed(seed) => {
            // real combinations of J-fixed columns stay J-fixed
            let r = random_orthogonal(&mut rng(seed), pairing.f_minus.cols());
            pairing.f_minus = &pairing.f_minus * &r;
        }
    }
    pairing.w = &pairing.f_minus * &pairing.f_plus.adjoint();
    pairing
}

/// Build `Ã = i·I + 2i·(V − I)⁻¹`.
///
/// When `V − I` is singular the pairing is retried with one `W` column
/// negated at a time. A sign flip is a rank-one change, so it cannot clear a
/// kernel of dimension two or more (doubled operators force one); the
/// remaining attempts mix the `f_minus` frame with seeded real orthogonal
/// matrices. `retry_budget` is the total number of attempts and defaults to
/// all of them: defect number + 1 + [`MIXING_ATTEMPTS`].
pub fn extend_with(
    j: &Conjugation,
    t: &PartialSymmetricOperator,
    retry_budget: Option<usize>,
    tol: f64,
) -> Result<ExtensionResult> {
    let gate = verify_symmetric_jimaginary_with(j, t, tol)?;
    if let Some(failed) = gate.failures().next() {
        return Err(Error::GateFailed {
            check: failed.name.clone(),
            residual: failed.residual,
            threshold: failed.threshold,
        });
    }
    let defect = ranges_defects(t)?;
    let cayley = cayley_from_ranges(&defect)?;
    let base = build_w(j, &defect)?;
    let m = base.f_minus.cols();
    let budget = retry_budget.unwrap_or(usize::MAX).max(1);

    let mut last_kernel = 0;
    let mut tried = 0;
    for attempt in 0..budget {
        let Some(adj) = adjustment(attempt, m) else {
            break;
        };
        tried += 1;
        let pairing = adjusted(&base, adj);
        let v = &cayley + &pairing.w;
        let v_minus_i = v.shift(-C64::new(1.0, 0.0));
        if min_singular_value(&v_minus_i) <= SINGULAR_TOL {
            last_kernel = singular_values(&v_minus_i)
                .iter()
                .filter(|&&s| s <= KERNEL_TOL)
                .count()
                .max(1);
            continue;
        }
        let a_tilde = inverse(&v_minus_i)?.scale(2.0 * I).shift(I);
        let diagnostics = extension_diagnostics(j, t, &defect, &v, &a_tilde, tol)?;
        return Ok(ExtensionResult {
            v,
            a_tilde,
            w_used: pairing,
            adjustment: adj,
            attempts: attempt + 1,
            defect_numbers: defect.defect_numbers,
            diagnostics,
        });
    }
    Err(Error::MultivaluedRelation {
        kernel_dim: last_kernel,
        attempts: tried,
    })
}

fn extension_diagnostics(
    j: &Conjugation,
    t: &PartialSymmetricOperator,
    defect: &DefectData,
    v: &CMatrix,
    a_tilde: &CMatrix,
    tol: f64,
) -> Result<CheckReport> {
    let norm_at = a_tilde.frob_norm();
    let extends = (a_tilde * t.domain_basis()).dist(t.action()) / (1.0 + t.action().frob_norm());
    let mut report = CheckReport::default();
    report.push(
        "self-adjointness",
        a_tilde.hermitian_residual() / (1.0 + norm_at),
        tol,
    );
    report.push("extends-a", extends, tol);
    report.push(
        "j-imaginarity",
        (&j.sandwich(a_tilde)? + a_tilde).frob_norm() / (1.0 + norm_at),
        tol,
    );
    report.push("cayley-isometry", cayley_isometry_residual(defect), tol);
    report.push("v-unitarity", (&v.adjoint() * v).dist_identity(), V_TOL);
    report.push("v-j-realness", v.dist(&j.sandwich(v)?), V_TOL);
    Ok(report)
}

/// `A ⊕ (−A)` on `H ⊕ H` with `J ⊕ J`.
pub fn double(
    j: &Conjugation,
    t: &PartialSymmetricOperator,
) -> Result<(Conjugation, PartialSymmetricOperator)> {
    check_ambient(j, t)?;
    let jj = j.direct_sum(j);
    let domain = t.domain_basis().block_diag(t.domain_basis());
    let action = t.action().block_diag(&-t.action());
    Ok((jj, PartialSymmetricOperator::new(domain, action)?))
}

/// Random symmetric J-imaginary operator on a random J-invariant domain of
/// dimension `d`: in a J-fixed frame `Q` the domain is spanned by real
/// orthonormal columns and the operator is `i·S` with `S` real skew.
pub fn random_j_imaginary_partial(
    j: &Conjugation,
    d: usize,
    seed: u64,
) -> Result<PartialSymmetricOperator> {
    let n = j.dim();
    if d == 0 || d > n {
        return Err(Error::BadShape(format!(
            "domain dimension {d} must lie in 1..={n}"
        )));
    }
    let q = fixed_basis(j, &CMatrix::identity(n))?;
    let mut r = rng(seed);
    let o = random_orthogonal(&mut r, n).col_range(0, d);
    let mut s = CMatrix::zeros(n, n);
    for p in 0..n {
        for k in p + 1..n {
            let x: f64 = r.sample(StandardNormal);
            s[(p, k)] = C64::new(0.0, x);
            s[(k, p)] = C64::new(0.0, -x);
        }
    }
    let domain = orthonormalize(&(&q * &o))?;
    let action = &(&q * &s) * &(&q.adjoint() * &domain);
    PartialSymmetricOperator::new(domain, action)
}
