//! The J-bilinear form and residual-based classification against the
//! J-structured operator classes.
//!
//! Every residual is a Frobenius deviation divided by
//! `1 + ‖A‖_F + ‖A⁻¹‖_F` (the inverse term only when `A` is invertible).

use serde::Serialize;

use crate::conjugation::Conjugation;
use crate::error::{Error, Result};
use crate::numkernel::{inner, inverse, CMatrix, C64, ONE, ZERO};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const ORACLE_CAP: usize = 8;

/// `[x, y]_J = (x, Jy)`; bilinear in both arguments.
pub fn bilinear_form(j: &Conjugation, x: &[C64], y: &[C64]) -> Result<C64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(inner(x, &j.apply(y)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorClass {
    JSymmetric,
    JSkewSymmetric,
    JIsometric,
    JSelfAdjoint,
    JSkewSelfAdjoint,
    JUnitary,
    JReal,
    JImaginary,
    SelfAdjoint,
    Unitary,
}

impl OperatorClass {
    pub const ALL: [OperatorClass; 10] = [
        OperatorClass::JSymmetric,
        OperatorClass::JSkewSymmetric,
        OperatorClass::JIsometric,
        OperatorClass::JSelfAdjoint,
        OperatorClass::JSkewSelfAdjoint,
        OperatorClass::JUnitary,
        OperatorClass::JReal,
        OperatorClass::JImaginary,
        OperatorClass::SelfAdjoint,
        OperatorClass::Unitary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorClass::JSymmetric => "j-symmetric",
            OperatorClass::JSkewSymmetric => "j-skew-symmetric",
            OperatorClass::JIsometric => "j-isometric",
            OperatorClass::JSelfAdjoint => "j-self-adjoint",
            OperatorClass::JSkewSelfAdjoint => "j-skew-self-adjoint",
            OperatorClass::JUnitary => "j-unitary",
            OperatorClass::JReal => "j-real",
            OperatorClass::JImaginary => "j-imaginary",
            OperatorClass::SelfAdjoint => "self-adjoint",
            OperatorClass::Unitary => "unitary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassVerdict {
    /// `None` when the class does not apply (J-unitary of a singular matrix).
    pub residual: Option<f64>,
    pub verdict: bool,
}

impl ClassVerdict {
    fn judge(residual: f64, tol: f64) -> Self {
        ClassVerdict {
            residual: Some(residual),
            verdict: residual <= tol,
        }
    }

    fn not_applicable() -> Self {
        ClassVerdict {
            residual: None,
            verdict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassEntry {
    pub class: OperatorClass,
    #[serde(flatten)]
    pub check: ClassVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorProfile {
    pub classes: Vec<ClassEntry>,
    pub invertible: bool,
    /// `‖A‖_F·‖A⁻¹‖_F`, absent for singular `A`.
    pub condition: Option<f64>,
    pub threshold: f64,
}

impl OperatorProfile {
    pub fn get(&self, class: OperatorClass) -> ClassVerdict {
        self.classes
            .iter()
            .find(|e| e.class == class)
            .map(|e| e.check)
            .expect("every class is present")
    }

    pub fn passes(&self, class: OperatorClass) -> bool {
        self.get(class).verdict
    }

    pub fn residual(&self, class: OperatorClass) -> Option<f64> {
        self.get(class).residual
    }

    fn from_residuals(
        residuals: impl Fn(OperatorClass) -> Option<f64>,
        invertible: bool,
        condition: Option<f64>,
        tol: f64,
    ) -> Self {
        let classes = OperatorClass::ALL
            .iter()
            .map(|&class| ClassEntry {
                class,
                check: match residuals(class) {
                    Some(r) => ClassVerdict::judge(r, tol),
                    None => ClassVerdict::not_applicable(),
                },
            })
            .collect();
        OperatorProfile {
            classes,
            invertible,
            condition,
            threshold: tol,
        }
    }
}

fn check_operator(j: &Conjugation, a: &CMatrix) -> Result<()> {
    if !a.is_square() || a.rows() != j.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, conjugation acts on C^{}",
            a.rows(),
            a.cols(),
            j.dim()
        )));
    }
    Ok(())
}

pub fn classify(j: &Conjugation, a: &CMatrix) -> Result<OperatorProfile> {
    classify_with(j, a, DEFAULT_TOL)
}

pub fn classify_with(j: &Conjugation, a: &CMatrix, tol: f64) -> Result<OperatorProfile> {
    check_operator(j, a)?;
    let n = a.rows();
    let inv = inverse(a).ok();
    let norm_a = a.frob_norm();
    let norm_inv = inv.as_ref().map(|m| m.frob_norm());
    let scale = 1.0 + norm_a + norm_inv.unwrap_or(0.0);

    let adj = a.adjoint();
    let jaj = j.sandwich(a)?;
    let ja_adj_j = j.sandwich(&adj)?;
    let ident = CMatrix::identity(n);

    let residual = |class: OperatorClass| -> Option<f64> {
        let raw = match class {
            OperatorClass::JSymmetric => jaj.dist(&adj),
            OperatorClass::JSkewSymmetric => (&jaj + &adj).frob_norm(),
            OperatorClass::JIsometric => (&adj * &jaj).dist(&ident),
            OperatorClass::JSelfAdjoint => a.dist(&ja_adj_j),
            OperatorClass::JSkewSelfAdjoint => (a + &ja_adj_j).frob_norm(),
            OperatorClass::JUnitary => inv.as_ref()?.dist(&ja_adj_j),
            OperatorClass::JReal => a.dist(&jaj),
            OperatorClass::JImaginary => (a + &jaj).frob_norm(),
            OperatorClass::SelfAdjoint => a.dist(&adj),
            OperatorClass::Unitary => (&adj * a).dist(&ident),
        };
        Some(raw / scale)
    };
    Ok(OperatorProfile::from_residuals(
        residual,
        inv.is_some(),
        norm_inv.map(|ni| norm_a * ni),
        tol,
    ))
}

/// Brute-force cross-check of [`classify`]: every defining identity is
/// evaluated on all standard-basis pairs through the bilinear form and the
/// action of `J` on vectors, and the deviations are aggregated in the
/// Frobenius sense. The inverse comes from the adjugate, not elimination.
pub fn definitional_oracle(j: &Conjugation, a: &CMatrix) -> Result<OperatorProfile> {
    definitional_oracle_with(j, a, DEFAULT_TOL)
}

pub fn definitional_oracle_with(j: &Conjugation, a: &CMatrix, tol: f64) -> Result<OperatorProfile> {
    check_operator(j, a)?;
    let n = a.rows();
    if n > ORACLE_CAP {
        return Err(Error::CapExceeded {
            dim: n,
            cap: ORACLE_CAP,
        });
    }
    let e = |i: usize| -> Vec<C64> {
        let mut v = vec![ZERO; n];
        v[i] = ONE;
        v
    };
    let basis: Vec<Vec<C64>> = (0..n).map(e).collect();
    let adj = a.adjoint();
    let ae: Vec<Vec<C64>> = basis.iter().map(|x| a.mat_vec(x)).collect();
    let form = |x: &[C64], y: &[C64]| bilinear_form(j, x, y).expect("dimensions checked");
    let apply = |x: &[C64]| j.apply(x).expect("dimensions checked");

    let inv = adjugate_inverse(a);
    let norm_a = a.frob_norm();
    let norm_inv = inv.as_ref().map(|m| m.frob_norm());
    let scale = 1.0 + norm_a + norm_inv.unwrap_or(0.0);

    // Σ over pairs of |f(i, j)|²
    let pairs = |f: &dyn Fn(usize, usize) -> C64| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                s += f(i, k).norm_sqr();
            }
        }
        s.sqrt()
    };
    // Σ over basis vectors of ‖lhs(e_k) − rhs(e_k)‖²
    let columns = |f: &dyn Fn(&[C64]) -> Vec<C64>| -> f64 {
        basis
            .iter()
            .map(|x| f(x).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    };

    let residual = |class: OperatorClass| -> Option<f64> {
        let raw = match class {
            OperatorClass::JSymmetric => {
                pairs(&|i, k| form(&ae[i], &basis[k]) - form(&basis[i], &ae[k]))
            }
            OperatorClass::JSkewSymmetric => {
                pairs(&|i, k| form(&ae[i], &basis[k]) + form(&basis[i], &ae[k]))
            }
            OperatorClass::JIsometric => {
                pairs(&|i, k| form(&ae[i], &ae[k]) - form(&basis[i], &basis[k]))
            }
            OperatorClass::JSelfAdjoint => columns(&|x| {
                let rhs = apply(&adj.mat_vec(&apply(x)));
                sub(&a.mat_vec(x), &rhs)
            }),
            OperatorClass::JSkewSelfAdjoint => columns(&|x| {
                let rhs = apply(&adj.mat_vec(&apply(x)));
                add(&a.mat_vec(x), &rhs)
            }),
            OperatorClass::JUnitary => {
                let inv = inv.as_ref()?;
                columns(&|x| {
                    let rhs = apply(&adj.mat_vec(&apply(x)));
                    sub(&inv.mat_vec(x), &rhs)
                })
            }
            OperatorClass::JReal => columns(&|x| sub(&a.mat_vec(&apply(x)), &apply(&a.mat_vec(x)))),
            OperatorClass::JImaginary => {
                columns(&|x| add(&a.mat_vec(&apply(x)), &apply(&a.mat_vec(x))))
            }
            OperatorClass::SelfAdjoint => {
                pairs(&|i, k| inner(&ae[i], &basis[k]) - inner(&basis[i], &ae[k]))
            }
            OperatorClass::Unitary => {
                pairs(&|i, k| inner(&ae[i], &ae[k]) - inner(&basis[i], &basis[k]))
            }
        };
        Some(raw / scale)
    };
    Ok(OperatorProfile::from_residuals(
        residual,
        inv.is_some(),
        norm_inv.map(|ni| norm_a * ni),
        tol,
    ))
}

/// `‖AᵀA − I‖_F` on the same relative scale as [`classify`]; under the
/// canonical conjugation J-unitarity is complex orthogonality.
pub fn complex_orthogonality_residual(a: &CMatrix) -> f64 {
    let scale = 1.0 + a.frob_norm() + inverse(a).map(|m| m.frob_norm()).unwrap_or(0.0);
    (&a.transpose() * a).dist_identity() / scale
}

fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn add(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// Determinant by cofactor expansion along the first row.
fn laplace_det(m: &[Vec<C64>]) -> C64 {
    let n = m.len();
    match n {
        0 => ONE,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut det = ZERO;
            for col in 0..n {
                if m[0][col] == ZERO {
                    continue;
                }
                let minor: Vec<Vec<C64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != col)
                            .map(|(_, z)| *z)
                            .collect()
                    })
                    .collect();
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                det += m[0][col] * laplace_det(&minor) * sign;
            }
            det
        }
    }
}

/// `adj(A)/det(A)`; `None` when the determinant vanishes relative to the
/// entry scale or the result fails to invert `A`.
fn adjugate_inverse(a: &CMatrix) -> Option<CMatrix> {
    let n = a.rows();
    let rows: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|k| a[(i, k)]).collect())
        .collect();
    let det = laplace_det(&rows);
    let entry_scale = a.max_abs();
    if det.norm() <= (1e-13 * entry_scale).powi(n as i32) || det.norm() == 0.0 {
        return None;
    }
    let inv = CMatrix::from_fn(n, n, |i, k| {
        // inverse[i][k] = cofactor(k, i) / det
        let minor: Vec<Vec<C64>> = (0..n)
            .filter(|&r| r != k)
            .map(|r| (0..n).filter(|&c| c != i).map(|c| rows[r][c]).collect())
            .collect();
        let sign = if (i + k) % 2 == 0 { 1.0 } else { -1.0 };
        laplace_det(&minor) * sign / det
    });
    if !inv.is_finite() || (a * &inv).dist_identity() > 1e-6 {
        return None;
    }
    Some(inv)
}
