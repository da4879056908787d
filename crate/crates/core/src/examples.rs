//! Worked operator families.
//!
//! * The block family `⊕_{k=1..n} A₀(1 − 1/k)`, with `A₀(β) = [[0, βi], [−βi, 0]]`
//!   under blockwise entrywise conjugation: bounded, self-adjoint and
//!   J-skew-self-adjoint at every level, while `((I + A)⁻¹e_{k,1}, e_{k,1})`
//!   and the norm of its Cayley transform `V = I + 2(A − I)⁻¹` grow without
//!   bound in `k`.
//! * The imaginary Jacobi-type operator `i·tridiag(−α, 0, α)` restricted to
//!   the first `d` coordinates of `C^n`.

use serde::Serialize;

use crate::conjugation::Conjugation;
use crate::error::{Error, Result};
use crate::extension::PartialSymmetricOperator;
use crate::jclass::{classify_with, OperatorClass, OperatorProfile};
use crate::numkernel::{herm_eig, inverse, CMatrix, C64, I, ZERO};
use crate::report::CheckReport;

/// `A₀(β)`, defined for `β ∈ (−1, 1)`.
pub fn block_a0(beta: f64) -> Result<CMatrix> {
    if !(beta > -1.0 && beta < 1.0) {
        return Err(Error::OutOfRange {
            name: "beta",
            value: beta,
            range: "(-1, 1)",
        });
    }
    Ok(CMatrix::from_rows(&[
        vec![ZERO, I * beta],
        vec![-I * beta, ZERO],
    ]))
}

/// `(A₀(β) ± I)⁻¹ = 1/(1 − β²)·[[±1, −βi], [βi, ±1]]`.
pub fn a0_shift_inverse_closed_form(beta: f64, sign: f64) -> CMatrix {
    let s = 1.0 / (1.0 - beta * beta);
    CMatrix::from_rows(&[
        vec![C64::new(sign * s, 0.0), -I * (beta * s)],
        vec![I * (beta * s), C64::new(sign * s, 0.0)],
    ])
}

/// Largest entrywise deviation between the numerical inverse of
/// `A₀(β) ± I` and the closed form, over both signs.
pub fn resolvent_check(beta: f64) -> Result<f64> {
    let a0 = block_a0(beta)?;
    let mut worst: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let numeric = inverse(&a0.shift(C64::new(sign, 0.0)))?;
        let closed = a0_shift_inverse_closed_form(beta, sign);
        worst = worst.max((&numeric - &closed).max_abs());
    }
    Ok(worst)
}

/// Level-`n` truncation of the block family.
#[derive(Debug, Clone)]
pub struct TruncationFamily {
    pub level: usize,
    pub conjugation: Conjugation,
    pub operator: CMatrix,
}

pub fn block_beta(k: usize) -> f64 {
    1.0 - 1.0 / k as f64
}

pub fn truncation(level: usize) -> Result<TruncationFamily> {
    if level == 0 {
        return Err(Error::OutOfRange {
            name: "level",
            value: 0.0,
            range: ">= 1",
        });
    }
    let mut operator = CMatrix::zeros(2 * level, 2 * level);
    for k in 1..=level {
        let block = block_a0(block_beta(k))?;
        let o = 2 * (k - 1);
        for r in 0..2 {
            for c in 0..2 {
                operator[(o + r, o + c)] = block[(r, c)];
            }
        }
    }
    Ok(TruncationFamily {
        level,
        conjugation: Conjugation::canonical(2 * level),
        operator,
    })
}

/// One row of a growth table, serialized as `k,computed,formula,rel_err`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub k: usize,
    pub computed: f64,
    pub formula: f64,
    pub rel_err: f64,
}

impl GrowthRow {
    fn new(k: usize, computed: f64, formula: f64) -> Self {
        GrowthRow {
            k,
            computed,
            formula,
            rel_err: (computed - formula).abs() / formula.abs(),
        }
    }
}

/// CSV with header `k,computed,formula,rel_err`; floats in shortest
/// round-trip form.
pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut out = String::from("k,computed,formula,rel_err\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:e}\n",
            r.k, r.computed, r.formula, r.rel_err
        ));
    }
    out
}

/// `((I + A)⁻¹e_{k,1}, e_{k,1})` against `k²/(2k − 1)` for `k = 1..=n`,
/// read off a single inverse of the level-`n` truncation.
pub fn growth_probe(n: usize) -> Result<Vec<GrowthRow>> {
    let family = truncation(n)?;
    let inv = inverse(&family.operator.shift(C64::new(1.0, 0.0)))?;
    Ok((1..=n)
        .map(|k| {
            let idx = 2 * (k - 1);
            let kf = k as f64;
            GrowthRow::new(k, inv[(idx, idx)].re, kf * kf / (2.0 * kf - 1.0))
        })
        .collect())
}

/// `V = I + 2(A − I)⁻¹` for the level-`n` truncation.
pub fn cayley_v(n: usize) -> Result<CMatrix> {
    let family = truncation(n)?;
    let resolvent = inverse(&family.operator.shift(C64::new(-1.0, 0.0)))?;
    Ok(resolvent.scale_real(2.0).shift(C64::new(1.0, 0.0)))
}

/// `V = (A + I)(A − I)⁻¹`, the other expression of the same transform.
pub fn cayley_v_product_form(n: usize) -> Result<CMatrix> {
    let family = truncation(n)?;
    let one = C64::new(1.0, 0.0);
    Ok(&family.operator.shift(one) * &inverse(&family.operator.shift(-one))?)
}

#[derive(Debug, Clone, Serialize)]
pub struct CayleyReport {
    pub level: usize,
    /// `‖(A + I)(A − I)⁻¹ − (I + 2(A − I)⁻¹)‖_F`
    pub agreement: f64,
    /// `‖A − I‖_F·‖(A − I)⁻¹‖_F`
    pub kappa: f64,
    pub profile: OperatorProfile,
    /// Largest relative deviation of the block eigenvalues of `V` from
    /// `{−(2k − 1), −1/(2k − 1)}`.
    pub block_eigen_error: f64,
    pub checks: CheckReport,
}

pub fn cayley_v_report(n: usize, class_tol: f64) -> Result<CayleyReport> {
    let family = truncation(n)?;
    let shifted = family.operator.shift(C64::new(-1.0, 0.0));
    let resolvent = inverse(&shifted)?;
    let kappa = shifted.frob_norm() * resolvent.frob_norm();
    let v = cayley_v(n)?;
    let agreement = v.dist(&cayley_v_product_form(n)?);
    let profile = classify_with(&family.conjugation, &v, class_tol)?;

    let mut block_eigen_error: f64 = 0.0;
    for k in 1..=n {
        let o = 2 * (k - 1);
        let block = v.submatrix(o, o, 2, 2);
        let eig = herm_eig(&block)?.eigenvalues;
        let m = 2.0 * k as f64 - 1.0;
        // ascending: −m ≤ −1/m
        for (got, want) in eig.iter().zip([-m, -1.0 / m]) {
            block_eigen_error = block_eigen_error.max((got - want).abs() / want.abs());
        }
    }

    let mut checks = CheckReport::default();
    checks.push("expressions-agree", agreement, 1e-9 * kappa);
    checks.push(
        "self-adjoint",
        profile
            .residual(OperatorClass::SelfAdjoint)
            .unwrap_or(f64::INFINITY),
        class_tol,
    );
    checks.push(
        "j-unitary",
        profile
            .residual(OperatorClass::JUnitary)
            .unwrap_or(f64::INFINITY),
        class_tol,
    );
    checks.push("block-eigenvalues", block_eigen_error, 1e-8);
    Ok(CayleyReport {
        level: n,
        agreement,
        kappa,
        profile,
        block_eigen_error,
        checks,
    })
}

/// `‖V_k‖₂` for the level-`k` transform against `2k − 1`, `k = 1..=n`.
pub fn norm_growth(n: usize) -> Result<Vec<GrowthRow>> {
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "levels",
            value: 0.0,
            range: ">= 1",
        });
    }
    (1..=n)
        .map(|k| {
            let v = cayley_v(k)?;
            let eig = herm_eig(&v)?;
            let norm = eig.min().abs().max(eig.max().abs());
            Ok(GrowthRow::new(k, norm, 2.0 * k as f64 - 1.0))
        })
        .collect()
}

/// Imaginary Jacobi-type operator `i·T`, `T_{r,r+1} = α_r = −T_{r+1,r}`,
/// restricted to the first `d` coordinates of `C^n` with the canonical
/// conjugation. An empty `alphas` means `α_k = 1`.
pub fn jacobi_imag(
    alphas: &[f64],
    n: usize,
    d: usize,
) -> Result<(Conjugation, PartialSymmetricOperator)> {
    if d == 0 || n < d + 1 {
        return Err(Error::BadShape(format!(
            "need n >= d + 1 >= 2, got n = {n}, d = {d}"
        )));
    }
    let alphas: Vec<f64> = if alphas.is_empty() {
        vec![1.0; n - 1]
    } else {
        alphas.to_vec()
    };
    if alphas.len() < n - 1 {
        return Err(Error::BadShape(format!(
            "need at least {} alphas, got {}",
            n - 1,
            alphas.len()
        )));
    }
    if let Some(&bad) = alphas.iter().find(|a| !a.is_finite() || **a <= 0.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: bad,
            range: "(0, inf)",
        });
    }
    let domain = CMatrix::from_fn(n, d, |r, c| if r == c { C64::new(1.0, 0.0) } else { ZERO });
    let action = CMatrix::from_fn(n, d, |r, c| {
        if c > 0 && r + 1 == c {
            I * alphas[c - 1]
        } else if r == c + 1 {
            -I * alphas[c]
        } else {
            ZERO
        }
    });
    Ok((
        Conjugation::canonical(n),
        PartialSymmetricOperator::new(domain, action)?,
    ))
}
