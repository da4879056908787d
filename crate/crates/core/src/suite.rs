//! Seeded property program over random J-unitary and J-imaginary inputs.
//!
//! Each trial index `i` yields one polar trial (synthesize `A = U·B` from the
//! generators, decompose it back, and run the derived-operator, unitary
//! equivalence and reciprocity checks) and one extension trial (random
//! J-imaginary symmetric partial operator on `C^n`, `n ≤ 12`). Trials run in
//! parallel; records are kept in trial order.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conjugation::random_conjugation;
use crate::error::{Error, Result};
use crate::extension::{
    check_defect_j_invariance, extend_with, random_j_imaginary_partial, ranges_defects,
};
use crate::jclass::{classify_with, OperatorClass, DEFAULT_TOL};
use crate::numkernel::random::rng;
use crate::numkernel::{CMatrix, C64};
use crate::polar::{
    check_derived_j_unitary_with, check_reciprocity_with, check_unitary_equiv_with,
    random_j_real_unitary, random_positive_j_unitary, refined_polar_with, synthesize_with,
};
use crate::report::{Check, CheckReport};

/// Threshold for unitarity and J-realness of the unitary factor.
pub const FACTOR_TOL: f64 = 1e-9;
/// Largest ambient dimension of an extension trial.
pub const EXTENSION_MAXDIM: usize = 12;
/// Largest tolerated share of extension trials ending in a multivalued relation.
pub const MULTIVALUED_RATE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub maxdim: usize,
    pub seed: u64,
    /// Verdict threshold for every residual not pinned to [`FACTOR_TOL`].
    pub tol: f64,
    /// Trial whose inputs are deliberately broken, for exercising the harness.
    pub corrupt_trial: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 200,
            maxdim: 16,
            seed: 0,
            tol: DEFAULT_TOL,
            corrupt_trial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Polar,
    Extension,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub family: Family,
    pub index: usize,
    pub seed: u64,
    pub dim: usize,
    /// Domain dimension of an extension trial.
    pub domain_dim: Option<usize>,
    pub multivalued: bool,
    pub error: Option<String>,
    pub checks: CheckReport,
}

impl TrialRecord {
    pub fn passed(&self) -> bool {
        self.checks.passed()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertySummary {
    pub property: String,
    pub trials: usize,
    pub failures: usize,
    pub worst_residual: f64,
    pub threshold: f64,
    /// Seed of the trial with the worst residual.
    pub worst_seed: Option<u64>,
    pub failing_seeds: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub polar: Vec<TrialRecord>,
    pub extension: Vec<TrialRecord>,
    pub multivalued: usize,
    pub summaries: Vec<PropertySummary>,
    /// One check per property carrying its worst residual, plus the
    /// multivalued-relation rate.
    pub checks: CheckReport,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.passed()
    }

    pub fn summary(&self, property: &str) -> Option<&PropertySummary> {
        self.summaries.iter().find(|s| s.property == property)
    }

    /// Seeds of every failing trial, in trial order, polar before extension.
    pub fn failing_seeds(&self) -> Vec<u64> {
        self.polar
            .iter()
            .chain(&self.extension)
            .filter(|t| !t.passed())
            .map(|t| t.seed)
            .collect()
    }
}

/// splitmix64 step; decorrelates neighbouring trial seeds.
pub fn trial_seed(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn error_check(stage: &str, err: &Error) -> Check {
    match err {
        Error::NotJUnitary {
            residual,
            threshold,
        } => Check::new(format!("{stage}-gate"), *residual, *threshold),
        Error::GateFailed {
            check,
            residual,
            threshold,
        } => Check::new(format!("{stage}-gate-{check}"), *residual, *threshold),
        _ => Check::new(format!("{stage}-error"), f64::INFINITY, 0.0),
    }
}

fn absorb(into: &mut CheckReport, prefix: &str, from: CheckReport) {
    for c in from.checks {
        into.push(format!("{prefix}-{}", c.name), c.residual, c.threshold);
    }
}

/// Perturbs one entry by a relative `1e-3`.
fn corrupt(a: &CMatrix) -> CMatrix {
    let mut m = a.clone();
    m[(0, 0)] += C64::new(1e-3 * (1.0 + a.frob_norm()), 0.0);
    m
}

/// One polar trial. Both directions are covered: `U·B` built from a unitary
/// J-real `U` and a positive J-unitary `B` is J-unitary, and decomposing it
/// returns factors with those properties.
pub fn polar_trial(
    index: usize,
    seed: u64,
    maxdim: usize,
    tol: f64,
    corrupted: bool,
) -> TrialRecord {
    let dim = rng(seed).random_range(1..=maxdim.max(1));
    let mut checks = CheckReport::default();
    let mut error = None;
    if let Err(e) = polar_checks(&mut checks, dim, seed, tol, corrupted) {
        checks.checks.push(error_check("polar", &e));
        error = Some(e.to_string());
    }
    TrialRecord {
        family: Family::Polar,
        index,
        seed,
        dim,
        domain_dim: None,
        multivalued: false,
        error,
        checks,
    }
}

fn polar_checks(
    checks: &mut CheckReport,
    dim: usize,
    seed: u64,
    tol: f64,
    corrupted: bool,
) -> Result<()> {
    let j = random_conjugation(dim, seed);
    let u_gen = random_j_real_unitary(&j, dim, seed ^ 0x5555)?;
    let b_gen = random_positive_j_unitary(&j, dim, seed ^ 0xAAAA)?;
    let mut a = synthesize_with(&j, &u_gen, &b_gen, tol)?;
    if corrupted {
        a = corrupt(&a);
    }

    let profile = classify_with(&j, &a, tol)?;
    checks.push(
        "synthesis-j-unitary",
        profile
            .residual(OperatorClass::JUnitary)
            .unwrap_or(f64::INFINITY),
        tol,
    );

    let parts = refined_polar_with(&j, &a, tol)?;
    let r = &parts.residuals;
    checks.push("polar-reconstruction", r.reconstruction, tol);
    checks.push("polar-u-unitary", r.unitarity, FACTOR_TOL);
    checks.push("polar-u-j-real", r.j_realness, FACTOR_TOL);
    checks.push("polar-b-hermitian", r.hermiticity, tol);
    // non-positive floor of B fails
    checks.push("polar-b-positive", -r.positivity_floor, 0.0);
    checks.push("polar-b-j-unitary", r.j_unitarity, tol);
    let again = synthesize_with(&j, &parts.u, &parts.b, tol)?;
    checks.push("polar-round-trip", again.dist(&a) / a.frob_norm(), tol);
    checks.push(
        "polar-factor-recovery",
        parts.b.dist(&b_gen) / (1.0 + b_gen.frob_norm()),
        tol,
    );

    absorb(
        checks,
        "derived",
        check_derived_j_unitary_with(&j, &a, tol)?,
    );
    absorb(
        checks,
        "equivalence",
        check_unitary_equiv_with(&j, &a, tol)?,
    );
    absorb(
        checks,
        "reciprocity",
        check_reciprocity_with(&j, &a, tol)?.checks,
    );
    Ok(())
}

/// One extension trial on `C^n`, `2 ≤ n ≤ min(maxdim, 12)`, `1 ≤ d < n`.
/// Returns `None` when `maxdim < 2` leaves no admissible shape.
pub fn extension_trial(
    index: usize,
    seed: u64,
    maxdim: usize,
    tol: f64,
    corrupted: bool,
) -> Option<TrialRecord> {
    let cap = maxdim.min(EXTENSION_MAXDIM);
    if cap < 2 {
        return None;
    }
    let mut r = rng(seed);
    let n = r.random_range(2..=cap);
    let d = r.random_range(1..n);
    let mut checks = CheckReport::default();
    let mut error = None;
    let mut multivalued = false;
    match extension_checks(&mut checks, n, d, seed, tol, corrupted) {
        Ok(()) => {}
        Err(Error::MultivaluedRelation { .. }) => multivalued = true,
        Err(e) => {
            checks.checks.push(error_check("extension", &e));
            error = Some(e.to_string());
        }
    }
    Some(TrialRecord {
        family: Family::Extension,
        index,
        seed,
        dim: n,
        domain_dim: Some(d),
        multivalued,
        error,
        checks,
    })
}

fn extension_checks(
    checks: &mut CheckReport,
    n: usize,
    d: usize,
    seed: u64,
    tol: f64,
    corrupted: bool,
) -> Result<()> {
    let j = random_conjugation(n, seed);
    let mut t = random_j_imaginary_partial(&j, d, seed ^ 0x5555)?;
    if corrupted {
        // a real multiple of the domain breaks J-imaginarity, not symmetry
        let action = t.action() + &t.domain_basis().scale_real(1e-3);
        t = crate::extension::PartialSymmetricOperator::new(t.domain_basis().clone(), action)?;
    }
    let defect = ranges_defects(&t)?;
    let expected = n - d;
    let (np, nm) = defect.defect_numbers;
    checks.push(
        "extension-defect-numbers",
        (np.abs_diff(expected) + nm.abs_diff(expected)) as f64,
        0.0,
    );
    let mut invariance = check_defect_j_invariance(&j, &t)?;
    for c in &mut invariance.checks {
        *c = Check::new(c.name.clone(), c.residual, tol);
    }
    absorb(checks, "extension", invariance);
    let result = extend_with(&j, &t, None, tol)?;
    absorb(checks, "extension", result.diagnostics);
    Ok(())
}

fn summarize(records: &[TrialRecord], summaries: &mut Vec<PropertySummary>) {
    for rec in records {
        for c in &rec.checks.checks {
            let idx = match summaries.iter().position(|s| s.property == c.name) {
                Some(i) => i,
                None => {
                    summaries.push(PropertySummary {
                        property: c.name.clone(),
                        trials: 0,
                        failures: 0,
                        worst_residual: f64::NEG_INFINITY,
                        threshold: c.threshold,
                        worst_seed: None,
                        failing_seeds: Vec::new(),
                    });
                    summaries.len() - 1
                }
            };
            let s = &mut summaries[idx];
            s.trials += 1;
            // NaN counts as worst
            let worse = c.residual.is_nan() || c.residual > s.worst_residual;
            if worse && !s.worst_residual.is_nan() {
                s.worst_residual = c.residual;
                s.threshold = c.threshold;
                s.worst_seed = Some(rec.seed);
            }
            if !c.passed {
                s.failures += 1;
                s.failing_seeds.push(rec.seed);
            }
        }
    }
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    if config.trials > 0 && config.maxdim == 0 {
        return Err(Error::OutOfRange {
            name: "maxdim",
            value: 0.0,
            range: ">= 1",
        });
    }
    let polar: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(config.seed, 2 * i as u64);
            polar_trial(
                i,
                seed,
                config.maxdim,
                config.tol,
                config.corrupt_trial == Some(i),
            )
        })
        .collect();
    let extension: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .filter_map(|i| {
            let seed = trial_seed(config.seed, 2 * i as u64 + 1);
            extension_trial(
                i,
                seed,
                config.maxdim,
                config.tol,
                config.corrupt_trial == Some(i),
            )
        })
        .collect();

    let mut summaries = Vec::new();
    summarize(&polar, &mut summaries);
    summarize(&extension, &mut summaries);

    let multivalued = extension.iter().filter(|t| t.multivalued).count();
    let mut checks = CheckReport::default();
    for s in &summaries {
        let worst = if s.failures > 0 && s.worst_residual <= s.threshold {
            f64::INFINITY
        } else {
            s.worst_residual
        };
        checks.push(s.property.clone(), worst, s.threshold);
    }
    let rate = if extension.is_empty() {
        0.0
    } else {
        multivalued as f64 / extension.len() as f64
    };
    checks.push("extension-multivalued-rate", rate, MULTIVALUED_RATE);

    Ok(SuiteReport {
        config: *config,
        polar,
        extension,
        multivalued,
        summaries,
        checks,
    })
}
