use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use jlab::conjugation::{random_conjugation, Conjugation, VERIFY_TOL};
use jlab::examples::{cayley_v_report, growth_csv, growth_probe, jacobi_imag};
use jlab::extension::{
    check_defect_j_invariance, extend_with, random_j_imaginary_partial, ranges_defects,
    verify_symmetric_jimaginary_with, ExtensionResult, PartialSymmetricOperator,
};
use jlab::io::{
    conjugation_to_string, matrix_to_string, matrix_to_value, parse_conjugation, parse_matrix,
    parse_partial_operator, partial_operator_to_string,
};
use jlab::jclass::{classify_with, OperatorClass, DEFAULT_TOL};
use jlab::polar::{
    random_j_real_unitary, random_positive_j_unitary, refined_polar_with, synthesize_with,
};
use jlab::suite::{run_suite, SuiteConfig};
use jlab::{CMatrix, Error};
use serde_json::json;

use crate::report::{ReportBuilder, RunReport};
use crate::{Cli, Command, ConjArgs, Demo, RandomKind};

/// Environment variable overriding the verdict threshold.
pub const TOL_ENV: &str = "JLAB_TOL";

pub struct Failure {
    code: u8,
    message: String,
    report: Option<Box<RunReport>>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
            report: None,
        }
    }
}

struct Emit {
    report: RunReport,
    /// Goes to stdout in place of the report, which then goes to stderr.
    csv: Option<String>,
    /// Extra human-readable lines for stderr.
    notes: Vec<String>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse(_)
        | Error::DimensionMismatch(_)
        | Error::InvalidMatrix(_)
        | Error::OutOfRange { .. }
        | Error::BadShape(_) => 2,
        Error::NotJUnitary { .. }
        | Error::GateFailed { .. }
        | Error::DomainNotJInvariant { .. } => 3,
        Error::MultivaluedRelation { .. } => 4,
        _ => 1,
    }
}

/// Converts a library error, recording the failed gate in the report for
/// exit statuses 3 and 4.
fn fail(rb: &mut ReportBuilder, err: Error) -> Failure {
    match &err {
        Error::NotJUnitary {
            residual,
            threshold,
        } => rb.check("j-unitary-gate", *residual, *threshold),
        Error::GateFailed {
            check,
            residual,
            threshold,
        } => rb.check(format!("gate-{check}"), *residual, *threshold),
        Error::DomainNotJInvariant { residual } => {
            rb.check("gate-domain-j-invariance", *residual, DEFAULT_TOL)
        }
        Error::MultivaluedRelation {
            kernel_dim,
            attempts,
        } => {
            rb.detail("kernel_dim", kernel_dim);
            rb.detail("attempts", attempts);
            rb.check("v-minus-identity-invertible", *kernel_dim as f64, 0.0);
        }
        _ => {}
    }
    let code = exit_code(&err);
    Failure {
        code,
        message: err.to_string(),
        report: (code >= 3).then(|| Box::new(rb.finish())),
    }
}

fn tolerance() -> Result<f64, Failure> {
    match std::env::var(TOL_ENV) {
        Err(_) => Ok(DEFAULT_TOL),
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
            _ => Err(Failure::usage(format!(
                "{TOL_ENV} must be a positive finite number, got {raw:?}"
            ))),
        },
    }
}

/// Reads a file, or standard input for `-`.
fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::usage(format!("cannot read standard input: {e}")))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn read_text(rb: &mut ReportBuilder, label: &str, path: &Path) -> Result<String, Failure> {
    let bytes = read_input(path)?;
    rb.input(label, &bytes);
    String::from_utf8(bytes)
        .map_err(|_| Failure::usage(format!("{}: not UTF-8 text", path.display())))
}

fn parse_failure(path: &Path, err: Error) -> Failure {
    Failure::usage(format!("{}: {err}", path.display()))
}

fn load_conjugation(
    rb: &mut ReportBuilder,
    args: &ConjArgs,
    dim: usize,
) -> Result<Conjugation, Failure> {
    let j = match &args.conj {
        None => {
            rb.input("conjugation", format!("canonical:{dim}").as_bytes());
            Conjugation::canonical(dim)
        }
        Some(path) => {
            let text = read_text(rb, "conjugation", path)?;
            parse_conjugation(&text).map_err(|e| parse_failure(path, e))?
        }
    };
    if j.dim() != dim {
        return Err(Failure::usage(format!(
            "conjugation acts on C^{} but the input lives in C^{dim}",
            j.dim()
        )));
    }
    let v = j.verify();
    rb.check("conjugation-involution", v.involution, VERIFY_TOL);
    rb.check("conjugation-antiunitarity", v.antiunitarity, VERIFY_TOL);
    Ok(j)
}

fn load_square(rb: &mut ReportBuilder, path: &Path) -> Result<CMatrix, Failure> {
    let text = read_text(rb, "matrix", path)?;
    let m = parse_matrix(&text).map_err(|e| parse_failure(path, e))?;
    if !m.is_square() {
        return Err(Failure::usage(format!(
            "{}: matrix must be square, got {}x{}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(m)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn classify_cmd(
    rb: &mut ReportBuilder,
    matrix: &Path,
    conj: &ConjArgs,
    tol: f64,
) -> Result<Emit, Failure> {
    let a = load_square(rb, matrix)?;
    let j = load_conjugation(rb, conj, a.rows())?;
    let profile = classify_with(&j, &a, tol).map_err(|e| fail(rb, e))?;
    let notes = profile
        .classes
        .iter()
        .map(|e| {
            let r = e
                .check
                .residual
                .map_or("n/a".to_string(), |r| format!("{r:.3e}"));
            format!("{:<22} {:<5} residual {r}", e.class.name(), e.check.verdict)
        })
        .collect();
    rb.detail("profile", &profile);
    Ok(Emit {
        report: rb.finish(),
        csv: None,
        notes,
    })
}

fn polar_cmd(
    rb: &mut ReportBuilder,
    matrix: &Path,
    conj: &ConjArgs,
    out_dir: &Path,
    tol: f64,
) -> Result<Emit, Failure> {
    let a = load_square(rb, matrix)?;
    let j = load_conjugation(rb, conj, a.rows())?;
    let parts = refined_polar_with(&j, &a, tol).map_err(|e| fail(rb, e))?;
    let r = &parts.residuals;
    rb.check("reconstruction", r.reconstruction, tol);
    rb.check("u-unitary", r.unitarity, tol);
    rb.check("u-j-real", r.j_realness, tol);
    rb.check("b-hermitian", r.hermiticity, tol);
    // non-positive floor of B fails
    rb.check("b-positive", -r.positivity_floor, 0.0);
    rb.check("b-j-unitary", r.j_unitarity, tol);
    let u_path = write_file(out_dir, "u.json", &matrix_to_string(&parts.u))?;
    let b_path = write_file(out_dir, "b.json", &matrix_to_string(&parts.b))?;
    rb.detail("residuals", r);
    rb.detail(
        "outputs",
        [u_path.display().to_string(), b_path.display().to_string()],
    );
    Ok(Emit {
        report: rb.finish(),
        csv: None,
        notes: Vec::new(),
    })
}

fn extension_details(rb: &mut ReportBuilder, ext: &ExtensionResult) {
    rb.checks(&ext.diagnostics);
    rb.detail("defect_numbers", ext.defect_numbers);
    rb.detail("attempts", ext.attempts);
    rb.detail("adjustment", ext.adjustment);
    rb.detail(
        "pairing",
        json!({
            "w": matrix_to_value(&ext.w_used.w),
            "f_plus": matrix_to_value_or_empty(&ext.w_used.f_plus),
            "f_minus": matrix_to_value_or_empty(&ext.w_used.f_minus),
        }),
    );
}

/// Zero-width frames have no matrix document; they are reported as `null`.
fn matrix_to_value_or_empty(m: &CMatrix) -> serde_json::Value {
    if m.cols() == 0 {
        serde_json::Value::Null
    } else {
        matrix_to_value(m)
    }
}

fn extend_cmd(
    rb: &mut ReportBuilder,
    partial: &Path,
    conj: &ConjArgs,
    retries: Option<usize>,
    out_dir: &Path,
    tol: f64,
) -> Result<Emit, Failure> {
    let text = read_text(rb, "partial-operator", partial)?;
    let t = parse_partial_operator(&text).map_err(|e| parse_failure(partial, e))?;
    let j = load_conjugation(rb, conj, t.ambient())?;
    if let Some(k) = retries {
        rb.input("retries", k.to_string().as_bytes());
    }
    let ext = extend_with(&j, &t, retries, tol).map_err(|e| fail(rb, e))?;
    extension_details(rb, &ext);
    let a_path = write_file(out_dir, "a_tilde.json", &matrix_to_string(&ext.a_tilde))?;
    let v_path = write_file(out_dir, "v.json", &matrix_to_string(&ext.v))?;
    rb.detail(
        "outputs",
        [a_path.display().to_string(), v_path.display().to_string()],
    );
    Ok(Emit {
        report: rb.finish(),
        csv: None,
        notes: Vec::new(),
    })
}

fn unbounded_cmd(rb: &mut ReportBuilder, levels: usize, tol: f64) -> Result<Emit, Failure> {
    rb.input("levels", levels.to_string().as_bytes());
    let rows = growth_probe(levels).map_err(|e| fail(rb, e))?;
    let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let drops = rows
        .windows(2)
        .filter(|w| w[1].computed <= w[0].computed)
        .count();
    rb.check("growth-closed-form", worst, 1e-10);
    rb.check("growth-strictly-increasing", drops as f64, 0.0);
    let cayley = cayley_v_report(levels, tol).map_err(|e| fail(rb, e))?;
    for c in &cayley.checks.checks {
        rb.check(format!("cayley-{}", c.name), c.residual, c.threshold);
    }
    rb.detail("levels", levels);
    rb.detail("kappa", cayley.kappa);
    Ok(Emit {
        report: rb.finish(),
        csv: Some(growth_csv(&rows)),
        notes: Vec::new(),
    })
}

fn jacobi_cmd(
    rb: &mut ReportBuilder,
    n: usize,
    d: usize,
    alphas: &[f64],
    tol: f64,
) -> Result<Emit, Failure> {
    rb.input(
        "jacobi",
        format!("n={n} d={d} alphas={alphas:?}").as_bytes(),
    );
    let (j, t) = jacobi_imag(alphas, n, d).map_err(|e| fail(rb, e))?;
    let defect = ranges_defects(&t).map_err(|e| fail(rb, e))?;
    let (np, nm) = defect.defect_numbers;
    let expected = n - d;
    rb.check(
        "defect-numbers",
        (np.abs_diff(expected) + nm.abs_diff(expected)) as f64,
        0.0,
    );
    let invariance = check_defect_j_invariance(&j, &t).map_err(|e| fail(rb, e))?;
    rb.checks(&invariance);
    let ext = extend_with(&j, &t, None, tol).map_err(|e| fail(rb, e))?;
    extension_details(rb, &ext);
    rb.detail("a_tilde", matrix_to_value(&ext.a_tilde));
    Ok(Emit {
        report: rb.finish(),
        csv: None,
        notes: vec![format!("defect numbers ({np}, {nm})")],
    })
}

fn random_cmd(
    rb: &mut ReportBuilder,
    kind: RandomKind,
    dim: usize,
    seed: u64,
    out_dir: &Path,
    tol: f64,
) -> Result<Emit, Failure> {
    rb.seed(seed);
    rb.input("random", format!("kind={kind:?} dim={dim}").as_bytes());
    if dim == 0 {
        return Err(Failure::usage("--dim must be at least 1"));
    }
    if kind == RandomKind::JImaginaryPartial && dim < 2 {
        return Err(Failure::usage(
            "--dim must be at least 2 for a partial operator",
        ));
    }
    let j = random_conjugation(dim, seed);
    let v = j.verify();
    rb.check("conjugation-involution", v.involution, VERIFY_TOL);
    rb.check("conjugation-antiunitarity", v.antiunitarity, VERIFY_TOL);
    let mut outputs = vec![write_file(
        out_dir,
        "conjugation.json",
        &conjugation_to_string(&j),
    )?];

    let class_check =
        |rb: &mut ReportBuilder, m: &CMatrix, classes: &[OperatorClass]| -> Result<(), Failure> {
            let p = classify_with(&j, m, tol).map_err(|e| fail(rb, e))?;
            for &c in classes {
                rb.check(c.name(), p.residual(c).unwrap_or(f64::INFINITY), tol);
            }
            Ok(())
        };
    let j_real = || random_j_real_unitary(&j, dim, seed ^ 1);
    let positive = || random_positive_j_unitary(&j, dim, seed ^ 2);
    match kind {
        RandomKind::Conjugation => {}
        RandomKind::JRealUnitary => {
            let u = j_real().map_err(|e| fail(rb, e))?;
            class_check(rb, &u, &[OperatorClass::Unitary, OperatorClass::JReal])?;
            outputs.push(write_file(out_dir, "matrix.json", &matrix_to_string(&u))?);
        }
        RandomKind::PositiveJUnitary => {
            let b = positive().map_err(|e| fail(rb, e))?;
            class_check(
                rb,
                &b,
                &[OperatorClass::SelfAdjoint, OperatorClass::JUnitary],
            )?;
            outputs.push(write_file(out_dir, "matrix.json", &matrix_to_string(&b))?);
        }
        RandomKind::JUnitary => {
            let u = j_real().map_err(|e| fail(rb, e))?;
            let b = positive().map_err(|e| fail(rb, e))?;
            let a = synthesize_with(&j, &u, &b, tol).map_err(|e| fail(rb, e))?;
            class_check(rb, &a, &[OperatorClass::JUnitary])?;
            outputs.push(write_file(out_dir, "matrix.json", &matrix_to_string(&a))?);
        }
        RandomKind::JImaginaryPartial => {
            let t: PartialSymmetricOperator =
                random_j_imaginary_partial(&j, dim / 2, seed ^ 3).map_err(|e| fail(rb, e))?;
            let gate = verify_symmetric_jimaginary_with(&j, &t, tol).map_err(|e| fail(rb, e))?;
            rb.checks(&gate);
            outputs.push(write_file(
                out_dir,
                "partial.json",
                &partial_operator_to_string(&t),
            )?);
        }
    }
    rb.detail(
        "outputs",
        outputs
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>(),
    );
    Ok(Emit {
        report: rb.finish(),
        csv: None,
        notes: Vec::new(),
    })
}

fn suite_cmd(rb: &mut ReportBuilder, config: SuiteConfig) -> Result<Emit, Failure> {
    rb.seed(config.seed);
    rb.input(
        "verify-suite",
        format!(
            "trials={} maxdim={} corrupt={:?}",
            config.trials, config.maxdim, config.corrupt_trial
        )
        .as_bytes(),
    );
    let report = run_suite(&config).map_err(|e| fail(rb, e))?;
    rb.checks(&report.checks);
    let failing: Vec<_> = report
        .polar
        .iter()
        .chain(&report.extension)
        .filter(|t| !t.passed())
        .collect();
    let mut notes = Vec::new();
    for t in &failing {
        let names: Vec<&str> = t.checks.failures().map(|c| c.name.as_str()).collect();
        notes.push(format!(
            "failing {:?} trial {} seed {} (dim {}): {}",
            t.family,
            t.index,
            t.seed,
            t.dim,
            names.join(", ")
        ));
    }
    let multivalued: Vec<_> = report
        .extension
        .iter()
        .filter(|t| t.multivalued)
        .map(
            |t| json!({"index": t.index, "seed": t.seed, "dim": t.dim, "domain_dim": t.domain_dim}),
        )
        .collect();
    rb.detail("trials", config.trials);
    rb.detail("maxdim", config.maxdim);
    rb.detail("tolerance", config.tol);
    rb.detail("summaries", &report.summaries);
    rb.detail("multivalued", multivalued);
    rb.detail("failing_trials", &failing);
    rb.detail("failing_seeds", report.failing_seeds());
    Ok(Emit {
        report: rb.finish(),
        csv: None,
        notes,
    })
}

fn dispatch(cli: &Cli, rb: &mut ReportBuilder) -> Result<Emit, Failure> {
    let tol = tolerance()?;
    match &cli.command {
        Command::Classify { matrix, conj } => classify_cmd(rb, matrix, conj, tol),
        Command::Polar {
            matrix,
            conj,
            out_dir,
        } => polar_cmd(rb, matrix, conj, out_dir, tol),
        Command::Extend {
            partial,
            conj,
            retries,
            out_dir,
        } => extend_cmd(rb, partial, conj, *retries, out_dir, tol),
        Command::Demo { which } => match which {
            Demo::Unbounded { levels } => unbounded_cmd(rb, *levels, tol),
            Demo::Jacobi { n, d, alphas } => jacobi_cmd(rb, *n, *d, alphas, tol),
        },
        Command::Random {
            kind,
            dim,
            seed,
            out_dir,
        } => random_cmd(rb, *kind, *dim, *seed, out_dir, tol),
        Command::VerifySuite {
            trials,
            maxdim,
            seed,
            corrupt_trial,
        } => suite_cmd(
            rb,
            SuiteConfig {
                trials: *trials,
                maxdim: *maxdim,
                seed: *seed,
                tol,
                corrupt_trial: *corrupt_trial,
            },
        ),
    }
}

fn save_report(cli: &Cli, report: &RunReport) -> Result<(), String> {
    if let Some(path) = &cli.report {
        fs::write(path, report.to_json())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

pub fn run(cli: Cli, argv: Vec<String>) -> ExitCode {
    // echo without the binary path so identical invocations compare equal
    let mut command = vec!["jlab".to_string()];
    command.extend(argv.into_iter().skip(1));
    let mut rb = ReportBuilder::new(command);
    match dispatch(&cli, &mut rb) {
        Ok(emit) => {
            let json = emit.report.to_json();
            match &emit.csv {
                Some(csv) => {
                    print!("{csv}");
                    eprint!("{json}");
                }
                None => {
                    print!("{json}");
                    for line in emit.report.summary_lines() {
                        eprintln!("{line}");
                    }
                }
            }
            for note in &emit.notes {
                eprintln!("{note}");
            }
            if let Err(msg) = save_report(&cli, &emit.report) {
                eprintln!("jlab: error: {msg}");
                return ExitCode::from(2);
            }
            if emit.report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            if let Some(report) = &f.report {
                print!("{}", report.to_json());
                if let Err(msg) = save_report(&cli, report) {
                    eprintln!("jlab: error: {msg}");
                }
            }
            eprintln!("jlab: error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
