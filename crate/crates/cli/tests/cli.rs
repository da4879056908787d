use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use jlab::examples::{block_a0, cayley_v, jacobi_imag};
use jlab::extension::{double, PartialSymmetricOperator};
use jlab::io::{matrix_to_string, parse_matrix, partial_operator_to_string};
use jlab::{CMatrix, C64};
use serde_json::Value;
use tempfile::TempDir;

fn jlab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_jlab"));
    c.env_remove("JLAB_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    jlab().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = jlab()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not a report ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn class_verdict(report: &Value, class: &str) -> bool {
    report["details"]["profile"]["classes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["class"] == class)
        .unwrap_or_else(|| panic!("no class {class}"))["verdict"]
        .as_bool()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_identity_is_j_unitary() {
    let dir = TempDir::new().unwrap();
    let m = write(
        dir.path(),
        "id.json",
        &matrix_to_string(&CMatrix::identity(3)),
    );
    let o = run(&["classify", s(&m), "--canonical"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    assert!(class_verdict(&r, "j-unitary"));
    assert_eq!(r["passed"], true);
}

#[test]
fn classify_block_is_self_adjoint_and_j_skew_self_adjoint() {
    let dir = TempDir::new().unwrap();
    let m = write(
        dir.path(),
        "a0.json",
        &matrix_to_string(&block_a0(0.5).unwrap()),
    );
    let o = run(&["classify", s(&m), "--canonical"]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert!(class_verdict(&r, "self-adjoint"));
    assert!(class_verdict(&r, "j-skew-self-adjoint"));
    assert!(!class_verdict(&r, "j-unitary"));
}

#[test]
fn classify_exits_zero_for_unclassified_matrix() {
    let dir = TempDir::new().unwrap();
    let m = CMatrix::from_rows(&[
        vec![C64::new(1.0, 2.0), C64::new(3.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(0.5, -1.0)],
    ]);
    let p = write(dir.path(), "m.json", &matrix_to_string(&m));
    let o = run(&["classify", s(&p), "--canonical"]);
    assert_eq!(code(&o), 0);
    assert!(!class_verdict(&report(&o), "j-unitary"));
}

#[test]
fn malformed_file_names_the_field() {
    let dir = TempDir::new().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        r#"{"rows": 2, "cols": 2, "entries": [[1, 0], [0, 0], [0, 0], [0]]}"#,
    );
    let o = run(&["classify", s(&p), "--canonical"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("entries[3]"), "{}", stderr(&o));

    let p = write(dir.path(), "nocols.json", r#"{"rows": 2, "entries": []}"#);
    let o = run(&["classify", s(&p), "--canonical"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`cols`"), "{}", stderr(&o));
}

#[test]
fn conjugation_flag_is_required_and_exclusive() {
    let dir = TempDir::new().unwrap();
    let m = write(
        dir.path(),
        "id.json",
        &matrix_to_string(&CMatrix::identity(2)),
    );
    assert_eq!(code(&run(&["classify", s(&m)])), 2);
    assert_eq!(
        code(&run(&["classify", s(&m), "--canonical", "--conj", s(&m)])),
        2
    );
}

#[test]
fn conjugation_dimension_mismatch_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r");
    assert_eq!(
        code(&run(&[
            "random",
            "--kind",
            "conjugation",
            "--dim",
            "3",
            "--out-dir",
            s(&out)
        ])),
        0
    );
    let m = write(
        dir.path(),
        "id.json",
        &matrix_to_string(&CMatrix::identity(2)),
    );
    let o = run(&[
        "classify",
        s(&m),
        "--conj",
        s(&out.join("conjugation.json")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn polar_of_identity_writes_identity_factors() {
    let dir = TempDir::new().unwrap();
    let m = write(
        dir.path(),
        "id.json",
        &matrix_to_string(&CMatrix::identity(3)),
    );
    let out = dir.path().join("out");
    let o = run(&["polar", s(&m), "--canonical", "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["u.json", "b.json"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert_eq!(parse_matrix(&text).unwrap(), CMatrix::identity(3));
    }
    let r = report(&o);
    assert!(
        r["details"]["residuals"]["reconstruction"]
            .as_f64()
            .unwrap()
            <= 1e-15
    );
}

#[test]
fn polar_reads_transform_from_stdin() {
    let dir = TempDir::new().unwrap();
    let text = matrix_to_string(&cayley_v(4).unwrap());
    let o = run_stdin(
        &["polar", "-", "--canonical", "--out-dir", s(dir.path())],
        &text,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(report(&o)["passed"], true);
}

#[test]
fn polar_of_singular_matrix_is_gate_failure() {
    let dir = TempDir::new().unwrap();
    let mut m = CMatrix::identity(2);
    m[(1, 1)] = C64::new(0.0, 0.0);
    let p = write(dir.path(), "sing.json", &matrix_to_string(&m));
    let o = run(&["polar", s(&p), "--canonical", "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("not J-unitary"), "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(
        r["checks"].as_array().unwrap().last().unwrap()["name"],
        "j-unitary-gate"
    );
    assert!(!dir.path().join("u.json").exists());
}

#[test]
fn tolerance_override_tightens_verdicts() {
    let dir = TempDir::new().unwrap();
    let p = write(
        dir.path(),
        "v.json",
        &matrix_to_string(&cayley_v(16).unwrap()),
    );
    let o = jlab()
        .args(["polar", s(&p), "--canonical", "--out-dir", s(dir.path())])
        .env("JLAB_TOL", "1e-300")
        .output()
        .unwrap();
    // the gate itself now fails
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(
        r["checks"].as_array().unwrap().last().unwrap()["threshold"],
        1e-300
    );

    let o = jlab()
        .args(["demo", "unbounded", "--levels", "2"])
        .env("JLAB_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn extend_jacobi_example() {
    let dir = TempDir::new().unwrap();
    let (_, t) = jacobi_imag(&[], 3, 1).unwrap();
    let p = write(dir.path(), "t.json", &partial_operator_to_string(&t));
    let out = dir.path().join("out");
    let o = run(&["extend", s(&p), "--canonical", "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["details"]["defect_numbers"], serde_json::json!([2, 2]));
    assert!(r["details"]["pairing"]["w"].is_object());
    let a = parse_matrix(&std::fs::read_to_string(out.join("a_tilde.json")).unwrap()).unwrap();
    assert!(a.hermitian_residual() <= 1e-12);
    assert!(out.join("v.json").exists());
}

#[test]
fn extend_full_domain_returns_operator() {
    let dir = TempDir::new().unwrap();
    let a = CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, 1.5)],
        vec![C64::new(0.0, -1.5), C64::new(0.0, 0.0)],
    ]);
    let t = PartialSymmetricOperator::full(&a).unwrap();
    let p = write(dir.path(), "t.json", &partial_operator_to_string(&t));
    let o = run(&["extend", s(&p), "--canonical", "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let back =
        parse_matrix(&std::fs::read_to_string(dir.path().join("a_tilde.json")).unwrap()).unwrap();
    assert!(back.dist(&a) <= 1e-12);
}

#[test]
fn extend_rejects_non_j_imaginary_input() {
    let dir = TempDir::new().unwrap();
    // real symmetric action commutes with entrywise conjugation
    let d = CMatrix::from_real(2, 1, &[1.0, 0.0]);
    let a = CMatrix::from_real(2, 1, &[0.0, 1.0]);
    let t = PartialSymmetricOperator::new(d, a).unwrap();
    let p = write(dir.path(), "t.json", &partial_operator_to_string(&t));
    let o = run(&["extend", s(&p), "--canonical", "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn extend_reports_multivalued_relation() {
    let dir = TempDir::new().unwrap();
    let (j, t) = jacobi_imag(&[], 3, 1).unwrap();
    let (_, tt) = double(&j, &t).unwrap();
    let p = write(dir.path(), "tt.json", &partial_operator_to_string(&tt));
    let o = run(&[
        "extend",
        s(&p),
        "--canonical",
        "--retries",
        "5",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains("dim ker"), "{}", stderr(&o));
    assert!(report(&o)["details"]["kernel_dim"].as_u64().unwrap() >= 1);
    // with the default budget the mixed pairings succeed
    let o = run(&["extend", s(&p), "--canonical", "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn demo_unbounded_csv() {
    let o = run(&["demo", "unbounded", "--levels", "8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout.clone()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,computed,formula,rel_err");
    assert_eq!(lines.len(), 9);
    for (i, line) in lines[1..].iter().enumerate() {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let k = (i + 1) as f64;
        assert_eq!(f[0], k);
        assert!((f[1] - k * k / (2.0 * k - 1.0)).abs() <= 1e-12 * f[1]);
    }
    let r: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(r["passed"], true);
}

#[test]
fn demo_bad_parameters_exit_two() {
    assert_eq!(code(&run(&["demo", "unbounded", "--levels", "0"])), 2);
    assert_eq!(code(&run(&["demo", "jacobi", "--n", "1", "--d", "1"])), 2);
    assert_eq!(
        code(&run(&[
            "demo", "jacobi", "--n", "3", "--d", "1", "--alphas", "1,-2"
        ])),
        2
    );
}

#[test]
fn demo_jacobi_defects() {
    let o = run(&["demo", "jacobi", "--n", "3", "--d", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        report(&o)["details"]["defect_numbers"],
        serde_json::json!([2, 2])
    );
    let o = run(&[
        "demo",
        "jacobi",
        "--n",
        "6",
        "--d",
        "2",
        "--alphas",
        "0.5,1,2,3,4",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        report(&o)["details"]["defect_numbers"],
        serde_json::json!([4, 4])
    );
}

#[test]
fn random_is_byte_identical_per_seed() {
    for kind in [
        "conjugation",
        "j-real-unitary",
        "positive-j-unitary",
        "j-unitary",
        "j-imaginary-partial",
    ] {
        let a = TempDir::new().unwrap();
        let b = TempDir::new().unwrap();
        let c = TempDir::new().unwrap();
        for (dir, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
            let o = run(&[
                "random",
                "--kind",
                kind,
                "--dim",
                "4",
                "--seed",
                seed,
                "--out-dir",
                s(dir.path()),
            ]);
            assert_eq!(code(&o), 0, "{kind}: {}", stderr(&o));
        }
        let mut names: Vec<_> = std::fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        let mut differs = false;
        for name in &names {
            let x = std::fs::read(a.path().join(name)).unwrap();
            assert_eq!(
                x,
                std::fs::read(b.path().join(name)).unwrap(),
                "{kind} {name:?}"
            );
            differs |= x != std::fs::read(c.path().join(name)).unwrap();
        }
        assert!(differs, "{kind}: seeds 5 and 6 agree");
    }
}

#[test]
fn generated_j_unitary_classifies() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "random",
        "--kind",
        "j-unitary",
        "--dim",
        "5",
        "--seed",
        "3",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0);
    let o = run(&[
        "classify",
        s(&dir.path().join("matrix.json")),
        "--conj",
        s(&dir.path().join("conjugation.json")),
    ]);
    assert_eq!(code(&o), 0);
    assert!(class_verdict(&report(&o), "j-unitary"));
}

#[test]
fn generated_partial_extends() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "random",
        "--kind",
        "j-imaginary-partial",
        "--dim",
        "6",
        "--seed",
        "8",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&[
        "extend",
        s(&dir.path().join("partial.json")),
        "--conj",
        s(&dir.path().join("conjugation.json")),
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn random_dim_zero_exits_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&run(&[
            "random",
            "--kind",
            "conjugation",
            "--dim",
            "0",
            "--out-dir",
            s(dir.path())
        ])),
        2
    );
    assert_eq!(
        code(&run(&["random", "--kind", "unknown", "--dim", "2"])),
        2
    );
}

#[test]
fn verify_suite_empty_passes() {
    let o = run(&["verify-suite", "--trials", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["passed"], true);
}

#[test]
fn verify_suite_small_run_passes() {
    let o = run(&[
        "verify-suite",
        "--trials",
        "10",
        "--maxdim",
        "8",
        "--seed",
        "4",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["seed"], 4);
    assert!(r["details"]["summaries"].as_array().unwrap().len() > 20);
}

#[test]
fn verify_suite_names_corrupted_seed() {
    let o = run(&[
        "verify-suite",
        "--trials",
        "6",
        "--maxdim",
        "6",
        "--corrupt-trial",
        "4",
    ]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    let seeds = r["details"]["failing_seeds"].as_array().unwrap();
    assert_eq!(seeds.len(), 2);
    let err = stderr(&o);
    for seed in seeds {
        assert!(err.contains(&seed.to_string()), "{err}");
    }
    assert!(err.contains("trial 4"), "{err}");
}

#[test]
fn reports_are_reproducible_and_saved() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("report.json");
    let args = [
        "verify-suite",
        "--trials",
        "3",
        "--maxdim",
        "5",
        "--seed",
        "9",
        "--report",
        s(&file),
    ];
    let mut first = report(&run(&args));
    let mut second = report(&run(&args));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(saved["inputs_digest"], second["inputs_digest"]);
    for r in [&mut first, &mut second] {
        r.as_object_mut().unwrap().remove("elapsed_ms");
    }
    assert_eq!(first, second);
    assert_eq!(first["inputs_digest"].as_str().unwrap().len(), 64);
}
