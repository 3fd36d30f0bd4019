use std::path::PathBuf;
use std::process::{Command, Output};

fn gcx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcx"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gcx-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bundled_spaces_validate() {
    for s in ["s2.space", "s3.space", "s4.space", "t2.space"] {
        let o = gcx(&["space", "validate", s]);
        assert_eq!(o.status.code(), Some(0), "{s}");
        assert!(stdout(&o).starts_with("OK"));
    }
}

#[test]
fn corrupted_pairing_is_a_validation_failure() {
    let dir = scratch("corrupt");
    let path = dir.join("bad.space");
    let doc = r#"{"d": 2, "basis": [{"label": "one", "degree": 0}, {"label": "a", "degree": 1},
        {"label": "b", "degree": 1}, {"label": "w", "degree": 2}],
        "pairing": [["one", "w", "1/1"], ["w", "one", "1/1"]]}"#;
    std::fs::write(&path, doc).unwrap();
    let o = gcx(&["space", "validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("kernel vector"), "{err}");
}

#[test]
fn z0_of_the_sphere() {
    let o = gcx(&["z0", "--space", "s2.space"]);
    assert_eq!(stdout(&o), "coeff=2/1 d=2 n=1 edges=[] dec=[(1,w)]\n");
}

#[test]
fn verify_d2_on_the_three_sphere() {
    let o = gcx(&[
        "verify-d2",
        "--space",
        "s3.space",
        "--degree",
        "-2..2",
        "--weight-max",
        "11",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = gcx(&[
        "verify-d2",
        "--space",
        "t2.space",
        "--degree",
        "-3..1",
        "--weight-max",
        "6",
        "--ce",
        "--jobs",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn caps_exit_with_three() {
    let o = Command::new(env!("CARGO_BIN_EXE_gcx"))
        .args([
            "basis",
            "--space",
            "t2.space",
            "--degree",
            "0",
            "--weight-max",
            "8",
            "--out",
        ])
        .arg(scratch("cap"))
        .env("GCX_MAX_BASIS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("cap is 3"));
}

#[test]
fn mc_check_reports_the_residual() {
    let dir = scratch("mc");
    let z = dir.join("z0.out");
    let o = gcx(&["z0", "--space", "t2.space", "--out", z.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = gcx(&[
        "mc-check",
        "--space",
        "t2.space",
        "--element",
        z.to_str().unwrap(),
        "--truncation",
        "12",
    ]);
    assert_eq!(
        (o.status.code(), stdout(&o)),
        (Some(0), "MC to order 12\n".to_string())
    );
    let o = gcx(&["z0", "--space", "s2.space", "--out", z.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = gcx(&[
        "mc-check",
        "--space",
        "s2.space",
        "--element",
        z.to_str().unwrap(),
        "--truncation",
        "12",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("edges=[(1,1)]"));
    let o = gcx(&[
        "mc-check",
        "--space",
        "s2.space",
        "--element",
        z.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "no truncation anywhere");
}

#[test]
fn dmatrix_writes_sms_and_manifests() {
    let dir = scratch("dmatrix");
    let o = gcx(&[
        "dmatrix",
        "--space",
        "s3.space",
        "--degree",
        "-4",
        "--weight-max",
        "5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let sms = std::fs::read_to_string(dir.join("d_-4.sms")).unwrap();
    assert!(sms.starts_with("2 1 M\n") && sms.ends_with("0 0 0\n"));
    let target = std::fs::read_to_string(dir.join("basis_-3.terms")).unwrap();
    assert_eq!(target.lines().count(), 2);
}

#[test]
fn gm_view_with_zero_twist() {
    let dir = scratch("gm");
    let zero = dir.join("zero.terms");
    std::fs::write(&zero, "truncation=16\n").unwrap();
    let o = gcx(&[
        "cohomology",
        "--space",
        "s3.space",
        "--view",
        "gm",
        "--element",
        zero.to_str().unwrap(),
        "--degree",
        "-3..0",
        "--weight-max",
        "16",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let bad = dir.join("z0.terms");
    std::fs::write(
        &bad,
        "truncation=12\ncoeff=2 d=2 n=1 edges=[] dec=[(1,w)]\n",
    )
    .unwrap();
    let o = gcx(&[
        "verify-d2",
        "--space",
        "s2.space",
        "--view",
        "gm",
        "--element",
        bad.to_str().unwrap(),
        "--degree",
        "-1",
        "--weight-max",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(2), "z0 is not in the ≥3 view");
}

#[test]
fn golden_files_match() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let o = gcx(&["golden", "--dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
