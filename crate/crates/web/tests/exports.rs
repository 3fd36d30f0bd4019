use gcx_web::{cohomology_text, mc_check_text, spaces, z0_text};

#[test]
fn bundled_spaces_are_listed() {
    assert_eq!(spaces(), ["s2", "s3", "s4", "t2"]);
}

#[test]
fn z0_and_its_check() {
    let z = z0_text("t2").unwrap();
    assert_eq!(mc_check_text("t2", &z, 12).unwrap(), "MC to order 12");
    let s = z0_text("s2").unwrap();
    assert!(mc_check_text("s2", &s, 12)
        .unwrap()
        .starts_with("residual:"));
    assert!(z0_text("k3").is_err());
    assert!(mc_check_text("s2", "coeff=1 d=5", 3).is_err());
}

#[test]
fn cohomology_table() {
    let table = cohomology_text("t2", -2, 2, 7).unwrap();
    assert_eq!(table, "degree dim\n-2 0\n-1 1\n0 2\n1 0\n2 0\n");
}
