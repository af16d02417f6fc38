use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cartan(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartan"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn bounds_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = cartan(&["bounds"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("bounds.json")).unwrap()).unwrap();
    assert!(v["x_final"].as_f64().unwrap() < 39.0);
    assert!(v["p_max_final"].as_u64().unwrap() < 20_400);
}

#[test]
fn bounds_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cartan(&["bounds", "--format", "csv"], dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert!(text.starts_with("# algorithm_version"));
    assert!(text.contains("constants_used.C_gamma,2.81"));
}

#[test]
fn constants_are_reproducible_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = ["constants", "--max-prime", "3000", "--threads", "2", "--cache", cache.to_str().unwrap()];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(cartan(&args, &a).status.success());
    let rows = fs::read_to_string(cache.join("partial_sums.csv")).unwrap().lines().count();
    assert!(cartan(&args, &b).status.success());
    // second run reuses every row
    assert_eq!(fs::read_to_string(cache.join("partial_sums.csv")).unwrap().lines().count(), rows);
    for f in ["constants.json", "constants_per_prime.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn tiny_ell_max_fails_with_assertion_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = cartan(&["sieve", "--ell-max", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let csv = fs::read_to_string(dir.path().join("sieve.csv")).unwrap();
    assert!(csv.contains("not_ruled_out"));
    let failure = fs::read_to_string(dir.path().join("failure.json")).unwrap();
    assert!(failure.contains("ruled out"));
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("not_a_dir");
    fs::write(&file, "x").unwrap();
    assert_eq!(cartan(&["bounds"], &file).status.code(), Some(3));
}

#[test]
fn csum_dump() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cartan(&["csum", "--prime", "11"], dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("csum_11.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "kind,m,re,im");
    assert_eq!(rows.len(), 1 + 2 * 11);
    assert!(rows[1].starts_with("main,0,3"));
    assert_eq!(cartan(&["csum", "--prime", "13"], dir.path()).status.code(), Some(2));
}

#[test]
fn units_sweep() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cartan(&["units"], dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("units.csv")).unwrap();
    assert!(text.contains("p,im_tau,log_abs_R,bound_rhs,slope_estimate"));
}

#[test]
fn bad_flags_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cartan(&["constants", "--max-prime", "5"], dir.path()).status.code(), Some(2));
    assert_eq!(cartan(&["sieve", "--threads", "0"], dir.path()).status.code(), Some(2));
}
