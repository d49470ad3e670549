use std::path::Path;
use std::process::{Command, Output};

use qbmm::bench::CSV_HEADER;

fn qbmm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbmm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("qbmm runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

/// Triple-loop product over the text format, independent of the library.
fn naive_product(a: &str, b: &str) -> String {
    let parse = |t: &str| -> Vec<Vec<bool>> {
        t.lines().skip(1).map(|l| l.chars().map(|c| c == '1').collect()).collect()
    };
    let (a, b) = (parse(a), parse(b));
    let n = a.len();
    let mut out = format!("{n}\n");
    for row in &a {
        for j in 0..n {
            let one = row.iter().zip(&b).any(|(&x, b_row)| x && b_row[j]);
            out.push(if one { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

#[test]
fn identity_times_b_is_b() {
    let dir = tempfile::tempdir().unwrap();
    let b = "4\n1010\n0000\n0111\n1000\n";
    write(dir.path(), "I.txt", "4\n1000\n0100\n0010\n0001\n");
    write(dir.path(), "B.txt", b);
    let out = qbmm(&["multiply", "I.txt", "B.txt", "--mode", "forced"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), b);
    let report = String::from_utf8(out.stderr).unwrap();
    assert!(report.contains("ell=6") && report.contains("verify=pass"), "{report}");
}

#[test]
fn malformed_row_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "A.txt", "3\n100\n01\n001\n");
    write(dir.path(), "B.txt", "3\n100\n010\n001\n");
    let out = qbmm(&["multiply", "A.txt", "B.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3"));
    let missing = qbmm(&["multiply", "nope.txt", "B.txt"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn dumped_pair_matches_brute_force_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = qbmm(
        &["bench", "--families", "target-ell", "--n", "24", "--ell", "80", "--seeds", "5", "--dump-dir", "inst", "--out", "r.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let inst = dir.path().join("inst");
    let a = std::fs::read_to_string(inst.join("target-ell_n24_seed5_A.txt")).unwrap();
    let b = std::fs::read_to_string(inst.join("target-ell_n24_seed5_B.txt")).unwrap();
    let args = ["multiply", "inst/target-ell_n24_seed5_A.txt", "inst/target-ell_n24_seed5_B.txt", "--mode", "forced", "--seed", "9"];
    let first = qbmm(&args, dir.path());
    assert!(first.status.success());
    assert_eq!(String::from_utf8(first.stdout.clone()).unwrap(), naive_product(&a, &b));
    let second = qbmm(&args, dir.path());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stderr, second.stderr);
}

#[test]
fn gc_lists_collisions() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "C.txt", "3\n010\n000\n000\n");
    write(dir.path(), "fa.txt", "110\n");
    write(dir.path(), "fb.txt", "011\n");
    let out = qbmm(&["gc", "C.txt", "fa.txt", "fb.txt", "--mode", "forced"], dir.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1 3\n2 2\n2 3\n");
    write(dir.path(), "short.txt", "11\n");
    let bad = qbmm(&["gc", "C.txt", "short.txt", "fb.txt"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bench_single_cell_and_zero_family() {
    let dir = tempfile::tempdir().unwrap();
    let out = qbmm(&["bench", "--n", "8", "--ell", "8", "--seeds", "0", "--out", "one.csv"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("one.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER);

    let out = qbmm(
        &["bench", "--n", "8,16,32", "--ell", "0", "--seeds", "0..3", "--mode", "faithful", "--out", "zero.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let rows = qbmm::bench::read_csv_file(&dir.path().join("zero.csv")).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.ell_actual == 0 && r.within_bound && r.correct));
}

#[test]
fn bench_rerun_reproduces_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["bench", "--families", "random,threshold", "--n", "8,16", "--ell", "1,n^1.5", "--seeds", "0..3", "--mode", "faithful", "--jobs", "2", "--out", out]
    };
    assert!(qbmm(&args("x.csv"), dir.path()).status.success());
    assert!(qbmm(&args("y.csv"), dir.path()).status.success());
    let x = qbmm::bench::read_csv_file(&dir.path().join("x.csv")).unwrap();
    let y = qbmm::bench::read_csv_file(&dir.path().join("y.csv")).unwrap();
    assert_eq!(x.len(), 24);
    let key = |rows: &[qbmm::bench::BenchRow]| -> Vec<_> {
        rows.iter().map(|r| (r.n, r.family.clone(), r.seed, r.ell_actual, r.queries_a, r.queries_b)).collect()
    };
    assert_eq!(key(&x), key(&y));
}

fn synthetic_csv(q: impl Fn(usize, usize) -> u64) -> String {
    let mut csv = format!("{CSV_HEADER}\n");
    for n in [8usize, 16, 32, 64] {
        for ell in [0usize, 8, 63, 255] {
            let q = q(n, ell);
            csv.push_str(&format!("{n},random,0,forced,{ell},1,{q},0,{q},1e12,true,true,0,0\n"));
        }
    }
    csv
}

#[test]
fn fit_on_synthetic_power_law() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "exact.csv",
        &synthetic_csv(|n, ell| (n as f64 * ((ell + 1) as f64).sqrt()).round() as u64),
    );
    let out = qbmm(&["fit", "exact.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("slope: 1.0000") && text.contains("r_squared: 1.0000"), "{text}");

    write(dir.path(), "flat.csv", &synthetic_csv(|_, _| 1000));
    let out = qbmm(&["fit", "flat.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));

    let out = qbmm(&["fit", "flat.csv", "--calibrate"], dir.path());
    assert!(String::from_utf8(out.stdout).unwrap().contains("k_log"));
}

#[test]
fn validate_dispatch() {
    let dir = tempfile::tempdir().unwrap();
    let out = qbmm(&["validate", "--suite", "gc", "--seeds", "40"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS gc.forced_exact") && text.ends_with("ALL PASS\n"), "{text}");
    let out = qbmm(&["validate", "--suite", "primitives", "--seeds", "20"], dir.path());
    assert!(String::from_utf8(out.stdout).unwrap().contains("probability_grid_3sigma"));
    let out = qbmm(&["validate", "--suite", "bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
