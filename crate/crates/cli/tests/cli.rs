use std::process::Command;

use serde_json::Value;

struct Run {
    code: u8,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("splitlab").chain(args.iter().copied());
    let code = splitlab_cli::run(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn header(csv: &str) -> Vec<String> {
    csv.lines().find(|l| !l.starts_with('#')).unwrap().split(',').map(str::to_owned).collect()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let idx = header(csv).iter().position(|c| c == name).unwrap();
    data_rows(csv).into_iter().map(|mut r| r.swap_remove(idx)).collect()
}

fn is_36_digit_sci(cell: &str) -> bool {
    let body = cell.strip_prefix('-').unwrap_or(cell);
    let Some((mant, exp)) = body.split_once('e') else { return false };
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    mant.as_bytes().get(1) == Some(&b'.')
        && digits.len() == 36
        && digits.chars().all(|c| c.is_ascii_digit())
        && exp.trim_start_matches('-').parse::<u32>().is_ok()
}

#[test]
fn verify_defaults_pass() {
    let r = run(&["verify"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(column(&r.stdout, "passed").iter().all(|p| p == "1"));
}

#[test]
fn verify_cat_map_passes() {
    let r = run(&["--mu", "0", "verify"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("cat-map eigenvalue oracle,1,"));
}

#[test]
fn verify_names_failing_invariant() {
    let r = run(&["--orbit-len", "10", "verify"]);
    assert_eq!(r.code, 5);
    assert!(r.stderr.contains("rate plateau"), "{}", r.stderr);
    assert!(r.stdout.contains("rate plateau L/2 against L,0,"));
}

#[test]
fn parameter_rejection_happens_before_work() {
    let r = run(&["--mu", "1.2", "verify"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("mu"));
    assert_eq!(run(&["--alpha", "3.2", "rate"]).code, 2);
    assert_eq!(run(&["--prec-bits", "64", "rate"]).code, 2);
    assert_eq!(run(&["--orbit-len", "0", "rate"]).code, 2);
    assert_eq!(run(&["--threads", "0", "rate"]).code, 2);
    assert_eq!(run(&["--mu", "abc", "rate"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
}

#[test]
fn cat_grid_is_constant() {
    let r = run(&["--mu", "0", "grid", "--n1", "2", "--n2", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(header(&r.stdout), ["theta1", "theta2", "lambda_u"]);
    let rates = column(&r.stdout, "lambda_u");
    assert_eq!(rates.len(), 4);
    assert!(rates.iter().all(|v| v.starts_with("2.6180339887498948482045868343656381")));
    assert!(data_rows(&r.stdout).iter().flatten().all(|c| is_36_digit_sci(c)));
}

#[test]
fn csv_layout_and_provenance() {
    let r = run(&["--preset", "desk", "grid", "--n1", "1", "--n2", "2"]);
    assert!(!r.stdout.contains('\r'));
    assert!(r.stdout.ends_with('\n'));
    let comments: Vec<&str> = r.stdout.lines().take_while(|l| l.starts_with('#')).collect();
    for key in ["schema_version: 1", "command: grid", "preset: desk", "mu: 0.7", "alpha: 0.3", "prec_bits: 113", "orbit_len: 200", "n1: 1", "n2: 2"] {
        assert!(comments.iter().any(|c| c.ends_with(key)), "missing {key}");
    }
    assert!(!r.stdout.contains("threads"));
}

#[test]
fn empty_grid_is_rejected() {
    assert_eq!(run(&["grid", "--n1", "0", "--n2", "3"]).code, 2);
}

#[test]
fn diff_orders() {
    assert_eq!(run(&["diff", "--order", "3", "--n1", "1", "--n2", "1"]).code, 2);
    let r = run(&["--mu", "0", "diff", "--order", "1", "--n1", "2", "--n2", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for v in column(&r.stdout, "value") {
        assert!(v.parse::<f64>().unwrap().abs() < 1e-28, "{v}");
    }
    let r = run(&["--mu", "0", "diff", "--order", "2", "--h", "1e-4", "--n1", "2", "--n2", "2"]);
    for v in column(&r.stdout, "value") {
        assert!(v.parse::<f64>().unwrap().abs() < 1e-20, "{v}");
    }
}

#[test]
fn precision_floor_names_minimum_offset() {
    let r = run(&["diff", "--order", "2", "--h", "1e-12", "--n1", "1", "--n2", "1"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("h >= 1.03e-11"), "{}", r.stderr);
    let r = run(&["--prec-bits", "128", "diff", "--order", "2", "--h", "1e-12", "--n1", "1", "--n2", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(run(&["diff", "--order", "1", "--h", "1e-23", "--n1", "1", "--n2", "1"]).code, 3);
}

#[test]
fn hscan_cat_map_fits_are_degenerate() {
    let r = run(&["--mu", "0", "--orbit-len", "40", "hscan", "--n", "2", "--h-max", "1e-2", "--h-min", "1e-4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let slopes = column(&r.stdout, "fitted_slope");
    assert_eq!(slopes.len(), (4 + 5) * 3);
    assert!(slopes.iter().all(|s| s == "nan"));
}

#[test]
fn hscan_layout() {
    let r = run(&["--orbit-len", "60", "hscan", "--n", "1", "--h-max", "1e-2", "--h-min", "1e-6"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(
        header(&r.stdout),
        [
            "theta1", "theta2", "h", "d1", "d1_minus_ref_abs", "d2", "d2_over_abs_ln_h", "fitted_slope", "d1_ref",
            "fit_points", "highlight"
        ]
    );
    let rows = data_rows(&r.stdout);
    assert_eq!(rows.len(), 6 * 5);
    let flagged = rows.iter().filter(|r| r[10] == "1").count();
    assert_eq!(flagged, 5 * 5);
    // descending h within each point
    for chunk in rows.chunks(5) {
        let hs: Vec<f64> = chunk.iter().map(|r| r[2].parse().unwrap()).collect();
        assert!(hs.windows(2).all(|w| w[0] > w[1]), "{hs:?}");
        assert!(chunk.iter().all(|r| r[0] == chunk[0][0] && r[7] == chunk[0][7]));
    }
    assert!(rows[5][0].starts_with("1.0000000000"));
}

#[test]
fn hscan_reference_must_be_below_range() {
    let r = run(&["hscan", "--n", "1", "--h-min", "1e-10", "--h-ref", "1e-10"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--h-ref"));
}

#[test]
fn manifold_rows() {
    let r = run(&["--mu", "0", "manifold", "--which", "unstable", "--max-points", "50", "--spacing", "1e-2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(header(&r.stdout), ["which", "param", "theta1", "theta2", "break_flag"]);
    let rows = data_rows(&r.stdout);
    assert_eq!(rows.len(), 51);
    assert_eq!(rows[0][0], "fixed");
    assert!(rows[1..].iter().all(|r| r[0] == "unstable"));
    assert_eq!(rows[1][4], "1");
    let params: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(params.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn manifold_validation() {
    assert_eq!(run(&["manifold", "--max-points", "1"]).code, 2);
    assert_eq!(run(&["manifold", "--seed-eps", "1e-3"]).code, 2);
    let r = run(&["manifold", "--spacing", "1e-40", "--max-points", "10"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("parameter interval"), "{}", r.stderr);
}

#[test]
fn json_output() {
    let r = run(&["--format", "json", "--mu", "0", "grid", "--n1", "1", "--n2", "1"]);
    assert_eq!(r.code, 0);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "grid");
    assert_eq!(v["provenance"]["mu"], "0");
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
    assert!(is_36_digit_sci(v["rows"][0][2].as_str().unwrap()));
}

#[test]
fn rate_at_point_and_fixed_point() {
    let r = run(&["rate"]);
    assert!(column(&r.stdout, "lambda_u")[0].starts_with("7.409091638678190015018283569940"));
    let r = run(&["rate", "--theta1", "0.5", "--theta2", "0.5"]);
    assert_eq!(r.code, 0);
    assert_eq!(column(&r.stdout, "theta1")[0], "5.00000000000000000000000000000000000e-1");
    assert_eq!(run(&["rate", "--theta1", "0.5"]).code, 2);
    assert_eq!(run(&["rate", "--theta1", "1.5", "--theta2", "0"]).code, 2);
}

#[test]
fn output_file_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let r = run(&["--mu", "0", "--out", path.to_str().unwrap(), "grid", "--n1", "1", "--n2", "1"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("lambda_u"));
    let bad = dir.path().join("missing").join("g.csv");
    let r = run(&["--out", bad.to_str().unwrap(), "grid", "--n1", "1", "--n2", "1"]);
    assert_eq!(r.code, 4);
}

#[test]
fn thread_count_does_not_change_bytes() {
    for args in [
        &["grid", "--n1", "3", "--n2", "4"][..],
        &["--orbit-len", "80", "hscan", "--n", "2", "--h-min", "1e-5"][..],
        &["manifold", "--max-points", "300", "--spacing", "1e-2"][..],
    ] {
        let one: Vec<&str> = ["--threads", "1"].iter().chain(args).copied().collect();
        let three: Vec<&str> = ["--threads", "3"].iter().chain(args).copied().collect();
        assert_eq!(run(&one).stdout, run(&three).stdout, "{args:?}");
    }
}

#[test]
fn binary_exit_statuses() {
    let bin = env!("CARGO_BIN_EXE_splitlab");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["--mu", "0", "grid", "--n1", "1", "--n2", "1"]), Some(0));
    assert_eq!(status(&["--mu", "1.2", "verify"]), Some(2));
    assert_eq!(status(&["diff", "--order", "2", "--h", "1e-12", "--n1", "1", "--n2", "1"]), Some(3));
    assert_eq!(status(&["--out", "/nonexistent-dir/x.csv", "--mu", "0", "grid", "--n1", "1", "--n2", "1"]), Some(4));
    assert_eq!(status(&["--orbit-len", "10", "verify"]), Some(5));
    assert_eq!(status(&["--help"]), Some(0));
}
