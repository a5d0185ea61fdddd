use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypercount"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn hypercount")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn count_stabilizer_example() {
    let out = run(&["count", "--z", "i", "--w", "i", "--X", "2"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "X,count,main_term,error");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    assert_eq!(row[1], "4");
}

#[test]
fn count_exact_codiscriminant_threshold() {
    // closest orbit between the d = -7 and d = -3 CM points: m = 5,
    // six matrices once the order-3 stabilizer of rho is included
    let out = run(&[
        "count", "--form0", "1,1,1", "--form", "1,1,2", "--X-exact", "m<=5",
    ]);
    assert!(out.status.success(), "{out:?}");
    let row = stdout(&out).lines().nth(1).unwrap().to_string();
    assert_eq!(row.split(',').nth(1).unwrap(), "6");

    // --mod-pm1 halves the matrix count
    let out = run(&[
        "count", "--form0", "1,1,1", "--form", "1,1,2", "--X-exact", "m<=5", "--mod-pm1",
    ]);
    let row = stdout(&out).lines().nth(1).unwrap().to_string();
    assert_eq!(row.split(',').nth(1).unwrap(), "3");
}

#[test]
fn count_exact_and_float_agree_via_cli() {
    let exact = run(&[
        "count", "--form", "1,1,2", "--form0", "1,1,4", "--X", "100", "--exact",
    ]);
    let float = run(&["count", "--form", "1,1,2", "--form0", "1,1,4", "--X", "100"]);
    assert!(exact.status.success() && float.status.success());
    assert_eq!(
        stdout(&exact).lines().nth(1).unwrap().split(',').nth(1).unwrap(),
        stdout(&float).lines().nth(1).unwrap().split(',').nth(1).unwrap(),
    );
}

#[test]
fn count_below_threshold_is_usage_error() {
    let out = run(&["count", "--z", "i", "--w", "i", "--X", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn missing_arguments_exit_2() {
    let out = run(&["count", "--z", "i", "--X", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["count", "--form", "1,1,2", "--X", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classgroup_csv_and_json() {
    let out = run(&["classgroup", "--d", "-23"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4); // header + h(-23) = 3 forms
    assert_eq!(text.lines().next().unwrap(), "index,a,b,c");
    assert!(text.lines().any(|l| l == "0,1,1,6"));

    let out = run(&["classgroup", "--d", "-23", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["d"], -23);
}

#[test]
fn pairclass_matches_divisor_sum() {
    let out = run(&["pairclass", "--d", "-7", "--dprime", "-15", "--delta", "-11"]);
    assert!(out.status.success());
    // h(-7,-15,-11) = 3 (divisor sum over 16): header plus three rows
    assert_eq!(stdout(&out).lines().count(), 4);
}

#[test]
fn theta_uses_cache_dir() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["theta", "--d", "-15", "--char", "genus:5,-3", "--N", "20"];
    let out = bin()
        .args(args)
        .env("HYPERCOUNT_CACHE", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let first = stdout(&out);
    assert!(first.lines().any(|l| l == "4,3"), "{first}");
    let cached: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(cached.len(), 1);

    // second run must hit the cache and produce identical bytes
    let out2 = bin()
        .args(args)
        .env("HYPERCOUNT_CACHE", dir.path())
        .output()
        .unwrap();
    assert_eq!(first, stdout(&out2));
}

#[test]
fn theta_json_lines_roundtrip() {
    let out = run(&["theta", "--d", "-7", "--N", "10", "--format", "json"]);
    assert!(out.status.success());
    for line in stdout(&out).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["n"].is_number() && v["lambda"].is_number());
    }
}

#[test]
fn kernel_oracle_row() {
    let out = run(&["kernel", "--R", "2", "--t", "i/2,0,1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    let oracle = 4.0 * std::f64::consts::PI * 1f64.sinh().powi(2);
    assert!((v - oracle).abs() < 1e-8);
}

#[test]
fn error_moment_rejects_oversized_threshold() {
    let out = run(&[
        "error-moment", "--d", "-7", "--dprime", "-15", "--X", "1e7",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn error_moment_emits_grid_and_summary() {
    let out = run(&[
        "error-moment", "--d", "-7", "--dprime", "-15", "--X", "100", "--X", "1000",
        "--samples", "8",
    ]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(stdout(&out).lines().count(), 17); // header + 2 * 8 rows
    let notes = String::from_utf8_lossy(&out.stderr);
    assert!(notes.contains("fitted_exponent="), "{notes}");
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = run(&["verify", "--suite", "all", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0), "{a:?}");
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["passed"], true);
    let b = run(&["verify", "--suite", "all", "--seed", "42"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn verify_detects_injected_fault() {
    let out = run(&["verify", "--suite", "theta", "--seed", "42", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn config_defaults_apply_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let out_path = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!("seed = 7\nformat = \"csv\"\noutput = \"{}\"\n", out_path.display()),
    )
    .unwrap();
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "count", "--z", "i", "--w", "i", "--X", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert!(written.starts_with("X,count,main_term,error"));

    // explicit --format json wins over the config file
    let out = bin()
        .args([
            "--config", cfg.to_str().unwrap(), "--format", "json",
            "count", "--z", "i", "--w", "i", "--X", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let written = std::fs::read_to_string(&out_path).unwrap();
    let v: serde_json::Value = serde_json::from_str(written.lines().next().unwrap()).unwrap();
    assert_eq!(v["count"], 4);
}

#[test]
fn csv_reals_use_12_significant_digits() {
    let out = run(&["count", "--z", "i", "--w", "0,2", "--X", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "3");
    assert_eq!(row[2], "18"); // main term 6X, integers verbatim
}

#[test]
fn deterministic_output_for_fixed_seed() {
    let a = run(&["moments", "--d", "-15", "--dprime", "-7", "--x-grid", "1000,10000"]);
    let b = run(&["moments", "--d", "-15", "--dprime", "-7", "--x-grid", "1000,10000"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().next().unwrap(), "x,sum,predicted,drift");
}
