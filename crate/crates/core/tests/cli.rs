use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asmoduli"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> (i32, Vec<u8>, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        out.stdout,
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn dims_is_byte_identical_across_runs() {
    let cfg = config("cfg_a.json");
    let args = ["dims", "--config", cfg.to_str().unwrap(), "--levels", "0..3"];
    let (c1, o1, _) = run(&args);
    let (c2, o2, _) = run(&args);
    assert_eq!(c1, 0);
    assert_eq!(c2, 0);
    assert_eq!(o1, o2);
    let v: serde_json::Value = serde_json::from_slice(&o1).unwrap();
    let d: Vec<u64> = v["rows"].as_array().unwrap().iter().map(|r| r["d"].as_u64().unwrap()).collect();
    assert_eq!(d, vec![1, 2, 8, 32]);
}

#[test]
fn out_dir_receives_json_and_csv() {
    let dir = std::env::temp_dir().join(format!("asmoduli-cli-{}", std::process::id()));
    let cfg = config("cfg_c.json");
    let (code, stdout, _) = run(&[
        "restrict",
        "--config",
        cfg.to_str().unwrap(),
        "--levels",
        "1..2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let json = std::fs::read(dir.join("restrict.json")).unwrap();
    assert_eq!(json, stdout);
    let csv = std::fs::read_to_string(dir.join("restrict.csv")).unwrap();
    assert!(csv.starts_with("profile,level,d_global,sum_d_local,kernel_dim,surjective\n"));
    assert_eq!(csv.lines().count(), 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gcd_violation_is_reported() {
    let cfg = config("bad_n.json");
    let (code, stdout, stderr) = run(&["dims", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(stderr.contains("invalid config"), "{stderr}");
    assert!(stderr.contains("gcd(n,p)≠1"), "{stderr}");
}

#[test]
fn reduce_routes_agree() {
    let cfg = config("cfg_a.json");
    let input = config("reduce_a.json");
    let (code, stdout, _) = run(&[
        "reduce",
        "--config",
        cfg.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_slice(&stdout).unwrap();
    assert_eq!(v["routes_agree"], true);
}

#[test]
fn groups_commands_pass() {
    for (sub, file) in [
        ("gp-rho", "gp_klein.json"),
        ("gp-rho", "gp_q8.json"),
        ("solve-lift", "lift_f4.json"),
    ] {
        let input = config(file);
        let (code, stdout, stderr) = run(&["groups", sub, "--input", input.to_str().unwrap()]);
        assert_eq!(code, 0, "{sub} {file}: {stderr}");
        let v: serde_json::Value = serde_json::from_slice(&stdout).unwrap();
        assert_eq!(v["ok"], true);
    }
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let (c1, o1, e1) = run(&["verify"]);
    let (c2, o2, _) = run(&["verify"]);
    assert_eq!(c1, 0, "{e1}");
    assert_eq!(c2, 0);
    assert_eq!(o1, o2);
    assert_eq!(e1.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
}
