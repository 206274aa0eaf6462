use std::path::Path;
use std::process::Command;

fn lab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_spde-lab")).args(args).output().expect("spawn spde-lab")
}

fn tmp(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("spde_lab_cli_{}_{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn rerun_from_manifest_config_is_bit_identical() {
    let first = tmp("first");
    let cfg = first.with_extension("toml");
    std::fs::write(&cfg, "seed = 11\n[constants]\neps = [0.5]\n").unwrap();
    let o = lab(&["constants", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let second = tmp("second");
    let written = first.join("config.toml");
    let o = lab(&["constants", "--config", written.to_str().unwrap(), "--out", second.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success());
    let read = |d: &Path| std::fs::read(d.join("constants.csv")).unwrap();
    assert_eq!(read(&first), read(&second));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(first.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert!(manifest["rerun"].as_str().unwrap().contains("config.toml"));
}

#[test]
fn assert_flag_controls_exit_code() {
    // the default spread threshold fails on a radius-8 lattice sum; a loose one passes
    let out = tmp("assert");
    let strict = out.with_extension("strict.toml");
    let loose = out.with_extension("loose.toml");
    std::fs::write(&strict, "[sum_bounds]\nradii = [8]\nmax_spread = 1.0\n").unwrap();
    std::fs::write(&loose, "[sum_bounds]\nradii = [8]\nmax_spread = 100.0\n").unwrap();
    let dir = out.to_str().unwrap();
    assert_eq!(lab(&["sum-bounds", "--config", strict.to_str().unwrap(), "--out", dir, "--assert"]).status.code(), Some(1));
    assert_eq!(lab(&["sum-bounds", "--config", strict.to_str().unwrap(), "--out", dir]).status.code(), Some(0));
    let o = lab(&["sum-bounds", "--config", loose.to_str().unwrap(), "--out", dir, "--assert"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn bad_config_is_an_error() {
    let cfg = tmp("bad").with_extension("toml");
    std::fs::write(&cfg, "[scheme]\nnot_a_key = 1\n").unwrap();
    assert_eq!(lab(&["constants", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
