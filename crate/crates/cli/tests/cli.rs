use std::path::Path;
use std::process::{Command, Output};

fn nsclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsclab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn spectrum_writes_one_row_per_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s.toml", "seed = 1\n[study]\nname = \"spectrum\"\ncount = 200\n");
    let out = tmp.path().join("out");
    let o = nsclab(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("spectrum.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "xi_abs");
    assert_eq!(rdr.records().count(), 200);
    for f in ["report.json", "manifest.json", "spectrum.dat"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn manifest_hashes_match_files() {
    use sha2::{Digest, Sha256};
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "k.toml", "seed = 2\n[study]\nname = \"sk-check\"\ndirections = 5\n");
    let out = tmp.path().join("out");
    assert!(nsclab(&["sk-check", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 2);
    let files = m["files"].as_object().unwrap();
    assert!(!files.is_empty());
    for (name, hash) in files {
        let bytes = std::fs::read(out.join(name)).unwrap();
        assert_eq!(format!("{:x}", Sha256::digest(&bytes)), hash.as_str().unwrap());
    }
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "k.toml", "seed = 2\n");
    let o = nsclab(&["sk-check", "--config", &cfg, "--seed", "99", "--dry-run"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("seed = 99"));
}

#[test]
fn dry_run_prints_resolved_defaults_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "l.toml", "seed = 3\n[model]\nd = 2\neps = 0.0625\n");
    let out = tmp.path().join("out");
    let o = nsclab(&["lyapunov", "--config", &cfg, "--out", out.to_str().unwrap(), "--dry-run"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("low_bands"), "{text}");
    assert!(text.contains("high_bands"), "{text}");
    assert!(!out.exists());
}

#[test]
fn missing_seed_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "n.toml", "[model]\nd = 3\n");
    let o = nsclab(&["spectrum", "--config", &cfg, "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn threshold_inversion_exits_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "t.toml", "seed = 1\n[model]\neps = 0.25\n[thresholds]\nbig_k = 8\nk = 1\n");
    let o = nsclab(&["spectrum", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("threshold assumption"));
}

#[test]
fn unknown_keys_and_mismatched_study_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = write(tmp.path(), "u.toml", "seed = 1\n[model]\nepsilon = 0.1\n");
    assert_eq!(nsclab(&["spectrum", "--config", &typo, "--dry-run"]).status.code(), Some(2));
    let other = write(tmp.path(), "m.toml", "seed = 1\n[study]\nname = \"bernstein\"\n");
    assert_eq!(nsclab(&["spectrum", "--config", &other, "--dry-run"]).status.code(), Some(2));
}

#[test]
fn unreadable_config_is_a_validation_error() {
    let o = nsclab(&["spectrum", "--config", "/nonexistent/nsclab.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evolve_writes_snapshots_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "e.toml",
        "seed = 4\n[model]\nd = 2\neps = 0.5\n[thresholds]\nbig_k = 2\n[grid]\nn = 16\nl = 6.283185307179586\n\
         [study]\nname = \"evolve\"\nmode = \"nonlinear\"\nt_final = 0.05\n[output]\nstride = 5\n",
    );
    let out = tmp.path().join("out");
    let o = nsclab(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let snaps: Vec<_> = std::fs::read_dir(out.join("snapshots")).unwrap().collect();
    assert!(snaps.len() >= 2);
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("trajectory.json")).unwrap()).unwrap();
    assert!(side.is_object());
}
