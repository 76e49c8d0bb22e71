use std::path::PathBuf;
use std::process::{Command, Output};

fn chansim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chansim")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chansim-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn sweep_writes_csv_to_stdout() {
    let out = chansim(&["sweep", "--scenario", "InH", "--distances", "1,10", "--condition", "los"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("scenario,condition,frequency_ghz"));
    assert!(lines[1].starts_with("InH,LOS,28.0,3.0,1.0,"));
}

#[test]
fn config_errors_exit_with_2() {
    for args in [
        vec!["drops", "--frequency", "151"],
        vec!["drops", "--drops", "0"],
        vec!["sweep", "--scenario", "Moon"],
        vec!["sweep", "--distances", "0.5"],
        vec!["drops", "--config", "/nonexistent.toml"],
        vec!["drops", "--not-a-flag"],
        vec!["validate", "--significance", "2"],
    ] {
        let out = chansim(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn runtime_errors_exit_with_3() {
    let out = chansim(&["drops", "--drops", "1", "--output", "/nonexistent-dir/results.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn flags_override_config_file() {
    let dir = scratch("override");
    let config = dir.join("run.toml");
    std::fs::write(&config, "scenario = \"UMa\"\ndrops = 3\nseed = 5\ncondition = \"nlos\"\n").unwrap();
    let out = chansim(&["drops", "--config", config.to_str().unwrap(), "--drops", "2", "--condition", "los"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",UMa,LOS,")));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn dump_lists_subpaths() {
    let out = chansim(&["dump", "--drops", "2", "--links", "2", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("drop,link,cluster,subpath,merged_count,delay_ns,power_dbm"));
    assert!(text.lines().count() > 4);
}

#[test]
fn validate_reports_every_step() {
    let dir = scratch("validate");
    let out_path = dir.join("checks.csv");
    let out = chansim(&[
        "validate",
        "--scenarios",
        "RMa",
        "--frequencies",
        "28",
        "--draws",
        "2000",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("with fewer than the recommended draws"));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true") || l.ends_with(",false")));
    std::fs::remove_dir_all(dir).unwrap();
}
